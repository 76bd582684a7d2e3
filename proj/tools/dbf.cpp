// Command-line driver over the dbf library.
//
// Reports go to stdout as JSON; timing goes to stderr so stdout stays
// byte-identical across reruns with the same seed.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dbf/config.hpp"
#include "dbf/experiments.hpp"

namespace {

enum class command { check_algebra, check_path_algebra, check_free, run, pseudocycles, amco_check, unique, count };

int execute(command cmd, const std::string& config_file, const dbf::CommandOptions& opts) {
  const dbf::InstanceConfig cfg = dbf::load_config(config_file);
  return dbf::with_instance(cfg, [&](const auto& inst) {
    dbf::CommandResult r;
    switch (cmd) {
      case command::check_algebra: r = dbf::cmd_check_algebra(inst, opts); break;
      case command::check_path_algebra: {
        if constexpr (dbf::PathAlgebra<std::remove_cvref_t<decltype(inst.algebra)>>) {
          r = dbf::cmd_check_path_algebra(inst, opts);
        } else {
          throw dbf::error(dbf::errc::no_path_function, "algebra '" + inst.kind + "' has no path function");
        }
        break;
      }
      case command::check_free: r = dbf::cmd_check_free(inst, opts); break;
      case command::run: {
        if (opts.out_dir) {
          std::ofstream trace(dbf::detail::out_path(opts, "trace.jsonl"));
          r = dbf::cmd_run(inst, opts, trace);
        } else {
          r = dbf::cmd_run(inst, opts, std::cout);
        }
        break;
      }
      case command::pseudocycles: r = dbf::cmd_pseudocycles(inst, opts); break;
      case command::amco_check: r = dbf::cmd_amco_check(inst, opts); break;
      case command::unique: r = dbf::cmd_experiment_unique_fixed_point(inst, opts); break;
      case command::count: r = dbf::cmd_experiment_count_to_convergence(inst, opts); break;
    }
    std::cout << r.report.dump(2) << "\n";
    return r.exit_code;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed Bellman-Ford convergence toolkit"};
  app.require_subcommand(1);

  std::string config_file;
  dbf::CommandOptions opts;
  std::size_t horizon = 0;
  std::string out_dir;
  std::string participants;
  std::string schedule_file;
  std::optional<command> chosen;

  auto add_common = [&](CLI::App* sub, command cmd) {
    sub->add_option("--config", config_file, "instance configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "seed for every randomized step");
    sub->add_option("--out", out_dir, "directory for report and trace artifacts");
    sub->callback([&chosen, cmd] { chosen = cmd; });
  };
  auto add_check_mode = [&](CLI::App* sub) {
    sub->add_flag("--sampled", opts.sampled, "sample cases even when the carrier is enumerable");
    sub->add_option("--cases", opts.cases, "number of sampled cases");
  };
  auto add_epoch = [&](CLI::App* sub) {
    sub->add_option("--epoch", opts.epoch, "epoch index");
    sub->add_option("--participants", participants,
                    "comma-separated participant routers, or 'none' (default: the epoch's own set)");
  };
  auto add_horizon = [&](CLI::App* sub) {
    sub->add_option("--horizon", horizon, "last simulated time step (default: schedule.horizon)");
  };

  auto* check_algebra = app.add_subcommand("check-algebra", "check R1-R7, P1-P3 and the monotonicity properties");
  add_common(check_algebra, command::check_algebra);
  add_check_mode(check_algebra);
  check_algebra->add_option("--require", opts.require, "additional property that must hold, e.g. strictly_increasing");

  auto* check_path = app.add_subcommand("check-path-algebra", "check P1-P3");
  add_common(check_path, command::check_path_algebra);
  add_check_mode(check_path);

  auto* check_free = app.add_subcommand("check-free", "decide freeness of an epoch's topology");
  add_common(check_free, command::check_free);
  add_epoch(check_free);

  auto* run = app.add_subcommand("run", "simulate the protocol and emit a JSON Lines state trace");
  add_common(run, command::run);
  add_horizon(run);
  add_epoch(run);
  run->add_flag("--sync", opts.sync, "use the synchronous iteration");
  run->add_option("--schedule", schedule_file, "replay a schedule file instead of generating one")
      ->check(CLI::ExistingFile);

  auto* pseudo = app.add_subcommand("pseudocycles", "decompose a schedule into pseudocycles");
  add_common(pseudo, command::pseudocycles);
  add_horizon(pseudo);
  pseudo->add_option("--schedule", schedule_file, "read the schedule from a file")->check(CLI::ExistingFile);

  auto* amco = app.add_subcommand("amco-check", "check D1-D5 for an epoch");
  add_common(amco, command::amco_check);
  add_check_mode(amco);
  add_epoch(amco);

  auto* experiment = app.add_subcommand("experiment", "run a seeded experiment");
  experiment->require_subcommand(1);
  auto* unique = experiment->add_subcommand("unique-fixed-point", "check that all settled runs agree");
  add_common(unique, command::unique);
  add_horizon(unique);
  unique->add_option("--schedules", opts.schedules, "number of seeded schedules");
  auto* count = experiment->add_subcommand("count-to-convergence", "measure rounds, ticks and pseudocycles to settle");
  add_common(count, command::count);
  add_horizon(count);
  count->add_option("--schedules", opts.schedules, "number of seeded schedules");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dbf::exit_config;
  }

  for (auto* sub : {run, pseudo, unique, count}) {
    if (sub->parsed() && sub->count("--horizon")) opts.horizon = horizon;
  }
  if (!out_dir.empty()) opts.out_dir = out_dir;
  for (auto* sub : {check_free, run, amco}) {
    if (!sub->parsed() || !sub->count("--participants")) continue;
    std::vector<dbf::NodeId> members;
    if (participants != "none" && !participants.empty()) {
      for (const auto& part : CLI::detail::split(participants, ',')) {
        const auto v = dbf::detail::parse_u64(part);
        if (!v) {
          std::cerr << "error: --participants: '" << part << "' is not a router\n";
          return dbf::exit_config;
        }
        members.push_back(static_cast<dbf::NodeId>(*v));
      }
    }
    opts.participants = members;
  }
  if (!schedule_file.empty()) opts.schedule_file = schedule_file;

  const auto begin = std::chrono::steady_clock::now();
  int code = 0;
  try {
    code = execute(*chosen, config_file, opts);
  } catch (const dbf::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = dbf::exit_config;
  }
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - begin);
  std::cerr << "elapsed_ms " << ms.count() << "\n";
  return code;
}
