// Umbrella header: pulls in every public module of the library.
#pragma once

#include "dbf/algebra.hpp"
#include "dbf/asyncsim.hpp"
#include "dbf/bgplite.hpp"
#include "dbf/config.hpp"
#include "dbf/convergence.hpp"
#include "dbf/error.hpp"
#include "dbf/experiments.hpp"
#include "dbf/pathalg.hpp"
#include "dbf/protocol.hpp"
#include "dbf/table1.hpp"
#include "dbf/table_algebra.hpp"
#include "dbf/topology.hpp"
