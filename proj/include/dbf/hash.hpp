#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace dbf {

inline void hash_combine(std::size_t& seed, std::size_t value) noexcept {
  seed ^= value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

template <class T>
void hash_append(std::size_t& seed, const T& value) {
  hash_combine(seed, std::hash<T>{}(value));
}

}  // namespace dbf
