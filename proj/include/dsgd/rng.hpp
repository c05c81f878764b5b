#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dsgd {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a key tuple into one 64-bit seed; distinct tuples give independent
/// streams (e.g. {run_seed, agent, purpose}).
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (auto k : keys) h = splitmix64(h ^ splitmix64(k));
  return h;
}

inline Engine make_engine(std::initializer_list<std::uint64_t> keys) {
  return Engine(derive_seed(keys));
}

/// Stream tags so the same run seed never feeds two purposes.
enum class Stream : std::uint64_t { data = 1, split = 2, partition = 3, init = 4, batches = 5 };

constexpr std::uint64_t tag(Stream s) noexcept { return static_cast<std::uint64_t>(s); }

}  // namespace dsgd
