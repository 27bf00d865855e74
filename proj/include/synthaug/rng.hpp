#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace synthaug {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Stable 64-bit id for a named pipeline stage (FNV-1a).
std::uint64_t stage_id(std::string_view name) noexcept;

// seed = hash(master, path...). Each distinct path yields an independent
// stream, so reseeding one stage never perturbs another.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

}  // namespace synthaug
