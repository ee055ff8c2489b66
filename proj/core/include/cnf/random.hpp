#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace cnf {

/// Seeded generator used everywhere randomness appears. std::mt19937_64 is
/// fully specified by the standard; the helpers below avoid the
/// implementation-defined std distributions so streams match across
/// standard libraries.
using Rng = std::mt19937_64;

enum class Role : std::uint8_t { Train, Test };

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Sub-seed for one record: hash(experiment seed, record id, role).
std::uint64_t derive_seed(std::uint64_t base, std::string_view record_id, Role role) noexcept;

/// Uniform integer in [0, n) by rejection sampling. n must be > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Uniform double in [0, 1) with 53 random bits.
double uniform_unit(Rng& rng);

template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    std::swap(values[i - 1], values[j]);
  }
}

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

}  // namespace cnf
