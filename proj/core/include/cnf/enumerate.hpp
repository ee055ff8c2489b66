#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cnf/mol_graph.hpp"
#include "cnf/random.hpp"

namespace cnf {

struct EnumerationPolicy {
  std::size_t count = 1;
  bool dedup = false;
  bool include_canonical = false;
  std::uint64_t seed = 0;
};

struct EnumerationStats {
  std::size_t draws = 0;
  std::size_t duplicates_accepted = 0;  // slots filled by a repeat after the retry cap
};

struct Enumeration {
  std::vector<std::string> smiles;
  EnumerationStats stats;
};

/// Draws per slot before a duplicate is accepted when dedup is on.
inline constexpr std::size_t kDedupRetries = 32;

/// Uniform start atom plus an independent uniform shuffle of every
/// neighbour list.
TraversalOrder random_order(const MolGraph& graph, Rng& rng);

std::string random_smiles(const MolGraph& graph, Rng& rng);

/// Exactly policy.count strings. With include_canonical the canonical SMILES
/// comes first. Throws Error(InvalidConfig) if count is zero.
Enumeration enumerate_smiles(const MolGraph& graph, const EnumerationPolicy& policy);

}  // namespace cnf
