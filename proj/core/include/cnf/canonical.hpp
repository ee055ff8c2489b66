#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cnf/mol_graph.hpp"

namespace cnf {

/// A total order on atoms: rank is a permutation of 0..n-1.
struct CanonicalRanks {
  std::vector<std::size_t> rank;
};

/// Morgan-style ranking. Atoms start from (element, aromaticity, charge,
/// degree and the remaining bracket fields) and are repeatedly refined by the
/// sorted multiset of (bond order, neighbour class) until the partition is
/// stable. Remaining ties are broken by individualising a member of the
/// lowest tied class and refining again; every member of that class is tried
/// and the ranking giving the smallest SMILES wins, so the result does not
/// depend on input atom order. Interchangeable terminal twins are tried once.
CanonicalRanks canonical_ranks(const MolGraph& graph);

/// Traversal starting at the rank-0 atom with neighbours visited in rank order.
TraversalOrder canonical_order(const MolGraph& graph, const CanonicalRanks& ranks);

std::string canonical_smiles(const MolGraph& graph);

/// Coarsest stable refinement of the initial atom invariants, before any tie
/// breaking. Equal values mean "not distinguished by refinement".
std::vector<std::size_t> refined_classes(const MolGraph& graph);

}  // namespace cnf
