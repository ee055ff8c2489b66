#pragma once

#include <cstddef>

#include "cnf/mol_graph.hpp"

namespace cnf {

inline constexpr std::size_t kDefaultIsomorphismCap = 128;

/// Label-preserving isomorphism test (element, aromaticity, charge, bond
/// order) by plain backtracking. This is a test oracle; it deliberately
/// shares nothing with the canonicaliser. Throws
/// Error(SizeLimitExceeded) when either graph has more than `max_atoms`.
bool isomorphic(const MolGraph& a, const MolGraph& b, std::size_t max_atoms = kDefaultIsomorphismCap);

}  // namespace cnf
