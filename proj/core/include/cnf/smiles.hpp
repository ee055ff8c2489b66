#pragma once

#include <string>
#include <string_view>

#include "cnf/mol_graph.hpp"

namespace cnf {

/// Parses a single-fragment SMILES string. Implicit hydrogens are not
/// materialised; bracket atoms keep their isotope, H count, charge and
/// chirality mark. Throws Error with a SMILES-specific code on bad input.
MolGraph parse_smiles(std::string_view text);

/// Linearises `graph` by a depth-first walk that follows `order`. Non-final
/// children become parenthesised branches; back edges become ring-closure
/// digits, allocated smallest-first and reusable once closed.
std::string write_smiles(const MolGraph& graph, const TraversalOrder& order);

/// True if `symbol` names an element known to the bracket-atom parser.
bool is_known_element(std::string_view symbol);

}  // namespace cnf
