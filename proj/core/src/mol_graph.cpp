#include "cnf/mol_graph.hpp"

#include <algorithm>
#include <string>

#include "cnf/error.hpp"

namespace cnf {

MolGraph::MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)), adjacency_(atoms_.size()) {
  if (atoms_.empty()) throw Error(ErrorCode::InvalidGraph, "graph has no atoms");
  for (std::size_t i = 0; i < bonds_.size(); ++i) {
    const Bond& bond = bonds_[i];
    if (bond.a >= atoms_.size() || bond.b >= atoms_.size())
      throw Error(ErrorCode::InvalidGraph, "bond " + std::to_string(i) + " references a missing atom");
    if (bond.a == bond.b)
      throw Error(ErrorCode::InvalidGraph, "self-loop on atom " + std::to_string(bond.a));
    for (const Neighbor& n : adjacency_[bond.a]) {
      if (n.atom == bond.b)
        throw Error(ErrorCode::InvalidGraph, "duplicate bond between atoms " + std::to_string(bond.a) +
                                                 " and " + std::to_string(bond.b));
    }
    adjacency_[bond.a].push_back({bond.b, i});
    adjacency_[bond.b].push_back({bond.a, i});
  }

  std::vector<bool> seen(atoms_.size(), false);
  std::vector<AtomIndex> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const AtomIndex u = stack.back();
    stack.pop_back();
    for (const Neighbor& n : adjacency_[u]) {
      if (!seen[n.atom]) {
        seen[n.atom] = true;
        ++reached;
        stack.push_back(n.atom);
      }
    }
  }
  if (reached != atoms_.size()) throw Error(ErrorCode::InvalidGraph, "graph is not connected");
}

std::optional<std::size_t> MolGraph::bond_between(AtomIndex a, AtomIndex b) const {
  for (const Neighbor& n : adjacency_.at(a)) {
    if (n.atom == b) return n.bond;
  }
  return std::nullopt;
}

TraversalOrder default_order(const MolGraph& graph) {
  TraversalOrder order;
  order.start = 0;
  order.neighbor_perm.resize(graph.atom_count());
  for (AtomIndex i = 0; i < graph.atom_count(); ++i) {
    for (const Neighbor& n : graph.neighbors(i)) order.neighbor_perm[i].push_back(n.atom);
  }
  return order;
}

void validate_order(const MolGraph& graph, const TraversalOrder& order) {
  if (order.start >= graph.atom_count())
    throw Error(ErrorCode::InvalidOrder, "start atom out of range");
  if (order.neighbor_perm.size() != graph.atom_count())
    throw Error(ErrorCode::InvalidOrder, "neighbor_perm has wrong atom count");
  std::vector<AtomIndex> expected;
  std::vector<AtomIndex> given;
  for (AtomIndex i = 0; i < graph.atom_count(); ++i) {
    expected.clear();
    for (const Neighbor& n : graph.neighbors(i)) expected.push_back(n.atom);
    given = order.neighbor_perm[i];
    std::sort(expected.begin(), expected.end());
    std::sort(given.begin(), given.end());
    if (expected != given)
      throw Error(ErrorCode::InvalidOrder,
                  "neighbor_perm[" + std::to_string(i) + "] is not a permutation of the adjacency list");
  }
}

MolGraph relabel(const MolGraph& graph, const std::vector<AtomIndex>& perm) {
  if (perm.size() != graph.atom_count())
    throw Error(ErrorCode::InvalidOrder, "relabelling permutation has wrong size");
  std::vector<Atom> atoms(graph.atom_count());
  std::vector<bool> used(graph.atom_count(), false);
  for (AtomIndex i = 0; i < graph.atom_count(); ++i) {
    if (perm[i] >= atoms.size() || used[perm[i]])
      throw Error(ErrorCode::InvalidOrder, "relabelling is not a permutation");
    used[perm[i]] = true;
    atoms[perm[i]] = graph.atom(i);
  }
  std::vector<Bond> bonds = graph.bonds();
  for (Bond& bond : bonds) {
    bond.a = perm[bond.a];
    bond.b = perm[bond.b];
  }
  return MolGraph(std::move(atoms), std::move(bonds));
}

}  // namespace cnf
