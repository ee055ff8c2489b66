#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cnf {

using AtomIndex = std::size_t;

enum class BondOrder : std::uint8_t { Single, Double, Triple, Aromatic };

/// The / and \ marks, stored relative to the bond's a -> b direction.
enum class BondDirection : std::uint8_t { Up, Down };

struct Atom {
  std::string element;  // capitalised symbol, e.g. "C", "Cl", "Se"
  bool aromatic = false;
  int formal_charge = 0;
  std::optional<unsigned> isotope;
  std::optional<unsigned> explicit_h;
  std::string chirality;  // "", "@" or "@@"; carried verbatim
  bool bracket = false;   // written as a bracket atom

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Bond {
  AtomIndex a = 0;
  AtomIndex b = 0;
  BondOrder order = BondOrder::Single;
  std::optional<BondDirection> direction;

  AtomIndex other(AtomIndex atom) const noexcept { return atom == a ? b : a; }
  friend bool operator==(const Bond&, const Bond&) = default;
};

struct Neighbor {
  AtomIndex atom;
  std::size_t bond;  // index into MolGraph::bonds()
};

/// Connected, undirected, labelled molecular graph. Immutable once built;
/// the constructor validates the structural invariants.
class MolGraph {
 public:
  MolGraph() = default;
  /// Throws Error(InvalidGraph) on self-loops, duplicate bonds, out-of-range
  /// indices or a disconnected graph.
  MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds);

  std::size_t atom_count() const noexcept { return atoms_.size(); }
  std::size_t bond_count() const noexcept { return bonds_.size(); }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<Bond>& bonds() const noexcept { return bonds_; }
  const Atom& atom(AtomIndex i) const { return atoms_.at(i); }
  const Bond& bond(std::size_t i) const { return bonds_.at(i); }
  const std::vector<Neighbor>& neighbors(AtomIndex i) const { return adjacency_.at(i); }
  std::size_t degree(AtomIndex i) const { return adjacency_.at(i).size(); }

  /// Index of the bond joining a and b, if any.
  std::optional<std::size_t> bond_between(AtomIndex a, AtomIndex b) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

/// One linearisation of a graph: where the depth-first walk starts and, for
/// every atom, the order in which its neighbours are tried.
struct TraversalOrder {
  AtomIndex start = 0;
  std::vector<std::vector<AtomIndex>> neighbor_perm;
};

/// The identity order: start at atom 0, neighbours in adjacency order.
TraversalOrder default_order(const MolGraph& graph);

/// Throws Error(InvalidOrder) unless neighbor_perm[i] is a permutation of the
/// neighbours of atom i for every atom and start is in range.
void validate_order(const MolGraph& graph, const TraversalOrder& order);

/// Returns a copy of the graph with atom i moved to position perm[i].
MolGraph relabel(const MolGraph& graph, const std::vector<AtomIndex>& perm);

}  // namespace cnf
