#include "cnf/canonical.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "cnf/smiles.hpp"

namespace cnf {

namespace {

// Past this many leaves the search stops branching and follows the first
// candidate only. Real molecules stay far below it once twins are pruned.
constexpr std::size_t kLeafBudget = 4096;

template <typename Key>
std::vector<std::size_t> dense_rank(const std::vector<Key>& keys) {
  std::vector<std::size_t> idx(keys.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return keys[x] < keys[y]; });
  std::vector<std::size_t> out(keys.size());
  std::size_t cls = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i > 0 && keys[idx[i - 1]] < keys[idx[i]]) ++cls;
    out[idx[i]] = cls;
  }
  return out;
}

std::size_t class_count(const std::vector<std::size_t>& classes) {
  return classes.empty() ? 0 : *std::max_element(classes.begin(), classes.end()) + 1;
}

std::uint64_t bond_code(const MolGraph& g, std::size_t bond_index, AtomIndex from) {
  const Bond& bond = g.bond(bond_index);
  std::uint64_t dir = 0;
  if (bond.direction) {
    const bool up = (*bond.direction == BondDirection::Up) == (from == bond.a);
    dir = up ? 1 : 2;
  }
  return static_cast<std::uint64_t>(bond.order) * 4 + dir;
}

std::vector<std::size_t> initial_classes(const MolGraph& g) {
  using Key = std::tuple<std::string, bool, int, std::size_t, unsigned, unsigned, std::string>;
  std::vector<Key> keys;
  keys.reserve(g.atom_count());
  for (AtomIndex i = 0; i < g.atom_count(); ++i) {
    const Atom& a = g.atom(i);
    keys.emplace_back(a.element, a.aromatic, a.formal_charge, g.degree(i), a.isotope ? *a.isotope + 1 : 0u,
                      a.explicit_h ? *a.explicit_h + 1 : 0u, a.chirality);
  }
  return dense_rank(keys);
}

std::vector<std::size_t> refine(const MolGraph& g, std::vector<std::size_t> classes) {
  std::size_t count = class_count(classes);
  while (count < g.atom_count()) {
    std::vector<std::vector<std::uint64_t>> keys(g.atom_count());
    for (AtomIndex i = 0; i < g.atom_count(); ++i) {
      auto& key = keys[i];
      key.reserve(g.degree(i) + 1);
      for (const Neighbor& n : g.neighbors(i)) key.push_back(classes[n.atom] * 16 + bond_code(g, n.bond, i));
      std::sort(key.begin(), key.end());
      key.insert(key.begin(), classes[i]);
    }
    classes = dense_rank(keys);
    const std::size_t next = class_count(classes);
    if (next == count) break;
    count = next;
  }
  return classes;
}

std::vector<std::size_t> individualise(const std::vector<std::size_t>& classes, AtomIndex chosen) {
  std::vector<std::size_t> keys(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) keys[i] = classes[i] * 2 + (i == chosen ? 0 : 1);
  return dense_rank(keys);
}

// Swapping two twins is an automorphism fixing every other atom, so their
// search subtrees yield identical strings.
bool twins(const MolGraph& g, AtomIndex u, AtomIndex v) {
  if (!(g.atom(u) == g.atom(v)) || g.degree(u) != g.degree(v)) return false;
  for (const Neighbor& n : g.neighbors(u)) {
    if (g.bond(n.bond).direction) return false;
    if (n.atom == v) continue;
    const auto other = g.bond_between(v, n.atom);
    if (!other || g.bond(*other).order != g.bond(n.bond).order || g.bond(*other).direction) return false;
  }
  return true;
}

class Search {
 public:
  explicit Search(const MolGraph& g) : g_(g) {}

  CanonicalRanks run() {
    explore(initial_classes(g_));
    return CanonicalRanks{best_rank_};
  }

 private:
  void explore(std::vector<std::size_t> classes) {
    classes = refine(g_, std::move(classes));
    const std::size_t n = g_.atom_count();
    if (class_count(classes) == n) {
      ++leaves_;
      CanonicalRanks ranks{classes};
      std::string s = write_smiles(g_, canonical_order(g_, ranks));
      if (!have_best_ || s < best_) {
        best_ = std::move(s);
        best_rank_ = std::move(ranks.rank);
        have_best_ = true;
      }
      return;
    }
    // lowest class value with more than one member
    std::vector<std::size_t> sizes(n, 0);
    for (std::size_t c : classes) ++sizes[c];
    const std::size_t target =
        static_cast<std::size_t>(std::find_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 1; }) -
                                 sizes.begin());
    std::vector<AtomIndex> tried;
    for (AtomIndex c = 0; c < n; ++c) {
      if (classes[c] != target) continue;
      if (!tried.empty() && leaves_ >= kLeafBudget) break;
      if (std::any_of(tried.begin(), tried.end(), [&](AtomIndex t) { return twins(g_, t, c); })) continue;
      tried.push_back(c);
      explore(individualise(classes, c));
    }
  }

  const MolGraph& g_;
  std::string best_;
  std::vector<std::size_t> best_rank_;
  bool have_best_ = false;
  std::size_t leaves_ = 0;
};

}  // namespace

std::vector<std::size_t> refined_classes(const MolGraph& graph) { return refine(graph, initial_classes(graph)); }

CanonicalRanks canonical_ranks(const MolGraph& graph) { return Search(graph).run(); }

TraversalOrder canonical_order(const MolGraph& graph, const CanonicalRanks& ranks) {
  TraversalOrder order;
  order.neighbor_perm.resize(graph.atom_count());
  for (AtomIndex i = 0; i < graph.atom_count(); ++i) {
    if (ranks.rank[i] == 0) order.start = i;
    auto& perm = order.neighbor_perm[i];
    for (const Neighbor& n : graph.neighbors(i)) perm.push_back(n.atom);
    std::sort(perm.begin(), perm.end(), [&](AtomIndex x, AtomIndex y) { return ranks.rank[x] < ranks.rank[y]; });
  }
  return order;
}

std::string canonical_smiles(const MolGraph& graph) {
  return write_smiles(graph, canonical_order(graph, canonical_ranks(graph)));
}

}  // namespace cnf
