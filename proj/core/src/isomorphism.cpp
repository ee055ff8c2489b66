#include "cnf/isomorphism.hpp"

#include <algorithm>
#include <deque>
#include <string>
#include <tuple>
#include <vector>

#include "cnf/error.hpp"

namespace cnf {

namespace {

bool same_label(const Atom& x, const Atom& y) {
  return x.element == y.element && x.aromatic == y.aromatic && x.formal_charge == y.formal_charge;
}

class Matcher {
 public:
  Matcher(const MolGraph& a, const MolGraph& b)
      : a_(a),
        b_(b),
        map_ab_(a.atom_count(), kUnmapped),
        map_ba_(b.atom_count(), kUnmapped),
        anchor_(a.atom_count(), kUnmapped) {
    // Visit a's atoms breadth-first so every atom after the first has an
    // already-mapped neighbour whose image restricts the candidates.
    std::vector<bool> seen(a.atom_count(), false);
    std::deque<AtomIndex> queue{0};
    seen[0] = true;
    while (!queue.empty()) {
      const AtomIndex u = queue.front();
      queue.pop_front();
      order_.push_back(u);
      for (const Neighbor& n : a.neighbors(u)) {
        if (!seen[n.atom]) {
          seen[n.atom] = true;
          anchor_[n.atom] = u;
          queue.push_back(n.atom);
        }
      }
    }
  }

  bool run() { return extend(0); }

 private:
  static constexpr AtomIndex kUnmapped = static_cast<AtomIndex>(-1);

  bool feasible(AtomIndex u, AtomIndex v) const {
    if (map_ba_[v] != kUnmapped) return false;
    if (!same_label(a_.atom(u), b_.atom(v)) || a_.degree(u) != b_.degree(v)) return false;
    std::size_t mapped_neighbors = 0;
    for (const Neighbor& n : a_.neighbors(u)) {
      const AtomIndex image = map_ab_[n.atom];
      if (image == kUnmapped) continue;
      ++mapped_neighbors;
      const auto bond = b_.bond_between(v, image);
      if (!bond || b_.bond(*bond).order != a_.bond(n.bond).order) return false;
    }
    std::size_t mapped_in_b = 0;
    for (const Neighbor& n : b_.neighbors(v)) {
      if (map_ba_[n.atom] != kUnmapped) ++mapped_in_b;
    }
    return mapped_in_b == mapped_neighbors;
  }

  bool extend(std::size_t depth) {
    if (depth == order_.size()) return true;
    const AtomIndex u = order_[depth];
    auto try_candidate = [&](AtomIndex v) {
      if (!feasible(u, v)) return false;
      map_ab_[u] = v;
      map_ba_[v] = u;
      if (extend(depth + 1)) return true;
      map_ab_[u] = kUnmapped;
      map_ba_[v] = kUnmapped;
      return false;
    };
    if (anchor_[u] == kUnmapped) {
      for (AtomIndex v = 0; v < b_.atom_count(); ++v) {
        if (try_candidate(v)) return true;
      }
      return false;
    }
    for (const Neighbor& n : b_.neighbors(map_ab_[anchor_[u]])) {
      if (try_candidate(n.atom)) return true;
    }
    return false;
  }

  const MolGraph& a_;
  const MolGraph& b_;
  std::vector<AtomIndex> map_ab_;
  std::vector<AtomIndex> map_ba_;
  std::vector<AtomIndex> anchor_;
  std::vector<AtomIndex> order_;
};

using LabelKey = std::tuple<std::string, bool, int, std::size_t>;

std::vector<LabelKey> label_multiset(const MolGraph& g) {
  std::vector<LabelKey> keys;
  for (AtomIndex i = 0; i < g.atom_count(); ++i) {
    const Atom& atom = g.atom(i);
    keys.emplace_back(atom.element, atom.aromatic, atom.formal_charge, g.degree(i));
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace

bool isomorphic(const MolGraph& a, const MolGraph& b, std::size_t max_atoms) {
  if (a.atom_count() > max_atoms || b.atom_count() > max_atoms)
    throw Error(ErrorCode::SizeLimitExceeded, "isomorphism oracle is capped at " + std::to_string(max_atoms) + " atoms");
  if (a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count()) return false;
  if (a.atom_count() == 0) return true;
  if (label_multiset(a) != label_multiset(b)) return false;
  return Matcher(a, b).run();
}

}  // namespace cnf
