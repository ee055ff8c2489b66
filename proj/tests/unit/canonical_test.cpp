#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "cnf/canonical.hpp"
#include "cnf/isomorphism.hpp"
#include "cnf/random.hpp"
#include "cnf/smiles.hpp"
#include "corpus.hpp"

namespace {

// Orbits of the automorphism group, found by trying every permutation.
std::vector<std::size_t> brute_force_orbits(const cnf::MolGraph& g) {
  const std::size_t n = g.atom_count();
  std::vector<std::size_t> orbit(n);
  std::iota(orbit.begin(), orbit.end(), 0);
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    bool automorphism = true;
    for (std::size_t i = 0; i < n && automorphism; ++i) {
      const auto& a = g.atom(i);
      const auto& b = g.atom(p[i]);
      automorphism = a.element == b.element && a.aromatic == b.aromatic && a.formal_charge == b.formal_charge;
    }
    for (const auto& bond : g.bonds()) {
      if (!automorphism) break;
      const auto image = g.bond_between(p[bond.a], p[bond.b]);
      automorphism = image && g.bond(*image).order == bond.order;
    }
    if (!automorphism) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = std::min(orbit[i], orbit[p[i]]);
      for (auto& o : orbit)
        if (o == orbit[i] || o == orbit[p[i]]) o = lo;
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return orbit;
}

cnf::MolGraph from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<cnf::Atom> atoms(n);
  for (auto& a : atoms) a.element = "C";
  std::vector<cnf::Bond> bonds;
  for (auto [a, b] : edges) bonds.push_back({a, b, cnf::BondOrder::Single, {}});
  return cnf::MolGraph(atoms, bonds);
}

cnf::MolGraph shuffled(const cnf::MolGraph& g, cnf::Rng& rng) {
  std::vector<std::size_t> perm(g.atom_count());
  std::iota(perm.begin(), perm.end(), 0);
  cnf::shuffle(perm, rng);
  return cnf::relabel(g, perm);
}

TEST(CanonicalRanks, SingleAtom) {
  EXPECT_EQ(cnf::canonical_ranks(cnf::parse_smiles("C")).rank, std::vector<std::size_t>{0});
}

TEST(CanonicalRanks, SymmetricRingIsTotalOrder) {
  const auto g = cnf::parse_smiles("c1ccccc1");
  const auto classes = cnf::refined_classes(g);
  EXPECT_EQ(std::set<std::size_t>(classes.begin(), classes.end()).size(), 1u);
  auto rank = cnf::canonical_ranks(g).rank;
  std::sort(rank.begin(), rank.end());
  EXPECT_EQ(rank, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(CanonicalRanks, RefinementMatchesOrbits) {
  for (const char* s : {"CCC1CC1", "CC(C)C", "OC(=O)CC(N)C", "c1ccncc1", "C1CC2CC1C2"}) {
    const auto g = cnf::parse_smiles(s);
    const auto classes = cnf::refined_classes(g);
    const auto orbits = brute_force_orbits(g);
    for (std::size_t i = 0; i < g.atom_count(); ++i)
      for (std::size_t j = 0; j < g.atom_count(); ++j)
        EXPECT_EQ(classes[i] == classes[j], orbits[i] == orbits[j]) << s << " atoms " << i << "," << j;
  }
}

TEST(CanonicalRanks, EthylcyclopropaneRingTwins) {
  const auto g = cnf::parse_smiles("CCC1CC1");  // atoms 3 and 4 are the equivalent ring carbons
  const auto classes = cnf::refined_classes(g);
  EXPECT_EQ(classes[3], classes[4]);
  EXPECT_NE(classes[2], classes[3]);
  const auto orbits = brute_force_orbits(g);
  EXPECT_EQ(orbits[3], orbits[4]);
}

TEST(CanonicalSmiles, EthylcyclopropaneSpellingsAgree) {
  std::set<std::string> forms;
  for (const auto& s : cnf::testing::ethylcyclopropane_strings()) forms.insert(cnf::canonical_smiles(cnf::parse_smiles(s)));
  EXPECT_EQ(forms.size(), 1u);
}

TEST(CanonicalSmiles, SingleCarbon) { EXPECT_EQ(cnf::canonical_smiles(cnf::parse_smiles("C")), "C"); }

TEST(CanonicalSmiles, IdempotentOverCorpus) {
  for (const auto& s : cnf::testing::test_corpus()) {
    const std::string c = cnf::canonical_smiles(cnf::parse_smiles(s));
    const auto back = cnf::parse_smiles(c);
    EXPECT_EQ(cnf::canonical_smiles(back), c) << s;
    EXPECT_TRUE(cnf::isomorphic(back, cnf::parse_smiles(s))) << s;
  }
}

TEST(CanonicalSmiles, RelabellingInvariance) {
  cnf::Rng rng(5);
  for (const auto& s : cnf::testing::test_corpus()) {
    const auto g = cnf::parse_smiles(s);
    const std::string c = cnf::canonical_smiles(g);
    for (int rep = 0; rep < 50; ++rep) ASSERT_EQ(cnf::canonical_smiles(shuffled(g, rng)), c) << s;
  }
}

TEST(CanonicalSmiles, RegularGraphsRefinementCannotSplit) {
  // Prism and K3,3: both 3-regular on six atoms, so refinement sees one class.
  const auto prism = from_edges(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}, {0, 3}, {1, 4}, {2, 5}});
  const auto k33 = from_edges(6, {{0, 3}, {0, 4}, {0, 5}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}});
  EXPECT_NE(cnf::canonical_smiles(prism), cnf::canonical_smiles(k33));
  cnf::Rng rng(9);
  for (int rep = 0; rep < 200; ++rep) {
    EXPECT_EQ(cnf::canonical_smiles(shuffled(prism, rng)), cnf::canonical_smiles(prism));
    EXPECT_EQ(cnf::canonical_smiles(shuffled(k33, rng)), cnf::canonical_smiles(k33));
  }
}

TEST(CanonicalSmiles, DistinguishesStereoFreeLabels) {
  EXPECT_NE(cnf::canonical_smiles(cnf::parse_smiles("CCO")), cnf::canonical_smiles(cnf::parse_smiles("COC")));
  EXPECT_NE(cnf::canonical_smiles(cnf::parse_smiles("C[NH3+]")), cnf::canonical_smiles(cnf::parse_smiles("CN")));
}

}  // namespace
