#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "cnf/error.hpp"
#include "cnf/isomorphism.hpp"
#include "cnf/random.hpp"
#include "cnf/smiles.hpp"
#include "corpus.hpp"

namespace {

// Tries every bijection.
bool brute_force_isomorphic(const cnf::MolGraph& a, const cnf::MolGraph& b) {
  if (a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count()) return false;
  std::vector<std::size_t> p(a.atom_count());
  std::iota(p.begin(), p.end(), 0);
  do {
    bool ok = true;
    for (std::size_t i = 0; i < p.size() && ok; ++i) {
      const auto& x = a.atom(i);
      const auto& y = b.atom(p[i]);
      ok = x.element == y.element && x.aromatic == y.aromatic && x.formal_charge == y.formal_charge;
    }
    for (std::size_t k = 0; k < a.bond_count() && ok; ++k) {
      const auto& bond = a.bond(k);
      const auto other = b.bond_between(p[bond.a], p[bond.b]);
      ok = other && b.bond(*other).order == bond.order;
    }
    if (ok) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

TEST(Isomorphic, EthylcyclopropaneSpellings) {
  const auto& s = cnf::testing::ethylcyclopropane_strings();
  for (const auto& x : s)
    for (const auto& y : s) EXPECT_TRUE(cnf::isomorphic(cnf::parse_smiles(x), cnf::parse_smiles(y))) << x << " " << y;
}

TEST(Isomorphic, LabelMismatch) {
  EXPECT_FALSE(cnf::isomorphic(cnf::parse_smiles("C"), cnf::parse_smiles("N")));
  EXPECT_FALSE(cnf::isomorphic(cnf::parse_smiles("CC"), cnf::parse_smiles("C=C")));
  EXPECT_FALSE(cnf::isomorphic(cnf::parse_smiles("C[O-]"), cnf::parse_smiles("CO")));
  EXPECT_FALSE(cnf::isomorphic(cnf::parse_smiles("c1ccccc1"), cnf::parse_smiles("C1CCCCC1")));
  EXPECT_FALSE(cnf::isomorphic(cnf::parse_smiles("CCCC"), cnf::parse_smiles("CC(C)C")));
  EXPECT_FALSE(cnf::isomorphic(cnf::parse_smiles("CCC"), cnf::parse_smiles("CCCC")));
}

TEST(Isomorphic, SizeCap) {
  const std::string chain(30, 'C');
  const auto g = cnf::parse_smiles(chain);
  EXPECT_TRUE(cnf::isomorphic(g, g));
  try {
    cnf::isomorphic(g, g, 20);
    FAIL();
  } catch (const cnf::Error& e) {
    EXPECT_EQ(e.code(), cnf::ErrorCode::SizeLimitExceeded);
  }
}

TEST(Isomorphic, AgreesWithBruteForce) {
  // Random connected labelled graphs on up to 6 atoms, compared with a random
  // relabelling of themselves and with a one-edit mutant.
  cnf::Rng rng(3);
  const std::vector<std::string> elements = {"C", "N", "O"};
  int agreements = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + cnf::uniform_index(rng, 5);
    std::vector<cnf::Atom> atoms(n);
    for (auto& a : atoms) a.element = elements[cnf::uniform_index(rng, 2)];
    std::vector<cnf::Bond> bonds;
    for (std::size_t i = 1; i < n; ++i) bonds.push_back({cnf::uniform_index(rng, i), i, cnf::BondOrder::Single, {}});
    for (std::size_t extra = cnf::uniform_index(rng, 3); extra > 0; --extra) {
      const std::size_t x = cnf::uniform_index(rng, n);
      const std::size_t y = cnf::uniform_index(rng, n);
      const bool exists = std::any_of(bonds.begin(), bonds.end(), [&](const cnf::Bond& b) {
        return (b.a == x && b.b == y) || (b.a == y && b.b == x);
      });
      if (x != y && !exists) bonds.push_back({x, y, cnf::BondOrder::Single, {}});
    }
    const cnf::MolGraph g(atoms, bonds);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    cnf::shuffle(perm, rng);
    const cnf::MolGraph h = cnf::relabel(g, perm);
    EXPECT_TRUE(cnf::isomorphic(g, h));

    auto mutant_atoms = atoms;
    mutant_atoms[cnf::uniform_index(rng, n)].element = elements[cnf::uniform_index(rng, 3)];
    auto mutant_bonds = bonds;
    mutant_bonds[cnf::uniform_index(rng, bonds.size())].order =
        cnf::uniform_index(rng, 2) ? cnf::BondOrder::Double : cnf::BondOrder::Single;
    const cnf::MolGraph m(mutant_atoms, mutant_bonds);
    const bool expected = brute_force_isomorphic(g, m);
    EXPECT_EQ(cnf::isomorphic(g, m), expected);
    agreements += expected;
  }
  EXPECT_GT(agreements, 0);
}

}  // namespace
