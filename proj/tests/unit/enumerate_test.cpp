#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "cnf/canonical.hpp"
#include "cnf/enumerate.hpp"
#include "cnf/error.hpp"
#include "cnf/isomorphism.hpp"
#include "cnf/smiles.hpp"
#include "corpus.hpp"

namespace {

// Every string write_smiles can produce, by walking all traversal orders.
std::set<std::string> full_enumeration(const cnf::MolGraph& g) {
  std::set<std::string> out;
  cnf::TraversalOrder o = cnf::default_order(g);
  std::function<void(std::size_t)> rec = [&](std::size_t atom) {
    if (atom == g.atom_count()) {
      for (std::size_t s = 0; s < g.atom_count(); ++s) {
        o.start = s;
        out.insert(cnf::write_smiles(g, o));
      }
      return;
    }
    auto perm = o.neighbor_perm[atom];
    std::sort(perm.begin(), perm.end());
    do {
      o.neighbor_perm[atom] = perm;
      rec(atom + 1);
    } while (std::next_permutation(perm.begin(), perm.end()));
  };
  rec(0);
  return out;
}

TEST(EnumerateSmiles, CanonicalOnly) {
  const auto g = cnf::parse_smiles("OCC(C)N");
  const auto e = cnf::enumerate_smiles(g, {1, false, true, 4});
  EXPECT_EQ(e.smiles, std::vector<std::string>{cnf::canonical_smiles(g)});
}

TEST(EnumerateSmiles, SingleLinearisationFallsBack) {
  const auto e = cnf::enumerate_smiles(cnf::parse_smiles("C"), {10, true, false, 1});
  EXPECT_EQ(e.smiles, std::vector<std::string>(10, "C"));
  EXPECT_EQ(e.stats.duplicates_accepted, 9u);
}

TEST(EnumerateSmiles, EthylcyclopropaneMatchesFullEnumeration) {
  const auto g = cnf::parse_smiles("CCC1CC1");
  const std::set<std::string> all = full_enumeration(g);
  // ring-closure direction and branch order double the four common spellings
  EXPECT_EQ(all.size(), 8u);
  for (const auto& s : cnf::testing::ethylcyclopropane_strings()) EXPECT_TRUE(all.count(s)) << s;

  const auto e = cnf::enumerate_smiles(g, {10, true, false, 2024});
  ASSERT_EQ(e.smiles.size(), 10u);
  const std::size_t distinct = std::min<std::size_t>(10, all.size());
  std::set<std::string> seen(e.smiles.begin(), e.smiles.begin() + static_cast<std::ptrdiff_t>(distinct));
  EXPECT_EQ(seen.size(), distinct);  // distinct strings come first
  for (const auto& s : e.smiles) EXPECT_TRUE(all.count(s)) << s;
  EXPECT_EQ(e.stats.duplicates_accepted, 10 - distinct);
}

TEST(EnumerateSmiles, CountIsExact) {
  const auto g = cnf::parse_smiles("c1ccccc1CCN");
  for (std::size_t n : {1, 2, 7, 25}) {
    EXPECT_EQ(cnf::enumerate_smiles(g, {n, false, false, 3}).smiles.size(), n);
    EXPECT_EQ(cnf::enumerate_smiles(g, {n, true, true, 3}).smiles.size(), n);
  }
  EXPECT_EQ(cnf::enumerate_smiles(g, {3, false, true, 3}).smiles.front(), cnf::canonical_smiles(g));
}

TEST(EnumerateSmiles, ZeroCountRejected) {
  try {
    cnf::enumerate_smiles(cnf::parse_smiles("CC"), {0, false, false, 0});
    FAIL();
  } catch (const cnf::Error& e) {
    EXPECT_EQ(e.code(), cnf::ErrorCode::InvalidConfig);
  }
}

TEST(RandomSmiles, DeterministicForSeed) {
  const auto g = cnf::parse_smiles("CC(=O)Oc1ccccc1C(=O)O");
  cnf::Rng a(99);
  cnf::Rng b(99);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(cnf::random_smiles(g, a), cnf::random_smiles(g, b));
}

TEST(RandomSmiles, DrawsAreIsomorphic) {
  const auto g = cnf::parse_smiles("CCC1CC1");
  cnf::Rng rng(1);
  for (int i = 0; i < 10; ++i) EXPECT_TRUE(cnf::isomorphic(cnf::parse_smiles(cnf::random_smiles(g, rng)), g));
}

TEST(RandomSmiles, AllEthylcyclopropaneSpellingsAppear) {
  const auto g = cnf::parse_smiles("CCC1CC1");
  cnf::Rng rng(12);
  std::set<std::string> seen;
  for (int i = 0; i < 10000; ++i) seen.insert(cnf::random_smiles(g, rng));
  for (const auto& s : cnf::testing::ethylcyclopropane_strings()) EXPECT_TRUE(seen.count(s)) << s;
  EXPECT_EQ(seen, full_enumeration(g));
}

TEST(RandomSmiles, SeedDerivationSeparatesRecords) {
  EXPECT_NE(cnf::derive_seed(1, "a", cnf::Role::Train), cnf::derive_seed(1, "b", cnf::Role::Train));
  EXPECT_NE(cnf::derive_seed(1, "a", cnf::Role::Train), cnf::derive_seed(1, "a", cnf::Role::Test));
  EXPECT_NE(cnf::derive_seed(1, "a", cnf::Role::Train), cnf::derive_seed(2, "a", cnf::Role::Train));
  EXPECT_EQ(cnf::derive_seed(1, "a", cnf::Role::Test), cnf::derive_seed(1, "a", cnf::Role::Test));
}

TEST(RandomSmiles, UniformIndexCoversRange) {
  cnf::Rng rng(0);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[cnf::uniform_index(rng, 7)];
  for (int h : hits) EXPECT_GT(h, 800);
}

}  // namespace
