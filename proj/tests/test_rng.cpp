#include "csic/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

using csic::Rng;

TEST(Rng, SplitMixReferenceSequence) {
  // Seed 0 hashes to key 0, so draws are the reference SplitMix64 outputs.
  const Rng r(0);
  EXPECT_EQ(r.at(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(r.at(1), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(r.at(2), 0x06c45d188009454fULL);
}

TEST(Rng, Fnv1aReference) {
  EXPECT_EQ(Rng::fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Rng::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Rng, SequentialMatchesRandomAccess) {
  Rng r(42);
  const Rng fixed(42);
  for (std::uint64_t i = 0; i < 100; ++i) EXPECT_EQ(r.next_u64(), fixed.at(i));
  EXPECT_EQ(r.counter(), 100u);
}

TEST(Rng, ChildrenAreIndependentOfParentConsumption) {
  Rng a(7);
  Rng b(7);
  for (int i = 0; i < 13; ++i) b.next_u64();
  EXPECT_EQ(a.child("noise").at(0), b.child("noise").at(0));
  EXPECT_NE(a.child("noise").at(0), a.child("basis").at(0));
  EXPECT_NE(a.child(1).key(), a.child(2).key());
}

TEST(Rng, UniformRange) {
  Rng r(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, BelowCoversRangeUniformly) {
  Rng r(11);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[r.below(6)];
  for (int c : counts) EXPECT_NEAR(c, n / 6, 500);
  EXPECT_EQ(r.below(1), 0u);
}

TEST(Rng, NormalMoments) {
  Rng r(5);
  const int n = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, NormalAtMatchesSequentialPairs) {
  Rng r(9);
  const Rng fixed(9);
  for (std::uint64_t i = 0; i < 50; ++i) EXPECT_EQ(r.normal(), fixed.normal_at(i));
}

TEST(Rng, DistinctSeedsDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 1000; ++s) firsts.insert(Rng(s).at(0));
  EXPECT_EQ(firsts.size(), 1000u);
}
