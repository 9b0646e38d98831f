#include "csic/errors.hpp"
#include "csic/evaluation.hpp"
#include "csic/rng.hpp"
#include "csic/spectral.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <map>
#include <numeric>
#include <set>

using namespace csic;

namespace {

AffinityMatrix random_affinity(Rng& rng, Eigen::Index n) {
  Matrix w(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) w(i, j) = w(j, i) = i == j ? 0.0 : rng.uniform();
  return {w};
}

AffinityMatrix block_affinity(const std::vector<int>& sizes, Rng* rng = nullptr) {
  int n = 0;
  for (int s : sizes) n += s;
  Matrix w = Matrix::Zero(n, n);
  int off = 0;
  for (int s : sizes) {
    for (int i = 0; i < s; ++i)
      for (int j = i + 1; j < s; ++j) w(off + i, off + j) = w(off + j, off + i) = rng ? 0.5 + rng->uniform() : 1.0;
    off += s;
  }
  return {w};
}

// Same partition up to renaming of the labels.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
    if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
  }
  return true;
}

}  // namespace

TEST(Laplacian, TwoNodes) {
  Matrix w(2, 2);
  w << 0, 1, 1, 0;
  const Matrix lap = normalized_laplacian({w});
  Matrix expected(2, 2);
  expected << 1, -1, -1, 1;
  EXPECT_LE((lap - expected).cwiseAbs().maxCoeff(), 1e-15);
  const auto ev = oracle::jacobi_eigenvalues(lap);
  EXPECT_NEAR(ev[0], 0.0, 1e-12);
  EXPECT_NEAR(ev[1], 2.0, 1e-12);
}

TEST(Laplacian, ZeroEigenvalueMultiplicityCountsBlocks) {
  Rng rng(1);
  for (int b = 1; b <= 4; ++b) {
    std::vector<int> sizes;
    for (int i = 0; i < b; ++i) sizes.push_back(3 + i);
    const auto ev = oracle::jacobi_eigenvalues(normalized_laplacian(block_affinity(sizes, &rng)));
    int zeros = 0;
    for (double v : ev)
      if (std::abs(v) < 1e-9) ++zeros;
    EXPECT_EQ(zeros, b);
  }
}

TEST(Laplacian, SpectrumMatchesJacobiOracle) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix lap = normalized_laplacian(random_affinity(rng, 6));
    const auto oracle_ev = oracle::jacobi_eigenvalues(lap);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(lap);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(eig.eigenvalues()(i), oracle_ev[static_cast<std::size_t>(i)], 1e-9);
  }
}

TEST(Laplacian, SymmetricWithBoundedSpectrum) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix lap = normalized_laplacian(random_affinity(rng, 12));
    EXPECT_LE((lap - lap.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    const auto ev = oracle::jacobi_eigenvalues(lap);
    EXPECT_GE(ev.front(), -1e-9);
    EXPECT_LE(ev.back(), 2.0 + 1e-9);
  }
}

TEST(Laplacian, IsolatedVertexIsRegularized) {
  Matrix w = Matrix::Zero(3, 3);
  w(0, 1) = w(1, 0) = 1.0;
  const Matrix lap = normalized_laplacian({w});
  EXPECT_TRUE(lap.allFinite());
  EXPECT_EQ(lap(2, 2), 1.0);
}

TEST(Embed, TwoBlocksGiveTwoDistinctRows) {
  const Matrix emb = spectral_embed(normalized_laplacian(block_affinity({5, 5})), 2);
  for (int i = 0; i < 10; ++i) {
    const int ref = i < 5 ? 0 : 5;
    EXPECT_LE((emb.row(i) - emb.row(ref)).norm(), 1e-6);
  }
  EXPECT_GT((emb.row(0) - emb.row(5)).norm(), 1.0);
}

TEST(Embed, FullRankWhenKEqualsP) {
  Rng rng(3);
  const Matrix emb = spectral_embed(normalized_laplacian(random_affinity(rng, 7)), 7);
  const Eigen::FullPivLU<Matrix> lu(emb);
  EXPECT_EQ(lu.rank(), 7);
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(emb.row(i).norm(), 1.0, 1e-12);
}

TEST(Embed, SubspaceMatchesJacobiOracle) {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix lap = normalized_laplacian(random_affinity(rng, 8));
    Matrix vecs;
    oracle::jacobi_eigenvalues(lap, &vecs);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(lap);
    const Matrix ours = eig.eigenvectors().leftCols(3);
    const auto cosines = oracle::principal_cosines(ours, vecs.leftCols(3));
    for (Eigen::Index i = 0; i < cosines.size(); ++i) {
      EXPECT_LT(std::acos(std::min(1.0, cosines(i))), 1e-6);
    }
    // The row-normalized embedding spans the same row directions.
    const Matrix emb = spectral_embed(lap, 3);
    for (Eigen::Index r = 0; r < 8; ++r) {
      const Eigen::RowVectorXd expect = ours.row(r).normalized();
      EXPECT_LE((emb.row(r) - expect).norm(), 1e-12);
    }
  }
}

TEST(Embed, RejectsBadK) {
  const Matrix lap = Matrix::Identity(3, 3);
  EXPECT_THROW(spectral_embed(lap, 0), ValidationError);
  EXPECT_THROW(spectral_embed(lap, 4), ValidationError);
}

TEST(Kmeans, TwoSeparatedPairs) {
  Matrix x(4, 2);
  x << 0, 0, 0, 1, 10, 0, 10, 1;
  const auto a = kmeans(x, 2, 1, 5);
  EXPECT_EQ(a.labels[0], a.labels[1]);
  EXPECT_EQ(a.labels[2], a.labels[3]);
  EXPECT_NE(a.labels[0], a.labels[2]);
  // Four points each 0.5 from their pair centroid.
  EXPECT_NEAR(a.inertia, 4 * 0.25, 1e-12);
}

TEST(Kmeans, OneClusterPerPoint) {
  Rng rng(2);
  Matrix x(6, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
  const auto a = kmeans(x, 6, 4, 3);
  EXPECT_EQ(std::set<int>(a.labels.begin(), a.labels.end()).size(), 6u);
  EXPECT_EQ(a.inertia, 0.0);
}

TEST(Kmeans, DuplicatePointsStillFillAllClusters) {
  const Matrix x = Matrix::Zero(5, 2);
  const auto a = kmeans(x, 3, 1, 2);
  EXPECT_EQ(std::set<int>(a.labels.begin(), a.labels.end()).size(), 3u);
}

TEST(Kmeans, ThreeGaussiansAgreeWithManySeeds) {
  Rng rng(21);
  Matrix x(30, 2);
  const double centers[3][2] = {{0, 0}, {1, 0}, {0, 1}};
  for (int i = 0; i < 30; ++i) {
    x(i, 0) = centers[i / 10][0] + 0.01 * rng.normal();
    x(i, 1) = centers[i / 10][1] + 0.01 * rng.normal();
  }
  std::vector<int> truth;
  for (int i = 0; i < 30; ++i) truth.push_back(i / 10 + 1);
  const auto reference = kmeans(x, 3, 0, 1);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto a = kmeans(x, 3, seed, 5);
    EXPECT_TRUE(same_partition(a.labels, reference.labels)) << "seed " << seed;
  }
  EXPECT_TRUE(same_partition(reference.labels, truth));
}

TEST(Kmeans, InertiaNonIncreasing) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x(60, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    std::vector<double> trace;
    kmeans(x, 4, rng.next_u64(), 3, &trace);
    ASSERT_FALSE(trace.empty());
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] * (1 + 1e-12));
  }
}

TEST(Kmeans, Deterministic) {
  Rng rng(5);
  Matrix x(40, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
  const auto a = kmeans(x, 3, 9, 4);
  const auto b = kmeans(x, 3, 9, 4);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.inertia, b.inertia);
}

TEST(Kmeans, Preconditions) {
  EXPECT_THROW(kmeans(Matrix::Zero(2, 2), 3, 0, 1), ValidationError);
  EXPECT_THROW(kmeans(Matrix::Zero(2, 2), 0, 0, 1), ValidationError);
  EXPECT_THROW(kmeans(Matrix::Zero(2, 2), 1, 0, 0), ValidationError);
}

TEST(Cluster, RecoversBlocks) {
  Rng rng(7);
  for (int b = 2; b <= 5; ++b) {
    std::vector<int> sizes;
    std::vector<int> truth;
    for (int i = 0; i < b; ++i) {
      sizes.push_back(4 + 2 * i);
      truth.insert(truth.end(), static_cast<std::size_t>(4 + 2 * i), i + 1);
    }
    const auto a = spectral_cluster(block_affinity(sizes, &rng), b, 3);
    EXPECT_TRUE(same_partition(a.labels, truth)) << b << " blocks";
  }
}

TEST(Cluster, PermutationEquivariance) {
  Rng rng(10);
  const auto aff = block_affinity({6, 7, 5}, &rng);
  std::vector<int> perm(18);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 17; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
  Matrix wp(18, 18);
  for (int i = 0; i < 18; ++i)
    for (int j = 0; j < 18; ++j) wp(i, j) = aff.w(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  const auto a = spectral_cluster(aff, 3, 1);
  const auto b = spectral_cluster({wp}, 3, 1);
  std::vector<int> a_perm;
  for (int i = 0; i < 18; ++i) a_perm.push_back(a.labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
  EXPECT_TRUE(same_partition(a_perm, b.labels));
}
