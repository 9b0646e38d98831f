#include "csic/spectral.hpp"

#include "csic/errors.hpp"
#include "csic/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace csic {

Matrix normalized_laplacian(const AffinityMatrix& affinity) {
  const Matrix& w = affinity.w;
  if (w.rows() != w.cols()) throw ValidationError("normalized_laplacian: affinity must be square");
  const Vector degree = w.rowwise().sum();
  const Vector inv_sqrt = degree.unaryExpr([](double d) { return 1.0 / std::sqrt(std::max(d, kDegreeFloor)); });
  Matrix lap = -(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
  lap.diagonal().array() += 1.0;
  // Exact symmetry regardless of rounding in the scaling.
  lap = 0.5 * (lap + lap.transpose()).eval();
  return lap;
}

Matrix spectral_embed(const Matrix& laplacian, int k) {
  const Eigen::Index p = laplacian.rows();
  if (k < 1 || k > p) throw ValidationError("spectral_embed: k must lie in [1, P]");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(laplacian);
  if (eig.info() != Eigen::Success) throw std::runtime_error("spectral_embed: eigensolver failed");
  Matrix emb = eig.eigenvectors().leftCols(k);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double n = emb.row(i).norm();
    if (n > 0.0) emb.row(i) /= n;
  }
  return emb;
}

namespace {

struct LloydResult {
  std::vector<int> assign;  // 0-based
  double inertia = 0.0;
  std::vector<double> trace;
};

Matrix seed_plus_plus(const Matrix& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Matrix centers(k, x.cols());
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  Eigen::Index first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  centers.row(0) = x.row(first);
  taken[static_cast<std::size_t>(first)] = true;
  Vector d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = -1;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        r -= d2(i);
        if (r < 0.0 && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (Eigen::Index i = n - 1; i >= 0; --i)
          if (d2(i) > 0.0) {
            pick = i;
            break;
          }
      }
    } else {
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!taken[static_cast<std::size_t>(i)]) free.push_back(i);
      pick = free[rng.below(free.size())];
    }
    taken[static_cast<std::size_t>(pick)] = true;
    centers.row(c) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

double assign_points(const Matrix& x, const Matrix& centers, std::vector<int>& assign,
                     Vector& dist) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d = (x.row(i) - centers.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    assign[static_cast<std::size_t>(i)] = arg;
    dist(i) = best;
    inertia += best;
  }
  return inertia;
}

// Moves points into empty clusters, farthest-from-centroid first, taking them
// only from clusters that keep at least one member.
bool fill_empty(const Matrix& x, Matrix& centers, std::vector<int>& assign, Vector& dist, int k) {
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assign) ++sizes[static_cast<std::size_t>(a)];
  bool changed = false;
  for (int c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > 0) continue;
    Eigen::Index far = -1;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (sizes[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] < 2) continue;
      if (far < 0 || dist(i) > dist(far)) far = i;
    }
    if (far < 0) throw std::logic_error("kmeans: fewer points than clusters");
    --sizes[static_cast<std::size_t>(assign[static_cast<std::size_t>(far)])];
    assign[static_cast<std::size_t>(far)] = c;
    ++sizes[static_cast<std::size_t>(c)];
    centers.row(c) = x.row(far);
    dist(far) = 0.0;
    changed = true;
  }
  return changed;
}

LloydResult lloyd(const Matrix& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Matrix centers = seed_plus_plus(x, k, rng);
  LloydResult res;
  res.assign.assign(static_cast<std::size_t>(n), 0);
  Vector dist(n);
  for (int it = 0; it < kKmeansMaxIter; ++it) {
    assign_points(x, centers, res.assign, dist);
    fill_empty(x, centers, res.assign, dist, k);
    res.trace.push_back(dist.sum());

    Matrix updated = Matrix::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = res.assign[static_cast<std::size_t>(i)];
      updated.row(a) += x.row(i);
      ++counts[static_cast<std::size_t>(a)];
    }
    for (int c = 0; c < k; ++c) updated.row(c) /= counts[static_cast<std::size_t>(c)];
    const double move = (updated - centers).rowwise().norm().maxCoeff();
    centers = updated;
    if (move < kKmeansMoveTol) break;
  }
  res.inertia = assign_points(x, centers, res.assign, dist);
  if (fill_empty(x, centers, res.assign, dist, k)) res.inertia = dist.sum();
  return res;
}

}  // namespace

ClusterAssignment kmeans(const Matrix& points, int k, std::uint64_t seed, int restarts,
                         std::vector<double>* inertia_trace) {
  if (k < 1) throw ValidationError("kmeans: k must be positive");
  if (points.rows() < k) throw ValidationError("kmeans: fewer points than clusters");
  if (restarts < 1) throw ValidationError("kmeans: restarts must be >= 1");
  if (!points.allFinite()) throw ValidationError("kmeans: non-finite point coordinates");

  const Rng root(seed);
  LloydResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Rng rng = root.child(static_cast<std::uint64_t>(r));
    auto res = lloyd(points, k, rng);
    if (res.inertia < best.inertia) best = std::move(res);
  }

  ClusterAssignment out;
  out.k = k;
  out.seed = seed;
  out.inertia = best.inertia;
  out.labels.reserve(best.assign.size());
  for (int a : best.assign) out.labels.push_back(a + 1);
  if (inertia_trace) *inertia_trace = std::move(best.trace);
  return out;
}

ClusterAssignment spectral_cluster(const AffinityMatrix& affinity, int k, std::uint64_t seed,
                                   int restarts) {
  const Matrix emb = spectral_embed(normalized_laplacian(affinity), k);
  return kmeans(emb, k, seed, restarts);
}

}  // namespace csic
