#pragma once

#include "csic/srssc.hpp"
#include "csic/types.hpp"

#include <cstdint>
#include <vector>

namespace csic {

// Degree floor for isolated vertices.
inline constexpr double kDegreeFloor = 1e-12;
inline constexpr int kKmeansMaxIter = 300;
inline constexpr double kKmeansMoveTol = 1e-9;

struct ClusterAssignment {
  std::vector<int> labels;  // 1..k, one per point
  int k = 0;
  double inertia = 0.0;
  std::uint64_t seed = 0;
};

// I - D^{-1/2} W D^{-1/2}.
Matrix normalized_laplacian(const AffinityMatrix& affinity);

// Eigenvectors of the k smallest eigenvalues as columns, rows rescaled to unit
// length (zero rows stay zero).
Matrix spectral_embed(const Matrix& laplacian, int k);

// k-means++ seeding followed by Lloyd iterations; best inertia over restarts.
// `inertia_trace`, if given, receives the inertia after each Lloyd assignment
// of the winning restart.
ClusterAssignment kmeans(const Matrix& points, int k, std::uint64_t seed, int restarts,
                         std::vector<double>* inertia_trace = nullptr);

ClusterAssignment spectral_cluster(const AffinityMatrix& affinity, int k, std::uint64_t seed,
                                   int restarts = 20);

}  // namespace csic
