#pragma once

#include "csic/types.hpp"

#include <cstddef>
#include <vector>

namespace csic {

// Largest pixel count handled with dense P x P coefficient matrices.
inline constexpr std::size_t kMaxDensePixels = 8192;

// 3D spatially regularized sparse subspace clustering:
//
//   min_{c,g}  ||c||_1 + lambda/2 ||g||_F^2 + alpha/2 ||c - c_bar||_F^2
//   s.t.       y = y c + g,  diag(c) = 0,  c^T 1 = 1
//
// where c_bar is the 3x3x3 neighborhood mean of c (see mean_filter_3d).
struct SrsscProblem {
  Matrix y;  // D x P, column p = (compressed) spectrum of pixel p
  std::size_t rows = 0;
  std::size_t cols = 0;
  double lambda = 1.0;
  double alpha = 0.0;
  double rho = 10.0;
  double tol = 1e-4;
  int max_iter = 5000;
  int outer_iters = 3;

  std::size_t pixels() const { return static_cast<std::size_t>(y.cols()); }
  void validate() const;
};

struct SrsscResiduals {
  double equality = 0.0;   // ||y - y c - g||_F / ||y||_F
  double diagonal = 0.0;   // max |c_ii|
  double affine = 0.0;     // ||c^T 1 - 1||_inf
  double consensus = 0.0;  // ||a - c||_inf of the ADMM split
};

struct SrsscSolution {
  Matrix c;      // P x P
  Matrix g;      // D x P
  Matrix c_bar;  // P x P, mean_filter_3d(c)
  int iterations = 0;
  bool converged = false;
  SrsscResiduals residuals;
  // max(consensus, affine) after every ADMM iteration, all outer passes.
  std::vector<double> primal_history;
  // ||x_{k+1} - x_k||_F of the splitting variable x = c - u; non-increasing
  // within an outer pass (the relaxed ADMM is an averaged fixed-point map in x).
  std::vector<double> merit_history;
};

// Symmetric, nonnegative, zero-diagonal graph built from |c|.
struct AffinityMatrix {
  Matrix w;
};

// mu = min_j max_{i != j} |y_j^T y_i|; returns scale / mu.
double default_lambda(const Matrix& y, double scale = 10.0);

// Fills lambda/rho defaults from the config where unset.
SrsscProblem make_problem(Matrix y, std::size_t rows, std::size_t cols, const RunConfig& cfg);

// Places column p of c at pixel p's site of an M x N x P cube, averages over
// the 3x3x3 neighborhood (spatial x coefficient index), truncating the window
// at the borders, and maps the cube back to P x P.
Matrix mean_filter_3d(const Matrix& c, std::size_t rows, std::size_t cols);

SrsscSolution solve_srssc(const SrsscProblem& problem);

double srssc_objective(const Matrix& y, const Matrix& c, const Matrix& c_bar, double lambda,
                       double alpha);

// w = |c|n + |c|n^T where |c|n scales each column of |c| by its maximum.
AffinityMatrix build_affinity(const Matrix& c);

}  // namespace csic
