#include "csic/srssc.hpp"

#include "csic/errors.hpp"
#include "csic/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace csic {

void SrsscProblem::validate() const {
  if (y.rows() == 0 || y.cols() == 0) throw ValidationError("srssc: empty data matrix");
  if (rows * cols != pixels()) throw ValidationError("srssc: data has P != M*N columns");
  if (pixels() > kMaxDensePixels) {
    throw ValidationError("srssc: " + std::to_string(pixels()) + " pixels exceeds the dense limit of " +
                          std::to_string(kMaxDensePixels));
  }
  if (!y.allFinite()) throw ValidationError("srssc: data contains non-finite values");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("srssc: lambda must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("srssc: alpha must be >= 0");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("srssc: rho must be positive");
  if (!(tol > 0.0)) throw ValidationError("srssc: tolerance must be positive");
  if (max_iter < 1 || outer_iters < 1) throw ValidationError("srssc: iteration counts must be >= 1");
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    if (y.col(j).squaredNorm() == 0.0) {
      throw ValidationError("srssc: column " + std::to_string(j) + " of the data is zero");
    }
  }
}

double default_lambda(const Matrix& y, double scale) {
  if (y.cols() < 2) throw ValidationError("default_lambda: need at least two columns");
  Matrix gram = (y.transpose() * y).cwiseAbs();
  gram.diagonal().setZero();
  const double mu = gram.colwise().maxCoeff().minCoeff();
  if (!(mu > 0.0)) throw ValidationError("default_lambda: some column is orthogonal to all others");
  return scale / mu;
}

SrsscProblem make_problem(Matrix y, std::size_t rows, std::size_t cols, const RunConfig& cfg) {
  cfg.validate();
  SrsscProblem p;
  p.rows = rows;
  p.cols = cols;
  p.lambda = cfg.lambda ? *cfg.lambda : default_lambda(y);
  p.rho = cfg.rho ? *cfg.rho : 10.0 * p.lambda;
  p.y = std::move(y);
  p.alpha = cfg.alpha;
  p.tol = cfg.tol;
  p.max_iter = cfg.max_iter;
  p.outer_iters = cfg.outer_iters;
  return p;
}

namespace {

// Truncated 3-tap box mean along one axis of a strided sequence.
// `get(i)` / `set(i, v)` address element i of the axis.
template <typename Get, typename Set>
void box3(std::size_t n, Get get, Set set) {
  if (n == 1) return;
  double prev = get(0);
  double cur = prev;
  for (std::size_t i = 0; i < n; ++i) {
    const double next = i + 1 < n ? get(i + 1) : 0.0;
    double sum = cur + next;
    double count = i + 1 < n ? 2.0 : 1.0;
    if (i > 0) {
      sum += prev;
      count += 1.0;
    }
    prev = cur;
    cur = next;
    set(i, sum / count);
  }
}

// Solves (tau I + lambda y^T y) x = r. Written as x = diag * r - correction(r);
// with D < P the correction goes through the Woodbury identity at O(P^2 D).
class QuadraticSolver {
public:
  QuadraticSolver(const Matrix& y, double lambda, double tau) {
    const Eigen::Index p = y.cols();
    const Eigen::Index d = y.rows();
    woodbury_ = d < p;
    if (woodbury_) {
      diag_ = 1.0 / tau;
      z_ = std::sqrt(lambda) * y.transpose();
      Matrix inner = z_.transpose() * z_;
      inner.diagonal().array() += tau;
      inner_.compute(inner);
    } else {
      diag_ = 0.0;
      Matrix a = lambda * (y.transpose() * y);
      a.diagonal().array() += tau;
      inverse_ = -a.llt().solve(Matrix::Identity(p, p));
    }
  }

  double diag() const { return diag_; }
  bool low_rank() const { return woodbury_; }
  const Matrix& factor() const { return z_; }

  // Low-rank case only: scale * correction(r) = factor() * v.
  void reduce(const Matrix& r, double scale, Matrix& v) const {
    v.noalias() = z_.transpose() * r;
    inner_.solveInPlace(v);
    v *= scale * diag_;
  }

  // Writes scale * correction(r) into out.
  void correction(const Matrix& r, double scale, Matrix& out) const {
    if (woodbury_) {
      const Matrix v = (scale * diag_) * inner_.solve(z_.transpose() * r);
      out.noalias() = z_ * v;
    } else {
      out.noalias() = scale * (inverse_ * r);
    }
  }

  Matrix solve(const Matrix& r) const {
    Matrix out(r.rows(), r.cols());
    correction(r, 1.0, out);
    return diag_ * r - out;
  }

private:
  double diag_ = 0.0;
  bool woodbury_ = false;
  Matrix z_;
  Eigen::LLT<Matrix> inner_;
  Matrix inverse_;
};

inline constexpr double kRelax = 1.8;

#if defined(__x86_64__) && defined(__GNUC__) && !defined(__clang__)
#define CSIC_KERNEL_CLONES __attribute__((target_clones("avx512f", "avx2", "default")))
#else
#define CSIC_KERNEL_CLONES
#endif

struct ColumnArgs {
  Eigen::Index p = 0;
  Eigen::Index j = 0;
  Eigen::Index d = 0;          // > 0: form the correction column as z v_j into t
  const double* z = nullptr;   // p x d, column-major
  const double* vj = nullptr;
  double* t = nullptr;         // correction column (input, or scratch when d > 0)
  const double* b = nullptr;
  const double* e = nullptr;
  double* c = nullptr;
  double* x = nullptr;
  double x_coef = 0.0;
  double thresh = 0.0;
};

struct ColumnResult {
  double consensus = 0.0;
  double affine = 0.0;
  double step = 0.0;
};

// One ADMM iteration on column j, with x = c - u:
//   a = b + x_coef x - t, projected onto 1^T a = 1
//   v = relax a + (2 - relax) c - x,  c = v - clamp(v),  x = c - clamp(v)
// and c_jj pinned to 0.
CSIC_KERNEL_CLONES ColumnResult admm_column(const ColumnArgs& k) {
  const Eigen::Index p = k.p;
  double* t = k.t;
  double* c = k.c;
  double* x = k.x;
  const double* b = k.b;
  const double* e = k.e;
  if (k.d > 0) {
#pragma omp simd
    for (Eigen::Index i = 0; i < p; ++i) t[i] = k.z[i] * k.vj[0];
    for (Eigen::Index r = 1; r < k.d; ++r) {
      const double* zr = k.z + r * p;
      const double w = k.vj[r];
#pragma omp simd
      for (Eigen::Index i = 0; i < p; ++i) t[i] += zr[i] * w;
    }
  }
  double sum = 0.0;
#pragma omp simd reduction(+ : sum)
  for (Eigen::Index i = 0; i < p; ++i) {
    t[i] = b[i] + k.x_coef * x[i] - t[i];
    sum += t[i];
  }
  const double excess = sum - 1.0;
  double csum = 0.0;
  double cons = 0.0;
  double step = 0.0;
  const Eigen::Index bounds[2][2] = {{0, k.j}, {k.j + 1, p}};
  for (const auto& seg : bounds) {
#pragma omp simd reduction(+ : csum, step) reduction(max : cons)
    for (Eigen::Index i = seg[0]; i < seg[1]; ++i) {
      const double a = t[i] - e[i] * excess;
      const double v = kRelax * a + (2.0 - kRelax) * c[i] - x[i];
      const double un = std::min(std::max(v, -k.thresh), k.thresh);
      const double cn = v - un;
      cons = std::max(cons, std::abs(a - cn));
      const double xn = cn - un;
      step += (xn - x[i]) * (xn - x[i]);
      c[i] = cn;
      x[i] = xn;
      csum += cn;
    }
  }
  const Eigen::Index j = k.j;
  const double a_jj = t[j] - e[j] * excess;
  const double xn = -(kRelax * a_jj + (2.0 - kRelax) * c[j] - x[j]);
  step += (xn - x[j]) * (xn - x[j]);
  x[j] = xn;
  c[j] = 0.0;
  return {std::max(cons, std::abs(a_jj)), std::abs(csum - 1.0), step};
}

double affine_residual(const Matrix& c) {
  return (c.colwise().sum().array() - 1.0).abs().maxCoeff();
}

}  // namespace

Matrix mean_filter_3d(const Matrix& c, std::size_t rows, std::size_t cols) {
  const auto p = static_cast<std::size_t>(c.cols());
  if (static_cast<std::size_t>(c.rows()) != p || rows * cols != p) {
    throw ValidationError("mean_filter_3d: expected a P x P matrix with P = M*N");
  }
  Matrix out = c;
  // Coefficient-index axis: down each column.
  for (std::size_t j = 0; j < p; ++j) {
    double* col = out.col(static_cast<Eigen::Index>(j)).data();
    box3(p, [&](std::size_t i) { return col[i]; }, [&](std::size_t i, double v) { col[i] = v; });
  }
  // Spatial axes: across whole columns of neighboring pixels.
  Matrix tmp(out.rows(), out.cols());
  auto spatial_pass = [&](std::size_t n_outer, std::size_t n_axis, auto pixel_of) {
    for (std::size_t o = 0; o < n_outer; ++o) {
      for (std::size_t a = 0; a < n_axis; ++a) {
        const auto dst = static_cast<Eigen::Index>(pixel_of(o, a));
        tmp.col(dst) = out.col(dst);
        double count = 1.0;
        if (a > 0) {
          tmp.col(dst) += out.col(static_cast<Eigen::Index>(pixel_of(o, a - 1)));
          count += 1.0;
        }
        if (a + 1 < n_axis) {
          tmp.col(dst) += out.col(static_cast<Eigen::Index>(pixel_of(o, a + 1)));
          count += 1.0;
        }
        tmp.col(dst) /= count;
      }
    }
    out.swap(tmp);
  };
  spatial_pass(rows, cols, [cols](std::size_t i, std::size_t j) { return i * cols + j; });
  spatial_pass(cols, rows, [cols](std::size_t j, std::size_t i) { return i * cols + j; });
  return out;
}

SrsscSolution solve_srssc(const SrsscProblem& problem) {
  problem.validate();
  const Matrix& y = problem.y;
  const Eigen::Index p = y.cols();
  const double lambda = problem.lambda;
  const double alpha = problem.alpha;
  const double rho = problem.rho;
  const double thresh = 1.0 / rho;
  const bool parallel = !is_serial();

  const QuadraticSolver solver(y, lambda, rho + alpha);
  const Matrix gram = lambda * (y.transpose() * y);
  const Vector e = solver.solve(Matrix(Vector::Ones(p)));
  const Vector e_scaled = e / e.sum();
  const double x_coef = rho * solver.diag();

  SrsscSolution sol;
  Matrix c = Matrix::Zero(p, p);
  Matrix x = Matrix::Zero(p, p);  // c - u, with u the scaled dual; u itself is never stored
  const bool low_rank = solver.low_rank();
  Matrix t(low_rank ? 0 : p, low_rank ? 0 : p);
  Matrix v;
  Matrix c_bar = Matrix::Zero(p, p);
  Matrix best_c;
  double consensus = 0.0;

  const int outer = alpha > 0.0 ? problem.outer_iters : 1;
  bool converged = false;
  for (int pass = 0; pass < outer; ++pass) {
    Matrix base_rhs = gram;
    if (alpha > 0.0) base_rhs += alpha * c_bar;
    const Matrix a_base = solver.solve(base_rhs);

    converged = false;
    double best_primal = std::numeric_limits<double>::infinity();
    for (int it = 0; it < problem.max_iter; ++it) {
      // a = a_base + rho M^{-1} (c - u), projected onto 1^T a = 1.
      if (low_rank) solver.reduce(x, rho, v);
      else solver.correction(x, rho, t);
      double cons = 0.0;
      double affine = 0.0;
      double step = 0.0;
#pragma omp parallel if (parallel)
      {
        Vector buf(low_rank ? p : 0);
#pragma omp for schedule(static) reduction(max : cons, affine) reduction(+ : step)
        for (Eigen::Index j = 0; j < p; ++j) {
          ColumnArgs args;
          args.p = p;
          args.j = j;
          if (low_rank) {
            args.d = v.rows();
            args.z = solver.factor().data();
            args.vj = v.col(j).data();
            args.t = buf.data();
          } else {
            args.t = t.col(j).data();
          }
          args.b = a_base.col(j).data();
          args.e = e_scaled.data();
          args.c = c.col(j).data();
          args.x = x.col(j).data();
          args.x_coef = x_coef;
          args.thresh = thresh;
          const auto r = admm_column(args);
          cons = std::max(cons, r.consensus);
          affine = std::max(affine, r.affine);
          step += r.step;
        }
      }
      consensus = cons;
      const double primal = std::max(cons, affine);
      sol.primal_history.push_back(primal);
      sol.merit_history.push_back(std::sqrt(step));
      ++sol.iterations;
      if (cons <= problem.tol && affine <= problem.tol) {
        converged = true;
        break;
      }
      if (primal < 0.5 * best_primal) {
        best_primal = primal;
        best_c = c;
      }
    }
    if (pass + 1 < outer) c_bar = mean_filter_3d(c, problem.rows, problem.cols);
  }

  if (!converged && best_c.size() != 0) c = best_c;

  sol.converged = converged;
  sol.g = y - y * c;
  sol.c_bar = mean_filter_3d(c, problem.rows, problem.cols);
  sol.residuals.equality = (y - y * c - sol.g).norm() / y.norm();
  sol.residuals.diagonal = c.diagonal().cwiseAbs().maxCoeff();
  sol.residuals.affine = affine_residual(c);
  sol.residuals.consensus = consensus;
  sol.c = std::move(c);
  return sol;
}

double srssc_objective(const Matrix& y, const Matrix& c, const Matrix& c_bar, double lambda,
                       double alpha) {
  return c.cwiseAbs().sum() + 0.5 * lambda * (y - y * c).squaredNorm() +
         0.5 * alpha * (c - c_bar).squaredNorm();
}

AffinityMatrix build_affinity(const Matrix& c) {
  if (c.rows() != c.cols()) throw ValidationError("build_affinity: c must be square");
  Matrix n = c.cwiseAbs();
  for (Eigen::Index j = 0; j < n.cols(); ++j) {
    const double mx = n.col(j).maxCoeff();
    if (mx > 0.0) n.col(j) /= mx;
  }
  AffinityMatrix aff;
  aff.w = n + n.transpose();
  aff.w.diagonal().setZero();
  return aff;
}

}  // namespace csic
