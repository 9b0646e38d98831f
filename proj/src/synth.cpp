#include "csic/synth.hpp"

#include "csic/errors.hpp"
#include "csic/rng.hpp"

#include <algorithm>
#include <cmath>

namespace csic {

std::pair<SpectralCube, LabelMap> synth_cube(std::uint64_t seed, std::size_t rows,
                                             std::size_t cols, std::size_t bands, int classes,
                                             double noise_sigma) {
  if (rows == 0 || cols == 0 || bands == 0) throw ValidationError("synth: dimensions must be positive");
  if (classes < 1) throw ValidationError("synth: need at least one class");
  const std::size_t pixels = rows * cols;
  const auto k = static_cast<std::size_t>(classes);
  if (k > pixels) throw ValidationError("synth: more classes than pixels");
  if (bands < k) throw ValidationError("synth: need at least as many bands as classes");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ValidationError("synth: noise sigma must be finite and nonnegative");
  }

  const Rng root(seed);
  Rng basis_rng = root.child("basis");
  Rng coef_rng = root.child("coef");
  Rng noise_rng = root.child("noise");
  const std::size_t dim = std::min(kSynthSubspaceDim, bands);

  std::vector<Matrix> bases(k, Matrix(bands, dim));
  for (auto& b : bases)
    for (Eigen::Index c = 0; c < b.cols(); ++c)
      for (Eigen::Index r = 0; r < b.rows(); ++r) b(r, c) = basis_rng.uniform();

  std::vector<int> labels(pixels);
  std::vector<double> values(pixels * bands);
  Vector coef(dim);
  for (std::size_t p = 0; p < pixels; ++p) {
    const std::size_t cls = p * k / pixels;
    labels[p] = static_cast<int>(cls) + 1;
    for (auto& a : coef) a = coef_rng.uniform();
    const Vector x = bases[cls] * coef;
    for (std::size_t b = 0; b < bands; ++b) {
      double v = x(static_cast<Eigen::Index>(b));
      if (noise_sigma > 0.0) v = std::max(0.0, v + noise_sigma * noise_rng.normal());
      values[p * bands + b] = v;
    }
  }
  return {SpectralCube(rows, cols, bands, std::move(values)),
          LabelMap(rows, cols, std::move(labels))};
}

}  // namespace csic
