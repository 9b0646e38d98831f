#include "csic/sensing.hpp"

#include "csic/errors.hpp"
#include "csic/io.hpp"
#include "csic/parallel.hpp"
#include "csic/rng.hpp"

#include <cmath>

namespace csic {

CodeTensor::CodeTensor(std::size_t snapshots, std::size_t pixels, std::size_t bands,
                       std::vector<std::uint8_t> entries)
    : snapshots_(snapshots), pixels_(pixels), bands_(bands), entries_(std::move(entries)) {
  if (snapshots_ == 0 || pixels_ == 0 || bands_ == 0) {
    throw ValidationError("code tensor dimensions must be positive");
  }
  if (entries_.size() != snapshots_ * pixels_ * bands_) {
    throw ValidationError("code tensor entry count mismatch");
  }
  for (auto v : entries_)
    if (v > 1) throw ValidationError("code tensor entries must be 0 or 1");
}

CodeTensor CodeTensor::broadcast(const CodingPattern& pattern, std::size_t pixels) {
  const std::size_t s_count = pattern.snapshots();
  const std::size_t l = pattern.bands();
  std::vector<std::uint8_t> entries(s_count * pixels * l);
  for (std::size_t s = 0; s < s_count; ++s) {
    const auto row = pattern.row(s);
    for (std::size_t p = 0; p < pixels; ++p)
      std::copy(row.begin(), row.end(), entries.begin() + static_cast<std::ptrdiff_t>((s * pixels + p) * l));
  }
  return CodeTensor(s_count, pixels, l, std::move(entries));
}

namespace {

void validate_noise(const NoiseSpec& noise) {
  if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) {
    throw ValidationError("noise sigma must be finite and nonnegative");
  }
}

template <typename CodeAt>
MeasurementSet integrate(const SpectralCube& cube, std::size_t snapshots, const NoiseSpec& noise,
                         CodeAt code_at) {
  validate_noise(noise);
  const std::size_t pixels = cube.pixels();
  const std::size_t bands = cube.bands();
  MeasurementSet meas;
  meas.rows = cube.rows();
  meas.cols = cube.cols();
  meas.noise_sigma = noise.sigma;
  meas.data.resize(static_cast<Eigen::Index>(snapshots), static_cast<Eigen::Index>(pixels));
  const Rng rng(noise.seed);
  const auto n = static_cast<std::ptrdiff_t>(pixels);

#pragma omp parallel for schedule(static) if (!is_serial())
  for (std::ptrdiff_t pi = 0; pi < n; ++pi) {
    const auto p = static_cast<std::size_t>(pi);
    const auto f = cube.spectrum(p);
    for (std::size_t s = 0; s < snapshots; ++s) {
      double acc = 0.0;
      for (std::size_t k = 0; k < bands; ++k) acc += code_at(s, p, k) * f[k];
      if (noise.sigma > 0.0) acc += noise.sigma * rng.normal_at(s * pixels + p);
      meas.data(static_cast<Eigen::Index>(s), pi) = acc;
    }
  }
  return meas;
}

}  // namespace

MeasurementSet sense(const SpectralCube& cube, const CodingPattern& pattern, const NoiseSpec& noise) {
  if (pattern.bands() != cube.bands()) {
    throw ValidationError("sense: pattern has " + std::to_string(pattern.bands()) +
                          " bands, cube has " + std::to_string(cube.bands()));
  }
  auto meas = integrate(cube, pattern.snapshots(), noise,
                        [&](std::size_t s, std::size_t, std::size_t k) {
                          return static_cast<double>(pattern.at(s, k));
                        });
  meas.pattern_hash = pattern_digest(pattern);
  return meas;
}

MeasurementSet spatially_varying_sense(const SpectralCube& cube, const CodeTensor& code,
                                       const NoiseSpec& noise) {
  if (code.pixels() != cube.pixels() || code.bands() != cube.bands()) {
    throw ValidationError("spatially_varying_sense: code tensor dims do not match cube");
  }
  return integrate(cube, code.snapshots(), noise,
                   [&](std::size_t s, std::size_t p, std::size_t k) {
                     return static_cast<double>(code.at(s, p, k));
                   });
}

double sigma_for_snr(const Matrix& clean, double snr_db) {
  if (clean.size() == 0) throw ValidationError("sigma_for_snr: empty signal");
  const double rms = std::sqrt(clean.squaredNorm() / static_cast<double>(clean.size()));
  return rms / std::pow(10.0, snr_db / 20.0);
}

}  // namespace csic
