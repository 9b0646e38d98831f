#pragma once

#include "csic/types.hpp"

#include <cstdint>
#include <vector>

namespace csic {

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

// Per-pixel binary code T[s][p][k], stored s-major then pixel then band.
class CodeTensor {
public:
  CodeTensor(std::size_t snapshots, std::size_t pixels, std::size_t bands,
             std::vector<std::uint8_t> entries);

  // Same pattern row at every pixel.
  static CodeTensor broadcast(const CodingPattern& pattern, std::size_t pixels);

  std::size_t snapshots() const { return snapshots_; }
  std::size_t pixels() const { return pixels_; }
  std::size_t bands() const { return bands_; }
  std::uint8_t at(std::size_t s, std::size_t p, std::size_t k) const {
    return entries_[(s * pixels_ + p) * bands_ + k];
  }

private:
  std::size_t snapshots_;
  std::size_t pixels_;
  std::size_t bands_;
  std::vector<std::uint8_t> entries_;
};

// y[s][p] = sum_{k=0}^{L-1} H[s][k] * f_p[k] + w[s][p], w ~ N(0, sigma^2) i.i.d.
// The band sum runs in increasing k; noise sample (s, p) is draw s*MN + p of
// the noise stream, so results do not depend on scheduling.
MeasurementSet sense(const SpectralCube& cube, const CodingPattern& pattern, const NoiseSpec& noise);

// Same sum with a pixel-dependent code T[s][p][k].
MeasurementSet spatially_varying_sense(const SpectralCube& cube, const CodeTensor& code,
                                       const NoiseSpec& noise);

// sigma giving the requested SNR (dB) relative to the RMS of `clean`.
double sigma_for_snr(const Matrix& clean, double snr_db);

}  // namespace csic
