#pragma once

#include "csic/types.hpp"

#include <cstdint>
#include <utility>

namespace csic {

inline constexpr std::size_t kSynthSubspaceDim = 3;

// Synthetic test scene: k random nonnegative 3-dimensional spectral subspaces
// of R^L, one per class, with pixels assigned to classes in contiguous
// row-major runs (class c owns pixels [c*MN/k, (c+1)*MN/k)). Basis vectors and
// coefficients are drawn uniform on [0, 1), so every noiseless spectrum is
// nonnegative and lies exactly in its class subspace. Additive N(0, sigma^2)
// noise is clamped at 0 to keep the cube nonnegative.
std::pair<SpectralCube, LabelMap> synth_cube(std::uint64_t seed, std::size_t rows,
                                             std::size_t cols, std::size_t bands, int classes,
                                             double noise_sigma);

}  // namespace csic
