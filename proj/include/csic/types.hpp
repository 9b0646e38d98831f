#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace csic {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// M x N x L datacube. Values are pixel-major: pixel p = i*N + j holds its L
// spectral samples contiguously at [p*L, (p+1)*L).
class SpectralCube {
public:
  SpectralCube(std::size_t rows, std::size_t cols, std::size_t bands, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t bands() const { return bands_; }
  std::size_t pixels() const { return rows_ * cols_; }
  const std::vector<double>& values() const { return values_; }

  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[(i * cols_ + j) * bands_ + k];
  }
  std::span<const double> spectrum(std::size_t pixel) const {
    return {values_.data() + pixel * bands_, bands_};
  }

  // L x MN view; column p is the spectrum of pixel p.
  Eigen::Map<const Matrix> spectra() const {
    return {values_.data(), static_cast<Eigen::Index>(bands_), static_cast<Eigen::Index>(pixels())};
  }

  bool operator==(const SpectralCube&) const = default;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t bands_;
  std::vector<double> values_;
};

// Ground-truth (or predicted) class map. 0 = unlabeled, 1..K = class.
class LabelMap {
public:
  LabelMap(std::size_t rows, std::size_t cols, std::vector<int> labels);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t pixels() const { return rows_ * cols_; }
  const std::vector<int>& labels() const { return labels_; }
  int at(std::size_t i, std::size_t j) const { return labels_[i * cols_ + j]; }
  int num_classes() const { return num_classes_; }
  std::size_t labeled_count() const;

  // Throws ValidationError unless K >= 2.
  void require_clusterable() const;

  bool operator==(const LabelMap&) const = default;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<int> labels_;
  int num_classes_;
};

struct BandWindow {
  std::size_t first;  // lambda_1
  std::size_t last;   // lambda_2, inclusive
  bool operator==(const BandWindow&) const = default;
};

// S x L binary coded aperture. Row s may be nonzero only inside windows[s],
// and every window spans exactly `bandwidth` bands.
class CodingPattern {
public:
  CodingPattern(std::size_t snapshots, std::size_t bands, std::size_t bandwidth,
                std::vector<std::uint8_t> entries, std::vector<BandWindow> windows);

  std::size_t snapshots() const { return snapshots_; }
  std::size_t bands() const { return bands_; }
  std::size_t bandwidth() const { return bandwidth_; }
  const std::vector<std::uint8_t>& entries() const { return entries_; }
  const std::vector<BandWindow>& windows() const { return windows_; }
  std::uint8_t at(std::size_t s, std::size_t k) const { return entries_[s * bands_ + k]; }
  std::span<const std::uint8_t> row(std::size_t s) const {
    return {entries_.data() + s * bands_, bands_};
  }

  Matrix as_matrix() const;
  std::vector<int> column_sums() const;

  bool operator==(const CodingPattern&) const = default;

private:
  std::size_t snapshots_;
  std::size_t bands_;
  std::size_t bandwidth_;
  std::vector<std::uint8_t> entries_;
  std::vector<BandWindow> windows_;
};

// S x MN compressed measurements; column p is the compressed signature of
// pixel p. pattern_hash is all zeros when no single pattern produced the data.
struct MeasurementSet {
  std::size_t rows = 0;  // M
  std::size_t cols = 0;  // N
  Matrix data;           // S x (M*N)
  double noise_sigma = 0.0;
  std::array<std::uint8_t, 32> pattern_hash{};

  std::size_t snapshots() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t pixels() const { return rows * cols; }
  std::string pattern_ref() const;  // lowercase hex of pattern_hash

  void validate() const;
};

struct RunConfig {
  std::uint64_t seed = 0;
  // Unset selects the data-driven default lambda = 10 / mu.
  std::optional<double> lambda;
  double alpha = 0.0;
  // Unset selects rho = 10 * lambda.
  std::optional<double> rho;
  int max_iter = 5000;
  double tol = 1e-4;
  int outer_iters = 3;
  int k = 0;
  int kmeans_restarts = 20;

  void validate() const;
};

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace csic
