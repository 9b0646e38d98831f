#include "csic/types.hpp"

#include "csic/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace csic {

SpectralCube::SpectralCube(std::size_t rows, std::size_t cols, std::size_t bands,
                           std::vector<double> values)
    : rows_(rows), cols_(cols), bands_(bands), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0 || bands_ == 0) {
    throw ValidationError("cube dimensions must be positive");
  }
  if (values_.size() != rows_ * cols_ * bands_) {
    throw ValidationError("cube has " + std::to_string(values_.size()) + " values, expected " +
                          std::to_string(rows_ * cols_ * bands_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw ValidationError("cube value " + std::to_string(i) + " is not finite");
    }
    if (values_[i] < 0.0) {
      throw ValidationError("cube value " + std::to_string(i) + " is negative");
    }
  }
}

LabelMap::LabelMap(std::size_t rows, std::size_t cols, std::vector<int> labels)
    : rows_(rows), cols_(cols), labels_(std::move(labels)), num_classes_(0) {
  if (rows_ == 0 || cols_ == 0) throw ValidationError("label map dimensions must be positive");
  if (labels_.size() != rows_ * cols_) {
    throw ValidationError("label map has " + std::to_string(labels_.size()) +
                          " entries, expected " + std::to_string(rows_ * cols_));
  }
  for (int l : labels_) {
    if (l < 0) throw ValidationError("negative label " + std::to_string(l));
    num_classes_ = std::max(num_classes_, l);
  }
}

std::size_t LabelMap::labeled_count() const {
  return static_cast<std::size_t>(std::count_if(labels_.begin(), labels_.end(),
                                                [](int l) { return l > 0; }));
}

void LabelMap::require_clusterable() const {
  if (num_classes_ < 2) {
    throw ValidationError("label map has K=" + std::to_string(num_classes_) +
                          " classes; clustering needs K >= 2");
  }
}

CodingPattern::CodingPattern(std::size_t snapshots, std::size_t bands, std::size_t bandwidth,
                             std::vector<std::uint8_t> entries, std::vector<BandWindow> windows)
    : snapshots_(snapshots),
      bands_(bands),
      bandwidth_(bandwidth),
      entries_(std::move(entries)),
      windows_(std::move(windows)) {
  if (snapshots_ == 0) throw ValidationError("pattern needs at least one snapshot");
  if (bands_ == 0) throw ValidationError("pattern needs at least one band");
  if (bandwidth_ == 0 || bandwidth_ > bands_) {
    throw ValidationError("bandwidth must lie in [1, L]");
  }
  if (entries_.size() != snapshots_ * bands_) throw ValidationError("pattern entry count mismatch");
  if (windows_.size() != snapshots_) throw ValidationError("pattern window count mismatch");

  std::set<std::vector<std::uint8_t>> seen;
  for (std::size_t s = 0; s < snapshots_; ++s) {
    const auto& w = windows_[s];
    if (w.first > w.last || w.last >= bands_ || w.last - w.first + 1 != bandwidth_) {
      throw ValidationError("snapshot " + std::to_string(s) + " has an invalid band window");
    }
    bool any = false;
    for (std::size_t k = 0; k < bands_; ++k) {
      const auto v = at(s, k);
      if (v > 1) throw ValidationError("pattern entries must be 0 or 1");
      if (v && (k < w.first || k > w.last)) {
        throw ValidationError("snapshot " + std::to_string(s) + " has a nonzero outside its window");
      }
      any = any || v;
    }
    if (!any) throw ValidationError("snapshot " + std::to_string(s) + " is all zero");
    auto r = row(s);
    if (!seen.emplace(r.begin(), r.end()).second) {
      throw ValidationError("snapshot " + std::to_string(s) + " duplicates an earlier row");
    }
  }
}

Matrix CodingPattern::as_matrix() const {
  Matrix h(snapshots_, bands_);
  for (std::size_t s = 0; s < snapshots_; ++s)
    for (std::size_t k = 0; k < bands_; ++k) h(s, k) = at(s, k);
  return h;
}

std::vector<int> CodingPattern::column_sums() const {
  std::vector<int> sums(bands_, 0);
  for (std::size_t s = 0; s < snapshots_; ++s)
    for (std::size_t k = 0; k < bands_; ++k) sums[k] += at(s, k);
  return sums;
}

std::string MeasurementSet::pattern_ref() const { return to_hex(pattern_hash); }

void MeasurementSet::validate() const {
  if (rows == 0 || cols == 0) throw ValidationError("measurement spatial dims must be positive");
  if (data.rows() == 0) throw ValidationError("measurement set has no snapshots");
  if (static_cast<std::size_t>(data.cols()) != pixels()) {
    throw ValidationError("measurement column count does not match M*N");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ValidationError("noise sigma must be finite and nonnegative");
  }
  if (!data.allFinite()) throw ValidationError("measurement data contains non-finite values");
}

void RunConfig::validate() const {
  if (lambda && !(*lambda > 0.0)) throw ValidationError("lambda must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be >= 0");
  if (rho && !(*rho > 0.0)) throw ValidationError("rho must be positive");
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (outer_iters < 1) throw ValidationError("outer_iters must be >= 1");
  if (kmeans_restarts < 1) throw ValidationError("kmeans_restarts must be >= 1");
  if (k < 0) throw ValidationError("k must be positive");
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

}  // namespace csic
