#pragma once

#include "csic/spectral.hpp"
#include "csic/types.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace csic {

// K x K counts; rows are ground-truth classes, columns aligned predictions.
class ConfusionMatrix {
public:
  explicit ConfusionMatrix(int classes);
  ConfusionMatrix(int classes, std::vector<std::int64_t> counts);

  int classes() const { return k_; }
  std::int64_t& at(int truth, int pred) { return counts_[index(truth, pred)]; }
  std::int64_t at(int truth, int pred) const { return counts_[index(truth, pred)]; }
  std::int64_t total() const;
  std::int64_t row_sum(int truth) const;
  std::int64_t col_sum(int pred) const;

private:
  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(c); }
  int k_;
  std::vector<std::int64_t> counts_;
};

struct Metrics {
  double oa = 0.0;
  double aa = 0.0;
  double kappa = 0.0;
  // Recall per ground-truth class in percent; NaN for classes with no samples.
  std::vector<double> per_class;
};

// Minimum-cost perfect matching on a square cost matrix (Hungarian method).
// Returns column assigned to each row.
std::vector<int> optimal_assignment(const std::vector<std::vector<double>>& cost);

// contingency[c][t] = labeled pixels with predicted cluster c+1 and class t+1.
std::vector<std::vector<std::int64_t>> contingency(const std::vector<int>& pred, int k,
                                                   const LabelMap& truth);

// mapping[c] = class (1..K) assigned to cluster c+1, maximizing agreement.
std::vector<int> align_labels(const ClusterAssignment& pred, const LabelMap& truth);

ConfusionMatrix confusion_matrix(const ClusterAssignment& pred, const std::vector<int>& mapping,
                                 const LabelMap& truth);

Metrics compute_metrics(const ConfusionMatrix& cm);

// Predicted map with cluster ids already remapped to class ids; pixels whose
// truth label is 0 can be masked out by passing the truth map.
LabelMap aligned_prediction(const ClusterAssignment& pred, const std::vector<int>& mapping,
                            std::size_t rows, std::size_t cols);

struct Rgb {
  std::uint8_t r, g, b;
};
const std::vector<Rgb>& default_palette();

// P5 grayscale (label * 255 / max_label) and P6 colour maps; label 0 is black.
std::vector<std::uint8_t> encode_pgm(const LabelMap& labels);
std::vector<std::uint8_t> encode_ppm(const LabelMap& labels, const std::vector<Rgb>& palette = default_palette());
void render_cluster_map(const LabelMap& labels, const std::filesystem::path& pgm_path,
                        const std::filesystem::path& ppm_path,
                        const std::vector<Rgb>& palette = default_palette());

// Wall-clock stage timings in milliseconds, in insertion order.
class TimingReport {
public:
  void add(const std::string& stage, double ms) { stages_.emplace_back(stage, ms); }
  const std::vector<std::pair<std::string, double>>& stages() const { return stages_; }
  double total_ms() const;
  double stage_ms(const std::string& stage) const;
  nlohmann::ordered_json to_json() const;

private:
  std::vector<std::pair<std::string, double>> stages_;
};

class StageTimer {
public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

// 100 * (1 - faster / baseline).
double time_reduction_percent(double faster, double baseline);

double round2(double x);

nlohmann::ordered_json metrics_to_json(const Metrics& m, const ConfusionMatrix& cm);

}  // namespace csic
