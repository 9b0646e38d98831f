#include "csic/evaluation.hpp"

#include "csic/errors.hpp"
#include "csic/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace csic {

ConfusionMatrix::ConfusionMatrix(int classes)
    : k_(classes), counts_(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0) {
  if (classes < 1) throw ValidationError("confusion matrix needs at least one class");
}

ConfusionMatrix::ConfusionMatrix(int classes, std::vector<std::int64_t> counts)
    : k_(classes), counts_(std::move(counts)) {
  if (classes < 1) throw ValidationError("confusion matrix needs at least one class");
  if (counts_.size() != static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes)) {
    throw ValidationError("confusion matrix count mismatch");
  }
  for (auto v : counts_)
    if (v < 0) throw ValidationError("confusion matrix counts must be nonnegative");
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (auto v : counts_) t += v;
  return t;
}

std::int64_t ConfusionMatrix::row_sum(int truth) const {
  std::int64_t t = 0;
  for (int c = 0; c < k_; ++c) t += at(truth, c);
  return t;
}

std::int64_t ConfusionMatrix::col_sum(int pred) const {
  std::int64_t t = 0;
  for (int r = 0; r < k_; ++r) t += at(r, pred);
  return t;
}

std::vector<int> optimal_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  for (const auto& row : cost)
    if (static_cast<int>(row.size()) != n) throw ValidationError("assignment: cost must be square");
  if (n == 0) return {};

  // Potentials formulation with 1-based sentinels; p[j] = row matched to column j.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assign(n, -1);
  for (int j = 1; j <= n; ++j) assign[p[j] - 1] = j - 1;
  return assign;
}

std::vector<std::vector<std::int64_t>> contingency(const std::vector<int>& pred, int k,
                                                   const LabelMap& truth) {
  if (pred.size() != truth.pixels()) throw ValidationError("prediction and truth sizes differ");
  const int classes = truth.num_classes();
  std::vector<std::vector<std::int64_t>> table(static_cast<std::size_t>(k),
                                               std::vector<std::int64_t>(static_cast<std::size_t>(classes), 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int t = truth.labels()[i];
    if (t == 0) continue;
    const int c = pred[i];
    if (c < 1 || c > k) throw ValidationError("prediction label out of range 1..k");
    ++table[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(t - 1)];
  }
  return table;
}

std::vector<int> align_labels(const ClusterAssignment& pred, const LabelMap& truth) {
  if (pred.k != truth.num_classes()) {
    throw ValidationError("align_labels: k=" + std::to_string(pred.k) + " but truth has K=" +
                          std::to_string(truth.num_classes()));
  }
  if (truth.labeled_count() == 0) throw ValidationError("align_labels: truth has no labeled pixels");
  const auto table = contingency(pred.labels, pred.k, truth);
  std::int64_t mx = 0;
  for (const auto& row : table)
    for (auto v : row) mx = std::max(mx, v);
  std::vector<std::vector<double>> cost(table.size(), std::vector<double>(table.size()));
  for (std::size_t c = 0; c < table.size(); ++c)
    for (std::size_t t = 0; t < table.size(); ++t)
      cost[c][t] = static_cast<double>(mx - table[c][t]);
  auto assign = optimal_assignment(cost);
  for (auto& a : assign) a += 1;
  return assign;
}

ConfusionMatrix confusion_matrix(const ClusterAssignment& pred, const std::vector<int>& mapping,
                                 const LabelMap& truth) {
  const int k = truth.num_classes();
  if (static_cast<int>(mapping.size()) != pred.k || pred.k != k) {
    throw ValidationError("confusion_matrix: mapping size does not match K");
  }
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const int t = truth.labels()[i];
    if (t == 0) continue;
    const int mapped = mapping[static_cast<std::size_t>(pred.labels[i] - 1)];
    ++cm.at(t - 1, mapped - 1);
  }
  return cm;
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
  const auto total = static_cast<double>(cm.total());
  if (total == 0.0) throw ValidationError("compute_metrics: confusion matrix is empty");
  const int k = cm.classes();
  Metrics m;
  double trace = 0.0;
  double pe = 0.0;
  double recall_sum = 0.0;
  int nonempty = 0;
  for (int i = 0; i < k; ++i) {
    const auto row = static_cast<double>(cm.row_sum(i));
    const auto diag = static_cast<double>(cm.at(i, i));
    trace += diag;
    pe += row * static_cast<double>(cm.col_sum(i));
    if (row > 0.0) {
      const double recall = diag / row;
      m.per_class.push_back(100.0 * recall);
      recall_sum += recall;
      ++nonempty;
    } else {
      m.per_class.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  const double po = trace / total;
  pe /= total * total;
  m.oa = 100.0 * po;
  m.aa = 100.0 * recall_sum / nonempty;
  // pe == 1 only when a single class fills both marginals; agreement is then perfect.
  m.kappa = pe < 1.0 ? 100.0 * (po - pe) / (1.0 - pe) : 100.0;
  return m;
}

LabelMap aligned_prediction(const ClusterAssignment& pred, const std::vector<int>& mapping,
                            std::size_t rows, std::size_t cols) {
  std::vector<int> out;
  out.reserve(pred.labels.size());
  for (int l : pred.labels) out.push_back(mapping.at(static_cast<std::size_t>(l - 1)));
  return LabelMap(rows, cols, std::move(out));
}

const std::vector<Rgb>& default_palette() {
  static const std::vector<Rgb> palette = {
      {230, 25, 75},  {60, 180, 75},   {255, 225, 25}, {0, 130, 200},  {245, 130, 48},
      {145, 30, 180}, {70, 240, 240},  {240, 50, 230}, {210, 245, 60}, {250, 190, 212},
      {0, 128, 128},  {220, 190, 255}, {170, 110, 40}, {255, 250, 200}, {128, 0, 0},
      {170, 255, 195}};
  return palette;
}

namespace {
std::vector<std::uint8_t> netpbm_header(const char* magic, const LabelMap& labels) {
  const std::string h = std::string(magic) + "\n" + std::to_string(labels.cols()) + " " +
                        std::to_string(labels.rows()) + "\n255\n";
  return {h.begin(), h.end()};
}
}  // namespace

std::vector<std::uint8_t> encode_pgm(const LabelMap& labels) {
  auto out = netpbm_header("P5", labels);
  const int mx = std::max(1, labels.num_classes());
  for (int l : labels.labels()) out.push_back(static_cast<std::uint8_t>(l * 255 / mx));
  return out;
}

std::vector<std::uint8_t> encode_ppm(const LabelMap& labels, const std::vector<Rgb>& palette) {
  if (palette.empty()) throw ValidationError("encode_ppm: empty palette");
  auto out = netpbm_header("P6", labels);
  for (int l : labels.labels()) {
    const Rgb c = l == 0 ? Rgb{0, 0, 0} : palette[static_cast<std::size_t>(l - 1) % palette.size()];
    out.insert(out.end(), {c.r, c.g, c.b});
  }
  return out;
}

void render_cluster_map(const LabelMap& labels, const std::filesystem::path& pgm_path,
                        const std::filesystem::path& ppm_path, const std::vector<Rgb>& palette) {
  write_file(pgm_path, encode_pgm(labels));
  write_file(ppm_path, encode_ppm(labels, palette));
}

double TimingReport::total_ms() const {
  double t = 0.0;
  for (const auto& [_, ms] : stages_) t += ms;
  return t;
}

double TimingReport::stage_ms(const std::string& stage) const {
  double t = 0.0;
  for (const auto& [name, ms] : stages_)
    if (name == stage) t += ms;
  return t;
}

nlohmann::ordered_json TimingReport::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, ms] : stages_) j[name] = ms;
  j["total"] = total_ms();
  return j;
}

double time_reduction_percent(double faster, double baseline) {
  if (!(baseline > 0.0)) throw ValidationError("time_reduction_percent: baseline must be positive");
  return 100.0 * (1.0 - faster / baseline);
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

nlohmann::ordered_json metrics_to_json(const Metrics& m, const ConfusionMatrix& cm) {
  nlohmann::ordered_json j;
  j["oa"] = m.oa;
  j["aa"] = m.aa;
  j["kappa"] = m.kappa;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < m.per_class.size(); ++i) {
    const auto key = std::to_string(i + 1);
    if (std::isnan(m.per_class[i])) per[key] = nullptr;
    else per[key] = m.per_class[i];
  }
  j["per_class"] = per;
  nlohmann::ordered_json conf = nlohmann::ordered_json::array();
  for (int r = 0; r < cm.classes(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int c = 0; c < cm.classes(); ++c) row.push_back(cm.at(r, c));
    conf.push_back(row);
  }
  j["confusion"] = conf;
  return j;
}

}  // namespace csic
