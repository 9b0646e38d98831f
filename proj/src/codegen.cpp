#include "csic/codegen.hpp"

#include "csic/errors.hpp"
#include "csic/rng.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace csic {

namespace {

using Row = std::vector<std::uint8_t>;

void check_dims(std::size_t snapshots, std::size_t bands, std::size_t bandwidth) {
  if (snapshots == 0) throw ValidationError("codegen: need at least one snapshot");
  if (bands == 0) throw ValidationError("codegen: need at least one band");
  if (bandwidth == 0 || bandwidth > bands) {
    throw ValidationError("codegen: bandwidth must lie in [1, L]");
  }
}

bool is_zero(const Row& r) {
  return std::none_of(r.begin(), r.end(), [](std::uint8_t v) { return v != 0; });
}

void fill_window(Row& row, BandWindow w, Rng& rng) {
  std::fill(row.begin(), row.end(), 0);
  for (std::size_t k = w.first; k <= w.last; ++k) row[k] = rng.bernoulli(0.5) ? 1 : 0;
}

template <typename T>
std::vector<std::size_t> argmin_set(const std::vector<T>& v, std::size_t offset = 0) {
  std::vector<std::size_t> out;
  T best = std::numeric_limits<T>::max();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < best) {
      best = v[i];
      out.clear();
    }
    if (v[i] == best) out.push_back(i + offset);
  }
  return out;
}

class PatternBuilder {
public:
  PatternBuilder(std::size_t bands, std::size_t bandwidth) : bands_(bands), bandwidth_(bandwidth) {}

  bool accept(const Row& row) const { return !is_zero(row) && !seen_.contains(row); }

  void commit(Row row, BandWindow w) {
    seen_.insert(row);
    entries_.insert(entries_.end(), row.begin(), row.end());
    rows_.push_back(std::move(row));
    windows_.push_back(w);
  }

  const std::vector<Row>& rows() const { return rows_; }

  CodingPattern finish() && {
    return CodingPattern(rows_.size(), bands_, bandwidth_, std::move(entries_), std::move(windows_));
  }

private:
  std::size_t bands_;
  std::size_t bandwidth_;
  std::set<Row> seen_;
  std::vector<Row> rows_;
  std::vector<std::uint8_t> entries_;
  std::vector<BandWindow> windows_;
};

[[noreturn]] void retries_exhausted(std::size_t s) {
  throw ValidationError("codegen: snapshot " + std::to_string(s) + " still zero or duplicate after " +
                        std::to_string(kMaxRowRetries) + " redraws");
}

// Random window start and fair-coin entries; shared by random_pattern and
// the first greedy-pursuit snapshot.
void draw_random_row(PatternBuilder& b, Rng& rng, std::size_t s, std::size_t bands,
                     std::size_t bandwidth) {
  Row row(bands, 0);
  for (int attempt = 0; attempt < kMaxRowRetries; ++attempt) {
    const std::size_t start = rng.below(bands - bandwidth + 1);
    const BandWindow w{start, start + bandwidth - 1};
    fill_window(row, w, rng);
    if (b.accept(row)) {
      b.commit(row, w);
      return;
    }
  }
  retries_exhausted(s);
}

}  // namespace

CodingPattern random_pattern(std::uint64_t seed, std::size_t snapshots, std::size_t bands,
                             std::size_t bandwidth) {
  check_dims(snapshots, bands, bandwidth);
  const Rng root(seed);
  PatternBuilder b(bands, bandwidth);
  for (std::size_t s = 0; s < snapshots; ++s) {
    Rng rng = root.child(s);
    draw_random_row(b, rng, s, bands, bandwidth);
  }
  return std::move(b).finish();
}

CodingPattern gp_pattern(std::uint64_t seed, std::size_t snapshots, std::size_t bands,
                         std::size_t bandwidth, std::vector<GPState>* trace) {
  check_dims(snapshots, bands, bandwidth);
  const Rng root(seed);
  PatternBuilder b(bands, bandwidth);
  {
    Rng rng = root.child(std::uint64_t{0});
    draw_random_row(b, rng, 0, bands, bandwidth);
  }

  const std::size_t starts = bands - bandwidth + 1;
  std::vector<int> coverage(bands, 0);
  for (std::size_t k = 0; k < bands; ++k) coverage[k] = b.rows()[0][k];

  for (std::size_t s = 1; s < snapshots; ++s) {
    Rng rng = root.child(s);
    GPState state;
    state.snapshot = s;

    // Coverage of each admissible window by the committed snapshots.
    state.window_scores.assign(starts, 0);
    for (std::size_t w = 0; w < starts; ++w)
      for (std::size_t k = w; k < w + bandwidth; ++k) state.window_scores[w] += coverage[k];
    state.window_candidates = argmin_set(state.window_scores);

    // Adjacent-band products summed over committed snapshots.
    std::vector<int> committed_adj(bands, 0);
    for (const auto& r : b.rows())
      for (std::size_t k = 1; k < bands; ++k) committed_adj[k] += r[k - 1] * r[k];

    Row row(bands, 0);
    bool done = false;
    for (int attempt = 0; attempt < kMaxRowRetries && !done; ++attempt) {
      const auto& cand = state.window_candidates;
      const std::size_t start = cand[rng.below(cand.size())];
      const BandWindow w{start, start + bandwidth - 1};
      fill_window(row, w, rng);

      for (std::size_t step = 0; step < bandwidth / 2; ++step) {
        std::vector<int> adj(bandwidth, 0);
        for (std::size_t k = w.first; k <= w.last; ++k) {
          if (k > 0) adj[k - w.first] = committed_adj[k] + row[k - 1] * row[k];
        }
        state.adjacency_scores = adj;
        state.refine_candidates = argmin_set(adj, w.first);
        const auto& rc = state.refine_candidates;
        const std::size_t band = rc[rng.below(rc.size())];
        row[band] = rng.bernoulli(0.5) ? 1 : 0;
      }

      if (b.accept(row)) {
        state.window = w;
        state.row = row;
        state.committed = b.rows();
        b.commit(row, w);
        for (std::size_t k = 0; k < bands; ++k) coverage[k] += row[k];
        done = true;
      }
    }
    if (!done) retries_exhausted(s);
    if (trace) trace->push_back(std::move(state));
  }
  return std::move(b).finish();
}

PatternScore score_pattern(const CodingPattern& pattern) { return score_matrix(pattern.as_matrix()); }

PatternScore score_matrix(const Matrix& h) {
  if (h.size() == 0) throw ValidationError("score_matrix: empty matrix");
  PatternScore score;
  for (Eigen::Index k = 0; k + 1 < h.cols(); ++k) {
    const double ip = h.col(k).dot(h.col(k + 1));
    score.band_correlation += ip * ip;
  }
  const Matrix gram = h * h.transpose();
  for (Eigen::Index s = 0; s < gram.rows(); ++s)
    for (Eigen::Index t = 0; t < gram.cols(); ++t)
      if (s != t) score.snapshot_correlation += gram(s, t) * gram(s, t);
  const Eigen::RowVectorXd sums = h.colwise().sum();
  score.coverage_min = static_cast<int>(sums.minCoeff());
  score.coverage_max = static_cast<int>(sums.maxCoeff());
  return score;
}

}  // namespace csic
