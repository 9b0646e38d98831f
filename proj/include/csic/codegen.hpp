#pragma once

#include "csic/types.hpp"

#include <cstdint>
#include <vector>

namespace csic {

// Bounded rejection for zero or duplicate rows.
inline constexpr int kMaxRowRetries = 64;

struct PatternScore {
  // Sum over adjacent band pairs of (H[:,k] . H[:,k+1])^2.
  double band_correlation = 0.0;
  // Sum over ordered snapshot pairs s != s' of (H[s,:] . H[s',:])^2.
  double snapshot_correlation = 0.0;
  int coverage_min = 0;
  int coverage_max = 0;

  double total() const { return band_correlation + snapshot_correlation; }
  int coverage_spread() const { return coverage_max - coverage_min; }
};

// Greedy-pursuit bookkeeping for one snapshot s_it >= 1, captured just before
// the row is committed.
struct GPState {
  std::size_t snapshot = 0;
  std::vector<std::vector<std::uint8_t>> committed;  // rows 0..snapshot-1
  // window_scores[w] = committed ones inside bands [w, w+bandwidth-1].
  std::vector<int> window_scores;
  std::vector<std::size_t> window_candidates;  // argmin of window_scores
  BandWindow window{0, 0};
  // Adjacent-band product scores for each in-window band, as of the last
  // refinement step.
  std::vector<int> adjacency_scores;
  std::vector<std::size_t> refine_candidates;  // band indices, argmin of adjacency_scores
  std::vector<std::uint8_t> row;               // committed row
};

CodingPattern random_pattern(std::uint64_t seed, std::size_t snapshots, std::size_t bands,
                             std::size_t bandwidth);

// Greedy pursuit designer. When `trace` is non-null it receives one GPState per
// snapshot after the first.
CodingPattern gp_pattern(std::uint64_t seed, std::size_t snapshots, std::size_t bands,
                         std::size_t bandwidth, std::vector<GPState>* trace = nullptr);

PatternScore score_pattern(const CodingPattern& pattern);

// Same sums on an arbitrary S x L 0/1 matrix, without pattern invariants.
PatternScore score_matrix(const Matrix& h);

}  // namespace csic
