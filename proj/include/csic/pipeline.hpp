#pragma once

#include "csic/evaluation.hpp"
#include "csic/io.hpp"
#include "csic/srssc.hpp"
#include "csic/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace csic {

inline constexpr const char* kVersionString = "0.1.0";

enum class CodeMode { none, random, gp };

std::string to_string(CodeMode mode);
CodeMode parse_code_mode(const std::string& s);

struct SynthSpec {
  std::size_t rows = 20;
  std::size_t cols = 20;
  std::size_t bands = 32;
  int classes = 4;
  double sigma = 0.0;
};

struct PipelineSpec {
  // Exactly one of cube_path / synth is used; cube_path requires labels_path.
  std::optional<fs::path> cube_path;
  std::optional<fs::path> labels_path;
  std::optional<LabelCrop> crop;
  std::vector<int> keep_classes;
  std::optional<SynthSpec> synth;

  CodeMode mode = CodeMode::gp;
  std::size_t snapshots = 8;
  std::size_t bandwidth = 4;
  double noise_sigma = 0.0;
  RunConfig config;
  fs::path out_dir = "run";

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static PipelineSpec from_json(const nlohmann::json& j);
};

// Stage failure; exit_code follows the CLI convention (2 validation, 4 I/O).
class PipelineError : public std::runtime_error {
public:
  PipelineError(std::string stage, const std::string& cause, int exit_code)
      : std::runtime_error("stage '" + stage + "' failed: " + cause),
        stage_(std::move(stage)),
        exit_code_(exit_code) {}
  const std::string& stage() const { return stage_; }
  int exit_code() const { return exit_code_; }

private:
  std::string stage_;
  int exit_code_;
};

struct PipelineResult {
  Metrics metrics;
  ConfusionMatrix confusion{1};
  TimingReport timing;
  bool converged = true;
  int iterations = 0;
  SrsscResiduals residuals;
};

// Independent per-stage seed derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& stage);

// Crops rows [row0, row0+rows) x cols [col0, col0+cols) of a cube.
SpectralCube crop_cube(const SpectralCube& cube, const LabelCrop& crop);

// SHA-256 of the affinity matrix as little-endian float64, column-major.
std::string affinity_digest(const AffinityMatrix& affinity);

// Runs codegen -> sense -> solve -> cluster -> align -> metrics and writes
// pattern.csv/.json, meas.smeas, affinity.sha256, labels.csv, map.pgm,
// map.ppm, metrics.json, timing.json, solver.json and run.json into out_dir.
PipelineResult run_pipeline(const PipelineSpec& spec);

// Side-by-side metrics of two run directories (A relative to B).
nlohmann::ordered_json compare_runs(const fs::path& dir_a, const fs::path& dir_b);

}  // namespace csic
