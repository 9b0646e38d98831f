// csic: compressive spectral image clustering command-line tool.
//
//   csic synth     write a synthetic cube + ground-truth labels
//   csic codegen   random or greedy-pursuit coded apertures
//   csic sense     simulate compressive measurements
//   csic cluster   SR-SSC + spectral clustering of measurements or a full cube
//   csic eval      align a clustering to ground truth and score it
//   csic pipeline  end-to-end run with artifacts
//   csic compare   side-by-side metrics of two pipeline runs
//
// Exit codes: 0 ok, 2 validation, 3 solver did not converge (results still
// written), 4 I/O.

#include "csic/codegen.hpp"
#include "csic/errors.hpp"
#include "csic/evaluation.hpp"
#include "csic/io.hpp"
#include "csic/parallel.hpp"
#include "csic/pipeline.hpp"
#include "csic/sensing.hpp"
#include "csic/spectral.hpp"
#include "csic/srssc.hpp"
#include "csic/synth.hpp"

#include "CLI11.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace csic;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitIo = 4;

struct SolverFlags {
  std::optional<double> lambda;
  std::optional<double> alpha;
  std::optional<double> rho;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<int> outer_iters;
  std::optional<int> k;
  std::optional<int> kmeans_restarts;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--lambda", lambda, "Residual weight (default 10/mu)");
    app->add_option("--alpha", alpha, "Spatial regularization weight (0 = plain SSC)");
    app->add_option("--rho", rho, "ADMM penalty (default 10*lambda)");
    app->add_option("--tol", tol, "Feasibility tolerance");
    app->add_option("--max-iter", max_iter, "ADMM iterations per outer pass");
    app->add_option("--outer-iters", outer_iters, "Mean-filter alternations");
    app->add_option("--k", k, "Number of clusters (default: ground-truth K)");
    app->add_option("--kmeans-restarts", kmeans_restarts, "k-means restarts");
    app->add_option("--seed", seed, "Run seed");
  }

  void apply(RunConfig& cfg) const {
    if (lambda) cfg.lambda = *lambda;
    if (alpha) cfg.alpha = *alpha;
    if (rho) cfg.rho = *rho;
    if (tol) cfg.tol = *tol;
    if (max_iter) cfg.max_iter = *max_iter;
    if (outer_iters) cfg.outer_iters = *outer_iters;
    if (k) cfg.k = *k;
    if (kmeans_restarts) cfg.kmeans_restarts = *kmeans_restarts;
    if (seed) cfg.seed = *seed;
  }
};

std::optional<LabelCrop> parse_crop(const std::vector<std::size_t>& v) {
  if (v.empty()) return std::nullopt;
  if (v.size() != 4) throw ValidationError("--crop takes ROW0 COL0 ROWS COLS");
  return LabelCrop{v[0], v[1], v[2], v[3]};
}

void print_json(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << "\n"; }

bool has_magic(const fs::path& p, std::string_view magic) {
  const auto bytes = read_file(p);
  return bytes.size() >= magic.size() && std::equal(magic.begin(), magic.end(), bytes.begin());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive spectral image clustering"};
  app.require_subcommand(1);
  bool serial = false;
  app.add_flag("--serial", serial, "Force single-threaded execution");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic union-of-subspaces cube");
  std::uint64_t synth_seed = 0;
  SynthSpec synth_spec;
  std::string synth_cube_out = "cube.scube";
  std::string synth_labels_out = "labels.csv";
  synth->add_option("--seed", synth_seed);
  synth->add_option("--rows", synth_spec.rows);
  synth->add_option("--cols", synth_spec.cols);
  synth->add_option("--bands", synth_spec.bands);
  synth->add_option("--classes", synth_spec.classes);
  synth->add_option("--sigma", synth_spec.sigma);
  synth->add_option("--out-cube", synth_cube_out);
  synth->add_option("--out-labels", synth_labels_out);

  // codegen
  auto* codegen = app.add_subcommand("codegen", "Generate a coded-aperture pattern");
  std::string code_mode = "gp";
  std::size_t snapshots = 8;
  std::size_t bands = 32;
  std::size_t bandwidth = 4;
  std::uint64_t code_seed = 0;
  std::string pattern_out = "pattern.csv";
  codegen->add_option("--mode", code_mode)->check(CLI::IsMember({"random", "gp"}));
  codegen->add_option("--snapshots", snapshots);
  codegen->add_option("--bands", bands);
  codegen->add_option("--bandwidth", bandwidth);
  codegen->add_option("--seed", code_seed);
  codegen->add_option("--out", pattern_out, "Pattern CSV; the JSON sidecar is written next to it");

  // sense
  auto* sense_cmd = app.add_subcommand("sense", "Simulate compressive measurements");
  std::string sense_cube;
  std::string sense_pattern;
  double sense_sigma = 0.0;
  std::optional<double> sense_snr;
  std::uint64_t sense_seed = 0;
  std::string sense_out = "meas.smeas";
  sense_cmd->add_option("--cube", sense_cube)->required();
  sense_cmd->add_option("--pattern", sense_pattern)->required();
  auto* sigma_opt = sense_cmd->add_option("--sigma", sense_sigma, "Noise standard deviation");
  sense_cmd->add_option("--snr-db", sense_snr, "Target SNR; sets sigma from the signal RMS")->excludes(sigma_opt);
  sense_cmd->add_option("--seed", sense_seed);
  sense_cmd->add_option("--out", sense_out);

  // cluster
  auto* cluster_cmd = app.add_subcommand("cluster", "Cluster pixels of an SMEAS1 or SCUBE1 file");
  std::string cluster_in;
  std::string cluster_labels;
  std::string cluster_out = "cluster";
  SolverFlags cluster_flags;
  cluster_cmd->add_option("--input", cluster_in, "meas.smeas or cube.scube (full-data mode)")->required();
  cluster_cmd->add_option("--labels", cluster_labels, "Ground truth, used only for K");
  cluster_cmd->add_option("--out", cluster_out, "Output directory");
  cluster_flags.add(cluster_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score a clustering against ground truth");
  std::string eval_pred;
  std::string eval_truth;
  std::string eval_out = "eval";
  std::vector<std::size_t> eval_crop;
  std::vector<int> eval_keep;
  eval_cmd->add_option("--pred", eval_pred, "Cluster labels CSV (1..k)")->required();
  eval_cmd->add_option("--truth", eval_truth, "Ground-truth labels CSV")->required();
  eval_cmd->add_option("--crop", eval_crop, "ROW0 COL0 ROWS COLS applied to the truth")->expected(4);
  eval_cmd->add_option("--keep-classes", eval_keep, "Remap these truth classes to 1..n, others to 0");
  eval_cmd->add_option("--out", eval_out, "Output directory");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run an end-to-end clustering experiment");
  std::string pipe_config;
  std::string pipe_cube;
  std::string pipe_labels;
  std::vector<std::size_t> pipe_crop;
  std::vector<int> pipe_keep;
  std::optional<std::size_t> pipe_rows, pipe_cols, pipe_bands;
  std::optional<int> pipe_classes;
  std::optional<double> pipe_synth_sigma;
  std::string pipe_mode;
  std::optional<std::size_t> pipe_snapshots, pipe_bandwidth;
  std::optional<double> pipe_sigma;
  std::string pipe_out;
  SolverFlags pipe_flags;
  pipe->add_option("--config", pipe_config, "JSON config (a previous run.json works)");
  pipe->add_option("--cube", pipe_cube);
  pipe->add_option("--labels", pipe_labels);
  pipe->add_option("--crop", pipe_crop, "ROW0 COL0 ROWS COLS")->expected(4);
  pipe->add_option("--keep-classes", pipe_keep, "e.g. 2 7 10 11 for the four-class subset");
  pipe->add_option("--synth-rows", pipe_rows);
  pipe->add_option("--synth-cols", pipe_cols);
  pipe->add_option("--synth-bands", pipe_bands);
  pipe->add_option("--synth-classes", pipe_classes);
  pipe->add_option("--synth-sigma", pipe_synth_sigma);
  pipe->add_option("--mode", pipe_mode)->check(CLI::IsMember({"none", "random", "gp"}));
  pipe->add_option("--snapshots", pipe_snapshots);
  pipe->add_option("--bandwidth", pipe_bandwidth);
  pipe->add_option("--sigma", pipe_sigma, "Measurement noise sigma");
  pipe->add_option("--out", pipe_out, "Output directory");
  pipe_flags.add(pipe);

  // compare
  auto* compare = app.add_subcommand("compare", "Compare two pipeline run directories");
  std::string cmp_a;
  std::string cmp_b;
  std::string cmp_out;
  compare->add_option("dir_a", cmp_a)->required();
  compare->add_option("dir_b", cmp_b)->required();
  compare->add_option("--out", cmp_out, "Also write the comparison JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }
  set_serial(serial);

  try {
    if (*synth) {
      auto [cube, labels] = synth_cube(synth_seed, synth_spec.rows, synth_spec.cols, synth_spec.bands,
                                       synth_spec.classes, synth_spec.sigma);
      save_cube(cube, synth_cube_out);
      save_labels(labels, synth_labels_out);
      return kExitOk;
    }

    if (*codegen) {
      const auto pattern = code_mode == "gp" ? gp_pattern(code_seed, snapshots, bands, bandwidth)
                                             : random_pattern(code_seed, snapshots, bands, bandwidth);
      save_pattern(pattern, pattern_out);
      const auto score = score_pattern(pattern);
      print_json({{"band_correlation", score.band_correlation},
                  {"snapshot_correlation", score.snapshot_correlation},
                  {"coverage_min", score.coverage_min},
                  {"coverage_max", score.coverage_max}});
      return kExitOk;
    }

    if (*sense_cmd) {
      const auto cube = load_cube(sense_cube);
      const auto pattern = load_pattern(sense_pattern);
      double sigma = sense_sigma;
      if (sense_snr) {
        const auto clean = sense(cube, pattern, NoiseSpec{0.0, sense_seed});
        sigma = sigma_for_snr(clean.data, *sense_snr);
      }
      save_measurements(sense(cube, pattern, NoiseSpec{sigma, sense_seed}), sense_out);
      return kExitOk;
    }

    if (*cluster_cmd) {
      RunConfig cfg;
      cluster_flags.apply(cfg);
      Matrix y;
      std::size_t rows = 0;
      std::size_t cols = 0;
      if (has_magic(cluster_in, "SMEA")) {
        auto meas = load_measurements(cluster_in);
        rows = meas.rows;
        cols = meas.cols;
        y = std::move(meas.data);
      } else {
        const auto cube = load_cube(cluster_in);
        rows = cube.rows();
        cols = cube.cols();
        y = cube.spectra();
      }
      int k = cfg.k;
      if (k <= 0) {
        if (cluster_labels.empty()) throw ValidationError("cluster: give --k or --labels");
        const auto truth = load_labels(cluster_labels);
        truth.require_clusterable();
        k = truth.num_classes();
      }
      const auto sol = solve_srssc(make_problem(std::move(y), rows, cols, cfg));
      const auto aff = build_affinity(sol.c);
      const auto assignment = spectral_cluster(aff, k, derive_seed(cfg.seed, "kmeans"), cfg.kmeans_restarts);
      const fs::path out = cluster_out;
      fs::create_directories(out);
      save_labels(LabelMap(rows, cols, assignment.labels), out / "labels.csv");
      write_text(out / "affinity.sha256", affinity_digest(aff) + "\n");
      nlohmann::ordered_json j;
      j["converged"] = sol.converged;
      j["iterations"] = sol.iterations;
      j["residuals"] = {{"equality", sol.residuals.equality},
                        {"diagonal", sol.residuals.diagonal},
                        {"affine", sol.residuals.affine},
                        {"consensus", sol.residuals.consensus}};
      j["k"] = k;
      j["inertia"] = assignment.inertia;
      write_text(out / "solver.json", j.dump(2) + "\n");
      if (!sol.converged) {
        std::cerr << "csic: ADMM did not reach the tolerance; best iterate written\n";
        return kExitNoConvergence;
      }
      return kExitOk;
    }

    if (*eval_cmd) {
      LabelLoadOptions opts;
      opts.crop = parse_crop(eval_crop);
      opts.keep_classes = eval_keep;
      const auto truth = load_labels(eval_truth, opts);
      truth.require_clusterable();
      const auto pred_map = load_labels(eval_pred);
      if (pred_map.rows() != truth.rows() || pred_map.cols() != truth.cols()) {
        throw ValidationError("eval: prediction and truth have different dimensions");
      }
      ClusterAssignment pred;
      pred.k = truth.num_classes();
      pred.labels = pred_map.labels();
      const auto mapping = align_labels(pred, truth);
      const auto cm = confusion_matrix(pred, mapping, truth);
      const auto metrics = compute_metrics(cm);
      const fs::path out = eval_out;
      fs::create_directories(out);
      const auto aligned = aligned_prediction(pred, mapping, truth.rows(), truth.cols());
      render_cluster_map(aligned, out / "map.pgm", out / "map.ppm");
      const auto j = metrics_to_json(metrics, cm);
      write_text(out / "metrics.json", j.dump(2) + "\n");
      print_json(j);
      return kExitOk;
    }

    if (*pipe) {
      // Precedence: flags > config file > defaults.
      PipelineSpec spec;
      if (!pipe_config.empty()) spec = PipelineSpec::from_json(nlohmann::json::parse(read_text(pipe_config)));
      if (!pipe_cube.empty()) {
        spec.cube_path = pipe_cube;
        spec.synth.reset();
      }
      if (!pipe_labels.empty()) spec.labels_path = pipe_labels;
      if (auto c = parse_crop(pipe_crop)) spec.crop = c;
      if (!pipe_keep.empty()) spec.keep_classes = pipe_keep;
      if (pipe_rows || pipe_cols || pipe_bands || pipe_classes || pipe_synth_sigma) {
        SynthSpec s = spec.synth.value_or(SynthSpec{});
        if (pipe_rows) s.rows = *pipe_rows;
        if (pipe_cols) s.cols = *pipe_cols;
        if (pipe_bands) s.bands = *pipe_bands;
        if (pipe_classes) s.classes = *pipe_classes;
        if (pipe_synth_sigma) s.sigma = *pipe_synth_sigma;
        spec.synth = s;
        spec.cube_path.reset();
        spec.labels_path.reset();
      }
      if (!spec.cube_path && !spec.synth) spec.synth = SynthSpec{};
      if (!pipe_mode.empty()) spec.mode = parse_code_mode(pipe_mode);
      if (pipe_snapshots) spec.snapshots = *pipe_snapshots;
      if (pipe_bandwidth) spec.bandwidth = *pipe_bandwidth;
      if (pipe_sigma) spec.noise_sigma = *pipe_sigma;
      if (!pipe_out.empty()) spec.out_dir = pipe_out;
      pipe_flags.apply(spec.config);

      const auto result = run_pipeline(spec);
      print_json({{"oa", result.metrics.oa},
                  {"aa", result.metrics.aa},
                  {"kappa", result.metrics.kappa},
                  {"converged", result.converged},
                  {"out_dir", spec.out_dir.string()}});
      return result.converged ? kExitOk : kExitNoConvergence;
    }

    if (*compare) {
      const auto j = compare_runs(cmp_a, cmp_b);
      if (!cmp_out.empty()) write_text(cmp_out, j.dump(2) + "\n");
      print_json(j);
      return kExitOk;
    }
  } catch (const PipelineError& e) {
    std::cerr << "csic: " << e.what() << "\n";
    return e.exit_code();
  } catch (const IoError& e) {
    std::cerr << "csic: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "csic: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "csic: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "csic: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
