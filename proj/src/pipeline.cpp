#include "csic/pipeline.hpp"

#include "csic/codegen.hpp"
#include "csic/errors.hpp"
#include "csic/rng.hpp"
#include "csic/sensing.hpp"
#include "csic/spectral.hpp"
#include "csic/synth.hpp"

#include <bit>
#include <functional>

namespace csic {

std::string to_string(CodeMode mode) {
  switch (mode) {
    case CodeMode::none: return "none";
    case CodeMode::random: return "random";
    case CodeMode::gp: return "gp";
  }
  return "none";
}

CodeMode parse_code_mode(const std::string& s) {
  if (s == "none") return CodeMode::none;
  if (s == "random") return CodeMode::random;
  if (s == "gp") return CodeMode::gp;
  throw ValidationError("unknown code mode '" + s + "' (expected none, random or gp)");
}

void PipelineSpec::validate() const {
  if (cube_path.has_value() == synth.has_value()) {
    throw ValidationError("pipeline: give exactly one of an input cube or synth parameters");
  }
  if (cube_path && !labels_path) throw ValidationError("pipeline: an input cube needs a labels file");
  if (mode != CodeMode::none && (snapshots < 1 || bandwidth < 1)) {
    throw ValidationError("pipeline: coded modes need snapshots >= 1 and bandwidth >= 1");
  }
  if (!(noise_sigma >= 0.0)) throw ValidationError("pipeline: noise sigma must be >= 0");
  config.validate();
}

nlohmann::ordered_json PipelineSpec::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json input;
  if (cube_path) {
    input["cube"] = cube_path->string();
    input["labels"] = labels_path ? labels_path->string() : "";
    if (crop) input["crop"] = {crop->row0, crop->col0, crop->rows, crop->cols};
    if (!keep_classes.empty()) input["keep_classes"] = keep_classes;
  } else if (synth) {
    input["synth"] = {{"rows", synth->rows},
                      {"cols", synth->cols},
                      {"bands", synth->bands},
                      {"classes", synth->classes},
                      {"sigma", synth->sigma}};
  }
  j["input"] = input;
  j["code_mode"] = to_string(mode);
  j["snapshots"] = snapshots;
  j["bandwidth"] = bandwidth;
  j["noise_sigma"] = noise_sigma;
  nlohmann::ordered_json cfg;
  cfg["seed"] = config.seed;
  cfg["lambda"] = config.lambda ? nlohmann::ordered_json(*config.lambda) : nlohmann::ordered_json(nullptr);
  cfg["alpha"] = config.alpha;
  cfg["rho"] = config.rho ? nlohmann::ordered_json(*config.rho) : nlohmann::ordered_json(nullptr);
  cfg["max_iter"] = config.max_iter;
  cfg["tol"] = config.tol;
  cfg["outer_iters"] = config.outer_iters;
  cfg["k"] = config.k;
  cfg["kmeans_restarts"] = config.kmeans_restarts;
  j["config"] = cfg;
  j["out_dir"] = out_dir.string();
  return j;
}

PipelineSpec PipelineSpec::from_json(const nlohmann::json& j) {
  PipelineSpec spec;
  try {
    if (j.contains("input")) {
      const auto& in = j.at("input");
      if (in.contains("cube")) {
        spec.cube_path = in.at("cube").get<std::string>();
        spec.labels_path = in.at("labels").get<std::string>();
        if (in.contains("crop")) {
          const auto c = in.at("crop").get<std::vector<std::size_t>>();
          if (c.size() != 4) throw ValidationError("config: crop needs [row0, col0, rows, cols]");
          spec.crop = LabelCrop{c[0], c[1], c[2], c[3]};
        }
        if (in.contains("keep_classes")) spec.keep_classes = in.at("keep_classes").get<std::vector<int>>();
      }
      if (in.contains("synth")) {
        const auto& s = in.at("synth");
        SynthSpec synth;
        synth.rows = s.value("rows", synth.rows);
        synth.cols = s.value("cols", synth.cols);
        synth.bands = s.value("bands", synth.bands);
        synth.classes = s.value("classes", synth.classes);
        synth.sigma = s.value("sigma", synth.sigma);
        spec.synth = synth;
      }
    }
    if (j.contains("code_mode")) spec.mode = parse_code_mode(j.at("code_mode").get<std::string>());
    spec.snapshots = j.value("snapshots", spec.snapshots);
    spec.bandwidth = j.value("bandwidth", spec.bandwidth);
    spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
    if (j.contains("config")) {
      const auto& c = j.at("config");
      auto& cfg = spec.config;
      cfg.seed = c.value("seed", cfg.seed);
      if (c.contains("lambda") && !c.at("lambda").is_null()) cfg.lambda = c.at("lambda").get<double>();
      cfg.alpha = c.value("alpha", cfg.alpha);
      if (c.contains("rho") && !c.at("rho").is_null()) cfg.rho = c.at("rho").get<double>();
      cfg.max_iter = c.value("max_iter", cfg.max_iter);
      cfg.tol = c.value("tol", cfg.tol);
      cfg.outer_iters = c.value("outer_iters", cfg.outer_iters);
      cfg.k = c.value("k", cfg.k);
      cfg.kmeans_restarts = c.value("kmeans_restarts", cfg.kmeans_restarts);
    }
    if (j.contains("out_dir")) spec.out_dir = j.at("out_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return spec;
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& stage) {
  return Rng(seed).child(stage).at(0);
}

SpectralCube crop_cube(const SpectralCube& cube, const LabelCrop& crop) {
  if (crop.rows == 0 || crop.cols == 0 || crop.row0 + crop.rows > cube.rows() ||
      crop.col0 + crop.cols > cube.cols()) {
    throw ValidationError("crop window exceeds the cube");
  }
  std::vector<double> values;
  values.reserve(crop.rows * crop.cols * cube.bands());
  for (std::size_t i = crop.row0; i < crop.row0 + crop.rows; ++i)
    for (std::size_t j = crop.col0; j < crop.col0 + crop.cols; ++j) {
      const auto s = cube.spectrum(i * cube.cols() + j);
      values.insert(values.end(), s.begin(), s.end());
    }
  return SpectralCube(crop.rows, crop.cols, cube.bands(), std::move(values));
}

std::string affinity_digest(const AffinityMatrix& affinity) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(static_cast<std::size_t>(affinity.w.size()) * 8);
  for (Eigen::Index i = 0; i < affinity.w.size(); ++i) {
    const auto v = std::bit_cast<std::uint64_t>(affinity.w.data()[i]);
    for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  return to_hex(sha256(bytes));
}

namespace {

template <typename F>
auto stage(const std::string& name, TimingReport& timing, F&& f) {
  StageTimer timer;
  try {
    if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
      f();
      timing.add(name, timer.elapsed_ms());
    } else {
      auto r = f();
      timing.add(name, timer.elapsed_ms());
      return r;
    }
  } catch (const PipelineError&) {
    throw;
  } catch (const IoError& e) {
    throw PipelineError(name, e.what(), 4);
  } catch (const ValidationError& e) {
    throw PipelineError(name, e.what(), 2);
  } catch (const fs::filesystem_error& e) {
    throw PipelineError(name, e.what(), 4);
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what(), 2);
  }
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace

PipelineResult run_pipeline(const PipelineSpec& spec) {
  TimingReport timing;
  stage("validate", timing, [&] { spec.validate(); });
  stage("prepare", timing, [&] { fs::create_directories(spec.out_dir); });
  const fs::path& out = spec.out_dir;
  const auto seed = spec.config.seed;

  auto [cube, truth] = stage("load", timing, [&] {
    if (spec.synth) {
      const auto& s = *spec.synth;
      return synth_cube(derive_seed(seed, "synth"), s.rows, s.cols, s.bands, s.classes, s.sigma);
    }
    LabelLoadOptions opts;
    opts.crop = spec.crop;
    opts.keep_classes = spec.keep_classes;
    auto labels = load_labels(*spec.labels_path, opts);
    auto full = load_cube(*spec.cube_path);
    auto c = spec.crop ? crop_cube(full, *spec.crop) : std::move(full);
    if (c.rows() != labels.rows() || c.cols() != labels.cols()) {
      throw ValidationError("cube and labels have different spatial dimensions");
    }
    return std::pair<SpectralCube, LabelMap>(std::move(c), std::move(labels));
  });
  const int k = spec.config.k > 0 ? spec.config.k : truth.num_classes();
  stage("labels", timing, [&] {
    truth.require_clusterable();
    if (k != truth.num_classes()) {
      throw ValidationError("k=" + std::to_string(k) + " differs from ground-truth K=" +
                            std::to_string(truth.num_classes()));
    }
  });

  Matrix y;
  if (spec.mode == CodeMode::none) {
    y = cube.spectra();
  } else {
    const auto pattern = stage("codegen", timing, [&] {
      const auto code_seed = derive_seed(seed, "codegen");
      auto p = spec.mode == CodeMode::gp
                   ? gp_pattern(code_seed, spec.snapshots, cube.bands(), spec.bandwidth)
                   : random_pattern(code_seed, spec.snapshots, cube.bands(), spec.bandwidth);
      save_pattern(p, out / "pattern.csv");
      return p;
    });
    const auto meas = stage("sense", timing, [&] {
      auto m = sense(cube, pattern, NoiseSpec{spec.noise_sigma, derive_seed(seed, "noise")});
      save_measurements(m, out / "meas.smeas");
      return m;
    });
    y = meas.data;
  }

  const auto sol = stage("ssc", timing, [&] {
    return solve_srssc(make_problem(std::move(y), cube.rows(), cube.cols(), spec.config));
  });
  const auto affinity = stage("affinity", timing, [&] {
    const auto aff = build_affinity(sol.c);
    write_text(out / "affinity.sha256", affinity_digest(aff) + "\n");
    return aff;
  });
  const auto assignment = stage("cluster", timing, [&] {
    return spectral_cluster(affinity, k, derive_seed(seed, "kmeans"), spec.config.kmeans_restarts);
  });

  PipelineResult result;
  stage("evaluate", timing, [&] {
    const auto mapping = align_labels(assignment, truth);
    result.confusion = confusion_matrix(assignment, mapping, truth);
    result.metrics = compute_metrics(result.confusion);
    const auto predicted = aligned_prediction(assignment, mapping, cube.rows(), cube.cols());
    save_labels(predicted, out / "labels.csv");
    render_cluster_map(predicted, out / "map.pgm", out / "map.ppm");
    write_json(out / "metrics.json", metrics_to_json(result.metrics, result.confusion));
  });

  result.converged = sol.converged;
  result.iterations = sol.iterations;
  result.residuals = sol.residuals;
  result.timing = timing;

  stage("report", timing, [&] {
    nlohmann::ordered_json solver;
    solver["converged"] = sol.converged;
    solver["iterations"] = sol.iterations;
    solver["residuals"] = {{"equality", sol.residuals.equality},
                           {"diagonal", sol.residuals.diagonal},
                           {"affine", sol.residuals.affine},
                           {"consensus", sol.residuals.consensus}};
    write_json(out / "solver.json", solver);
    write_json(out / "timing.json", result.timing.to_json());

    auto run = spec.to_json();
    run["provenance"] = {{"version", kVersionString},
                         {"seeds",
                          {{"synth", derive_seed(seed, "synth")},
                           {"codegen", derive_seed(seed, "codegen")},
                           {"noise", derive_seed(seed, "noise")},
                           {"kmeans", derive_seed(seed, "kmeans")}}},
                         {"k", k}};
    write_json(out / "run.json", run);
  });
  return result;
}

nlohmann::ordered_json compare_runs(const fs::path& dir_a, const fs::path& dir_b) {
  auto load = [](const fs::path& p) {
    if (!fs::exists(p)) throw IoError("missing " + p.string());
    try {
      return nlohmann::json::parse(read_text(p));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(p.string() + ": " + e.what());
    }
  };
  const auto ma = load(dir_a / "metrics.json");
  const auto mb = load(dir_b / "metrics.json");
  const auto ta = load(dir_a / "timing.json");
  const auto tb = load(dir_b / "timing.json");

  nlohmann::ordered_json out;
  out["a"] = dir_a.string();
  out["b"] = dir_b.string();
  for (const char* key : {"oa", "aa", "kappa"}) {
    if (!ma.contains(key) || !mb.contains(key)) throw ValidationError(std::string("metrics missing '") + key + "'");
    const double a = ma.at(key).get<double>();
    const double b = mb.at(key).get<double>();
    out[key] = {{"a", a}, {"b", b}, {"delta", round2(a - b)}};
  }
  const double t_a = ta.at("total").get<double>();
  const double t_b = tb.at("total").get<double>();
  out["time_ms"] = {{"a", t_a}, {"b", t_b}};
  out["time_reduction_percent"] = t_b > 0.0 ? round2(time_reduction_percent(t_a, t_b)) : 0.0;
  return out;
}

}  // namespace csic
