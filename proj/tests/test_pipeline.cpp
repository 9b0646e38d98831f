#include "csic/errors.hpp"
#include "csic/io.hpp"
#include "csic/pipeline.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>

using namespace csic;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("csic_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

PipelineSpec synth_spec(const fs::path& out, CodeMode mode = CodeMode::gp) {
  PipelineSpec spec;
  spec.synth = SynthSpec{20, 20, 32, 4, 0.0};
  spec.mode = mode;
  spec.config.seed = 11;
  spec.config.alpha = 10.0;
  spec.out_dir = out;
  return spec;
}

void write_run(const fs::path& dir, double oa, double aa, double kappa, double total_ms) {
  fs::create_directories(dir);
  nlohmann::ordered_json m;
  m["oa"] = oa;
  m["aa"] = aa;
  m["kappa"] = kappa;
  write_text(dir / "metrics.json", m.dump(2));
  nlohmann::ordered_json t;
  t["total"] = total_ms;
  write_text(dir / "timing.json", t.dump(2));
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CSIC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Pipeline, WritesAllArtifacts) {
  const auto out = scratch("schema");
  const auto result = run_pipeline(synth_spec(out));
  for (const char* f : {"pattern.csv", "pattern.json", "meas.smeas", "affinity.sha256", "labels.csv", "map.pgm",
                        "map.ppm", "metrics.json", "timing.json", "solver.json", "run.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto metrics = nlohmann::json::parse(read_text(out / "metrics.json"));
  for (const char* key : {"oa", "aa", "kappa", "per_class", "confusion"}) EXPECT_TRUE(metrics.contains(key)) << key;
  EXPECT_EQ(metrics.at("per_class").size(), 4u);
  EXPECT_DOUBLE_EQ(metrics.at("oa").get<double>(), result.metrics.oa);

  const auto labels = load_labels(out / "labels.csv");
  EXPECT_EQ(labels.rows(), 20u);
  EXPECT_EQ(labels.cols(), 20u);
  std::set<int> seen(labels.labels().begin(), labels.labels().end());
  EXPECT_EQ(seen, (std::set<int>{1, 2, 3, 4}));

  const auto meas = load_measurements(out / "meas.smeas");
  EXPECT_EQ(meas.data.rows(), 8);
  EXPECT_EQ(meas.data.cols(), 400);

  const auto timing = nlohmann::json::parse(read_text(out / "timing.json"));
  for (const char* stage : {"codegen", "sense", "ssc", "cluster", "total"}) EXPECT_TRUE(timing.contains(stage)) << stage;

  const auto run = nlohmann::json::parse(read_text(out / "run.json"));
  EXPECT_EQ(run.at("code_mode"), "gp");
  EXPECT_EQ(run.at("config").at("seed"), 11);
  EXPECT_TRUE(run.at("provenance").contains("seeds"));
}

TEST(Pipeline, SameSeedSameMetrics) {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  run_pipeline(synth_spec(a));
  run_pipeline(synth_spec(b));
  EXPECT_EQ(read_text(a / "metrics.json"), read_text(b / "metrics.json"));
  EXPECT_EQ(read_text(a / "labels.csv"), read_text(b / "labels.csv"));
  EXPECT_EQ(read_text(a / "affinity.sha256"), read_text(b / "affinity.sha256"));
}

TEST(Pipeline, FullDataRecoversTwoSubspaces) {
  const auto out = scratch("full");
  auto spec = synth_spec(out, CodeMode::none);
  spec.synth = SynthSpec{10, 10, 16, 2, 0.0};
  spec.config.alpha = 0.0;
  const auto result = run_pipeline(spec);
  EXPECT_DOUBLE_EQ(result.metrics.oa, 100.0);
  EXPECT_DOUBLE_EQ(result.metrics.kappa, 100.0);
  EXPECT_FALSE(fs::exists(out / "meas.smeas"));
}

TEST(Pipeline, RunJsonReproducesRun) {
  const auto a = scratch("repro_a");
  const auto b = scratch("repro_b");
  auto spec = synth_spec(a, CodeMode::random);
  spec.noise_sigma = 0.05;
  run_pipeline(spec);
  auto again = PipelineSpec::from_json(nlohmann::json::parse(read_text(a / "run.json")));
  EXPECT_EQ(again.to_json().at("config"), spec.to_json().at("config"));
  again.out_dir = b;
  run_pipeline(again);
  EXPECT_EQ(read_text(a / "metrics.json"), read_text(b / "metrics.json"));
}

TEST(Pipeline, StageErrorsNameTheStage) {
  const auto out = scratch("err");
  PipelineSpec spec;
  spec.cube_path = out / "missing.scube";
  spec.labels_path = out / "missing.csv";
  spec.out_dir = out;
  try {
    run_pipeline(spec);
    FAIL() << "expected a PipelineError";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "load");
    EXPECT_EQ(e.exit_code(), 4);
  }

  auto bad = synth_spec(out);
  bad.snapshots = 0;
  try {
    run_pipeline(bad);
    FAIL() << "expected a PipelineError";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "validate");
    EXPECT_EQ(e.exit_code(), 2);
  }

  auto wrong_k = synth_spec(out);
  wrong_k.config.k = 3;
  try {
    run_pipeline(wrong_k);
    FAIL() << "expected a PipelineError";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "labels");
  }
}

TEST(PipelineSpec, JsonRoundTrip) {
  PipelineSpec spec;
  spec.cube_path = "cube.scube";
  spec.labels_path = "gt.csv";
  spec.crop = LabelCrop{1, 2, 70, 70};
  spec.keep_classes = {2, 7, 10, 11};
  spec.mode = CodeMode::random;
  spec.snapshots = 6;
  spec.bandwidth = 3;
  spec.noise_sigma = 0.25;
  spec.config.seed = 99;
  spec.config.lambda = 3.5;
  spec.config.alpha = 2.0;
  spec.out_dir = "somewhere";
  const auto back = PipelineSpec::from_json(spec.to_json());
  EXPECT_EQ(back.to_json(), spec.to_json());
  EXPECT_THROW(PipelineSpec::from_json(nlohmann::json{{"code_mode", "best"}}), ValidationError);
  EXPECT_THROW(PipelineSpec::from_json(nlohmann::json{{"snapshots", "many"}}), ValidationError);
}

TEST(PipelineSpec, Validation) {
  PipelineSpec none;
  EXPECT_THROW(none.validate(), ValidationError);
  auto both = synth_spec("x");
  both.cube_path = "c.scube";
  both.labels_path = "l.csv";
  EXPECT_THROW(both.validate(), ValidationError);
  PipelineSpec no_labels;
  no_labels.cube_path = "c.scube";
  EXPECT_THROW(no_labels.validate(), ValidationError);
  auto full = synth_spec("x", CodeMode::none);
  full.snapshots = 0;
  EXPECT_NO_THROW(full.validate());
  auto noisy = synth_spec("x");
  noisy.noise_sigma = -1.0;
  EXPECT_THROW(noisy.validate(), ValidationError);
}

TEST(Seeds, StagesAreIndependent) {
  EXPECT_EQ(derive_seed(5, "noise"), derive_seed(5, "noise"));
  EXPECT_NE(derive_seed(5, "noise"), derive_seed(5, "codegen"));
  EXPECT_NE(derive_seed(5, "noise"), derive_seed(6, "noise"));
}

TEST(Compare, IdenticalRunsHaveZeroDeltas) {
  const auto a = scratch("cmp_same");
  write_run(a, 74.15, 70.0, 60.0, 1234.0);
  const auto j = compare_runs(a, a);
  for (const char* key : {"oa", "aa", "kappa"}) EXPECT_EQ(j.at(key).at("delta").get<double>(), 0.0);
  EXPECT_EQ(j.at("time_reduction_percent").get<double>(), 0.0);
}

TEST(Compare, OptimalVersusRandomCodes) {
  const auto a = scratch("cmp_a");
  const auto b = scratch("cmp_b");
  write_run(a, 74.15, 71.0, 62.0, 30300.0);
  write_run(b, 63.83, 60.5, 50.0, 179130.0);
  const auto j = compare_runs(a, b);
  EXPECT_EQ(j.at("oa").at("delta").get<double>(), 10.32);
  EXPECT_EQ(j.at("aa").at("delta").get<double>(), 10.5);
  EXPECT_EQ(j.at("kappa").at("delta").get<double>(), 12.0);
  EXPECT_EQ(j.at("time_reduction_percent").get<double>(), 83.08);
}

TEST(Compare, MissingMetrics) {
  const auto a = scratch("cmp_missing");
  fs::create_directories(a);
  EXPECT_THROW(compare_runs(a, a), IoError);
  write_run(a, 1, 1, 1, 1);
  write_text(a / "metrics.json", "{\"oa\": 1}");
  EXPECT_THROW(compare_runs(a, a), ValidationError);
}

TEST(CropCube, SelectsWindow) {
  std::vector<double> v(3 * 4 * 2);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  const SpectralCube cube(3, 4, 2, v);
  const auto c = crop_cube(cube, LabelCrop{1, 2, 2, 2});
  EXPECT_EQ(c.rows(), 2u);
  EXPECT_EQ(c.cols(), 2u);
  EXPECT_EQ(c.at(0, 0, 0), cube.at(1, 2, 0));
  EXPECT_EQ(c.at(1, 1, 1), cube.at(2, 3, 1));
  EXPECT_THROW(crop_cube(cube, LabelCrop{2, 0, 2, 1}), ValidationError);
}

// ---- command line ----

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  const auto d = dir.string();
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("no-such-command"), 2);
  EXPECT_EQ(run_cli("synth --rows 6 --cols 6 --bands 16 --classes 2 --seed 3 --out-cube " + d +
                    "/c.scube --out-labels " + d + "/l.csv"),
            0);
  EXPECT_EQ(run_cli("codegen --mode gp --snapshots 4 --bands 16 --bandwidth 4 --out " + d + "/p.csv"), 0);
  EXPECT_EQ(run_cli("sense --cube " + d + "/c.scube --pattern " + d + "/p.csv --sigma 0.01 --out " + d +
                    "/m.smeas"),
            0);
  EXPECT_EQ(run_cli("cluster --input " + d + "/m.smeas --labels " + d + "/l.csv --out " + d + "/cl"), 0);
  EXPECT_EQ(run_cli("eval --pred " + d + "/cl/labels.csv --truth " + d + "/l.csv --out " + d + "/ev"), 0);
  EXPECT_TRUE(fs::exists(dir / "ev" / "metrics.json"));

  EXPECT_EQ(run_cli("pipeline --cube " + d + "/c.scube --labels " + d + "/l.csv --mode gp --snapshots 4 --out " +
                    d + "/run"),
            0);
  EXPECT_EQ(run_cli("pipeline --config " + d + "/run/run.json --out " + d + "/run2"), 0);
  EXPECT_EQ(read_text(dir / "run" / "metrics.json"), read_text(dir / "run2" / "metrics.json"));
  EXPECT_EQ(run_cli("compare " + d + "/run " + d + "/run2 --out " + d + "/cmp.json"), 0);

  EXPECT_EQ(run_cli("pipeline --cube " + d + "/nope.scube --labels " + d + "/l.csv --out " + d + "/bad"), 4);
  EXPECT_EQ(run_cli("pipeline --synth-rows 6 --snapshots 0 --out " + d + "/bad"), 2);
  EXPECT_EQ(run_cli("sense --cube " + d + "/c.scube --pattern " + d + "/missing.csv"), 4);
  EXPECT_EQ(run_cli("cluster --input " + d + "/c.scube --out " + d + "/nok"), 2);

  EXPECT_EQ(run_cli("pipeline --synth-rows 6 --synth-cols 6 --synth-bands 16 --synth-classes 2 --mode none "
                    "--max-iter 1 --tol 1e-12 --out " + d + "/slow"),
            3);
  EXPECT_TRUE(fs::exists(dir / "slow" / "metrics.json"));
}
