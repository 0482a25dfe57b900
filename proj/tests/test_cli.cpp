#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spad/cli.hpp"
#include "spad/io.hpp"
#include "spad/reference.hpp"

namespace fs = std::filesystem;

namespace spad {
namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "spad_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { unsetenv("SPAD_ANNEAL_SEED"); }
  void TearDown() override { unsetenv("SPAD_ANNEAL_SEED"); }
};

TEST_F(Cli, GenModelWritesModelAndManifest) {
  const auto dir = scratch("gen");
  const auto r = invoke({"gen-model", "--n", "6", "--range", "-3", "3", "--seed", "5", "--out", dir.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto model = std::get<IsingModel>(io::load_model(dir / "model.json"));
  EXPECT_EQ(model, random_model(6, -3, 3, 5));
  const auto manifest = io::read_json(dir / "manifest.json");
  EXPECT_EQ(manifest["command"], "gen-model");
  EXPECT_EQ(manifest["seed"], 5);
  EXPECT_EQ(manifest["schema_version"], 1);
  EXPECT_EQ(manifest["version"].get<std::string>().rfind("spad ", 0), 0U);
}

TEST_F(Cli, ExitCodes) {
  const auto dir = scratch("codes");
  EXPECT_EQ(invoke({"gen-model", "--bogus"}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"sample", "--model", (dir / "missing.json").string(), "--samples", "10", "--out", dir.string()}).code,
            cli::kExitRuntime);
  io::write_text(dir / "bad.json", "{}");
  EXPECT_EQ(invoke({"sample", "--model", (dir / "bad.json").string(), "--samples", "10", "--out", dir.string()}).code,
            cli::kExitConfig);
  EXPECT_EQ(invoke({"gen-model", "--n", "4", "--range", "3", "-3", "--out", dir.string()}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"--help"}).code, cli::kExitOk);
}

TEST_F(Cli, JsonReportOnStdout) {
  const auto dir = scratch("json");
  const auto r = invoke({"gen-model", "--n", "3", "--json", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = io::json::parse(r.out);
  EXPECT_EQ(doc["n"], 3);
  EXPECT_EQ(doc["seed"], 0);
}

TEST_F(Cli, SeedFallsBackToEnvironment) {
  const auto dir = scratch("env");
  setenv("SPAD_ANNEAL_SEED", "77", 1);
  ASSERT_EQ(invoke({"gen-model", "--n", "5", "--out", dir.string()}).code, 0);
  EXPECT_EQ(std::get<IsingModel>(io::load_model(dir / "model.json")), random_model(5, -8, 8, 77));
  ASSERT_EQ(invoke({"gen-model", "--n", "5", "--seed", "1", "--out", dir.string()}).code, 0);
  EXPECT_EQ(std::get<IsingModel>(io::load_model(dir / "model.json")), random_model(5, -8, 8, 1));
  setenv("SPAD_ANNEAL_SEED", "-4", 1);
  EXPECT_EQ(invoke({"gen-model", "--n", "5", "--out", dir.string()}).code, cli::kExitConfig);
}

TEST_F(Cli, MapCheck) {
  const auto dir = scratch("map");
  ASSERT_EQ(invoke({"gen-model", "--n", "8", "--seed", "2", "--out", dir.string()}).code, 0);
  const auto r = invoke({"map", "--in", (dir / "model.json").string(), "--check", "--json", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(io::json::parse(r.out)["energy_equivalent"].get<bool>());
  EXPECT_TRUE(std::holds_alternative<PottsModel>(io::load_model(dir / "potts.json")));
  ASSERT_EQ(invoke({"gen-model", "--n", "5", "--out", dir.string()}).code, 0);
  EXPECT_EQ(invoke({"map", "--in", (dir / "model.json").string(), "--out", dir.string()}).code, cli::kExitConfig);
}

TEST_F(Cli, SampleIsDeterministic) {
  const auto dir = scratch("det");
  ASSERT_EQ(invoke({"gen-model", "--n", "5", "--seed", "3", "--out", dir.string()}).code, 0);
  const std::vector<std::string> args{"sample",   "--model", (dir / "model.json").string(), "--samples", "5000",
                                      "--seed",   "11",      "--temperature", "6", "--events",
                                      "--out",    (dir / "run").string()};
  ASSERT_EQ(invoke(args).code, 0);
  const auto first = slurp(dir / "run" / "samples.csv");
  const auto first_events = slurp(dir / "run" / "events.csv");
  const auto first_dist = slurp(dir / "run" / "distribution.json");
  ASSERT_EQ(invoke(args).code, 0);
  EXPECT_EQ(slurp(dir / "run" / "samples.csv"), first);
  EXPECT_EQ(slurp(dir / "run" / "events.csv"), first_events);
  EXPECT_EQ(slurp(dir / "run" / "distribution.json"), first_dist);
  EXPECT_EQ(io::samples_from_csv(dir / "run" / "samples.csv").size(), 5000U);
}

TEST_F(Cli, ZeroModelSamplesUniformlyAndValidates) {
  const auto dir = scratch("zero");
  io::save_model(dir / "zero.json", IsingModel(4));
  ASSERT_EQ(invoke({"sample", "--model", (dir / "zero.json").string(), "--samples", "200000", "--out", dir.string()}).code,
            0);
  const auto r = invoke({"validate", "--model", (dir / "zero.json").string(), "--samples", (dir / "samples.csv").string(),
                         "--temperature", "1", "--json", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = io::json::parse(r.out);
  EXPECT_LT(report["kl"].get<double>(), 1e-3);
  for (const char* f : {"energy_probability.csv", "kl_curve.csv", "exact.csv", "exact.json", "report.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(invoke({"validate", "--model", (dir / "zero.json").string(), "--samples", (dir / "samples.csv").string(),
                    "--out", dir.string()})
                .code,
            cli::kExitConfig);
}

TEST_F(Cli, GibbsEngineAndSampleModes) {
  const auto dir = scratch("modes");
  io::save_model(dir / "m.json", random_model(3, -2, 2, 1));
  const auto m = (dir / "m.json").string();
  EXPECT_EQ(invoke({"sample", "--model", m, "--engine", "gibbs", "--samples", "100", "--temperature", "2", "--out",
                    dir.string()})
                .code,
            0);
  EXPECT_EQ(invoke({"sample", "--model", m, "--engine", "gibbs", "--out", dir.string()}).code, cli::kExitConfig);
  EXPECT_EQ(invoke({"sample", "--model", m, "--engine", "metropolis", "--samples", "5", "--out", dir.string()}).code,
            cli::kExitConfig);
  EXPECT_EQ(invoke({"sample", "--model", m, "--sample-mode", "clocked:1e-6", "--samples", "300", "--out", dir.string()})
                .code,
            0);
  EXPECT_EQ(io::samples_from_csv(dir / "samples.csv").size(), 300U);
  EXPECT_EQ(invoke({"sample", "--model", m, "--sample-mode", "clocked:-1", "--samples", "3", "--out", dir.string()}).code,
            cli::kExitConfig);
  EXPECT_EQ(invoke({"sample", "--model", m, "--samples", "3", "--duration", "1", "--out", dir.string()}).code,
            cli::kExitConfig);
}

TEST_F(Cli, TransferPulseAndNeuron) {
  const auto dir = scratch("transfer");
  io::write_text(dir / "pulse.json", R"({"schema_version":1,
    "pulse":{"photon_rate":1e6,"filter_tau":1e-6,"duration":5e-3,"refilter_tau":1e-6},
    "thresholds":{"start":0,"stop":3,"step":0.25},"min_count":20})");
  auto r = invoke({"transfer", "--mode", "pulse", "--config", (dir / "pulse.json").string(), "--compare-erfc", "--json",
                   "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto report = io::json::parse(r.out);
  EXPECT_EQ(report["points"].size(), 13U);
  EXPECT_TRUE(report.contains("exponential"));
  EXPECT_TRUE(report.contains("erfc"));
  EXPECT_TRUE(fs::exists(dir / "transfer.csv"));

  io::write_text(dir / "neuron.json", R"({"schema_version":1,"rate":{"kind":"exponential","r0":1e6,"T":5},
    "biases":{"start":-20,"stop":20,"count":11},"samples_per_point":4000,"sample_period":5e-6})");
  r = invoke({"transfer", "--mode", "neuron", "--config", (dir / "neuron.json").string(), "--json", "--out",
              dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  report = io::json::parse(r.out);
  EXPECT_NEAR(report["T_fit"].get<double>(), 5.0, 0.5);

  io::write_text(dir / "noschema.json", R"({"pulse":{}})");
  EXPECT_EQ(invoke({"transfer", "--mode", "pulse", "--config", (dir / "noschema.json").string(), "--out", dir.string()})
                .code,
            cli::kExitConfig);
}

TEST_F(Cli, AnnealWritesTraceAndBestState) {
  const auto dir = scratch("anneal");
  const auto model = random_model(6, -8, 8, 21);
  io::save_model(dir / "m.json", model);
  io::write_text(dir / "schedule.json", R"({"schema_version":1,"points":[[0,40],[0.002,2]]})");
  io::write_text(dir / "rate.json", R"({"schema_version":1,"rate":{"kind":"exponential","r0":1e6,"T":40}})");
  const auto r = invoke({"anneal", "--model", (dir / "m.json").string(), "--config", (dir / "rate.json").string(),
                         "--schedule", (dir / "schedule.json").string(), "--seed", "4", "--json", "--out",
                         dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto best = io::read_json(dir / "best_state.json");
  EXPECT_EQ(best["ground_state"]["energy"].get<double>(), ground_state(Model{model}).energy);
  EXPECT_TRUE(best["found_ground_state"].get<bool>());
  EXPECT_LT(best["final_mean"].get<double>(), best["initial_window_mean"].get<double>());
  EXPECT_EQ(slurp(dir / "energy_trace.csv").rfind("time,energy,running_mean\n", 0), 0U);

  io::write_text(dir / "up.json", R"({"schema_version":1,"points":[[0,1],[1,2]]})");
  EXPECT_EQ(invoke({"anneal", "--model", (dir / "m.json").string(), "--schedule", (dir / "up.json").string(), "--out",
                    dir.string()})
                .code,
            cli::kExitConfig);
}

}  // namespace
}  // namespace spad
