#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "lab/artifacts.hpp"
#include "lab/config.hpp"
#include "lab/runner.hpp"
#include "pursuit/errors.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kData = PURSUIT_TEST_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("pursuit_lab_test_" + name);
  fs::remove_all(p);
  return p;
}

const char* kTinySweep = R"(kind: sweep
seed: 9
samples: 2000
ensemble:
  leader: {family: fbm, hurst: 0.5}
  pursuers:
    - {family: fbm, hurst: 0.5}
  level: 1.0
  formulation: selfsimilar_0T
  grid_density: 8
sweep:
  horizons: [4, 8, 16, 48]
  counts: [6]
  correction_fit: true
output:
  plot_data: true
)";

}  // namespace

TEST_CASE("number formatting") {
  CHECK(lab::fmt(0.1) == "0.10000000000000001");
  CHECK(lab::fmt(4.0) == "4");
  CHECK(lab::fmt(std::numeric_limits<double>::quiet_NaN()).empty());
  CHECK(lab::fmt(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("golden csv headers") {
  CHECK(lab::survival_header() == first_line(slurp(kData / "golden/survival.csv.header")));
  CHECK(lab::sweep_header() == first_line(slurp(kData / "golden/sweep.csv.header")));
  CHECK(lab::plot_header() == first_line(slurp(kData / "golden/plot_data.csv.header")));
  CHECK(lab::capture_header() == first_line(slurp(kData / "golden/capture_cdf.csv.header")));
  CHECK(lab::theory_header() == first_line(slurp(kData / "golden/theory_report.csv.header")));
}

TEST_CASE("config validation names field and line") {
  try {
    lab::load_config(kData / "configs/unknown_key.yaml");
    FAIL("no error");
  } catch (const pursuit::ConfigError& e) {
    CHECK(e.field() == "ensemble.grid_densty");
    CHECK(e.line() == 11);
  }
  try {
    lab::load_config(kData / "configs/bad_domain.yaml");
    FAIL("no error");
  } catch (const pursuit::ConfigError& e) {
    CHECK(std::string(e.what()).find("(T=8, n=2)") != std::string::npos);
  }
  CHECK_THROWS_AS(lab::parse_config("kind: survival\nseed: -3\n"), pursuit::ConfigError);
  CHECK_THROWS_AS(lab::parse_config("kind: nonsense\n"), pursuit::ConfigError);
  CHECK_THROWS_AS(lab::parse_config("kind: theory_report\nsamples: 10\n"), pursuit::ConfigError);
  try {
    lab::parse_config("kind: kernel_table\nkernel_table:\n  kernels:\n    - {family: lamperti, hurst: 1.5}\n");
    FAIL("no error");
  } catch (const pursuit::ConfigError& e) {
    CHECK(e.field() == "kernel_table.kernels[0].hurst");
    CHECK(e.line() == 4);
  }
}

TEST_CASE("survival run writes csv and manifest") {
  auto cfg = lab::load_config(kData / "configs/tiny_survival.yaml");
  const auto dir = scratch("survival");
  const auto outcome = lab::run_experiment(cfg, {dir, nullptr});
  REQUIRE(outcome.exit_code == lab::kExitOk);
  const auto csv = lines(slurp(dir / "survival.csv"));
  REQUIRE(csv.size() == 2);
  CHECK(csv[0] == lab::survival_header());
  CHECK(csv[1].rfind("selfsimilar_0T,fbm(0.5),fbm(0.5)x2,2,4,16,1,grid,3,3000,", 0) == 0);

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  std::vector<std::string> keys;
  for (const auto& [k, v] : manifest.items()) keys.push_back(k);
  CHECK(keys == lines(slurp(kData / "golden/manifest.keys")));
  CHECK(manifest["schemas"]["survival.csv"] == lab::kSurvivalSchema);
  CHECK(manifest["config"]["samples"] == 3000);

  // Re-running the manifest reproduces the CSV body byte for byte.
  const auto again = scratch("survival_again");
  auto replay = lab::load_config(dir / "manifest.json");
  CHECK(replay.samples == 3000);
  lab::run_experiment(replay, {again, nullptr});
  CHECK(slurp(again / "survival.csv") == slurp(dir / "survival.csv"));
}

TEST_CASE("sweep artifacts and worker invariance") {
  auto cfg = lab::parse_config(kTinySweep);
  const auto one = scratch("sweep1");
  const auto three = scratch("sweep3");
  ::setenv("PURSUIT_LAB_WORKERS", "1", 1);
  REQUIRE(lab::run_experiment(cfg, {one, nullptr}).exit_code == lab::kExitOk);
  ::setenv("PURSUIT_LAB_WORKERS", "3", 1);
  REQUIRE(lab::run_experiment(cfg, {three, nullptr}).exit_code == lab::kExitOk);
  ::unsetenv("PURSUIT_LAB_WORKERS");
  CHECK(slurp(one / "sweep.csv") == slurp(three / "sweep.csv"));
  CHECK(slurp(one / "plot_data.csv") == slurp(three / "plot_data.csv"));

  const auto plot = lines(slurp(one / "plot_data.csv"));
  CHECK(plot.size() == 1 + 2 * 4);
  for (std::size_t i = 1; i < plot.size(); i += 2) {
    CHECK(plot[i].rfind("estimate,", 0) == 0);
    CHECK(plot[i + 1].rfind("reference,", 0) == 0);
    CHECK(plot[i + 1].find(",0.25,,") != std::string::npos);  // 1/d for H = 1/2
  }

  const auto summary = nlohmann::json::parse(slurp(one / "sweep_summary.json"));
  std::vector<std::string> keys;
  for (const auto& [k, v] : summary.items()) keys.push_back(k);
  auto golden = lines(slurp(kData / "golden/sweep_summary.keys"));
  golden.push_back("correction_fits");
  std::sort(golden.begin(), golden.end());
  CHECK(keys == golden);
  REQUIRE(summary["fits"].size() == 1);
  CHECK(summary["fits"][0]["gamma"].get<double>() > 0.0);
}

TEST_CASE("emit_plot_data") {
  pursuit::SweepTable empty;
  CHECK_THROWS_AS(lab::emit_plot_data(empty), pursuit::DomainError);
  pursuit::SweepTable t;
  t.prediction = 0.25;
  pursuit::SweepRow row;
  row.horizon = 4;
  row.n = 8;
  row.estimate = pursuit::MCEstimate::from_counts(10, 1000);
  row.ratio = pursuit::leadership_ratio(*row.estimate, 4, 8, pursuit::Formulation::Stationary0T);
  t.rows.push_back(row);
  const auto out = lines(lab::emit_plot_data(t, lab::PlotAbscissa::LnT));
  REQUIRE(out.size() == 3);
  CHECK(out[1].rfind("estimate,4,8,ln_T,1.3862943611198906,", 0) == 0);
  CHECK(out[2] == "reference,4,8,ln_T,1.3862943611198906,0.25,,");
}

TEST_CASE("kernel table") {
  auto cfg = lab::parse_config(
      "kind: kernel_table\nkernel_table:\n  kernels:\n    - {family: lamperti, hurst: 0.5}\n  lags: [0, 2]\n  frequencies: [0]\n");
  const auto t = lab::kernel_tables(cfg.kernel_table);
  CHECK(lines(t.correlation)[2] == "lamperti(0.5),2,0.36787944117144233");
  CHECK(lines(t.constants)[1].rfind("lamperti(0.5),4,closed_form,0.25,", 0) == 0);
}
