#include "runner.hpp"

#include <chrono>

#include "artifacts.hpp"
#include "pursuit/errors.hpp"
#include "pursuit/parallel.hpp"
#include "pursuit/rng.hpp"

#ifndef PURSUIT_LAB_VERSION
#define PURSUIT_LAB_VERSION "0.0.0"
#endif

namespace lab {
namespace {

nlohmann::json estimate_json(const pursuit::MCEstimate& e) {
  return {{"p_hat", e.p_hat},         {"samples", e.samples}, {"survivors", e.survivors},
          {"std_error", e.std_error}, {"ci_low", e.ci_low},   {"ci_high", e.ci_high},
          {"zero_survivors", e.zero_survivors}};
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

struct Writer {
  std::filesystem::path dir;
  RunOutcome* outcome;
  nlohmann::json schemas = nlohmann::json::object();

  void text(const std::string& name, const std::string& body, const char* schema = nullptr) {
    write_text(dir / name, body);
    outcome->files.push_back(dir / name);
    if (schema) schemas[name] = schema;
  }
  void json(const std::string& name, const nlohmann::json& body, const char* schema = nullptr) {
    text(name, body.dump(2) + "\n", schema);
  }
};

}  // namespace

const char* lab_version() { return PURSUIT_LAB_VERSION; }

RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOverrides& overrides) {
  RunOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  Writer w{overrides.output.value_or(cfg.output.directory), &outcome};
  std::filesystem::create_directories(w.dir);
  const std::size_t workers = pursuit::configured_workers();
  std::string status = "ok";

  try {
    switch (cfg.kind) {
      case Kind::Survival: {
        const auto est = pursuit::estimate_survival(*cfg.ensemble, cfg.seed, cfg.samples);
        w.text("survival.csv", survival_header() + "\n" + survival_row(*cfg.ensemble, cfg.seed, est) + "\n",
               kSurvivalSchema);
        if (cfg.output.json) w.json("survival.json", estimate_json(est));
        break;
      }
      case Kind::CaptureCdf: {
        const auto cdf = pursuit::capture_time_cdf(*cfg.ensemble, cfg.seed, cfg.samples);
        w.text("capture_cdf.csv", capture_csv(cdf), kCaptureSchema);
        if (cfg.output.json) {
          nlohmann::json q = nlohmann::json::array();
          for (double p : cfg.capture.quantiles) {
            const auto [lo, hi] = cdf.quantile_ci(p);
            q.push_back({{"q", p}, {"t", finite_or_null(cdf.quantile(p))}, {"ci", {finite_or_null(lo), finite_or_null(hi)}}});
          }
          w.json("capture_summary.json", {{"survival", estimate_json(cdf.survival())},
                                          {"never_captured", cdf.never_captured},
                                          {"quantiles", q}});
        }
        break;
      }
      case Kind::Sweep: {
        const pursuit::SweepPlan plan(cfg.sweep.cells, cfg.ensemble->formulation, cfg.sweep.domain);
        pursuit::SweepOptions opts;
        opts.coupled = cfg.sweep.coupled;
        pursuit::SweepTable table;
        // One cell at a time so progress can be reported.
        for (std::size_t i = 0; i < plan.cells().size(); ++i) {
          const pursuit::SweepPlan one({plan.cells()[i]}, plan.formulation(), plan.constants());
          const std::uint64_t seed =
              cfg.sweep.coupled ? cfg.seed : pursuit::derive_seed(cfg.seed, 0x5377656570ULL, i);
          const auto part = pursuit::sweep(one, *cfg.ensemble, seed, cfg.samples, pursuit::SweepOptions{true, opts.run});
          if (i == 0) table = part;
          else table.rows.push_back(part.rows.front());
          if (overrides.progress)
            *overrides.progress << "cell " << (i + 1) << "/" << plan.cells().size() << " T=" << fmt(plan.cells()[i].first)
                                << " n=" << plan.cells()[i].second
                                << (part.rows.front().error.empty() ? "" : " failed: " + part.rows.front().error) << "\n";
        }
        w.text("sweep.csv", sweep_csv(table, cfg.samples), kSweepSchema);
        if (cfg.output.plot_data) w.text("plot_data.csv", emit_plot_data(table, cfg.sweep.abscissa), kPlotSchema);
        if (cfg.output.json) w.json("sweep_summary.json", sweep_summary(table, cfg), kSweepSummarySchema);
        std::size_t failed = 0;
        for (const auto& r : table.rows)
          if (!r.error.empty()) {
            ++failed;
            outcome.errors.push_back("T=" + fmt(r.horizon) + " n=" + std::to_string(r.n) + ": " + r.error);
          }
        if (failed == table.rows.size()) {
          status = "failed";
          outcome.exit_code = kExitCompute;
        } else if (failed > 0) {
          status = "partial";
        }
        break;
      }
      case Kind::TheoryReport: {
        const auto report = pursuit::theory_report(cfg.theory);
        w.text("theory_report.txt", theory_text(report));
        w.text("theory_report.csv", theory_csv(report), kTheorySchema);
        break;
      }
      case Kind::KernelTable: {
        const auto t = kernel_tables(cfg.kernel_table);
        w.text("kernel_correlation.csv", t.correlation, kKernelSchema);
        w.text("kernel_spectrum.csv", t.spectrum, kKernelSchema);
        w.text("kernel_constants.csv", t.constants, kKernelSchema);
        break;
      }
    }
  } catch (const std::exception& e) {
    status = "failed";
    outcome.exit_code = kExitCompute;
    outcome.errors.push_back(e.what());
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json m;
  m["pursuit_lab_manifest"] = 1;
  m["tool"] = "pursuit_lab";
  m["version"] = lab_version();
  m["kind"] = to_string(cfg.kind);
  m["seed"] = cfg.seed;
  m["samples"] = cfg.samples;
  m["workers"] = workers;
  m["wall_time_seconds"] = wall;
  m["status"] = status;
  m["errors"] = outcome.errors;
  m["config_path"] = cfg.source_path.string();
  m["config_dir"] = std::filesystem::absolute(cfg.base_dir).string();
  m["config_text"] = cfg.source_text;
  m["config"] = config_echo(cfg.source_text);
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : outcome.files) files.push_back(f.filename().string());
  m["outputs"] = files;
  m["schemas"] = w.schemas;
  w.json("manifest.json", m);
  return outcome;
}

}  // namespace lab
