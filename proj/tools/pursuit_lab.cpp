// pursuit_lab: config-driven experiment runner.
//
//   pursuit_lab run CONFIG [--output DIR] [--quiet]
//   pursuit_lab validate CONFIG
//   pursuit_lab report [CONFIG] [--output DIR]
//
// Exit codes: 0 success, 1 invalid config, 2 compute failure.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "lab/artifacts.hpp"
#include "lab/config.hpp"
#include "lab/runner.hpp"
#include "pursuit/errors.hpp"

namespace {

int run_config(const lab::ExperimentConfig& cfg, const std::string& output, bool quiet) {
  lab::RunOverrides ov;
  if (!output.empty()) ov.output = output;
  if (!quiet) ov.progress = &std::cerr;
  const auto outcome = lab::run_experiment(cfg, ov);
  for (const auto& e : outcome.errors) std::cerr << "error: " << e << "\n";
  if (!quiet)
    for (const auto& f : outcome.files) std::cout << f.string() << "\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for Gaussian leadership problems"};
  app.set_version_flag("--version", lab::lab_version());
  app.require_subcommand(1);

  std::string config, output;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "run an experiment config (or re-run a manifest.json)");
  run->add_option("config", config, "YAML config or manifest")->required();
  run->add_option("--output", output, "override the output directory");
  run->add_flag("--quiet", quiet, "no progress or file list");

  auto* validate = app.add_subcommand("validate", "parse and validate a config without computing");
  validate->add_option("config", config, "YAML config")->required();

  auto* report = app.add_subcommand("report", "write the theory report (text and CSV)");
  report->add_option("config", config, "theory_report config; defaults are used when omitted");
  report->add_option("--output", output, "output directory (default: theory_report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : lab::kExitValidation;
  }

  try {
    if (*validate) {
      const auto cfg = lab::load_config(config);
      std::cout << "ok: " << lab::to_string(cfg.kind) << "\n";
      return lab::kExitOk;
    }
    if (*run) return run_config(lab::load_config(config), output, quiet);
    if (*report) {
      lab::ExperimentConfig cfg;
      if (!config.empty()) {
        cfg = lab::load_config(config);
        if (cfg.kind != lab::Kind::TheoryReport) {
          std::cerr << "error: report needs a theory_report config\n";
          return lab::kExitValidation;
        }
      } else {
        cfg = lab::parse_config("kind: theory_report\noutput:\n  directory: theory_report\n");
      }
      const int code = run_config(cfg, output, true);
      std::ifstream text((output.empty() ? cfg.output.directory : std::filesystem::path(output)) / "theory_report.txt");
      std::cout << text.rdbuf();
      return code;
    }
  } catch (const pursuit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return lab::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lab::kExitCompute;
  }
  return lab::kExitOk;
}
