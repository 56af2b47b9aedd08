#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pursuit/exponents.hpp"
#include "pursuit/kernels.hpp"
#include "pursuit/pursuit.hpp"
#include "pursuit/theory_checks.hpp"

namespace lab {

enum class Kind { Survival, CaptureCdf, Sweep, TheoryReport, KernelTable };

std::string to_string(Kind k);

struct OutputSpec {
  std::filesystem::path directory = "out";
  bool json = true;        // summary JSON next to the CSV files
  bool plot_data = false;  // sweep only: long-format plot CSV
};

enum class PlotAbscissa { LnN, LnT };

struct SweepSpec {
  std::vector<std::pair<double, std::size_t>> cells;
  bool coupled = true;
  pursuit::DomainConstants domain;
  PlotAbscissa abscissa = PlotAbscissa::LnN;
  bool correction_fit = false;
};

struct CaptureSpec {
  std::vector<double> quantiles = {0.5};
};

struct KernelTableSpec {
  std::vector<pursuit::KernelSpec> kernels;
  std::vector<double> lags;
  std::vector<double> frequencies;
};

/// Parsed experiment file. Every science parameter lives here; the worker
/// count comes from PURSUIT_LAB_WORKERS only.
struct ExperimentConfig {
  Kind kind = Kind::Survival;
  std::uint64_t seed = 1;
  std::uint64_t samples = 0;
  OutputSpec output;
  std::optional<pursuit::EnsembleConfig> ensemble;
  SweepSpec sweep;
  CaptureSpec capture;
  KernelTableSpec kernel_table;
  pursuit::TheoryReportOptions theory;

  /// Config as read, for the manifest.
  std::string source_text;
  std::filesystem::path source_path;
  std::filesystem::path base_dir;  // relative paths resolve here
};

/// Parses and validates; throws pursuit::ConfigError naming the field and the
/// 1-based line. Relative paths (output directory, kernel files) resolve
/// against the config file's directory. A run manifest is accepted too: its
/// embedded config is used.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");

}  // namespace lab
