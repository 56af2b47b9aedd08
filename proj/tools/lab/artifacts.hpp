#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "config.hpp"
#include "pursuit/exponents.hpp"
#include "pursuit/pursuit.hpp"
#include "pursuit/theory_checks.hpp"

namespace lab {

// Schema identifiers recorded in every manifest. Bump on any column change.
inline constexpr const char* kSurvivalSchema = "survival/1";
inline constexpr const char* kCaptureSchema = "capture_cdf/1";
inline constexpr const char* kSweepSchema = "sweep/1";
inline constexpr const char* kPlotSchema = "plot_data/1";
inline constexpr const char* kSweepSummarySchema = "sweep_summary/1";
inline constexpr const char* kTheorySchema = "theory_report/1";
inline constexpr const char* kKernelSchema = "kernel_table/1";

/// 17 significant digits; NaN prints empty, infinities as inf / -inf.
std::string fmt(double v);

const std::string& survival_header();
const std::string& capture_header();
const std::string& sweep_header();
const std::string& plot_header();
const std::string& theory_header();

/// One survival row (no trailing newline).
std::string survival_row(const pursuit::EnsembleConfig& cfg, std::uint64_t seed,
                         const pursuit::MCEstimate& est);
std::string pursuers_tag(const pursuit::EnsembleConfig& cfg);

std::string capture_csv(const pursuit::CaptureCdf& cdf);
std::string sweep_csv(const pursuit::SweepTable& table, std::uint64_t samples);

/// Long-format plot data: an "estimate" row and a "reference" row per cell.
/// Throws pursuit::DomainError on an empty table.
std::string emit_plot_data(const pursuit::SweepTable& table, PlotAbscissa abscissa = PlotAbscissa::LnN);

nlohmann::json sweep_summary(const pursuit::SweepTable& table, const ExperimentConfig& cfg);

std::string theory_text(const pursuit::TheoryReport& report);
std::string theory_csv(const pursuit::TheoryReport& report);

struct KernelTables {
  std::string correlation;
  std::string spectrum;
  std::string constants;
};
KernelTables kernel_tables(const KernelTableSpec& spec);

/// Parsed YAML config as JSON, for the manifest echo.
nlohmann::json config_echo(const std::string& yaml_text);

void write_text(const std::filesystem::path& path, const std::string& body);

}  // namespace lab
