#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace lab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitCompute = 2;

struct RunOverrides {
  std::optional<std::filesystem::path> output;
  std::ostream* progress = nullptr;  // plain-text progress lines
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> files;  // artifacts written, manifest last
  std::vector<std::string> errors;
};

/// Computes the experiment and writes its artifacts plus manifest.json into
/// the output directory. Per-cell sweep failures are recorded; the exit code
/// is kExitCompute only when nothing could be computed.
RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOverrides& overrides = {});

const char* lab_version();

}  // namespace lab
