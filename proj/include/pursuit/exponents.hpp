#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pursuit/kernels.hpp"
#include "pursuit/pursuit.hpp"

namespace pursuit {

/// -ln p normalized by T ln n (stationary) or ln T ln n (self-similar).
/// The interval maps the Wilson bounds of p through the same transform.
/// Without survivors only a lower bound exists: value is NaN, ci_low is the
/// bound from the rule-of-three upper limit and ci_high is +inf.
struct RatioEstimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  double ci_low = 0.0;
  double ci_high = std::numeric_limits<double>::infinity();
  bool one_sided = false;
};

double leadership_normalizer(double horizon, std::size_t n, Formulation formulation);
RatioEstimate leadership_ratio(const MCEstimate& est, double horizon, std::size_t n,
                               Formulation formulation);

struct FitPoint {
  double x = 0.0;       // ln T (or ln n)
  double y = 0.0;       // ln p_hat
  double weight = 0.0;  // 1 / Var(ln p_hat), delta method
};

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
  std::vector<FitPoint> points;
  double residual_rms = 0.0;  // weighted
  double prediction = std::numeric_limits<double>::quiet_NaN();
  bool grid_domain_ok = true;

  /// Exponent estimate -slope with its 95% interval.
  double gamma() const { return -slope; }
  double gamma_ci_low() const { return -slope_ci_high; }
  double gamma_ci_high() const { return -slope_ci_low; }
};

/// Weighted least squares of ln p_hat on ln T, weights 1 / Var(ln p_hat) with
/// Var(ln p_hat) = (1 - p) / (N p). Needs at least three distinct horizons,
/// max T / min T >= 10 and no zero survivors.
ExponentFit fit_gamma_n(const std::vector<std::pair<double, MCEstimate>>& horizon_estimates,
                        double prediction = std::numeric_limits<double>::quiet_NaN());

/// Opt-in correction fit ratio(n) = a + b / ln n at fixed T (unweighted).
struct CorrectionFit {
  double limit = 0.0;  // a
  double coefficient = 0.0;  // b
};
CorrectionFit fit_log_n_correction(const std::vector<std::pair<std::size_t, double>>& n_ratios);

struct DomainConstants {
  double c = 1.1;
  double C = 5.0;
};

/// True iff (T, n) lies in the admissible domain: c ln T < ln n < C T for the
/// stationary formulation, c ln ln T < ln n <= C ln T for the self-similar ones.
bool domain_ok(double horizon, std::size_t n, Formulation formulation, const DomainConstants& k);

class SweepPlan {
 public:
  /// Throws DomainError naming the first (T, n) pair outside the domain.
  SweepPlan(std::vector<std::pair<double, std::size_t>> cells, Formulation formulation,
            DomainConstants constants = {});
  /// Every combination of the given horizons and counts.
  static SweepPlan grid(const std::vector<double>& horizons, const std::vector<std::size_t>& counts,
                        Formulation formulation, DomainConstants constants = {});

  const std::vector<std::pair<double, std::size_t>>& cells() const { return cells_; }
  Formulation formulation() const { return formulation_; }
  const DomainConstants& constants() const { return constants_; }

 private:
  std::vector<std::pair<double, std::size_t>> cells_;
  Formulation formulation_;
  DomainConstants constants_;
};

struct SweepRow {
  double horizon = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::optional<MCEstimate> estimate;
  RatioEstimate ratio;
  bool domain_ok = true;
  std::string error;  // non-empty when the cell failed
};

struct SweepTable {
  EnsembleConfig base;
  std::vector<SweepRow> rows;
  double prediction = std::numeric_limits<double>::quiet_NaN();
};

struct SweepOptions {
  /// Same seed in every cell, so cells with equal T share the paths of their
  /// common particles. Otherwise each cell gets derive_seed(seed, cell).
  bool coupled = true;
  RunOptions run;
};

/// One survival estimate per cell: `base` with its leader kernel and the first
/// pursuer group's kernel replicated n times. Cell failures are recorded in
/// the row and never abort the sweep.
SweepTable sweep(const SweepPlan& plan, const EnsembleConfig& base, std::uint64_t seed,
                 std::uint64_t samples_per_cell, const SweepOptions& options = {});

/// 1/d of the leader's kernel: closed form for FBM / Lamperti families,
/// quadrature for tabulated kernels.
double prediction(const KernelSpec& kernel);
double prediction(const EnsembleConfig& config);

}  // namespace pursuit
