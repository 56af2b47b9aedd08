#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pursuit/kernels.hpp"
#include "pursuit/sampling.hpp"

namespace pursuit {

enum class Formulation {
  Stationary0T,   // stationary kernels on [0, T]
  SelfSimilar0T,  // FBM on [0, T], particles start at 0
  SelfSimilar1T,  // FBM on [1, T], simulated through the Lamperti picture
};

/// How a path is checked between grid points.
enum class Monitoring {
  Grid,  // grid points only
  /// Exact continuous-time crossing for n = 1 with Brownian leader and
  /// pursuer on [0, T]: the gap is sqrt(2) B, and given its values x, y at
  /// the ends of a step of length dt it crosses c in between with probability
  /// exp(-(c - x)(c - y) / dt).
  BrownianBridge,
};

std::string to_string(Formulation f);
std::string to_string(Monitoring m);
Formulation parse_formulation(const std::string& s);
Monitoring parse_monitoring(const std::string& s);

struct PursuerGroup {
  KernelSpec kernel;
  std::size_t count = 1;
};

/// One pursuit experiment. For the self-similar formulations the kernels
/// are FBM; a pursuer with index H_i behind a leader with index H is the
/// scaled process t^{H - H_i} B_{H_i}(t).
struct EnsembleConfig {
  KernelSpec leader = KernelSpec::lamperti(0.5);
  std::vector<PursuerGroup> pursuers;
  double horizon = 1.0;
  double level = 0.0;
  Formulation formulation = Formulation::Stationary0T;
  /// Grid points per unit time ([0,T] runs) or per unit log-time ([1,T]).
  double grid_density = 64.0;
  Monitoring monitoring = Monitoring::Grid;

  std::size_t n() const;
  /// Throws DomainError describing the first violated requirement.
  void validate() const;
  /// Simulation grid: [0, T] in time, or [0, ln T] in log-time for
  /// SelfSimilar1T. Its interval count is round(length * density), at least 1.
  GridSpec grid() const;
  /// Homogeneous ensemble: n pursuers sharing the leader's kernel.
  static EnsembleConfig homogeneous(const KernelSpec& kernel, std::size_t n, double horizon,
                                    double level, Formulation formulation,
                                    double grid_density = 64.0);
};

/// Monte Carlo probability with a 95% Wilson score interval. With no
/// survivors the upper end is min(1, 3/N) (rule of three) and
/// `zero_survivors` is set.
struct MCEstimate {
  double p_hat = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t survivors = 0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  bool zero_survivors = false;

  static constexpr double kConfidence = 0.95;
  static MCEstimate from_counts(std::uint64_t survivors, std::uint64_t samples);
};

/// Execution knobs that never change the estimate.
struct RunOptions {
  std::size_t workers = 0;  // 0: PURSUIT_LAB_WORKERS
  /// RNG stream of each particle (leader first). Empty: 0, 1, ..., n.
  /// Permuting it gives a different but equally distributed realization.
  std::vector<std::uint64_t> streams;
};

/// M_n(t_k) = max_i (X_i(t_k) - X_0(t_k)) for every row. Throws GridMismatch
/// when grids or row counts differ.
PathBatch leader_gap(const PathBatch& leader, const std::vector<PathBatch>& pursuers);

/// Fraction of samples with M_n < level at every monitored point.
MCEstimate estimate_survival(const EnsembleConfig& config, std::uint64_t seed,
                             std::uint64_t samples, const RunOptions& options = {});

/// Empirical distribution of the capture time tau_n (first monitored time at
/// which M_n reaches the level), on the simulation grid in physical time.
struct CaptureCdf {
  std::vector<double> times;
  std::vector<double> cdf;  // P(tau_n <= times[k]), nondecreasing
  std::vector<std::uint64_t> captures;  // first captures at each grid index
  std::uint64_t samples = 0;
  std::uint64_t never_captured = 0;

  /// Right-continuous step function: P(tau_n <= t).
  double at(double t) const;
  /// Survival P(tau_n > horizon); equals estimate_survival on the same seed.
  MCEstimate survival() const;
  /// Smallest grid time with cdf >= q; +inf if never reached.
  double quantile(double q) const;
  /// Distribution-free 95% interval for the q-quantile from binomial order
  /// statistics (normal approximation to the ranks).
  std::pair<double, double> quantile_ci(double q) const;
};

CaptureCdf capture_time_cdf(const EnsembleConfig& config, std::uint64_t seed,
                            std::uint64_t samples, const RunOptions& options = {});

/// Coupled estimates of the two events compared in the sandwich theorem:
/// A = {M_n <= 0 on [1, T]} and B = {M_n <= 1 on [0, T]}, plus
/// C = {M_n <= 0 on [0, T]} which is contained in both. All three come from
/// the same FBM paths on a uniform [0, T] grid; `ordering_violations` counts
/// samples in C but not in A or not in B (always 0 unless there is a bug).
struct FormulationComparison {
  MCEstimate interval_1T;
  MCEstimate level_0T;
  MCEstimate strict_0T;
  std::uint64_t ordering_violations = 0;
  /// ln P(A) / ln P(B); NaN when either estimate is 0 or 1.
  double log_ratio = std::numeric_limits<double>::quiet_NaN();
};

/// `config` must be self-similar with T > 1; its formulation and level are
/// ignored, the grid is uniform on [0, T] at config.grid_density.
FormulationComparison compare_formulations(const EnsembleConfig& config, std::uint64_t seed,
                                           std::uint64_t samples, const RunOptions& options = {});

struct RefinementLevel {
  double grid_density = 0.0;
  MCEstimate estimate;
};

/// Survival at densities d, 2d, 4d, ... (levels entries) on the same seed.
/// Finer grids monitor more points, so p_hat should not increase beyond noise.
std::vector<RefinementLevel> refinement_study(const EnsembleConfig& config, std::uint64_t seed,
                                              std::uint64_t samples, std::size_t levels = 3,
                                              const RunOptions& options = {});

}  // namespace pursuit
