#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pursuit/kernels.hpp"

namespace pursuit {

// ---------------------------------------------------------------------------
// Shannon interpolation of the constant 1

/// g_N(t) = sum over |n| < N/2 of sin(pi (t - n)) / (pi (t - n)), N odd >= 3.
double shannon_kernel(double t, std::size_t N);

/// Empirical constant of |g_N - 1| < c / (N - T_delta), calibrated on the
/// ladder N in {101, ..., 1601} with N - T_delta = 50 (max observed 0.3131).
inline constexpr double kLemma4Constant = 0.32;

struct Lemma4Result {
  std::size_t N = 0;
  double T_delta = 0.0;
  double max_deviation = 0.0;  // max |g_N(t) - 1| over |t| <= T_delta / 2
  double scaled = 0.0;         // max_deviation * (N - T_delta)
  double exp_term = 0.0;       // e^{-pi N / 2}
};

/// Scans |t| <= T_delta / 2 on a grid of the given step (symmetric, includes
/// both ends). Requires N odd, T_delta < N and N - T_delta >= 4.
Lemma4Result lemma4_check(std::size_t N, double T_delta, double step = 1.0 / 32.0);

struct Lemma4Ladder {
  std::vector<Lemma4Result> rungs;
  double spread = 0.0;  // max scaled / min scaled
  bool exp_negligible = false;  // e^{-pi N/2} below every deviation
};

Lemma4Ladder lemma4_ladder(const std::vector<std::size_t>& Ns, double gap = 50.0,
                           double step = 1.0 / 32.0);

// ---------------------------------------------------------------------------
// Spectral folding of a sampled stationary process

/// Folding truncation: the majorant bound on the omitted part of f_theta,
/// relative to f_0(0), must fall below this.
inline constexpr double kFoldingTailTolerance = 1e-8;
inline constexpr std::size_t kMaxFoldingTerms = 2000000;

struct FoldedSpectrum {
  double theta = 0.0;
  std::vector<double> lambda;  // uniform grid on [-pi, pi]
  std::vector<double> values;  // f_theta(lambda)
  std::size_t terms = 0;       // aliases (or lags) kept on each side
  double tail_bound = 0.0;     // bound on the omitted part, in units of f_0(0)
  /// Summed as the Fourier series of r(k theta) instead of the alias sum.
  bool time_domain = false;
  std::vector<double> lag_correlations;  // r(k theta), k = 0 .. terms
  double sigma_theta_sq = 0.0; // sup over the grid of 2 pi f_theta
  double theta_sigma_sq = 0.0; // theta * sigma_theta_sq
  /// Integral of f_theta over [-pi, pi] (adaptive quadrature); equals r(0).
  double variance = 0.0;
  /// sup over Lambda <= pi/theta of the mean of ln[2 pi f_0(0) / f_0] on
  /// (0, Lambda), plus 1.
  double A_theta_mean = 0.0;
  /// exp of the mean over (0, pi/theta), plus 1.
  double A_theta_exp = 0.0;

  /// f_theta at any |lambda| <= pi (same truncation).
  double at(double lambda) const;

  KernelSpec kernel = KernelSpec::lamperti(0.5);
};

/// f_theta(lambda) = theta^{-1} sum over all integers k of
/// f_0((lambda + 2 pi k) / theta), the spectral density of X(k theta).
/// Aliases |k| <= K are summed, with K the smallest count for which the
/// majorant bounds the omitted part of f_theta by kFoldingTailTolerance *
/// f_0(0). The equivalent series (2 pi)^{-1} sum r(k theta) e^{-ik lambda},
/// truncated by the same tolerance, is summed instead when it is cheaper or
/// when K would exceed kMaxFoldingTerms (slow spectral decay, compactly
/// supported tables).
/// `route` forces one of the two series; Auto picks the cheaper.
enum class FoldingRoute { Auto, Aliases, Lags };

FoldedSpectrum folded_spectrum(const KernelSpec& kernel, double theta,
                               std::size_t grid_points = 1025,
                               FoldingRoute route = FoldingRoute::Auto);

// ---------------------------------------------------------------------------
// Normal comparison for stationary sequences

/// Constant of the comparison inequality. Berman's normal comparison lemma
/// gives 1/(2 pi) for the bound summed over lags 1 .. m-1.
inline constexpr double kLemma5Constant = 0.15915494309189535;

struct Lemma5Result {
  double level = 0.0;
  std::size_t m = 0;
  double delta = 0.0;  // max over lags >= 1 of |r|
  double orthant = 0.0;  // MC estimate of P(xi_i <= a, i <= m)
  double independent = 0.0;  // Phi(a)^m
  double lhs_gap = 0.0;
  double rhs_bound = 0.0;
  double mc_allowance = 0.0;  // 3 standard errors
  bool holds = false;  // lhs_gap <= rhs_bound + mc_allowance
};

/// `correlations` holds r(0), r(1), ..., r(m-1) with r(0) = 1.
Lemma5Result lemma5_check(std::span<const double> correlations, double level, std::size_t m,
                          std::uint64_t samples, std::uint64_t seed);

/// K (1 - delta^2)^{-1/2} m sum_{i=1}^{m-1} |r(i)| exp(-a^2 / (1 + delta)).
double lemma5_bound(std::span<const double> correlations, double level, std::size_t m);

// ---------------------------------------------------------------------------
// Gaussian tail

struct MillsCheck {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  bool monotone = false;
  double at_largest = 0.0;  // ratio at the last grid point
};

/// Ratio Psi(u) / [u^{-1} e^{-u^2/2}] over the grid (each u in (1, 40]).
MillsCheck mills_check(const std::vector<double>& us);

// ---------------------------------------------------------------------------
// Monte Carlo checks on a single stationary path

struct ProductBoundCheck {
  double full = 0.0;       // P(|X| <= a on [0, T])
  double full_se = 0.0;
  double product = 0.0;    // prod over blocks of P(|X| <= a on block)
  double product_se = 0.0;
  std::size_t blocks = 0;
  bool holds = false;      // full >= product - 3 * combined s.e.
};

/// Correlation-inequality product bound with `blocks` equal blocks of [0, T].
ProductBoundCheck gaussian_correlation_check(const KernelSpec& kernel, double horizon,
                                             std::size_t blocks, double level, double density,
                                             std::uint64_t samples, std::uint64_t seed);

struct ConcentrationCheck {
  double median = 0.0;  // empirical median of max over [0, rho]
  std::vector<double> taus;
  std::vector<double> empirical;  // P(M <= median + tau)
  std::vector<double> bound;      // Phi(tau)
  double mc_allowance = 0.0;
  bool holds = false;
};

/// Concentration of the maximum of a unit-variance stationary path on [0, rho].
ConcentrationCheck concentration_check(const KernelSpec& kernel, double rho, double density,
                                       const std::vector<double>& taus, std::uint64_t samples,
                                       std::uint64_t seed);

struct SmallBallScaling {
  std::vector<double> horizons;
  std::vector<double> neg_log_p;  // -ln P(|X| <= 1 on [0, T])
  std::vector<std::uint64_t> survivors;
  double slope = 0.0;  // least squares of neg_log_p on T
  bool increasing = false;
};

SmallBallScaling small_ball_scaling(const KernelSpec& kernel, const std::vector<double>& horizons,
                                    double density, std::uint64_t samples, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct TheoryEntry {
  std::string name;
  bool passed = false;
  std::vector<std::pair<std::string, double>> measured;
  std::string note;
};

struct TheoryReport {
  std::vector<TheoryEntry> entries;
  bool all_passed() const;
};

struct TheoryReportOptions {
  std::uint64_t seed = 1;
  std::uint64_t lemma5_samples = 200000;
  std::uint64_t path_samples = 20000;
};

/// Runs every check with the documented default parameters.
TheoryReport theory_report(const TheoryReportOptions& options = {});

}  // namespace pursuit
