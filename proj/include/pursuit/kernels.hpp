#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pursuit {

enum class KernelFamily { Fbm, LampertiFbm, TabulatedStationary };

/// Monotone majorant phi(lambda) = min(f(0), amplitude * |lambda|^-decay) of a
/// spectral density (with `at_zero` = f(0)).
struct SpectralMajorant {
  double at_zero = 0.0;
  double amplitude = 0.0;
  double decay = 0.0;

  double operator()(double lambda) const;
  /// Upper bound on the integral of phi over [y, inf), y > 0.
  double tail_integral(double y) const;
};

/// Process family descriptor. Immutable after construction; copies share
/// tabulated data.
class KernelSpec {
 public:
  static KernelSpec fbm(double hurst);
  static KernelSpec lamperti(double hurst);
  /// Correlation samples r(0), r(step), r(2 step), ... with r(0) = 1.
  /// Linear interpolation between samples, zero beyond the last one.
  static KernelSpec tabulated(std::vector<double> correlations, double step,
                              std::string label = "tabulated");

  KernelFamily family() const noexcept { return family_; }
  /// Hurst index (FBM / Lamperti families); NaN for tabulated kernels.
  double hurst() const noexcept { return hurst_; }
  bool stationary() const noexcept { return family_ != KernelFamily::Fbm; }

  /// Stationary correlation r(lag) (even in lag). Throws DomainError for FBM.
  double correlation(double lag) const;
  /// Cov(X(s), X(t)).
  double covariance(double s, double t) const;
  /// Spectral density f(lambda) with r(t) = int e^{i lambda t} f(lambda) d lambda.
  double spectral_density(double lambda) const;
  SpectralMajorant majorant() const;

  /// Tabulated data (empty for parametric families).
  std::span<const double> samples() const;
  double step() const noexcept;
  /// Estimated correlation mass beyond the last tabulated sample, assuming the
  /// last two samples continue geometrically; +inf when they do not decay.
  double tail_mass_bound() const;

  /// Short stable tag: "fbm(0.5)", "lamperti(0.75)", "tabulated:<label>".
  std::string tag() const;

  bool operator==(const KernelSpec& other) const;

 private:
  struct Table;
  KernelSpec(KernelFamily family, double hurst, std::shared_ptr<const Table> table)
      : family_(family), hurst_(hurst), table_(std::move(table)) {}

  KernelFamily family_;
  double hurst_;
  std::shared_ptr<const Table> table_;
};

enum class ConstantSource { ClosedForm, Quadrature, Spectral };

struct LeadershipConstant {
  double d = 0.0;
  ConstantSource source = ConstantSource::ClosedForm;
};

/// (s^{2H} + t^{2H} - |t - s|^{2H}) / 2.
double fbm_cov(double s, double t, double hurst);

/// Correlation of the Lamperti transform X(e^tau) e^{-tau H} of FBM:
/// [e^{tau H} + e^{-tau H} - (e^{tau/2} - e^{-tau/2})^{2H}] / 2.
double lamperti_corr(double tau, double hurst);

/// c_H cosh(pi lambda) |Gamma(-H + i lambda)|^2 with c_H fixed by unit total
/// mass. c_H is computed by quadrature once per H and cached.
double lamperti_spectral_density(double lambda, double hurst);
double lamperti_normalization(double hurst);

/// 2 Gamma(1-H) Gamma(2H) / Gamma(1+H).
LeadershipConstant d_closed_form(double hurst);
/// Integral of the correlation over the whole line (stationary kernels).
LeadershipConstant d_quadrature(const KernelSpec& kernel, double tol = 1e-10);
/// 2 pi f(0).
LeadershipConstant d_spectral(const KernelSpec& kernel);

/// Stationary kernel of the Lamperti-transformed pursuer t^{H - H_i} B_{H_i}(t).
/// Depends only on H_i; the leader index enters only through the scaling.
KernelSpec hetero_pursuer_kernel(double hurst_leader, double hurst_pursuer);

/// Two columns "lag correlation" per line; an optional non-numeric header line
/// and '#' comments are skipped. Lags must start at 0, increase strictly and be
/// uniformly spaced.
KernelSpec load_tabulated_kernel(const std::filesystem::path& path);

}  // namespace pursuit
