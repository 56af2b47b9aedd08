#pragma once

#include <complex>
#include <cstddef>
#include <functional>

namespace pursuit {

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

using Integrand = std::function<double(double)>;

inline constexpr double kDefaultQuadratureTol = 1e-10;
inline constexpr double kPoleTolerance = 1e-8;

/// Principal value of log Gamma(z): real part log|Gamma(z)|, imaginary part
/// arg Gamma(z) reduced to (-pi, pi]. Lanczos (g = 7) on Re z >= 1/2 and the
/// reflection formula elsewhere. Throws PoleError within kPoleTolerance of a
/// non-positive integer.
std::complex<double> log_gamma(std::complex<double> z);

/// Psi(x) = 1 - Phi(x), the standard Gaussian upper tail.
double gaussian_tail(double x);

/// Mills ratio Psi(u) / phi(u). Stays finite where Psi itself underflows
/// (continued fraction for u >= 8).
double mills_ratio(double u);

/// Adaptive Gauss-Kronrod (7/15) on [a, b] with global bisection. Throws
/// QuadratureError when the absolute error estimate cannot be brought
/// below `tol` within `max_intervals` subintervals.
QuadratureResult integrate(const Integrand& f, double a, double b,
                           double tol = kDefaultQuadratureTol,
                           std::size_t max_intervals = 4000);

/// Integral over [0, inf). The half-line is swept in doubling intervals
/// [0,1], [1,2], [2,4], ...; the remaining tail [b, inf) is integrated under
/// t = b - ln u, which turns an exponential tail into a bounded integrand on
/// (0, 1]. A tail value is used once it agrees with the next segment plus the
/// next tail. Integrands with slower (power-law) decay exhaust the doubling
/// budget and raise QuadratureError.
QuadratureResult integrate_semi_infinite(const Integrand& f,
                                         double tol = kDefaultQuadratureTol);

}  // namespace pursuit
