#include "pursuit/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "pursuit/errors.hpp"
#include "pursuit/special_functions.hpp"

namespace pursuit {

struct KernelSpec::Table {
  std::vector<double> r;
  double step = 0.0;
  std::string label;
  double slope_variation = 0.0;  // |r'(0+)| + sum |jumps of r'| + |r'(L-)|
  double abs_mass = 0.0;         // int_0^L |r|
};

namespace {

constexpr double kPi = std::numbers::pi;

void check_hurst(double hurst, const char* where) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw DomainError(std::string(where) + ": Hurst index must lie in (0, 1)");
}

std::string shortest(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double log_cosh(double x) {
  x = std::abs(x);
  return x + std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2;
}

// cosh(pi lambda) |Gamma(-H + i lambda)|^2
double lamperti_spectral_shape(double lambda, double hurst) {
  const auto lg = log_gamma({-hurst, lambda});
  return std::exp(log_cosh(kPi * lambda) + 2.0 * lg.real());
}

// int_0^L r(t) t^k dt on one linear segment, k in {0, 2, 4}.
double segment_moment(double t0, double t1, double r0, double r1, int k) {
  const double m = (r1 - r0) / (t1 - t0);
  const double a = r0 - m * t0;
  return a * (std::pow(t1, k + 1) - std::pow(t0, k + 1)) / (k + 1) +
         m * (std::pow(t1, k + 2) - std::pow(t0, k + 2)) / (k + 2);
}

double tabulated_cosine_transform(const std::vector<double>& r, double step, double lambda) {
  lambda = std::abs(lambda);
  const double length = step * static_cast<double>(r.size() - 1);
  double total = 0.0;
  if (lambda * length < 1e-3) {
    const double l2 = lambda * lambda;
    for (std::size_t k = 0; k + 1 < r.size(); ++k) {
      const double t0 = step * k, t1 = step * (k + 1);
      total += segment_moment(t0, t1, r[k], r[k + 1], 0) -
               0.5 * l2 * segment_moment(t0, t1, r[k], r[k + 1], 2) +
               l2 * l2 / 24.0 * segment_moment(t0, t1, r[k], r[k + 1], 4);
    }
    return total;
  }
  for (std::size_t k = 0; k + 1 < r.size(); ++k) {
    const double t0 = step * k, t1 = step * (k + 1);
    const double m = (r[k + 1] - r[k]) / step;
    const double upper = r[k + 1] * std::sin(lambda * t1) / lambda + m * std::cos(lambda * t1) / (lambda * lambda);
    const double lower = r[k] * std::sin(lambda * t0) / lambda + m * std::cos(lambda * t0) / (lambda * lambda);
    total += upper - lower;
  }
  return total;
}

struct NormalizationCache {
  std::mutex mutex;
  std::map<double, double> values;
};

NormalizationCache& normalization_cache() {
  static NormalizationCache cache;
  return cache;
}

double compute_lamperti_normalization(double hurst) {
  // Unit mass: 2 int_0^inf shape = 1 / c_H. The integrand decays like
  // pi lambda^{-1-2H}; integrate to `cutoff` and close with the power-law tail.
  constexpr double cutoff = 2048.0;
  const Integrand shape = [hurst](double l) { return lamperti_spectral_shape(l, hurst); };
  const double tol = 1e-12 * shape(0.0);
  double half_mass = integrate(shape, 0.0, 1.0, tol).value;
  for (double a = 1.0; a < cutoff; a *= 2.0) half_mass += integrate(shape, a, 2.0 * a, tol).value;
  half_mass += shape(cutoff) * cutoff / (2.0 * hurst);
  return 1.0 / (2.0 * half_mass);
}

}  // namespace

double SpectralMajorant::operator()(double lambda) const {
  lambda = std::abs(lambda);
  if (lambda <= 0.0) return at_zero;
  return std::min(at_zero, amplitude * std::pow(lambda, -decay));
}

double SpectralMajorant::tail_integral(double y) const {
  if (decay <= 1.0) return std::numeric_limits<double>::infinity();
  double head = 0.0;
  if (y < 1.0) {
    head = at_zero * (1.0 - y);
    y = 1.0;
  }
  return head + amplitude * std::pow(y, 1.0 - decay) / (decay - 1.0);
}

KernelSpec KernelSpec::fbm(double hurst) {
  check_hurst(hurst, "KernelSpec::fbm");
  return KernelSpec(KernelFamily::Fbm, hurst, nullptr);
}

KernelSpec KernelSpec::lamperti(double hurst) {
  check_hurst(hurst, "KernelSpec::lamperti");
  return KernelSpec(KernelFamily::LampertiFbm, hurst, nullptr);
}

KernelSpec KernelSpec::tabulated(std::vector<double> correlations, double step, std::string label) {
  if (correlations.size() < 2) throw DomainError("tabulated kernel needs at least two samples");
  if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("tabulated kernel step must be positive");
  if (std::abs(correlations[0] - 1.0) > 1e-12) throw DomainError("tabulated kernel must have r(0) = 1");
  correlations[0] = 1.0;
  for (double v : correlations)
    if (!std::isfinite(v) || std::abs(v) > 1.0 + 1e-12)
      throw DomainError("tabulated correlation values must satisfy |r| <= 1");
  auto table = std::make_shared<Table>();
  const std::size_t n = correlations.size();
  double variation = std::abs(correlations[1] - correlations[0]) / step;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double left = (correlations[k] - correlations[k - 1]) / step;
    const double right = (correlations[k + 1] - correlations[k]) / step;
    variation += std::abs(right - left);
  }
  variation += std::abs(correlations[n - 1] - correlations[n - 2]) / step;
  double abs_mass = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a = correlations[k], b = correlations[k + 1];
    if (a * b >= 0.0) {
      abs_mass += 0.5 * step * (std::abs(a) + std::abs(b));
    } else {
      // Piecewise-linear zero crossing.
      abs_mass += 0.5 * step * (a * a + b * b) / (std::abs(a) + std::abs(b));
    }
  }
  table->r = std::move(correlations);
  table->step = step;
  table->label = std::move(label);
  table->slope_variation = variation;
  table->abs_mass = abs_mass;
  return KernelSpec(KernelFamily::TabulatedStationary, std::numeric_limits<double>::quiet_NaN(),
                    std::move(table));
}

double KernelSpec::correlation(double lag) const {
  lag = std::abs(lag);
  switch (family_) {
    case KernelFamily::LampertiFbm:
      return lamperti_corr(lag, hurst_);
    case KernelFamily::TabulatedStationary: {
      const auto& r = table_->r;
      const double pos = lag / table_->step;
      const auto k = static_cast<std::size_t>(pos);
      if (k + 1 >= r.size()) return k + 1 == r.size() && pos == static_cast<double>(k) ? r.back() : 0.0;
      const double w = pos - static_cast<double>(k);
      return (1.0 - w) * r[k] + w * r[k + 1];
    }
    case KernelFamily::Fbm:
      break;
  }
  throw DomainError("correlation: FBM is not stationary");
}

double KernelSpec::covariance(double s, double t) const {
  if (family_ == KernelFamily::Fbm) return fbm_cov(s, t, hurst_);
  return correlation(t - s);
}

double KernelSpec::spectral_density(double lambda) const {
  switch (family_) {
    case KernelFamily::LampertiFbm:
      return lamperti_spectral_density(lambda, hurst_);
    case KernelFamily::TabulatedStationary:
      return tabulated_cosine_transform(table_->r, table_->step, lambda) / kPi;
    case KernelFamily::Fbm:
      break;
  }
  throw DomainError("spectral_density: FBM is not stationary");
}

SpectralMajorant KernelSpec::majorant() const {
  SpectralMajorant m;
  switch (family_) {
    case KernelFamily::LampertiFbm: {
      m.at_zero = lamperti_spectral_density(0.0, hurst_);
      m.decay = 1.0 + 2.0 * hurst_;
      // sup over lambda >= 1 of f(lambda) lambda^{1+2H}; the limit is pi c_H.
      double sup = kPi * lamperti_normalization(hurst_);
      for (double l = 1.0; l <= 1e6; l *= 1.05)
        sup = std::max(sup, lamperti_spectral_density(l, hurst_) * std::pow(l, m.decay));
      m.amplitude = 1.001 * sup;
      return m;
    }
    case KernelFamily::TabulatedStationary: {
      m.at_zero = table_->abs_mass / kPi;
      const double last = std::abs(table_->r.back());
      if (last > 0.0) {
        m.decay = 1.0;
        m.amplitude = (last + table_->slope_variation) / kPi;
      } else {
        m.decay = 2.0;
        m.amplitude = table_->slope_variation / kPi;
      }
      return m;
    }
    case KernelFamily::Fbm:
      break;
  }
  throw DomainError("majorant: FBM has no spectral density");
}

std::span<const double> KernelSpec::samples() const {
  if (!table_) return {};
  return table_->r;
}

double KernelSpec::step() const noexcept { return table_ ? table_->step : 0.0; }

double KernelSpec::tail_mass_bound() const {
  if (!table_) return 0.0;
  const auto& r = table_->r;
  const double last = std::abs(r.back());
  if (last == 0.0) return 0.0;
  const double prev = std::abs(r[r.size() - 2]);
  if (!(prev > last)) return std::numeric_limits<double>::infinity();
  const double q = last / prev;
  return 2.0 * table_->step * last * q / (1.0 - q);
}

std::string KernelSpec::tag() const {
  switch (family_) {
    case KernelFamily::Fbm:
      return "fbm(" + shortest(hurst_) + ")";
    case KernelFamily::LampertiFbm:
      return "lamperti(" + shortest(hurst_) + ")";
    case KernelFamily::TabulatedStationary:
      return "tabulated:" + table_->label;
  }
  return "unknown";
}

bool KernelSpec::operator==(const KernelSpec& other) const {
  if (family_ != other.family_) return false;
  if (family_ != KernelFamily::TabulatedStationary) return hurst_ == other.hurst_;
  if (table_ == other.table_) return true;
  return table_->step == other.table_->step && table_->r == other.table_->r;
}

double fbm_cov(double s, double t, double hurst) {
  check_hurst(hurst, "fbm_cov");
  if (!(s >= 0.0 && t >= 0.0)) throw DomainError("fbm_cov: times must be non-negative");
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

double lamperti_corr(double tau, double hurst) {
  check_hurst(hurst, "lamperti_corr");
  tau = std::abs(tau);
  if (tau == 0.0) return 1.0;
  // e^{tau H} - (e^{tau/2} - e^{-tau/2})^{2H} = e^{tau H} [1 - (1 - e^{-tau})^{2H}]
  const double x = std::exp(-tau);
  double log_gap;
  if (x > 1e-10) {
    log_gap = std::log(-std::expm1(2.0 * hurst * std::log1p(-x)));
  } else {
    log_gap = std::log(2.0 * hurst) - tau + std::log1p((1.0 - 2.0 * hurst) * 0.5 * x);
  }
  return 0.5 * (std::exp(tau * hurst + log_gap) + std::exp(-tau * hurst));
}

double lamperti_normalization(double hurst) {
  check_hurst(hurst, "lamperti_normalization");
  auto& cache = normalization_cache();
  {
    std::lock_guard lock(cache.mutex);
    if (auto it = cache.values.find(hurst); it != cache.values.end()) return it->second;
  }
  // Computed outside the lock; concurrent first use computes the same value.
  const double c = compute_lamperti_normalization(hurst);
  std::lock_guard lock(cache.mutex);
  cache.values.emplace(hurst, c);
  return c;
}

double lamperti_spectral_density(double lambda, double hurst) {
  check_hurst(hurst, "lamperti_spectral_density");
  return lamperti_normalization(hurst) * lamperti_spectral_shape(lambda, hurst);
}

LeadershipConstant d_closed_form(double hurst) {
  check_hurst(hurst, "d_closed_form");
  const double d = 2.0 * std::tgamma(1.0 - hurst) * std::tgamma(2.0 * hurst) / std::tgamma(1.0 + hurst);
  return {d, ConstantSource::ClosedForm};
}

LeadershipConstant d_quadrature(const KernelSpec& kernel, double tol) {
  if (!kernel.stationary()) throw DomainError("d_quadrature: kernel must be stationary");
  if (kernel.family() == KernelFamily::TabulatedStationary) {
    // The interpolant is piecewise linear: the trapezoid sum is its exact integral.
    const auto r = kernel.samples();
    double half = 0.0;
    for (std::size_t k = 0; k + 1 < r.size(); ++k) half += 0.5 * kernel.step() * (r[k] + r[k + 1]);
    return {2.0 * half, ConstantSource::Quadrature};
  }
  const Integrand f = [&kernel](double t) { return kernel.correlation(t); };
  const auto res = integrate_semi_infinite(f, tol);
  if (!(res.value > 0.0)) throw DomainError("d_quadrature: correlation integral is not positive");
  return {2.0 * res.value, ConstantSource::Quadrature};
}

LeadershipConstant d_spectral(const KernelSpec& kernel) {
  return {2.0 * kPi * kernel.spectral_density(0.0), ConstantSource::Spectral};
}

KernelSpec hetero_pursuer_kernel(double hurst_leader, double hurst_pursuer) {
  check_hurst(hurst_leader, "hetero_pursuer_kernel");
  return KernelSpec::lamperti(hurst_pursuer);
}

KernelSpec load_tabulated_kernel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel table " + path.string());
  std::vector<double> lags, values;
  std::string line;
  int lineno = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double lag, value;
    if (!(fields >> lag >> value)) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    header_allowed = false;
    if (!lags.empty() && !(lag > lags.back()))
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": lags must increase strictly");
    lags.push_back(lag);
    values.push_back(value);
  }
  if (lags.size() < 2) throw IoError(path.string() + ": need at least two samples");
  if (lags.front() != 0.0) throw IoError(path.string() + ": first lag must be 0");
  const double step = lags[1] - lags[0];
  for (std::size_t k = 1; k < lags.size(); ++k)
    if (std::abs(lags[k] - step * static_cast<double>(k)) > 1e-9 * step * static_cast<double>(k))
      throw IoError(path.string() + ": lags must be uniformly spaced");
  return KernelSpec::tabulated(std::move(values), step, path.stem().string());
}

}  // namespace pursuit
