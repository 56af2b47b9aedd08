#include "pursuit/special_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <queue>
#include <vector>

#include "pursuit/errors.hpp"

namespace pursuit {
namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Lanczos coefficients, g = 7, n = 9.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

cplx log_gamma_lanczos(cplx z) {
  // Valid for Re z >= 1/2.
  z -= 1.0;
  cplx sum = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) sum += kLanczos[i] / (z + static_cast<double>(i));
  const cplx t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

// log sin(pi z) without overflow for large |Im z|.
cplx log_sin_pi(cplx z) {
  const double y = z.imag();
  if (std::abs(y) < 5.0) return std::log(std::sin(kPi * z));
  const cplx i(0.0, 1.0);
  if (y > 0.0) {
    // sin(pi z) = e^{-i pi z} (e^{2 i pi z} - 1) / (2i)
    return -i * kPi * z + std::log(std::exp(2.0 * i * kPi * z) - 1.0) - std::log(2.0 * i);
  }
  return std::conj(log_sin_pi(std::conj(z)));
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

// Gauss-Kronrod 7/15 nodes and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const Integrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  if (!std::isfinite(kronrod)) throw QuadratureError("non-finite integrand value");
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

std::complex<double> log_gamma(std::complex<double> z) {
  const double x = z.real();
  if (x <= 0.5) {
    const double k = std::round(x);
    if (k <= 0.0 && std::abs(z - cplx(k, 0.0)) < kPoleTolerance)
      throw PoleError("log_gamma: argument within pole tolerance of " + std::to_string(k));
  }
  cplx out;
  if (x >= 0.5) {
    out = log_gamma_lanczos(z);
  } else {
    out = std::log(kPi) - log_sin_pi(z) - log_gamma_lanczos(1.0 - z);
  }
  return {out.real(), wrap_angle(out.imag())};
}

double gaussian_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double mills_ratio(double u) {
  if (u < 8.0) {
    const double phi = std::exp(-0.5 * u * u) / std::sqrt(2.0 * kPi);
    return gaussian_tail(u) / phi;
  }
  // R(u) = 1/(u + 1/(u + 2/(u + 3/(u + ...)))), modified Lentz.
  constexpr double tiny = 1e-300;
  double f = u;
  double c = u;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = u + k * d;
    if (std::abs(d) < tiny) d = tiny;
    c = u + k / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

QuadratureResult integrate(const Integrand& f, double a, double b, double tol,
                           std::size_t max_intervals) {
  if (!(tol > 0.0)) throw DomainError("integrate: tolerance must be positive");
  if (a == b) return {0.0, 0.0, 1};
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::priority_queue<Segment> heap;
  Segment first = gk15(f, a, b);
  double value = first.value;
  double error = first.error;
  std::size_t evals = 15;
  heap.push(first);
  while (error > tol) {
    if (heap.size() >= max_intervals)
      throw QuadratureError("integrate: tolerance " + std::to_string(tol) +
                            " not reached on [" + std::to_string(a) + ", " + std::to_string(b) +
                            "], error estimate " + std::to_string(error));
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b))
      throw QuadratureError("integrate: interval underflow near " + std::to_string(worst.a));
    const Segment left = gk15(f, worst.a, mid);
    const Segment right = gk15(f, mid, worst.b);
    evals += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the running updates.
  value = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  return {sign * value, error, evals};
}

QuadratureResult integrate_semi_infinite(const Integrand& f, double tol) {
  if (!(tol > 0.0)) throw DomainError("integrate_semi_infinite: tolerance must be positive");
  constexpr int kMaxDoublings = 60;
  constexpr std::size_t kTailIntervals = 200;
  std::size_t tail_evaluations = 0;
  // Tail [base, inf) under t = base - ln u; nullopt when it does not converge.
  auto tail_from = [&](double base) -> std::optional<QuadratureResult> {
    const Integrand tail = [&f, base](double u) { return f(base - std::log(u)) / u; };
    try {
      auto r = integrate(tail, 0.0, 1.0, tol / 4.0, kTailIntervals);
      tail_evaluations += r.evaluations;
      return r;
    } catch (const QuadratureError&) {
      tail_evaluations += 15 * kTailIntervals;
      return std::nullopt;
    }
  };

  // A tail estimate is accepted only once it is consistent with the next
  // segment plus the next tail. Slowly decaying integrands can fool a single
  // transformed quadrature (the singularity at u = 0 is never sampled), but
  // not two of them at different bases.
  QuadratureResult total;
  double a = 0.0;
  double b = 1.0;
  double segment_tol = tol / 4.0;
  std::optional<QuadratureResult> previous_tail = tail_from(0.0);
  for (int k = 0; k < kMaxDoublings; ++k) {
    const QuadratureResult seg = integrate(f, a, b, segment_tol);
    const auto next_tail = tail_from(b);
    if (previous_tail && next_tail) {
      const double mismatch = std::abs(previous_tail->value - (seg.value + next_tail->value));
      const double err = total.abs_error_estimate + previous_tail->abs_error_estimate + mismatch;
      if (err <= tol) {
        total.value += previous_tail->value;
        total.abs_error_estimate = err;
        total.evaluations += seg.evaluations + tail_evaluations;
        return total;
      }
    }
    total.value += seg.value;
    total.abs_error_estimate += seg.abs_error_estimate;
    total.evaluations += seg.evaluations;
    segment_tol *= 0.5;
    previous_tail = next_tail;
    a = b;
    b *= 2.0;
  }
  throw QuadratureError("integrate_semi_infinite: tail did not converge after " +
                        std::to_string(kMaxDoublings) + " doublings");
}

}  // namespace pursuit
