#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "pursuit/errors.hpp"
#include "pursuit/kernels.hpp"
#include "pursuit/special_functions.hpp"
#include "pursuit/theory_checks.hpp"

using namespace pursuit;

namespace {

constexpr double kPi = std::numbers::pi;

double sinc_pi(double x) { return x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x); }

// P(X_1 <= a, ..., X_m <= a) for a stationary Gaussian AR(1) with lag-one
// correlation rho, by iterating the transition kernel on a trapezoid grid.
double ar1_orthant(double rho, double a, std::size_t m) {
  const std::size_t points = 4001;
  const double lo = -12.0;
  const double h = (a - lo) / static_cast<double>(points - 1);
  const double s = std::sqrt(1.0 - rho * rho);
  std::vector<double> x(points), w(points, h), p(points), next(points);
  for (std::size_t i = 0; i < points; ++i) {
    x[i] = lo + h * static_cast<double>(i);
    p[i] = std::exp(-0.5 * x[i] * x[i]) / std::sqrt(2.0 * kPi);
  }
  w.front() = w.back() = 0.5 * h;
  for (std::size_t step = 1; step < m; ++step) {
    for (std::size_t j = 0; j < points; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < points; ++i) {
        const double z = (x[j] - rho * x[i]) / s;
        acc += w[i] * p[i] * std::exp(-0.5 * z * z);
      }
      next[j] = acc / (s * std::sqrt(2.0 * kPi));
    }
    p.swap(next);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < points; ++i) total += w[i] * p[i];
  return total;
}

}  // namespace

TEST_CASE("shannon kernel") {
  // Three terms n = -1, 0, 1 written out.
  const double t = 0.5;
  CHECK(shannon_kernel(t, 3) == doctest::Approx(sinc_pi(t + 1) + sinc_pi(t) + sinc_pi(t - 1)).epsilon(1e-15));
  CHECK(shannon_kernel(0.3, 5) == doctest::Approx(sinc_pi(2.3) + sinc_pi(1.3) + sinc_pi(0.3) + sinc_pi(-0.7) + sinc_pi(-1.7)).epsilon(1e-14));
  for (int k = -10; k <= 10; ++k) CHECK(shannon_kernel(k, 21) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(shannon_kernel(11.0, 21) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(shannon_kernel(2.7, 101) == doctest::Approx(shannon_kernel(-2.7, 101)).epsilon(1e-14));
  // Just off a node the factored form and the direct sum agree.
  double direct = 0.0;
  for (int n = -50; n <= 50; ++n) direct += sinc_pi(3.0 + 1e-8 - n);
  CHECK(shannon_kernel(3.0 + 1e-8, 101) == doctest::Approx(direct).epsilon(1e-10));
  CHECK_THROWS_AS(shannon_kernel(0.0, 4), DomainError);
  CHECK_THROWS_AS(shannon_kernel(0.0, 1), DomainError);
}

TEST_CASE("lemma 4 scaled deviation") {
  // Independent scan in double precision (numpy, step 1/32).
  CHECK(lemma4_check(101, 51.0).scaled == doctest::Approx(0.2135).epsilon(5e-4));
  CHECK(lemma4_check(201, 151.0).scaled == doctest::Approx(0.2730).epsilon(5e-4));
  const auto ladder = lemma4_ladder({101, 201, 401});
  CHECK(ladder.rungs.size() == 3);
  CHECK(ladder.spread < 2.0);
  CHECK(ladder.exp_negligible);
  for (const auto& r : ladder.rungs) CHECK(r.scaled <= kLemma4Constant);
  CHECK(lemma4_check(251, 151.0).max_deviation < lemma4_check(201, 151.0).max_deviation);
  CHECK_THROWS_AS(lemma4_check(101, 100.0), DomainError);
  CHECK_THROWS_AS(lemma4_check(100, 50.0), DomainError);
}

TEST_CASE("lamperti correlation is positive and decreasing") {
  for (double H : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    double prev = 1.0;
    for (double tau = 0.05; tau < 60.0; tau += 0.05) {
      const double r = lamperti_corr(tau, H);
      REQUIRE(r > 0.0);
      REQUIRE(r < prev);
      prev = r;
    }
  }
}

TEST_CASE("folded spectrum of the Ornstein-Uhlenbeck kernel") {
  // lamperti(0.5) sampled at step theta is AR(1) with rho = e^{-theta/2}.
  for (double theta : {0.5, 1.0}) {
    const double rho = std::exp(-theta / 2.0);
    auto exact = [rho](double l) { return (1 - rho * rho) / (2 * kPi * (1 - 2 * rho * std::cos(l) + rho * rho)); };
    const auto fs = folded_spectrum(KernelSpec::lamperti(0.5), theta, 65, FoldingRoute::Lags);
    CHECK(fs.time_domain);
    CHECK(fs.tail_bound < kFoldingTailTolerance);
    for (std::size_t i = 0; i < fs.lambda.size(); ++i)
      CHECK(std::abs(fs.values[i] - exact(fs.lambda[i])) < 2e-8 * fs.kernel.spectral_density(0.0));
    CHECK(fs.variance == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(fs.theta_sigma_sq == doctest::Approx(theta * 2 * kPi * exact(0.0)).epsilon(1e-7));
  }
}

TEST_CASE("alias and lag series agree") {
  const auto k = KernelSpec::lamperti(0.9);
  const auto aliases = folded_spectrum(k, 1.0, 17, FoldingRoute::Aliases);
  const auto lags = folded_spectrum(k, 1.0, 17, FoldingRoute::Lags);
  CHECK_FALSE(aliases.time_domain);
  CHECK(lags.time_domain);
  const double tol = 2.0 * kFoldingTailTolerance * k.spectral_density(0.0);
  for (std::size_t i = 0; i < aliases.values.size(); ++i) CHECK(std::abs(aliases.values[i] - lags.values[i]) < tol);
  CHECK(aliases.variance == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("folded spectrum invariants") {
  const auto fs = folded_spectrum(KernelSpec::lamperti(0.5), 0.01);
  CHECK(std::abs(fs.theta_sigma_sq - 4.0) <= 0.05);
  CHECK(std::abs(fs.variance - 1.0) <= 1e-6);
  CHECK(fs.A_theta_mean > 1.0);
  CHECK(fs.A_theta_exp >= fs.A_theta_mean);  // Jensen on the final mean

  const auto white = folded_spectrum(KernelSpec::tabulated({1.0, 0.0}, 1.0), 1.0);
  CHECK(white.time_domain);
  for (double v : white.values) CHECK(v == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-15));
  CHECK(white.theta_sigma_sq == doctest::Approx(1.0));

  for (double H : {0.2, 0.8}) {
    const auto f = folded_spectrum(KernelSpec::lamperti(H), 0.1, 129);
    CHECK(f.variance == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(folded_spectrum(KernelSpec::lamperti(0.5), 0.02, 33).A_theta_mean >
        folded_spectrum(KernelSpec::lamperti(0.5), 0.2, 33).A_theta_mean);
  CHECK_THROWS_AS(folded_spectrum(KernelSpec::fbm(0.5), 0.1), DomainError);
  CHECK_THROWS_AS(folded_spectrum(KernelSpec::lamperti(0.5), 0.0), DomainError);
}

TEST_CASE("lemma 5 against the exact AR(1) orthant probability") {
  const double rho = 0.5;
  std::vector<double> r = {1.0, rho, rho * rho, rho * rho * rho};
  for (double a : {0.0, 1.0}) {
    const double oracle = ar1_orthant(rho, a, 4);
    const auto res = lemma5_check(r, a, 4, 200000, 17);
    const double se = std::sqrt(oracle * (1 - oracle) / 200000.0);
    CHECK(std::abs(res.orthant - oracle) < 4.0 * se);
    CHECK(res.independent == doctest::Approx(std::pow(1.0 - gaussian_tail(a), 4)));
    CHECK(res.holds);
  }
  // The trivariate orthant probability at a = 0 has a closed form
  // (Sheppard): 1/8 + sum of asin(rho_ij) / (4 pi).
  CHECK(ar1_orthant(rho, 0.0, 3) ==
        doctest::Approx(0.125 + (2 * std::asin(0.5) + std::asin(0.25)) / (4 * kPi)).epsilon(1e-6));
}

TEST_CASE("lemma 5 bound formula") {
  std::vector<double> r = {1.0, 0.5, 0.25, 0.125};
  const double delta = 0.5;
  const double expected = kLemma5Constant / std::sqrt(1 - delta * delta) * 4 * (0.5 + 0.25 + 0.125) *
                          std::exp(-4.0 / (1 + delta));
  CHECK(lemma5_bound(r, 2.0, 4) == doctest::Approx(expected).epsilon(1e-15));
  std::vector<double> white = {1.0, 0.0, 0.0, 0.0};
  CHECK(lemma5_bound(white, 1.0, 4) == 0.0);
  CHECK(lemma5_check(white, 1.0, 4, 50000, 3).holds);
  std::vector<double> bad = {1.0, 1.0};
  CHECK_THROWS_AS(lemma5_bound(bad, 1.0, 2), DomainError);
}

TEST_CASE("mills ratio check") {
  const auto m = mills_check({1.5, 2.0, 5.0, 10.0, 40.0});
  CHECK(m.monotone);
  CHECK(m.at_largest == doctest::Approx(0.398693407532052).epsilon(1e-12));
  CHECK(std::abs(m.at_largest - 0.39894) < 1e-3);
  CHECK_THROWS_AS(mills_check({0.5}), DomainError);
}

TEST_CASE("path checks") {
  const auto g = gaussian_correlation_check(KernelSpec::lamperti(0.5), 2.0, 2, 1.5, 8.0, 4000, 5);
  CHECK(g.holds);
  CHECK(g.full >= 0.0);
  CHECK_THROWS_AS(gaussian_correlation_check(KernelSpec::lamperti(0.5), 2.0, 3, 1.5, 8.0, 100, 5), DomainError);

  const auto c = concentration_check(KernelSpec::lamperti(0.5), 1.0, 16.0, {0.5, 1.0}, 4000, 6);
  CHECK(c.holds);
  CHECK(c.empirical.size() == 2);

  const auto s = small_ball_scaling(KernelSpec::lamperti(0.5), {1.0, 2.0, 4.0}, 8.0, 4000, 7);
  CHECK(s.increasing);
  CHECK(s.slope > 0.0);
}

TEST_CASE("theory report") {
  TheoryReportOptions opts;
  opts.lemma5_samples = 20000;
  opts.path_samples = 4000;
  const auto report = theory_report(opts);
  CHECK(report.entries.size() >= 8);
  for (const auto& e : report.entries) {
    INFO(e.name);
    CHECK(e.passed);
  }
  CHECK(report.all_passed());
}
