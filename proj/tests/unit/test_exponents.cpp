#include <cmath>
#include <string>

#include "doctest.h"
#include "pursuit/errors.hpp"
#include "pursuit/exponents.hpp"

using namespace pursuit;

namespace {

MCEstimate exact(double p, std::uint64_t n = 1000000) {
  MCEstimate e = MCEstimate::from_counts(static_cast<std::uint64_t>(std::llround(p * n)), n);
  e.p_hat = p;  // keep the value exact for regression-recovery checks
  return e;
}

}  // namespace

TEST_CASE("leadership ratio") {
  const double T = 8.0;
  const std::size_t n = 16;
  const double p = std::exp(-T * std::log(16.0) / 4.0);
  const auto r = leadership_ratio(exact(p, 1000000000000ull), T, n, Formulation::Stationary0T);
  CHECK(r.value == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r.ci_low <= r.value);
  CHECK(r.value <= r.ci_high);

  const auto one = leadership_ratio(MCEstimate::from_counts(100, 100), 4.0, 8, Formulation::Stationary0T);
  CHECK(one.value == 0.0);
  CHECK_FALSE(std::signbit(one.value));

  const auto ss = leadership_ratio(MCEstimate::from_counts(50, 1000), 16.0, 4, Formulation::SelfSimilar0T);
  CHECK(ss.value == doctest::Approx(-std::log(0.05) / (std::log(16.0) * std::log(4.0))));

  const auto zero = leadership_ratio(MCEstimate::from_counts(0, 1000), 4.0, 8, Formulation::Stationary0T);
  CHECK(zero.one_sided);
  CHECK(std::isnan(zero.value));
  CHECK(zero.ci_low == doctest::Approx(-std::log(0.003) / (4.0 * std::log(8.0))));
  CHECK(std::isinf(zero.ci_high));
  CHECK_THROWS_AS(leadership_ratio(MCEstimate::from_counts(1, 2), 4.0, 1, Formulation::Stationary0T), DomainError);
}

TEST_CASE("fit recovers exact power laws") {
  std::vector<std::pair<double, MCEstimate>> pts;
  for (double T : {2.0, 8.0, 32.0, 128.0}) pts.emplace_back(T, exact(std::pow(T, -0.6)));
  const auto fit = fit_gamma_n(pts, 0.5);
  CHECK(std::abs(fit.slope + 0.6) < 1e-12);
  CHECK(fit.gamma() == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(fit.residual_rms < 1e-12);
  CHECK(fit.gamma_ci_low() < 0.6);
  CHECK(fit.gamma_ci_high() > 0.6);
  CHECK(fit.prediction == 0.5);
  CHECK(fit.points.size() == 4);
}

TEST_CASE("fit on reflection probabilities gives gamma_1 near 1/2") {
  // P(sup sqrt(2) B < 1 on [0,T]) = 1 - 2 Psi(1/sqrt(2T)) ~ T^{-1/2}.
  std::vector<std::pair<double, MCEstimate>> pts;
  for (double T : {1.0, 4.0, 16.0, 64.0}) pts.emplace_back(T, exact(std::erf(1.0 / (2.0 * std::sqrt(T)))));
  const auto fit = fit_gamma_n(pts);
  CHECK(fit.gamma() > 0.45);
  CHECK(fit.gamma() < 0.55);
}

TEST_CASE("fit preconditions") {
  std::vector<std::pair<double, MCEstimate>> pts = {{1.0, exact(0.5)}, {4.0, exact(0.3)}};
  CHECK_THROWS_AS(fit_gamma_n(pts), DomainError);
  pts.emplace_back(8.0, exact(0.2));
  CHECK_THROWS_AS(fit_gamma_n(pts), DomainError);  // less than a decade
  pts.emplace_back(16.0, MCEstimate::from_counts(0, 100));
  CHECK_THROWS_AS(fit_gamma_n(pts), DomainError);
}

TEST_CASE("log n correction fit") {
  std::vector<std::pair<std::size_t, double>> pts;
  for (std::size_t n : {8, 16, 32, 64}) pts.emplace_back(n, 0.25 + 1.5 / std::log(double(n)));
  const auto f = fit_log_n_correction(pts);
  CHECK(f.limit == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(f.coefficient == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("admissible domain") {
  const DomainConstants k;
  for (double T : {4.0, 8.0})
    for (std::size_t n : {16, 64}) CHECK(domain_ok(T, n, Formulation::Stationary0T, k));
  CHECK_FALSE(domain_ok(8.0, 8, Formulation::Stationary0T, k));
  CHECK(domain_ok(4.0, 8, Formulation::Stationary0T, k));
  CHECK_FALSE(domain_ok(1.0, 1000, Formulation::Stationary0T, k));  // ln n >= C T
  CHECK(domain_ok(256.0, 8, Formulation::SelfSimilar0T, k));
  CHECK_FALSE(domain_ok(16.0, 100000000, Formulation::SelfSimilar0T, k));

  CHECK_NOTHROW(SweepPlan::grid({4.0, 8.0}, {16, 64}, Formulation::Stationary0T));
  try {
    SweepPlan::grid({4.0, 8.0}, {8, 16}, Formulation::Stationary0T);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("(T=8, n=8)") != std::string::npos);
  }
  CHECK_THROWS_AS(SweepPlan({{4.0, 16}}, Formulation::Stationary0T, {1.0, 5.0}), DomainError);
}

TEST_CASE("prediction depends on the leader only") {
  CHECK(prediction(KernelSpec::lamperti(0.5)) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(prediction(KernelSpec::lamperti(0.75)) == doctest::Approx(0.14301745565659).epsilon(1e-12));
  EnsembleConfig a, b;
  a.leader = b.leader = KernelSpec::fbm(0.5);
  a.pursuers = {{KernelSpec::fbm(0.5), 3}};
  b.pursuers = {{KernelSpec::fbm(0.2), 1}, {KernelSpec::fbm(0.9), 2}};
  CHECK(prediction(a) == prediction(b));
  CHECK(prediction(a) == 0.25);
  const auto tab = KernelSpec::tabulated({1.0, 0.5, 0.0}, 1.0);
  CHECK(prediction(tab) == doctest::Approx(0.5));  // triangle of area 2
}

TEST_CASE("sweep records rows and cell errors") {
  const auto base = EnsembleConfig::homogeneous(KernelSpec::lamperti(0.5), 1, 1.0, 0.0, Formulation::Stationary0T, 8.0);
  const auto plan = SweepPlan::grid({2.0}, {4, 8}, Formulation::Stationary0T);
  const auto table = sweep(plan, base, 3, 4000);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.prediction == 0.25);
  for (const auto& row : table.rows) {
    CHECK(row.error.empty());
    REQUIRE(row.estimate.has_value());
    CHECK(row.domain_ok);
    CHECK(row.seed == 3);
  }
  // Coupled seeds: the n = 8 event is contained in the n = 4 event.
  CHECK(table.rows[1].estimate->survivors <= table.rows[0].estimate->survivors);

  SweepOptions independent;
  independent.coupled = false;
  const auto t2 = sweep(plan, base, 3, 100, independent);
  CHECK(t2.rows[0].seed != t2.rows[1].seed);

  auto broken = base;
  broken.leader = KernelSpec::fbm(0.5);  // not stationary: every cell fails
  const auto t3 = sweep(plan, broken, 3, 100);
  for (const auto& row : t3.rows) {
    CHECK_FALSE(row.error.empty());
    CHECK_FALSE(row.estimate.has_value());
  }
}
