#include "pursuit/theory_checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "pursuit/errors.hpp"
#include "pursuit/rng.hpp"
#include "pursuit/sampling.hpp"
#include "pursuit/special_functions.hpp"

namespace pursuit {
namespace {

constexpr double kPi = std::numbers::pi;

double phi_cdf(double x) { return 1.0 - gaussian_tail(x); }

std::string fmt_name(const char* base, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s%g", base, v);
  return buf;
}

}  // namespace

double shannon_kernel(double t, std::size_t N) {
  if (N < 3 || N % 2 == 0) throw DomainError("shannon_kernel: N must be odd and >= 3");
  const long half = static_cast<long>(N / 2);
  const double nearest = std::round(t);
  if (std::abs(t - nearest) < 1e-9) {
    // Direct sum: at integer nodes only the matching term survives.
    double s = 0.0;
    for (long n = -half; n <= half; ++n) {
      const double x = kPi * (t - static_cast<double>(n));
      s += x == 0.0 ? 1.0 : std::sin(x) / x;
    }
    return s;
  }
  // sin(pi (t - n)) = (-1)^n sin(pi t), and sin(pi t) is taken from the
  // reduced argument to avoid cancellation near the nodes.
  double s = 0.0;
  for (long n = -half; n <= half; ++n) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    s += sign / (t - static_cast<double>(n));
  }
  const double parity = std::fmod(std::abs(nearest), 2.0) == 0.0 ? 1.0 : -1.0;
  return parity * std::sin(kPi * (t - nearest)) / kPi * s;
}

Lemma4Result lemma4_check(std::size_t N, double T_delta, double step) {
  if (N < 3 || N % 2 == 0) throw DomainError("lemma4_check: N must be odd and >= 3");
  if (!(T_delta > 0.0) || !(T_delta < static_cast<double>(N)))
    throw DomainError("lemma4_check: need 0 < T_delta < N");
  if (static_cast<double>(N) - T_delta < 4.0) throw DomainError("lemma4_check: need N - T_delta >= 4");
  if (!(step > 0.0)) throw DomainError("lemma4_check: step must be positive");
  Lemma4Result r;
  r.N = N;
  r.T_delta = T_delta;
  const double half = 0.5 * T_delta;
  const auto count = static_cast<std::size_t>(std::floor(half / step));
  auto visit = [&](double t) { r.max_deviation = std::max(r.max_deviation, std::abs(shannon_kernel(t, N) - 1.0)); };
  for (std::size_t i = 0; i <= count; ++i) {
    const double t = static_cast<double>(i) * step;
    visit(t);
    visit(-t);
  }
  visit(half);
  visit(-half);
  r.scaled = r.max_deviation * (static_cast<double>(N) - T_delta);
  r.exp_term = std::exp(-kPi * static_cast<double>(N) / 2.0);
  return r;
}

Lemma4Ladder lemma4_ladder(const std::vector<std::size_t>& Ns, double gap, double step) {
  if (Ns.empty()) throw DomainError("lemma4_ladder: empty ladder");
  Lemma4Ladder out;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  out.exp_negligible = true;
  for (std::size_t N : Ns) {
    const auto r = lemma4_check(N, static_cast<double>(N) - gap, step);
    lo = std::min(lo, r.scaled);
    hi = std::max(hi, r.scaled);
    out.exp_negligible = out.exp_negligible && r.exp_term < 1e-6 * r.max_deviation;
    out.rungs.push_back(r);
  }
  out.spread = hi / lo;
  return out;
}

// ---------------------------------------------------------------------------

double FoldedSpectrum::at(double lambda) const {
  if (std::abs(lambda) > kPi + 1e-12) throw DomainError("FoldedSpectrum::at: |lambda| must not exceed pi");
  if (time_domain) {
    double s = lag_correlations[0];
    for (std::size_t k = 1; k <= terms; ++k) s += 2.0 * lag_correlations[k] * std::cos(static_cast<double>(k) * lambda);
    return s / (2.0 * kPi);
  }
  double s = kernel.spectral_density(lambda / theta);
  for (std::size_t k = 1; k <= terms; ++k) {
    const double shift = 2.0 * kPi * static_cast<double>(k);
    s += kernel.spectral_density((lambda + shift) / theta) + kernel.spectral_density((lambda - shift) / theta);
  }
  return s / theta;
}

FoldedSpectrum folded_spectrum(const KernelSpec& kernel, double theta, std::size_t grid_points, FoldingRoute route) {
  if (!kernel.stationary()) throw DomainError("folded_spectrum: kernel must be stationary");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("folded_spectrum: theta must be positive");
  if (grid_points < 3) throw DomainError("folded_spectrum: need at least 3 grid points");
  FoldedSpectrum fs;
  fs.kernel = kernel;
  fs.theta = theta;
  const double f00 = kernel.spectral_density(0.0);

  // Omitted aliases |k| > K: sum_{k>K} phi((2k-1) pi / theta) on each side
  // is at most (theta / 2 pi) * int_{(2K-1) pi / theta}^inf phi, and f_theta
  // carries a further 1 / theta.
  const auto maj = kernel.majorant();
  auto alias_bound = [&](std::size_t K) {
    const double y = (2.0 * static_cast<double>(K) - 1.0) * kPi / theta;
    return 2.0 / (2.0 * kPi) * maj.tail_integral(y) / f00;
  };
  // Lamperti correlations are positive and decreasing, so
  // sum_{k>L} r(k theta) <= theta^{-1} int_{L theta}^inf r; the omitted part
  // of f_theta relative to f_0(0) is then (pi theta f_0(0))^{-1} int r.
  auto lag_bound = [&](std::size_t L) {
    const double y = theta * static_cast<double>(L);
    const Integrand tail = [&](double s) { return kernel.correlation(y + s); };
    return integrate_semi_infinite(tail, 1e-14).value / (kPi * theta * f00);
  };
  auto smallest = [](auto&& bound) -> std::size_t {
    std::size_t hi = 1;
    while (bound(hi) >= kFoldingTailTolerance) {
      if (hi > kMaxFoldingTerms) return 0;
      hi *= 2;
    }
    std::size_t lo = hi / 2;
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (mid > 0 && bound(mid) < kFoldingTailTolerance) hi = mid;
      else lo = mid;
    }
    return hi;
  };

  const std::size_t K = route == FoldingRoute::Lags ? 0 : smallest(alias_bound);
  std::size_t L = 0;
  double L_bound = 0.0;
  if (kernel.family() == KernelFamily::TabulatedStationary) {
    // Compact support: the lag series is finite and exact.
    const double support = kernel.step() * static_cast<double>(kernel.samples().size() - 1);
    L = static_cast<std::size_t>(std::floor(support / theta));
  } else if (route != FoldingRoute::Aliases) {
    L = smallest(lag_bound);
    if (L > 0) L_bound = lag_bound(L);
  }
  if (route == FoldingRoute::Aliases) L = 0;
  if (K == 0 && L == 0) throw DomainError("folded_spectrum: no series reaches the tail tolerance within the term cap");
  // An alias costs two spectral density evaluations; a lag costs one cosine.
  if (K == 0 || (L > 0 && L < 16 * K)) {
    fs.time_domain = true;
    fs.terms = L;
    fs.tail_bound = L_bound;
    fs.lag_correlations.resize(L + 1);
    for (std::size_t k = 0; k <= L; ++k) fs.lag_correlations[k] = kernel.correlation(theta * static_cast<double>(k));
  } else {
    fs.terms = K;
    fs.tail_bound = alias_bound(K);
  }

  fs.lambda.resize(grid_points);
  fs.values.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double l = -kPi + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    fs.lambda[i] = l;
    fs.values[i] = std::max(0.0, fs.at(std::clamp(l, -kPi, kPi)));
    if (l >= -1e-15) fs.sigma_theta_sq = std::max(fs.sigma_theta_sq, 2.0 * kPi * fs.values[i]);
  }
  fs.theta_sigma_sq = theta * fs.sigma_theta_sq;

  // The fold is even; integrate over [0, pi] and double. The peak at 0 has
  // width about theta, so split there.
  const Integrand f = [&fs](double l) { return fs.at(l); };
  const double cut = std::min(kPi, 50.0 * theta);
  double half = integrate(f, 0.0, cut, 1e-11).value;
  if (cut < kPi) half += integrate(f, cut, kPi, 1e-11).value;
  fs.variance = 2.0 * half;

  // A_theta from the continuous-time density.
  const double upper = kPi / theta;
  const double log_top = std::log(2.0 * kPi * f00);
  const Integrand g = [&](double l) { return log_top - std::log(kernel.spectral_density(l)); };
  double cumulative = 0.0, prev = 0.0, best = -std::numeric_limits<double>::infinity();
  const int pieces = 64;
  for (int j = 1; j <= pieces; ++j) {
    // Geometric breakpoints from upper * 2^-20 to upper, then the last one.
    const double point = upper * std::pow(2.0, -20.0 * (1.0 - static_cast<double>(j) / pieces));
    cumulative += integrate(g, prev, point, 1e-10 * std::max(1.0, point - prev)).value;
    prev = point;
    best = std::max(best, cumulative / point);
  }
  fs.A_theta_mean = best + 1.0;
  fs.A_theta_exp = std::exp(cumulative / upper) + 1.0;
  return fs;
}

// ---------------------------------------------------------------------------

double lemma5_bound(std::span<const double> correlations, double level, std::size_t m) {
  if (m < 2 || correlations.size() < m) throw DomainError("lemma5: need r(0 .. m-1) and m >= 2");
  double delta = 0.0, sum = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    delta = std::max(delta, std::abs(correlations[i]));
    sum += std::abs(correlations[i]);
  }
  if (!(delta < 1.0)) throw DomainError("lemma5: need max |r(i)| < 1");
  return kLemma5Constant / std::sqrt(1.0 - delta * delta) * static_cast<double>(m) * sum *
         std::exp(-level * level / (1.0 + delta));
}

Lemma5Result lemma5_check(std::span<const double> correlations, double level, std::size_t m,
                          std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw DomainError("lemma5_check: samples must be positive");
  if (correlations.empty() || std::abs(correlations[0] - 1.0) > 1e-12)
    throw DomainError("lemma5_check: r(0) must be 1");
  Lemma5Result out;
  out.level = level;
  out.m = m;
  out.rhs_bound = lemma5_bound(correlations, level, m);
  for (std::size_t i = 1; i < m; ++i) out.delta = std::max(out.delta, std::abs(correlations[i]));

  Eigen::MatrixXd cov(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) cov(i, j) = correlations[i > j ? i - j : j - i];
  const auto batch = cholesky_sample(cov, seed, samples);
  std::uint64_t inside = 0;
  for (std::size_t r = 0; r < batch.rows; ++r) {
    const auto row = batch.row(r);
    inside += std::all_of(row.begin(), row.end(), [level](double x) { return x <= level; });
  }
  const double n = static_cast<double>(samples);
  out.orthant = static_cast<double>(inside) / n;
  out.independent = std::pow(phi_cdf(level), static_cast<double>(m));
  out.lhs_gap = std::abs(out.orthant - out.independent);
  // Standard error at the larger of the two probabilities keeps the
  // allowance positive when the estimate is 0 or 1.
  const double p = std::clamp(std::max(out.orthant, out.independent), 1.0 / n, 1.0 - 1.0 / n);
  out.mc_allowance = 3.0 * std::sqrt(p * (1.0 - p) / n);
  out.holds = out.lhs_gap <= out.rhs_bound + out.mc_allowance;
  return out;
}

MillsCheck mills_check(const std::vector<double>& us) {
  if (us.empty()) throw DomainError("mills_check: empty grid");
  MillsCheck out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.monotone = true;
  double prev = -1.0;
  for (double u : us) {
    if (!(u > 1.0 && u <= 40.0)) throw DomainError("mills_check: grid must lie in (1, 40]");
    // Psi(u) u e^{u^2/2} = u * mills_ratio(u) / sqrt(2 pi)
    const double ratio = u * mills_ratio(u) / std::sqrt(2.0 * kPi);
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
    if (ratio <= prev) out.monotone = false;
    prev = ratio;
    out.at_largest = ratio;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Streams stationary unit-variance paths one row at a time.
class PathStream {
 public:
  PathStream(const KernelSpec& kernel, double horizon, double density)
      : gen_(kernel, GridSpec(0.0, horizon, std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(horizon * density)) + 1))),
        ws_(gen_.make_workspace()),
        row_(gen_.grid().points) {}

  const std::vector<double>& draw(std::uint64_t seed, std::uint64_t index) {
    auto engine = make_engine(seed, 0, index);
    gen_.generate(engine, row_, ws_);
    return row_;
  }
  std::size_t points() const { return gen_.grid().points; }

 private:
  PathGenerator gen_;
  PathGenerator::Workspace ws_;
  std::vector<double> row_;
};

}  // namespace

ProductBoundCheck gaussian_correlation_check(const KernelSpec& kernel, double horizon, std::size_t blocks,
                                             double level, double density, std::uint64_t samples,
                                             std::uint64_t seed) {
  if (blocks == 0 || samples == 0) throw DomainError("gaussian_correlation_check: blocks and samples must be positive");
  PathStream paths(kernel, horizon, density);
  const std::size_t intervals = paths.points() - 1;
  if (intervals % blocks != 0)
    throw DomainError("gaussian_correlation_check: grid intervals must split evenly into blocks");
  const std::size_t width = intervals / blocks;
  std::uint64_t full = 0;
  std::vector<std::uint64_t> block_hits(blocks, 0);
  for (std::uint64_t s = 0; s < samples; ++s) {
    const auto& x = paths.draw(seed, s);
    bool all = true;
    for (std::size_t b = 0; b < blocks; ++b) {
      bool in = true;
      for (std::size_t k = b * width; k <= (b + 1) * width; ++k) in = in && std::abs(x[k]) <= level;
      block_hits[b] += in;
      all = all && in;
    }
    full += all;
  }
  ProductBoundCheck out;
  out.blocks = blocks;
  const double n = static_cast<double>(samples);
  out.full = static_cast<double>(full) / n;
  out.full_se = std::sqrt(out.full * (1.0 - out.full) / n);
  out.product = 1.0;
  double rel_var = 0.0;
  for (auto h : block_hits) {
    const double p = static_cast<double>(h) / n;
    out.product *= p;
    if (p > 0.0) rel_var += (1.0 - p) / (n * p);
  }
  out.product_se = out.product * std::sqrt(rel_var);
  out.holds = out.full >= out.product - 3.0 * std::hypot(out.full_se, out.product_se);
  return out;
}

ConcentrationCheck concentration_check(const KernelSpec& kernel, double rho, double density,
                                       const std::vector<double>& taus, std::uint64_t samples,
                                       std::uint64_t seed) {
  if (samples < 2) throw DomainError("concentration_check: need at least two samples");
  PathStream paths(kernel, rho, density);
  std::vector<double> maxima(samples);
  for (std::uint64_t s = 0; s < samples; ++s) {
    const auto& x = paths.draw(seed, s);
    maxima[s] = *std::max_element(x.begin(), x.end());
  }
  std::vector<double> sorted = maxima;
  std::sort(sorted.begin(), sorted.end());
  ConcentrationCheck out;
  out.median = sorted[(samples - 1) / 2];
  out.taus = taus;
  const double n = static_cast<double>(samples);
  out.mc_allowance = 3.0 * 0.5 / std::sqrt(n);
  out.holds = true;
  for (double tau : taus) {
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), out.median + tau) - sorted.begin();
    const double emp = static_cast<double>(below) / n;
    const double bound = phi_cdf(tau);  // sigma(rho) = 1 for unit variance
    out.empirical.push_back(emp);
    out.bound.push_back(bound);
    out.holds = out.holds && emp >= bound - out.mc_allowance;
  }
  return out;
}

SmallBallScaling small_ball_scaling(const KernelSpec& kernel, const std::vector<double>& horizons,
                                    double density, std::uint64_t samples, std::uint64_t seed) {
  if (horizons.size() < 2) throw DomainError("small_ball_scaling: need at least two horizons");
  SmallBallScaling out;
  out.horizons = horizons;
  for (double T : horizons) {
    PathStream paths(kernel, T, density);
    std::uint64_t inside = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
      const auto& x = paths.draw(seed, s);
      inside += std::all_of(x.begin(), x.end(), [](double v) { return std::abs(v) <= 1.0; });
    }
    out.survivors.push_back(inside);
    out.neg_log_p.push_back(inside > 0 ? -std::log(static_cast<double>(inside) / static_cast<double>(samples))
                                       : std::numeric_limits<double>::infinity());
  }
  out.increasing = true;
  for (std::size_t i = 1; i < horizons.size(); ++i) out.increasing = out.increasing && out.neg_log_p[i] > out.neg_log_p[i - 1];
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(horizons.size());
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    sx += horizons[i];
    sy += out.neg_log_p[i];
    sxx += horizons[i] * horizons[i];
    sxy += horizons[i] * out.neg_log_p[i];
  }
  out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return out;
}

// ---------------------------------------------------------------------------

bool TheoryReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const TheoryEntry& e) { return e.passed; });
}

TheoryReport theory_report(const TheoryReportOptions& options) {
  TheoryReport report;
  auto add = [&report](TheoryEntry e) { report.entries.push_back(std::move(e)); };

  {
    TheoryEntry e{"shannon_kernel_values", true, {}, "g_N(0) = 1; g_3(0.5) against the direct three-term sum"};
    const double direct = 2.0 * std::sin(kPi * 0.5) / (kPi * 0.5) + std::sin(kPi * 1.5) / (kPi * 1.5) - 0.0;
    // Terms n = -1, 0, 1 at t = 0.5: sinc(1.5) + sinc(0.5) + sinc(-0.5).
    const double three = std::sin(kPi * 1.5) / (kPi * 1.5) + 2.0 * std::sin(kPi * 0.5) / (kPi * 0.5);
    const double got = shannon_kernel(0.5, 3);
    e.measured = {{"g_101(0)", shannon_kernel(0.0, 101)}, {"g_3(0.5)", got}, {"direct", three}};
    e.passed = std::abs(shannon_kernel(0.0, 101) - 1.0) < 1e-14 && std::abs(got - three) < 1e-14 && direct == three;
    add(e);
  }
  {
    const auto ladder = lemma4_ladder({101, 201, 401}, 50.0);
    TheoryEntry e{"lemma4_ladder", false, {}, "max |g_N - 1| (N - T_delta) over N in {101, 201, 401}, N - T_delta = 50"};
    bool under = true;
    for (const auto& r : ladder.rungs) {
      e.measured.emplace_back(fmt_name("scaled_N", static_cast<double>(r.N)), r.scaled);
      under = under && r.scaled <= kLemma4Constant;
    }
    e.measured.emplace_back("spread", ladder.spread);
    e.measured.emplace_back("constant_c", kLemma4Constant);
    e.passed = ladder.spread < 2.0 && ladder.exp_negligible && under;
    add(e);
  }
  {
    TheoryEntry e{"lemma4_nodes_and_gap", false, {}, "zero deviation at integer nodes; deviation falls when N - T_delta doubles at T_delta = 151"};
    double node = 0.0;
    for (int t = -75; t <= 75; ++t) node = std::max(node, std::abs(shannon_kernel(t, 201) - 1.0));
    const auto a = lemma4_check(201, 151.0);
    const auto b = lemma4_check(251, 151.0);
    e.measured = {{"integer_node_max", node}, {"dev_gap50", a.max_deviation}, {"dev_gap100", b.max_deviation}};
    e.passed = node < 1e-12 && b.max_deviation < a.max_deviation;
    add(e);
  }
  {
    const auto fs = folded_spectrum(KernelSpec::lamperti(0.5), 0.01);
    TheoryEntry e{"folded_spectrum_lamperti_0.5", false, {}, "theta = 0.01: |theta sigma_theta^2 - 4| <= 0.05 and variance conserved to 1e-6"};
    e.measured = {{"theta_sigma_sq", fs.theta_sigma_sq}, {"variance", fs.variance}, {"terms", static_cast<double>(fs.terms)}, {"tail_bound", fs.tail_bound}};
    e.passed = std::abs(fs.theta_sigma_sq - 4.0) <= 0.05 && std::abs(fs.variance - 1.0) <= 1e-6;
    add(e);
  }
  {
    TheoryEntry e{"folded_variance_conservation", true, {}, "integral of f_theta over [-pi, pi] = r(0) = 1"};
    const std::vector<std::pair<KernelSpec, double>> cases = {
        {KernelSpec::lamperti(0.3), 0.1}, {KernelSpec::lamperti(0.8), 0.05}, {KernelSpec::tabulated({1.0, 0.0}, 1.0, "white"), 1.0}};
    for (const auto& [k, theta] : cases) {
      const auto fs = folded_spectrum(k, theta);
      e.measured.emplace_back(k.tag() + "@" + fmt_name("", theta), fs.variance);
      e.passed = e.passed && std::abs(fs.variance - 1.0) <= 1e-6;
    }
    const auto white = folded_spectrum(KernelSpec::tabulated({1.0, 0.0}, 1.0, "white"), 1.0);
    double flat = 0.0;
    for (double v : white.values) flat = std::max(flat, std::abs(v - 1.0 / (2.0 * kPi)));
    e.measured.emplace_back("white_flatness", flat);
    e.measured.emplace_back("white_theta_sigma_sq_minus_d", white.theta_sigma_sq - d_quadrature(KernelSpec::tabulated({1.0, 0.0}, 1.0)).d);
    e.passed = e.passed && flat < 1e-14 && std::abs(white.theta_sigma_sq - 1.0) < 1e-14;
    add(e);
  }
  {
    TheoryEntry e{"A_theta_monotone", true, {}, "A_theta (mean and exp variants) nondecreasing and A_theta / theta increasing as theta decreases"};
    double prev_mean = -1, prev_exp = -1, prev_mean_ratio = -1, prev_exp_ratio = -1;
    for (double theta : {0.2, 0.1, 0.05, 0.02, 0.01}) {
      const auto fs = folded_spectrum(KernelSpec::lamperti(0.5), theta, 65);
      e.measured.emplace_back(fmt_name("A_mean@", theta), fs.A_theta_mean);
      e.measured.emplace_back(fmt_name("A_exp@", theta), fs.A_theta_exp);
      e.passed = e.passed && fs.A_theta_mean >= prev_mean && fs.A_theta_exp >= prev_exp &&
                 fs.A_theta_mean / theta > prev_mean_ratio && fs.A_theta_exp / theta > prev_exp_ratio;
      prev_mean = fs.A_theta_mean;
      prev_exp = fs.A_theta_exp;
      prev_mean_ratio = fs.A_theta_mean / theta;
      prev_exp_ratio = fs.A_theta_exp / theta;
    }
    add(e);
  }
  {
    TheoryEntry e{"lemma5_matrix", true, {}, "comparison bound with K = 1/(2 pi) over {white, AR 0.5^i, lamperti(0.5) at step 1} x a in {1,2,3} x m in {4,8}; MC allowance 3 s.e."};
    const std::vector<std::pair<std::string, std::vector<double>>> kernels = {
        {"white", {1, 0, 0, 0, 0, 0, 0, 0}},
        {"ar0.5", {1, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125}},
        {"lamperti0.5", [] {
           std::vector<double> r(8);
           for (std::size_t i = 0; i < 8; ++i) r[i] = lamperti_corr(static_cast<double>(i), 0.5);
           return r;
         }()}};
    double worst = 0.0;
    std::uint64_t cell = 0;
    for (const auto& [name, r] : kernels) {
      for (double a : {1.0, 2.0, 3.0}) {
        for (std::size_t m : {4u, 8u}) {
          const auto res = lemma5_check(r, a, m, options.lemma5_samples, derive_seed(options.seed, 5, cell++));
          e.passed = e.passed && res.holds;
          if (res.rhs_bound + res.mc_allowance > 0.0)
            worst = std::max(worst, res.lhs_gap / (res.rhs_bound + res.mc_allowance));
        }
      }
    }
    e.measured = {{"worst_gap_over_bound", worst}, {"K", kLemma5Constant}};
    add(e);
  }
  {
    std::vector<double> us;
    for (double u = 1.5; u <= 40.0; u += 0.5) us.push_back(u);
    const auto mc = mills_check(us);
    TheoryEntry e{"mills_ratio", false, {}, "Psi(u) / [u^-1 e^{-u^2/2}] on u in [1.5, 40]: positive, monotone, within 1e-3 of 1/sqrt(2 pi) at 40"};
    e.measured = {{"min", mc.min_ratio}, {"max", mc.max_ratio}, {"at_40", mc.at_largest}};
    e.passed = mc.min_ratio > 0.0 && mc.monotone && std::abs(mc.at_largest - 0.39894) < 1e-3 &&
               mills_check({1.0 + 1e-9}).min_ratio > 0.0;
    add(e);
  }
  {
    const auto g = gaussian_correlation_check(KernelSpec::lamperti(0.5), 4.0, 4, 1.5, 16.0, options.path_samples,
                                              derive_seed(options.seed, 6, 0));
    TheoryEntry e{"gaussian_correlation_product", g.holds, {}, "P(|X| <= 1.5 on [0,4]) >= product over 4 blocks, lamperti(0.5)"};
    e.measured = {{"full", g.full}, {"product", g.product}, {"full_se", g.full_se}, {"product_se", g.product_se}};
    add(e);
  }
  {
    const auto c = concentration_check(KernelSpec::lamperti(0.5), 2.0, 32.0, {0.25, 0.5, 1.0, 1.5, 2.0},
                                       options.path_samples, derive_seed(options.seed, 7, 0));
    TheoryEntry e{"concentration_bound", c.holds, {}, "P(M_rho <= median + tau) >= Phi(tau), lamperti(0.5), rho = 2"};
    e.measured.emplace_back("median", c.median);
    for (std::size_t i = 0; i < c.taus.size(); ++i)
      e.measured.emplace_back(fmt_name("excess@tau", c.taus[i]), c.empirical[i] - c.bound[i]);
    add(e);
  }
  {
    const auto s = small_ball_scaling(KernelSpec::lamperti(0.5), {1.0, 2.0, 4.0, 8.0}, 16.0, options.path_samples,
                                      derive_seed(options.seed, 8, 0));
    TheoryEntry e{"small_ball_scaling", s.increasing, {}, "-ln P(|X| <= 1 on [0,T]) against T (empirical scaling, lamperti(0.5))"};
    for (std::size_t i = 0; i < s.horizons.size(); ++i) e.measured.emplace_back(fmt_name("neg_log_p@T", s.horizons[i]), s.neg_log_p[i]);
    e.measured.emplace_back("slope", s.slope);
    add(e);
  }
  return report;
}

}  // namespace pursuit
