#include "pursuit/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pursuit/errors.hpp"
#include "pursuit/rng.hpp"

namespace pursuit {
namespace {

constexpr double kZ95 = 1.959963984540054;

std::string cell_name(double horizon, std::size_t n) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(T=%g, n=%zu)", horizon, n);
  return buf;
}

}  // namespace

double leadership_normalizer(double horizon, std::size_t n, Formulation formulation) {
  if (n < 2) throw DomainError("leadership ratio needs n >= 2 (ln n > 0)");
  if (formulation == Formulation::Stationary0T) {
    if (!(horizon > 0.0)) throw DomainError("leadership ratio needs T > 0");
    return horizon * std::log(static_cast<double>(n));
  }
  if (!(horizon > 1.0)) throw DomainError("self-similar leadership ratio needs T > 1");
  return std::log(horizon) * std::log(static_cast<double>(n));
}

RatioEstimate leadership_ratio(const MCEstimate& est, double horizon, std::size_t n, Formulation formulation) {
  const double norm = leadership_normalizer(horizon, n, formulation);
  RatioEstimate r;
  auto map = [norm](double p) { return p > 0.0 ? -std::log(p) / norm : std::numeric_limits<double>::infinity(); };
  if (est.survivors == 0) {
    r.one_sided = true;
    r.ci_low = map(est.ci_high);
    return r;
  }
  r.value = map(est.p_hat);
  r.ci_low = map(est.ci_high);
  r.ci_high = map(est.ci_low);
  // -ln(1) = -0.0 would print with a sign.
  r.value += 0.0;
  r.ci_low += 0.0;
  return r;
}

ExponentFit fit_gamma_n(const std::vector<std::pair<double, MCEstimate>>& horizon_estimates, double prediction) {
  ExponentFit fit;
  fit.prediction = prediction;
  if (horizon_estimates.size() < 3) throw DomainError("fit_gamma_n needs at least three horizons");
  double t_min = std::numeric_limits<double>::infinity(), t_max = 0.0;
  for (const auto& [T, est] : horizon_estimates) {
    if (!(T > 0.0)) throw DomainError("fit_gamma_n: horizons must be positive");
    if (est.survivors == 0 || !(est.p_hat > 0.0)) {
      char buf[80];
      std::snprintf(buf, sizeof buf, "fit_gamma_n: zero survivors at T = %g", T);
      throw DomainError(buf);
    }
    t_min = std::min(t_min, T);
    t_max = std::max(t_max, T);
    const double p = est.p_hat;
    const double var = (1.0 - p) / (static_cast<double>(est.samples) * p);
    // p = 1 has no variance under the delta method; cap the weight.
    const double weight = 1.0 / std::max(var, 1e-300);
    fit.points.push_back({std::log(T), std::log(p), weight});
  }
  if (t_max / t_min < 10.0) throw DomainError("fit_gamma_n: horizons must span at least one decade");

  double sw = 0, sx = 0, sy = 0;
  for (const auto& pt : fit.points) {
    sw += pt.weight;
    sx += pt.weight * pt.x;
    sy += pt.weight * pt.y;
  }
  const double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0, sxy = 0;
  for (const auto& pt : fit.points) {
    sxx += pt.weight * (pt.x - xbar) * (pt.x - xbar);
    sxy += pt.weight * (pt.x - xbar) * (pt.y - ybar);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_gamma_n: horizons must be distinct");
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double rss = 0;
  for (const auto& pt : fit.points) {
    const double res = pt.y - (fit.intercept + fit.slope * pt.x);
    rss += pt.weight * res * res;
  }
  fit.residual_rms = std::sqrt(rss / sw);
  // Known weights (inverse variances): Var(slope) = 1 / Sxx.
  fit.slope_se = std::sqrt(1.0 / sxx);
  fit.slope_ci_low = fit.slope - kZ95 * fit.slope_se;
  fit.slope_ci_high = fit.slope + kZ95 * fit.slope_se;
  return fit;
}

CorrectionFit fit_log_n_correction(const std::vector<std::pair<std::size_t, double>>& n_ratios) {
  if (n_ratios.size() < 2) throw DomainError("correction fit needs at least two counts");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [n, ratio] : n_ratios) {
    if (n < 2 || !std::isfinite(ratio)) throw DomainError("correction fit needs n >= 2 and finite ratios");
    const double x = 1.0 / std::log(static_cast<double>(n));
    sx += x;
    sy += ratio;
    sxx += x * x;
    sxy += x * ratio;
  }
  const double m = static_cast<double>(n_ratios.size());
  const double det = m * sxx - sx * sx;
  if (!(std::abs(det) > 0.0)) throw DomainError("correction fit needs distinct counts");
  CorrectionFit f;
  f.coefficient = (m * sxy - sx * sy) / det;
  f.limit = (sy - f.coefficient * sx) / m;
  return f;
}

bool domain_ok(double horizon, std::size_t n, Formulation formulation, const DomainConstants& k) {
  if (n < 2) return false;
  const double ln_n = std::log(static_cast<double>(n));
  if (formulation == Formulation::Stationary0T) {
    if (!(horizon > 0.0)) return false;
    return k.c * std::log(horizon) < ln_n && ln_n < k.C * horizon;
  }
  if (!(horizon > 1.0)) return false;
  const double ln_t = std::log(horizon);
  return k.c * std::log(ln_t) < ln_n && ln_n <= k.C * ln_t;
}

SweepPlan::SweepPlan(std::vector<std::pair<double, std::size_t>> cells, Formulation formulation,
                     DomainConstants constants)
    : cells_(std::move(cells)), formulation_(formulation), constants_(constants) {
  if (cells_.empty()) throw DomainError("sweep plan has no cells");
  if (!(constants_.c > 1.0)) throw DomainError("sweep plan: domain constant c must exceed 1");
  if (!(constants_.C > 0.0)) throw DomainError("sweep plan: domain constant C must be positive");
  for (const auto& [T, n] : cells_) {
    if (!domain_ok(T, n, formulation_, constants_)) {
      const std::string rule = formulation_ == Formulation::Stationary0T ? "c ln T < ln n < C T"
                                                                          : "c ln ln T < ln n <= C ln T";
      char consts[64];
      std::snprintf(consts, sizeof consts, " with c = %g, C = %g", constants_.c, constants_.C);
      throw DomainError("sweep cell " + cell_name(T, n) + " violates " + rule + consts);
    }
  }
}

SweepPlan SweepPlan::grid(const std::vector<double>& horizons, const std::vector<std::size_t>& counts,
                          Formulation formulation, DomainConstants constants) {
  std::vector<std::pair<double, std::size_t>> cells;
  for (double T : horizons)
    for (std::size_t n : counts) cells.emplace_back(T, n);
  return SweepPlan(std::move(cells), formulation, constants);
}

SweepTable sweep(const SweepPlan& plan, const EnsembleConfig& base, std::uint64_t seed,
                 std::uint64_t samples_per_cell, const SweepOptions& options) {
  if (base.pursuers.empty()) throw DomainError("sweep: base config needs a pursuer kernel");
  SweepTable table;
  table.base = base;
  table.base.formulation = plan.formulation();
  table.prediction = prediction(base);
  for (std::size_t i = 0; i < plan.cells().size(); ++i) {
    const auto [T, n] = plan.cells()[i];
    SweepRow row;
    row.horizon = T;
    row.n = n;
    row.seed = options.coupled ? seed : derive_seed(seed, 0x5377656570ULL, i);
    row.domain_ok = domain_ok(T, n, plan.formulation(), plan.constants());
    try {
      EnsembleConfig cfg = table.base;
      cfg.horizon = T;
      cfg.pursuers = {{base.pursuers.front().kernel, n}};
      const auto est = estimate_survival(cfg, row.seed, samples_per_cell, options.run);
      row.estimate = est;
      row.ratio = leadership_ratio(est, T, n, plan.formulation());
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

double prediction(const KernelSpec& kernel) {
  switch (kernel.family()) {
    case KernelFamily::Fbm:
    case KernelFamily::LampertiFbm:
      return 1.0 / d_closed_form(kernel.hurst()).d;
    case KernelFamily::TabulatedStationary:
      return 1.0 / d_quadrature(kernel).d;
  }
  throw DomainError("prediction: unknown kernel family");
}

double prediction(const EnsembleConfig& config) { return prediction(config.leader); }

}  // namespace pursuit
