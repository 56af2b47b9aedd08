// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance [--criterion N]...
//
// Exit status 0 when every selected criterion passes.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lab/artifacts.hpp"
#include "lab/config.hpp"
#include "lab/runner.hpp"
#include "pursuit/exponents.hpp"
#include "pursuit/kernels.hpp"
#include "pursuit/pursuit.hpp"
#include "pursuit/rng.hpp"
#include "pursuit/sampling.hpp"
#include "pursuit/special_functions.hpp"
#include "pursuit/theory_checks.hpp"

using namespace pursuit;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------

Verdict criterion1() {
  std::ostringstream d;
  bool ok = true;
  const double d05 = d_closed_form(0.5).d;
  ok = ok && std::abs(d05 - 4.0) <= 1e-12;
  d << "d(0.5)=" << num(d05, 17);
  double worst_quad = 0.0, worst_spec = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double H = 0.1 * i;
    const double ref = d_closed_form(H).d;
    worst_quad = std::max(worst_quad, std::abs(d_quadrature(KernelSpec::lamperti(H)).d / ref - 1.0));
    worst_spec = std::max(worst_spec, std::abs(d_spectral(KernelSpec::lamperti(H)).d / ref - 1.0));
  }
  ok = ok && worst_quad <= 1e-6 && worst_spec <= 1e-3;
  d << "; max rel err quadrature " << num(worst_quad, 3) << " (tol 1e-6), spectral " << num(worst_spec, 3)
    << " (tol 1e-3)";
  return {ok, d.str()};
}

Verdict criterion2() {
  std::ostringstream d;
  const GridSpec grid(0.0, 1.0, 512);
  const std::size_t paths = 10000;
  const std::vector<std::size_t> idx = {16, 32, 64, 128, 256, 511};
  double worst_fbm = 0.0, worst_lamperti = 0.0;
  std::size_t entries = 0;
  for (double H : {0.3, 0.5, 0.7}) {
    const auto batch = sample_fbm(H, grid, derive_seed(kSeed, 2, static_cast<std::uint64_t>(H * 10)), paths);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a; b < idx.size(); ++b) {
        const std::size_t i = idx[a], j = idx[b];
        const double ti = grid.time(i), tj = grid.time(j);
        // Raw covariance and its Lamperti image Y = t^{-H} B(t).
        double s = 0, ss = 0, y = 0, yy = 0;
        const double scale = std::pow(ti, -H) * std::pow(tj, -H);
        for (std::size_t r = 0; r < paths; ++r) {
          const auto row = batch.row(r);
          const double p = row[i] * row[j];
          s += p;
          ss += p * p;
          y += p * scale;
          yy += p * p * scale * scale;
        }
        const double n = static_cast<double>(paths);
        const double mean = s / n, se = std::sqrt((ss / n - mean * mean) / n);
        const double ymean = y / n, yse = std::sqrt((yy / n - ymean * ymean) / n);
        worst_fbm = std::max(worst_fbm, std::abs(mean - fbm_cov(ti, tj, H)) / se);
        worst_lamperti = std::max(worst_lamperti, std::abs(ymean - lamperti_corr(std::log(tj / ti), H)) / yse);
        ++entries;
      }
    }
  }
  d << entries << " entries; max |z| fbm " << num(worst_fbm, 3) << ", lamperti " << num(worst_lamperti, 3)
    << " (tol 5 s.e.)";
  return {worst_fbm <= 5.0 && worst_lamperti <= 5.0, d.str()};
}

Verdict criterion3() {
  std::ostringstream d;
  bool ok = true;
  std::vector<std::pair<double, MCEstimate>> pts;
  std::uint64_t i = 0;
  for (double T : {1.0, 4.0, 16.0, 64.0}) {
    auto cfg = EnsembleConfig::homogeneous(KernelSpec::fbm(0.5), 1, T, 1.0, Formulation::SelfSimilar0T, 16.0);
    cfg.monitoring = Monitoring::BrownianBridge;
    const auto est = estimate_survival(cfg, derive_seed(kSeed, 3, i++), 100000);
    const double exact = 1.0 - 2.0 * gaussian_tail(1.0 / std::sqrt(2.0 * T));
    const bool in = est.ci_low <= exact && exact <= est.ci_high;
    ok = ok && in;
    d << "T=" << T << " p=" << num(est.p_hat, 5) << " exact=" << num(exact, 5) << (in ? " in CI; " : " OUTSIDE CI; ");
    pts.emplace_back(T, est);
  }
  const auto fit = fit_gamma_n(pts);
  const bool gok = fit.gamma() >= 0.45 && fit.gamma() <= 0.55;
  d << "gamma_1=" << num(fit.gamma(), 4) << " in [0.45, 0.55]: " << (gok ? "yes" : "no");
  return {ok && gok, d.str()};
}

// Three independent simple random walks with k steps per unit time; the
// leader survives while every pursuer trails it by less than level sqrt(k).
// Shares no code with the Gaussian samplers.
double random_walk_gamma(std::uint64_t samples, std::string& note) {
  const int k = 16;
  const int level = 4;  // 1 * sqrt(16)
  const std::vector<int> horizons = {16, 32, 64, 128, 256};
  std::vector<std::uint64_t> alive(horizons.size(), 0);
  std::mt19937_64 rng(kSeed ^ 0x52616e646f6dULL);
  const int total = horizons.back() * k;
  for (std::uint64_t s = 0; s < samples; ++s) {
    int lead = 0, p1 = 0, p2 = 0;
    std::uint64_t bits = 0;
    int left = 0;
    int step = 0;
    std::size_t h = 0;
    for (; step < total; ++step) {
      if (left < 3) {
        bits = rng();
        left = 63;
      }
      lead += (bits & 1) ? 1 : -1;
      p1 += (bits & 2) ? 1 : -1;
      p2 += (bits & 4) ? 1 : -1;
      bits >>= 3;
      left -= 3;
      if (std::max(p1, p2) - lead >= level) break;
      if (step + 1 == horizons[h] * k) ++alive[h++];
    }
  }
  std::vector<std::pair<double, MCEstimate>> pts;
  for (std::size_t h = 0; h < horizons.size(); ++h)
    pts.emplace_back(horizons[h], MCEstimate::from_counts(alive[h], samples));
  const auto fit = fit_gamma_n(pts);
  note = "random-walk oracle gamma_2=" + num(fit.gamma(), 4) + " [" + num(fit.gamma_ci_low(), 4) + ", " +
         num(fit.gamma_ci_high(), 4) + "]";
  return fit.gamma();
}

Verdict criterion4() {
  std::ostringstream d;
  std::string note;
  const double rw = random_walk_gamma(400000, note);
  const bool oracle_ok = std::abs(rw - 0.75) <= 0.05;
  d << note << (oracle_ok ? " confirms 3/4; " : " does NOT confirm 3/4; ");
  std::vector<std::pair<double, MCEstimate>> pts;
  std::uint64_t i = 0;
  for (double T : {16.0, 32.0, 64.0, 128.0, 256.0}) {
    const auto cfg = EnsembleConfig::homogeneous(KernelSpec::fbm(0.5), 2, T, 1.0, Formulation::SelfSimilar0T, 16.0);
    pts.emplace_back(T, estimate_survival(cfg, derive_seed(kSeed, 4, i++), 100000));
  }
  const auto fit = fit_gamma_n(pts);
  const bool ok = fit.gamma() >= 0.67 && fit.gamma() <= 0.83;
  d << "gamma_2=" << num(fit.gamma(), 4) << " [" << num(fit.gamma_ci_low(), 4) << ", " << num(fit.gamma_ci_high(), 4)
    << "] in [0.67, 0.83]: " << (ok ? "yes" : "no");
  return {ok && oracle_ok, d.str()};
}

Verdict criterion5() {
  std::ostringstream d;
  const double lo = 0.15, hi = 0.40, target = 0.25;
  // (T = 8, n = 8) lies outside c ln T < ln n and is not part of the grid.
  std::vector<std::pair<double, std::size_t>> cells = {{4, 8}, {4, 16}, {4, 32}, {4, 64}, {8, 16}, {8, 32}, {8, 64}};
  const SweepPlan plan(cells, Formulation::Stationary0T);
  const auto base = EnsembleConfig::homogeneous(KernelSpec::lamperti(0.5), 1, 4.0, 0.0, Formulation::Stationary0T, 16.0);
  const auto table = sweep(plan, base, kSeed, 1000000);
  bool overlap = true;
  std::map<double, std::vector<const SweepRow*>> by_t;
  for (const auto& r : table.rows) {
    if (!r.estimate) {
      overlap = false;
      d << "T=" << r.horizon << ",n=" << r.n << " failed: " << r.error << "; ";
      continue;
    }
    const bool ov = r.ratio.ci_low <= hi && r.ratio.ci_high >= lo;
    overlap = overlap && ov;
    d << "T=" << r.horizon << ",n=" << r.n << " ratio=" << (r.ratio.one_sided ? ">=" + num(r.ratio.ci_low, 3) : num(r.ratio.value, 3))
      << " [" << num(r.ratio.ci_low, 3) << ", " << num(r.ratio.ci_high, 3) << "]" << (ov ? "" : " NO-OVERLAP") << "; ";
    by_t[r.horizon].push_back(&r);
  }
  int violations = 0;
  bool noisy_only = true;
  for (const auto& [T, rows] : by_t) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& a = rows[i - 1]->ratio;
      const auto& b = rows[i]->ratio;
      if (a.one_sided || b.one_sided) continue;  // gap undefined without a point estimate
      if (std::abs(b.value - target) > std::abs(a.value - target)) {
        ++violations;
        noisy_only = noisy_only && a.ci_low <= b.ci_high && b.ci_low <= a.ci_high;
      }
    }
  }
  const bool mono = violations == 0 || (violations == 1 && noisy_only);
  d << "band overlap " << (overlap ? "all" : "NOT all") << "; gap monotonicity violations " << violations;
  return {overlap && mono, d.str()};
}

Verdict criterion6() {
  std::ostringstream d;
  const auto cfg = EnsembleConfig::homogeneous(KernelSpec::fbm(0.5), 8, 256.0, 0.0, Formulation::SelfSimilar0T, 4.0);
  const auto cmp = compare_formulations(cfg, kSeed, 1000000);
  const bool band = std::isfinite(cmp.log_ratio) && cmp.log_ratio >= 0.7 && cmp.log_ratio <= 1.3;
  const bool order = cmp.ordering_violations == 0 && cmp.strict_0T.p_hat <= cmp.interval_1T.p_hat &&
                     cmp.strict_0T.p_hat <= cmp.level_0T.p_hat;
  d << "P(A: M<=0 on [1,T])=" << num(cmp.interval_1T.p_hat, 4) << " (" << cmp.interval_1T.survivors << ")"
    << ", P(B: M<=1 on [0,T])=" << num(cmp.level_0T.p_hat, 4) << " (" << cmp.level_0T.survivors << ")"
    << ", ln ratio=" << num(cmp.log_ratio, 4) << " in [0.7, 1.3]: " << (band ? "yes" : "no")
    << "; ordering violations " << cmp.ordering_violations;
  return {band && order, d.str()};
}

Verdict criterion7() {
  std::ostringstream d;
  const auto report = theory_report();
  std::map<std::string, const TheoryEntry*> by;
  for (const auto& e : report.entries) by[e.name] = &e;
  auto passed = [&](const char* name) { return by.count(name) && by[name]->passed; };
  auto value = [&](const char* name, const char* key) {
    for (const auto& [k, v] : by.at(name)->measured)
      if (k == key) return v;
    return std::numeric_limits<double>::quiet_NaN();
  };
  const bool ok = passed("lemma4_ladder") && passed("folded_spectrum_lamperti_0.5") &&
                  passed("folded_variance_conservation") && passed("lemma5_matrix") && passed("mills_ratio");
  d << "lemma4 spread=" << num(value("lemma4_ladder", "spread"), 4)
    << ", theta sigma^2=" << num(value("folded_spectrum_lamperti_0.5", "theta_sigma_sq"), 8)
    << ", variance=" << num(value("folded_spectrum_lamperti_0.5", "variance"), 10)
    << ", lemma5 worst gap/bound=" << num(value("lemma5_matrix", "worst_gap_over_bound"), 3)
    << ", mills(40)=" << num(value("mills_ratio", "at_40"), 8) << "; report entries all passed: "
    << (report.all_passed() ? "yes" : "no");
  return {ok && report.all_passed(), d.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict criterion8() {
  std::ostringstream d;
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"survival.csv", R"(kind: survival
seed: 20240601
samples: 100000
ensemble:
  leader: {family: fbm, hurst: 0.5}
  pursuers: [{family: fbm, hurst: 0.5}]
  horizon: 16
  level: 1.0
  formulation: selfsimilar_0T
  grid_density: 16
  monitoring: bridge
)"},
      {"sweep.csv", R"(kind: sweep
seed: 20240601
samples: 100000
ensemble:
  leader: {family: lamperti, hurst: 0.5}
  pursuers: [{family: lamperti, hurst: 0.5}]
  level: 0.0
  formulation: stationary_0T
  grid_density: 16
sweep:
  horizons: [4]
  counts: [8, 16]
)"}};
  bool ok = true;
  const auto root = std::filesystem::temp_directory_path() / "pursuit_acceptance_c8";
  for (const auto& [file, text] : runs) {
    const auto cfg = lab::parse_config(text);
    std::string first;
    for (const char* workers : {"1", "4"}) {
      ::setenv("PURSUIT_LAB_WORKERS", workers, 1);
      const auto dir = root / (file + "_w" + workers);
      std::filesystem::remove_all(dir);
      const auto out = lab::run_experiment(cfg, {dir, nullptr});
      const auto body = slurp(dir / file);
      const bool same = out.exit_code == 0 && !body.empty() && (first.empty() || body == first);
      if (first.empty()) first = body;
      ok = ok && same;
      d << file << " workers=" << workers << (same ? " identical" : " DIFFERS") << "; ";
    }
  }
  ::unsetenv("PURSUIT_LAB_WORKERS");
  return {ok, d.str()};
}

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;  // 0: no runtime bound
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "criterion number (repeatable); default all")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "leadership constant d_H", 5, criterion1},
      {2, "sampler exactness", 60, criterion2},
      {3, "Brownian oracle", 120, criterion3},
      {4, "three-walker leader", 600, criterion4},
      {5, "leadership-ratio bracketing", 900, criterion5},
      {6, "sandwich of the two formulations", 600, criterion6},
      {7, "theory report", 60, criterion7},
      {8, "determinism across worker counts", 0, criterion8},
  };
  if (selected.empty())
    for (const auto& c : all) selected.push_back(c.id);

  int failed = 0;
  for (int id : selected) {
    const auto& c = all[static_cast<std::size_t>(id - 1)];
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_seconds == 0 || secs < c.limit_seconds;
    const bool pass = v.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("CRITERION %d %s | %s | %s | %.1f s%s\n", c.id, pass ? "PASS" : "FAIL", c.title, v.detail.c_str(), secs,
                c.limit_seconds == 0 ? "" : (in_time ? " (within limit)" : " (OVER LIMIT)"));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
