#include "artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pursuit/errors.hpp"

namespace lab {
namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

std::string u64(std::uint64_t v) { return std::to_string(v); }

// CSV field quoting for free text.
std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

nlohmann::json num(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

nlohmann::json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      nlohmann::json out = nlohmann::json::object();
      for (const auto& kv : n) out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return out;
    }
    case YAML::NodeType::Sequence: {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& v : n) out.push_back(yaml_to_json(v));
      return out;
    }
    case YAML::NodeType::Scalar: {
      const auto& s = n.Scalar();
      if (n.Tag() == "!") return s;  // quoted in the source
      if (s == "true" || s == "false") return s == "true";
      if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos && s.size() < 19)
        return std::stoull(s);
      char* end = nullptr;
      const double d = std::strtod(s.c_str(), &end);
      if (end && *end == '\0' && !s.empty() && std::isfinite(d)) return d;
      return s;
    }
    default:
      return nullptr;
  }
}

}  // namespace

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::string& survival_header() {
  static const std::string h =
      "formulation,kernel,pursuers,n,T,grid_density,level,monitoring,seed,samples,survivors,p_hat,std_error,ci_low,ci_high";
  return h;
}

const std::string& capture_header() {
  static const std::string h = "t,cdf,captures";
  return h;
}

const std::string& sweep_header() {
  static const std::string h =
      survival_header() + ",leadership_ratio,ratio_ci_low,ratio_ci_high,prediction,domain_ok,error";
  return h;
}

const std::string& plot_header() {
  static const std::string h = "series,T,n,abscissa_name,abscissa,ordinate,ratio_ci_low,ratio_ci_high";
  return h;
}

const std::string& theory_header() {
  static const std::string h = "check,passed,quantity,value";
  return h;
}

std::string pursuers_tag(const pursuit::EnsembleConfig& cfg) {
  std::string out;
  for (const auto& g : cfg.pursuers) {
    if (!out.empty()) out += ';';
    out += g.kernel.tag() + "x" + std::to_string(g.count);
  }
  return out;
}

namespace {

std::vector<std::string> config_fields(const pursuit::EnsembleConfig& cfg, std::uint64_t seed) {
  return {pursuit::to_string(cfg.formulation), cfg.leader.tag(), pursuers_tag(cfg), u64(cfg.n()),
          fmt(cfg.horizon), fmt(cfg.grid_density), fmt(cfg.level), pursuit::to_string(cfg.monitoring),
          u64(seed)};
}

std::vector<std::string> estimate_fields(const pursuit::MCEstimate& e) {
  return {u64(e.samples), u64(e.survivors), fmt(e.p_hat), fmt(e.std_error), fmt(e.ci_low), fmt(e.ci_high)};
}

}  // namespace

std::string survival_row(const pursuit::EnsembleConfig& cfg, std::uint64_t seed, const pursuit::MCEstimate& est) {
  auto f = config_fields(cfg, seed);
  const auto e = estimate_fields(est);
  f.insert(f.end(), e.begin(), e.end());
  return join(f);
}

std::string capture_csv(const pursuit::CaptureCdf& cdf) {
  std::string out = capture_header() + "\n";
  for (std::size_t k = 0; k < cdf.times.size(); ++k)
    out += fmt(cdf.times[k]) + "," + fmt(cdf.cdf[k]) + "," + u64(cdf.captures[k]) + "\n";
  return out;
}

std::string sweep_csv(const pursuit::SweepTable& table, std::uint64_t samples) {
  std::string out = sweep_header() + "\n";
  for (const auto& row : table.rows) {
    auto cfg = table.base;
    cfg.horizon = row.horizon;
    cfg.pursuers = {{table.base.pursuers.front().kernel, row.n}};
    auto f = config_fields(cfg, row.seed);
    if (row.estimate) {
      const auto e = estimate_fields(*row.estimate);
      f.insert(f.end(), e.begin(), e.end());
      f.push_back(fmt(row.ratio.value));
      f.push_back(fmt(row.ratio.ci_low));
      f.push_back(fmt(row.ratio.ci_high));
    } else {
      f.push_back(u64(samples));
      for (int i = 0; i < 8; ++i) f.emplace_back();
    }
    f.push_back(fmt(table.prediction));
    f.push_back(row.domain_ok ? "true" : "false");
    f.push_back(quoted(row.error));
    out += join(f) + "\n";
  }
  return out;
}

std::string emit_plot_data(const pursuit::SweepTable& table, PlotAbscissa abscissa) {
  if (table.rows.empty()) throw pursuit::DomainError("emit_plot_data: empty sweep table");
  std::string out = plot_header() + "\n";
  const std::string name = abscissa == PlotAbscissa::LnN ? "ln_n" : "ln_T";
  for (const auto& row : table.rows) {
    const double x = abscissa == PlotAbscissa::LnN ? std::log(static_cast<double>(row.n)) : std::log(row.horizon);
    const std::string key = fmt(row.horizon) + "," + u64(row.n) + "," + name + "," + fmt(x) + ",";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const bool ok = row.estimate.has_value();
    out += "estimate," + key + fmt(ok ? row.ratio.value : nan) + "," + fmt(ok ? row.ratio.ci_low : nan) + "," +
           fmt(ok ? row.ratio.ci_high : nan) + "\n";
    out += "reference," + key + fmt(table.prediction) + ",,\n";
  }
  return out;
}

nlohmann::json sweep_summary(const pursuit::SweepTable& table, const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["schema"] = kSweepSummarySchema;
  j["formulation"] = pursuit::to_string(table.base.formulation);
  j["leader"] = table.base.leader.tag();
  j["pursuer"] = table.base.pursuers.front().kernel.tag();
  j["prediction"] = num(table.prediction);
  j["seed"] = cfg.seed;
  j["samples_per_cell"] = cfg.samples;
  j["coupled"] = cfg.sweep.coupled;
  j["domain"] = {{"c", cfg.sweep.domain.c}, {"C", cfg.sweep.domain.C}};
  std::size_t failed = 0;
  for (const auto& r : table.rows) failed += r.estimate ? 0 : 1;
  j["cells"] = table.rows.size();
  j["failed_cells"] = failed;

  // Power-law fits of p against T at each fixed n.
  std::map<std::size_t, std::vector<std::pair<double, pursuit::MCEstimate>>> by_n;
  for (const auto& r : table.rows)
    if (r.estimate) by_n[r.n].emplace_back(r.horizon, *r.estimate);
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& [n, pts] : by_n) {
    nlohmann::json f{{"n", n}};
    if (table.base.formulation == pursuit::Formulation::Stationary0T) {
      f["skipped"] = "power-law fit applies to self-similar formulations";
    } else {
      try {
        const auto fit = pursuit::fit_gamma_n(pts);
        f["gamma"] = fit.gamma();
        f["gamma_ci"] = {fit.gamma_ci_low(), fit.gamma_ci_high()};
        f["slope"] = fit.slope;
        f["slope_se"] = fit.slope_se;
        f["intercept"] = fit.intercept;
        f["residual_rms"] = fit.residual_rms;
        nlohmann::json points = nlohmann::json::array();
        for (const auto& p : fit.points) points.push_back({{"ln_T", p.x}, {"ln_p", p.y}, {"weight", p.weight}});
        f["points"] = points;
      } catch (const pursuit::Error& e) {
        f["skipped"] = e.what();
      }
    }
    fits.push_back(f);
  }
  j["fits"] = fits;

  if (cfg.sweep.correction_fit) {
    std::map<double, std::vector<std::pair<std::size_t, double>>> by_t;
    for (const auto& r : table.rows)
      if (r.estimate && std::isfinite(r.ratio.value)) by_t[r.horizon].emplace_back(r.n, r.ratio.value);
    nlohmann::json corr = nlohmann::json::array();
    for (const auto& [T, pts] : by_t) {
      nlohmann::json c{{"T", T}};
      try {
        const auto cf = pursuit::fit_log_n_correction(pts);
        c["limit"] = cf.limit;
        c["coefficient"] = cf.coefficient;
      } catch (const pursuit::Error& e) {
        c["skipped"] = e.what();
      }
      corr.push_back(c);
    }
    j["correction_fits"] = corr;
  }
  return j;
}

std::string theory_text(const pursuit::TheoryReport& report) {
  std::ostringstream out;
  for (const auto& e : report.entries) {
    out << (e.passed ? "PASS " : "FAIL ") << e.name << "\n";
    out << "  " << e.note << "\n";
    for (const auto& [k, v] : e.measured) out << "  " << k << " = " << fmt(v) << "\n";
  }
  out << (report.all_passed() ? "all checks passed" : "some checks failed") << "\n";
  return out.str();
}

std::string theory_csv(const pursuit::TheoryReport& report) {
  std::string out = theory_header() + "\n";
  for (const auto& e : report.entries)
    for (const auto& [k, v] : e.measured)
      out += e.name + "," + (e.passed ? "true" : "false") + "," + quoted(k) + "," + fmt(v) + "\n";
  return out;
}

KernelTables kernel_tables(const KernelTableSpec& spec) {
  KernelTables t;
  t.correlation = "kernel,lag,correlation\n";
  t.spectrum = "kernel,lambda,spectral_density\n";
  t.constants = "kernel,d,d_source,prediction,spectral_density_at_zero\n";
  for (const auto& k : spec.kernels) {
    // FBM is tabulated through its stationary Lamperti image.
    const auto stat = k.stationary() ? k : pursuit::KernelSpec::lamperti(k.hurst());
    for (double lag : spec.lags) t.correlation += k.tag() + "," + fmt(lag) + "," + fmt(stat.correlation(lag)) + "\n";
    for (double l : spec.frequencies) t.spectrum += k.tag() + "," + fmt(l) + "," + fmt(stat.spectral_density(l)) + "\n";
    const auto d = k.family() == pursuit::KernelFamily::TabulatedStationary ? pursuit::d_quadrature(k)
                                                                             : pursuit::d_closed_form(k.hurst());
    const char* src = d.source == pursuit::ConstantSource::ClosedForm ? "closed_form"
                      : d.source == pursuit::ConstantSource::Quadrature ? "quadrature" : "spectral";
    t.constants += k.tag() + "," + fmt(d.d) + "," + src + "," + fmt(1.0 / d.d) + "," +
                   fmt(stat.spectral_density(0.0)) + "\n";
  }
  return t;
}

nlohmann::json config_echo(const std::string& yaml_text) { return yaml_to_json(YAML::Load(yaml_text)); }

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pursuit::IoError("cannot write " + path.string());
  out << body;
  if (!out) throw pursuit::IoError("write failed: " + path.string());
}

}  // namespace lab
