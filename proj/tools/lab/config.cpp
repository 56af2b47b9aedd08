#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pursuit/errors.hpp"

namespace lab {
namespace {

using pursuit::ConfigError;

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

// A node together with its dotted path, for error messages.
struct Field {
  YAML::Node node;
  std::string path;

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path, line_of(node), msg); }

  Field child(const std::string& key) const { return {node[key], path.empty() ? key : path + "." + key}; }
  Field item(std::size_t i) const { return {node[i], path + "[" + std::to_string(i) + "]"}; }
  bool has(const std::string& key) const { return node.IsMap() && node[key].IsDefined() && !node[key].IsNull(); }

  void require_map(std::initializer_list<const char*> allowed) const {
    if (!node.IsMap()) fail("expected a mapping");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) {
        Field bad{kv.first, path.empty() ? key : path + "." + key};
        bad.fail("unknown key");
      }
    }
  }

  template <class T>
  T as() const {
    if (!node.IsDefined() || node.IsNull()) fail("missing value");
    if (!node.IsScalar()) fail("expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail("cannot read '" + node.Scalar() + "'");
    }
  }

  double number() const {
    const auto v = as<double>();
    if (!std::isfinite(v)) fail("must be finite");
    return v;
  }
  double positive() const {
    const auto v = number();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }
  std::uint64_t count(std::uint64_t min = 1) const {
    const auto s = as<std::string>();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) fail("expected a non-negative integer");
    const auto v = as<std::uint64_t>();
    if (v < min) fail("must be at least " + std::to_string(min));
    return v;
  }
  bool flag() const { return as<bool>(); }

  std::vector<Field> items() const {
    if (!node.IsSequence()) fail("expected a list");
    std::vector<Field> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(item(i));
    return out;
  }
};

pursuit::KernelSpec parse_kernel(const Field& f, const std::filesystem::path& base, bool allow_count) {
  if (allow_count) f.require_map({"family", "hurst", "file", "values", "step", "label", "count"});
  else f.require_map({"family", "hurst", "file", "values", "step", "label"});
  const auto fam = f.child("family");
  const auto family = fam.as<std::string>();
  auto forbid = [&f](std::initializer_list<const char*> keys, const std::string& why) {
    for (const char* k : keys)
      if (f.has(k)) f.child(k).fail(why);
  };
  try {
    if (family == "fbm" || family == "lamperti") {
      forbid({"file", "values", "step", "label"}, "not used by the " + family + " family");
      const auto h = f.child("hurst");
      const double H = h.number();
      if (!(H > 0.0 && H < 1.0)) h.fail("hurst must lie in (0, 1)");
      return family == "fbm" ? pursuit::KernelSpec::fbm(H) : pursuit::KernelSpec::lamperti(H);
    }
    if (family == "tabulated") {
      forbid({"hurst"}, "not used by the tabulated family");
      if (f.has("file")) {
        forbid({"values", "step"}, "give either file or values/step");
        auto p = std::filesystem::path(f.child("file").as<std::string>());
        if (p.is_relative()) p = base / p;
        return pursuit::load_tabulated_kernel(p);
      }
      std::vector<double> values;
      for (const auto& v : f.child("values").items()) values.push_back(v.number());
      const double step = f.child("step").positive();
      const std::string label = f.has("label") ? f.child("label").as<std::string>() : "tabulated";
      return pursuit::KernelSpec::tabulated(std::move(values), step, label);
    }
  } catch (const pursuit::ConfigError&) {
    throw;
  } catch (const pursuit::Error& e) {
    f.fail(e.what());
  }
  fam.fail("unknown family '" + family + "' (fbm, lamperti, tabulated)");
}

pursuit::EnsembleConfig parse_ensemble(const Field& f, const std::filesystem::path& base, bool horizon_required) {
  f.require_map({"leader", "pursuers", "horizon", "level", "formulation", "grid_density", "monitoring"});
  pursuit::EnsembleConfig cfg;
  cfg.leader = parse_kernel(f.child("leader"), base, false);
  const auto groups = f.child("pursuers").items();
  if (groups.empty()) f.child("pursuers").fail("needs at least one group");
  for (const auto& g : groups) {
    pursuit::PursuerGroup pg{parse_kernel(g, base, true), 1};
    if (g.has("count")) pg.count = g.child("count").count(1);
    cfg.pursuers.push_back(pg);
  }
  if (horizon_required || f.has("horizon")) cfg.horizon = f.child("horizon").positive();
  if (f.has("level")) cfg.level = f.child("level").number();
  const auto form = f.child("formulation");
  try {
    cfg.formulation = pursuit::parse_formulation(form.as<std::string>());
  } catch (const pursuit::Error& e) {
    form.fail(e.what());
  }
  if (f.has("grid_density")) cfg.grid_density = f.child("grid_density").positive();
  if (f.has("monitoring")) {
    const auto m = f.child("monitoring");
    try {
      cfg.monitoring = pursuit::parse_monitoring(m.as<std::string>());
    } catch (const pursuit::Error& e) {
      m.fail(e.what());
    }
  }
  return cfg;
}

std::vector<double> number_list(const Field& f) {
  std::vector<double> out;
  for (const auto& v : f.items()) out.push_back(v.number());
  if (out.empty()) f.fail("must not be empty");
  return out;
}

Kind parse_kind(const Field& f) {
  const auto s = f.as<std::string>();
  if (s == "survival") return Kind::Survival;
  if (s == "capture_cdf") return Kind::CaptureCdf;
  if (s == "sweep") return Kind::Sweep;
  if (s == "theory_report") return Kind::TheoryReport;
  if (s == "kernel_table") return Kind::KernelTable;
  f.fail("unknown kind '" + s + "' (survival, capture_cdf, sweep, theory_report, kernel_table)");
}

ExperimentConfig parse_root(const YAML::Node& root, const std::filesystem::path& base) {
  const Field top{root, ""};
  if (!root.IsMap()) throw ConfigError("", line_of(root), "config must be a mapping");
  top.require_map({"kind", "seed", "samples", "output", "ensemble", "sweep", "capture_cdf", "kernel_table", "theory"});
  ExperimentConfig cfg;
  cfg.kind = parse_kind(top.child("kind"));
  if (top.has("seed")) cfg.seed = top.child("seed").count(0);

  auto allow_section = [&](const char* key, bool allowed) {
    if (top.has(key) && !allowed) top.child(key).fail("not used by kind " + to_string(cfg.kind));
  };
  const bool mc = cfg.kind == Kind::Survival || cfg.kind == Kind::CaptureCdf || cfg.kind == Kind::Sweep;
  allow_section("samples", mc);
  allow_section("ensemble", mc);
  allow_section("sweep", cfg.kind == Kind::Sweep);
  allow_section("capture_cdf", cfg.kind == Kind::CaptureCdf);
  allow_section("kernel_table", cfg.kind == Kind::KernelTable);
  allow_section("theory", cfg.kind == Kind::TheoryReport);

  if (top.has("output")) {
    const auto o = top.child("output");
    o.require_map({"directory", "json", "plot_data"});
    if (o.has("directory")) cfg.output.directory = o.child("directory").as<std::string>();
    if (o.has("json")) cfg.output.json = o.child("json").flag();
    if (o.has("plot_data")) {
      if (cfg.kind != Kind::Sweep) o.child("plot_data").fail("plot data is produced by sweeps only");
      cfg.output.plot_data = o.child("plot_data").flag();
    }
  }
  if (cfg.output.directory.is_relative()) cfg.output.directory = base / cfg.output.directory;

  if (mc) {
    cfg.samples = top.child("samples").count(1);
    cfg.ensemble = parse_ensemble(top.child("ensemble"), base, cfg.kind != Kind::Sweep);
  }

  if (cfg.kind == Kind::Survival || cfg.kind == Kind::CaptureCdf) {
    try {
      cfg.ensemble->validate();
    } catch (const pursuit::Error& e) {
      top.child("ensemble").fail(e.what());
    }
  }

  if (cfg.kind == Kind::CaptureCdf && top.has("capture_cdf")) {
    const auto c = top.child("capture_cdf");
    c.require_map({"quantiles"});
    if (c.has("quantiles")) {
      cfg.capture.quantiles = number_list(c.child("quantiles"));
      for (double q : cfg.capture.quantiles)
        if (!(q > 0.0 && q < 1.0)) c.child("quantiles").fail("quantiles must lie in (0, 1)");
    }
  }

  if (cfg.kind == Kind::Sweep) {
    const auto s = top.child("sweep");
    s.require_map({"horizons", "counts", "cells", "coupled", "domain", "plot_abscissa", "correction_fit"});
    if (s.has("cells")) {
      if (s.has("horizons") || s.has("counts")) s.child("cells").fail("give either cells or horizons/counts");
      for (const auto& c : s.child("cells").items()) {
        if (!c.node.IsSequence() || c.node.size() != 2) c.fail("each cell is [T, n]");
        cfg.sweep.cells.emplace_back(c.item(0).positive(), static_cast<std::size_t>(c.item(1).count(1)));
      }
      if (cfg.sweep.cells.empty()) s.child("cells").fail("must not be empty");
    } else {
      const auto hs = number_list(s.child("horizons"));
      std::vector<std::size_t> ns;
      for (const auto& v : s.child("counts").items()) ns.push_back(static_cast<std::size_t>(v.count(1)));
      if (ns.empty()) s.child("counts").fail("must not be empty");
      for (double T : hs)
        for (auto n : ns) cfg.sweep.cells.emplace_back(T, n);
    }
    if (s.has("coupled")) cfg.sweep.coupled = s.child("coupled").flag();
    if (s.has("domain")) {
      const auto d = s.child("domain");
      d.require_map({"c", "C"});
      if (d.has("c")) cfg.sweep.domain.c = d.child("c").number();
      if (d.has("C")) cfg.sweep.domain.C = d.child("C").number();
    }
    if (s.has("plot_abscissa")) {
      const auto a = s.child("plot_abscissa");
      const auto v = a.as<std::string>();
      if (v == "ln_n") cfg.sweep.abscissa = PlotAbscissa::LnN;
      else if (v == "ln_T") cfg.sweep.abscissa = PlotAbscissa::LnT;
      else a.fail("expected ln_n or ln_T");
    }
    if (s.has("correction_fit")) cfg.sweep.correction_fit = s.child("correction_fit").flag();
    try {
      pursuit::SweepPlan plan(cfg.sweep.cells, cfg.ensemble->formulation, cfg.sweep.domain);
    } catch (const pursuit::Error& e) {
      s.fail(e.what());
    }
    // Validate the base ensemble at the first cell.
    auto probe = *cfg.ensemble;
    probe.horizon = cfg.sweep.cells.front().first;
    probe.pursuers = {{probe.pursuers.front().kernel, cfg.sweep.cells.front().second}};
    try {
      probe.validate();
    } catch (const pursuit::Error& e) {
      top.child("ensemble").fail(e.what());
    }
    if (!top.child("ensemble").has("horizon")) cfg.ensemble->horizon = probe.horizon;
  }

  if (cfg.kind == Kind::TheoryReport && top.has("theory")) {
    const auto t = top.child("theory");
    t.require_map({"lemma5_samples", "path_samples"});
    if (t.has("lemma5_samples")) cfg.theory.lemma5_samples = t.child("lemma5_samples").count(1);
    if (t.has("path_samples")) cfg.theory.path_samples = t.child("path_samples").count(2);
  }
  cfg.theory.seed = cfg.seed;

  if (cfg.kind == Kind::KernelTable) {
    const auto k = top.child("kernel_table");
    k.require_map({"kernels", "lags", "frequencies"});
    for (const auto& kk : k.child("kernels").items()) cfg.kernel_table.kernels.push_back(parse_kernel(kk, base, false));
    if (cfg.kernel_table.kernels.empty()) k.child("kernels").fail("must not be empty");
    if (k.has("lags")) cfg.kernel_table.lags = number_list(k.child("lags"));
    else for (int i = 0; i <= 16; ++i) cfg.kernel_table.lags.push_back(0.5 * i);
    if (k.has("frequencies")) cfg.kernel_table.frequencies = number_list(k.child("frequencies"));
    else for (int i = 0; i <= 16; ++i) cfg.kernel_table.frequencies.push_back(0.5 * i);
  }
  return cfg;
}

YAML::Node load_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, "YAML syntax: " + e.msg);
  }
}

}  // namespace

std::string to_string(Kind k) {
  switch (k) {
    case Kind::Survival: return "survival";
    case Kind::CaptureCdf: return "capture_cdf";
    case Kind::Sweep: return "sweep";
    case Kind::TheoryReport: return "theory_report";
    case Kind::KernelTable: return "kernel_table";
  }
  return "?";
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  auto root = load_yaml(text);
  std::string source = text;
  std::filesystem::path base = base_dir;
  if (root.IsMap() && root["pursuit_lab_manifest"].IsDefined()) {
    // Re-execution of a run manifest.
    if (!root["config_text"].IsScalar()) throw ConfigError("config_text", line_of(root), "manifest has no config_text");
    source = root["config_text"].as<std::string>();
    if (root["config_dir"].IsScalar()) base = root["config_dir"].as<std::string>();
    root = load_yaml(source);
  }
  auto cfg = parse_root(root, base);
  cfg.source_text = source;
  cfg.base_dir = base;
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto base = std::filesystem::absolute(path).parent_path();
  auto cfg = parse_config(ss.str(), base);
  cfg.source_path = path;
  return cfg;
}

}  // namespace lab
