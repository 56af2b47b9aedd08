#include "pursuit/pursuit.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <random>

#include "pursuit/errors.hpp"
#include "pursuit/parallel.hpp"
#include "pursuit/rng.hpp"

namespace pursuit {
namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr std::size_t kNone = static_cast<std::size_t>(-1);
// Stream of the bridge-crossing uniforms; far from any particle stream.
constexpr std::uint64_t kBridgeStream = 0x6272696467650001ULL;

bool is_fbm(const KernelSpec& k) { return k.family() == KernelFamily::Fbm; }

std::vector<std::uint64_t> resolve_streams(const RunOptions& options, std::size_t particles) {
  if (options.streams.empty()) {
    std::vector<std::uint64_t> s(particles);
    for (std::size_t i = 0; i < particles; ++i) s[i] = i;
    return s;
  }
  if (options.streams.size() != particles)
    throw DomainError("RunOptions.streams must list one stream per particle (" + std::to_string(particles) + ")");
  auto sorted = options.streams;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DomainError("RunOptions.streams must be distinct");
  return options.streams;
}

// Everything needed to draw one sample of all n + 1 particles on one grid.
class Ensemble {
 public:
  // `lamperti` selects the log-time picture (SelfSimilar1T). Otherwise
  // self-similar kernels are sampled as FBM on `grid` (which starts at 0).
  Ensemble(const EnsembleConfig& cfg, const GridSpec& grid, bool lamperti,
           std::vector<std::uint64_t> streams)
      : grid_(grid), streams_(std::move(streams)) {
    const double h_leader = cfg.leader.hurst();
    auto simulated = [&](const KernelSpec& k) {
      if (lamperti) return KernelSpec::lamperti(k.hurst());
      return k;
    };
    add_particle(simulated(cfg.leader), {});
    for (const auto& group : cfg.pursuers) {
      std::vector<double> scale;
      if (!lamperti && is_fbm(group.kernel) && group.kernel.hurst() != h_leader) {
        scale.resize(grid.points);
        const double e = h_leader - group.kernel.hurst();
        for (std::size_t k = 0; k < grid.points; ++k) {
          const double t = grid.time(k);
          scale[k] = t > 0.0 ? std::pow(t, e) : 0.0;
        }
      }
      for (std::size_t j = 0; j < group.count; ++j) add_particle(simulated(group.kernel), scale);
    }
  }

  struct Buffers {
    std::vector<double> leader, pursuer;
    std::vector<PathGenerator::Workspace> workspaces;
  };

  Buffers make_buffers() const {
    Buffers b;
    b.leader.resize(grid_.points);
    b.pursuer.resize(grid_.points);
    for (const auto& g : generators_) b.workspaces.push_back(g->make_workspace());
    return b;
  }

  std::size_t pursuers() const { return particles_.size() - 1; }
  const GridSpec& grid() const { return grid_; }

  void draw(std::size_t particle, std::uint64_t seed, std::uint64_t row, std::vector<double>& out,
            Buffers& b) const {
    const auto& p = particles_[particle];
    auto engine = make_engine(seed, streams_[particle], row);
    generators_[p.generator]->generate(engine, out, b.workspaces[p.generator]);
    if (p.scale >= 0) {
      const auto& s = scales_[static_cast<std::size_t>(p.scale)];
      for (std::size_t k = 0; k < out.size(); ++k) out[k] *= s[k];
    }
  }

 private:
  struct Particle {
    std::size_t generator;
    long scale;
  };

  void add_particle(const KernelSpec& k, const std::vector<double>& scale) {
    std::size_t g = 0;
    while (g < kernels_.size() && !(kernels_[g] == k)) ++g;
    if (g == kernels_.size()) {
      kernels_.push_back(k);
      generators_.push_back(std::make_unique<PathGenerator>(k, grid_));
    }
    long s = -1;
    if (!scale.empty()) {
      scales_.push_back(scale);
      s = static_cast<long>(scales_.size() - 1);
    }
    particles_.push_back({g, s});
  }

  GridSpec grid_;
  std::vector<std::uint64_t> streams_;
  std::vector<KernelSpec> kernels_;
  std::vector<std::unique_ptr<PathGenerator>> generators_;
  std::vector<std::vector<double>> scales_;
  std::vector<Particle> particles_;
};

// First-capture search shared by survival and capture-time runs, so both
// make identical decisions for every sample.
class CaptureSearch {
 public:
  CaptureSearch(const EnsembleConfig& cfg, const RunOptions& options)
      : cfg_(cfg),
        ensemble_(cfg, cfg.grid(), cfg.formulation == Formulation::SelfSimilar1T,
                  resolve_streams(options, cfg.n() + 1)) {
    const auto& g = ensemble_.grid();
    thresholds_.assign(g.points, cfg.level);
    times_.resize(g.points);
    for (std::size_t k = 0; k < g.points; ++k) {
      const double t = g.time(k);
      if (cfg.formulation == Formulation::SelfSimilar1T) {
        thresholds_[k] = cfg.level * std::exp(-t * cfg.leader.hurst());
        times_[k] = std::exp(t);
      } else {
        times_[k] = t;
      }
    }
  }

  const Ensemble& ensemble() const { return ensemble_; }
  const std::vector<double>& times() const { return times_; }

  // Grid index of the first capture, or kNone. With `stop_early` the search
  // ends at the first capturing pursuer (enough to decide survival).
  std::size_t first_capture(std::uint64_t seed, std::uint64_t row, Ensemble::Buffers& b,
                            bool stop_early) const {
    ensemble_.draw(0, seed, row, b.leader, b);
    std::size_t limit = b.leader.size();
    std::size_t best = kNone;
    for (std::size_t i = 1; i <= ensemble_.pursuers(); ++i) {
      ensemble_.draw(i, seed, row, b.pursuer, b);
      if (cfg_.monitoring == Monitoring::BrownianBridge) return bridge_capture(seed, row, b);
      for (std::size_t k = 0; k < limit; ++k) {
        if (b.pursuer[k] - b.leader[k] >= thresholds_[k]) {
          best = k;
          limit = k;
          break;
        }
      }
      if (best != kNone && stop_early) return best;
    }
    return best;
  }

 private:
  std::size_t bridge_capture(std::uint64_t seed, std::uint64_t row, Ensemble::Buffers& b) const {
    const double c = cfg_.level;
    const double dt = ensemble_.grid().spacing();
    double x = b.pursuer[0] - b.leader[0];
    if (x >= c) return 0;
    auto engine = make_engine(seed, kBridgeStream, row);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t k = 1; k < b.leader.size(); ++k) {
      const double y = b.pursuer[k] - b.leader[k];
      if (y >= c) return k;
      if (uniform(engine) < std::exp(-(c - x) * (c - y) / dt)) return k;
      x = y;
    }
    return kNone;
  }

  const EnsembleConfig& cfg_;
  Ensemble ensemble_;
  std::vector<double> thresholds_;
  std::vector<double> times_;
};

struct CaptureCounts {
  std::uint64_t never = 0;
  std::vector<std::uint64_t> at;
};

CaptureCounts run_capture(const EnsembleConfig& config, std::uint64_t seed, std::uint64_t samples,
                          const RunOptions& options, bool want_times,
                          std::vector<double>* times_out) {
  config.validate();
  if (samples == 0) throw DomainError("samples must be at least 1");
  const CaptureSearch search(config, options);
  const std::size_t workers = resolve_workers(options.workers);
  const std::size_t chunks = (samples + kChunkSamples - 1) / kChunkSamples;
  const std::size_t points = search.ensemble().grid().points;

  std::vector<Ensemble::Buffers> buffers;
  std::vector<CaptureCounts> partial(std::min(workers, chunks));
  for (std::size_t w = 0; w < partial.size(); ++w) {
    buffers.push_back(search.ensemble().make_buffers());
    if (want_times) partial[w].at.assign(points, 0);
  }
  run_chunks(chunks, partial.size(), [&](std::size_t chunk, std::size_t w) {
    const std::uint64_t begin = chunk * kChunkSamples;
    const std::uint64_t end = std::min<std::uint64_t>(samples, begin + kChunkSamples);
    auto& counts = partial[w];
    for (std::uint64_t row = begin; row < end; ++row) {
      const std::size_t k = search.first_capture(seed, row, buffers[w], !want_times);
      if (k == kNone) {
        ++counts.never;
      } else if (want_times) {
        ++counts.at[k];
      }
    }
  });
  // Integer sums: independent of how chunks were spread over workers.
  CaptureCounts total;
  if (want_times) total.at.assign(points, 0);
  for (const auto& p : partial) {
    total.never += p.never;
    for (std::size_t k = 0; k < p.at.size(); ++k) total.at[k] += p.at[k];
  }
  if (times_out) *times_out = search.times();
  return total;
}

}  // namespace

std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::Stationary0T:
      return "stationary_0T";
    case Formulation::SelfSimilar0T:
      return "selfsimilar_0T";
    case Formulation::SelfSimilar1T:
      return "selfsimilar_1T";
  }
  return "unknown";
}

std::string to_string(Monitoring m) { return m == Monitoring::Grid ? "grid" : "bridge"; }

Formulation parse_formulation(const std::string& s) {
  if (s == "stationary_0T") return Formulation::Stationary0T;
  if (s == "selfsimilar_0T") return Formulation::SelfSimilar0T;
  if (s == "selfsimilar_1T") return Formulation::SelfSimilar1T;
  throw DomainError("unknown formulation '" + s + "' (stationary_0T, selfsimilar_0T, selfsimilar_1T)");
}

Monitoring parse_monitoring(const std::string& s) {
  if (s == "grid") return Monitoring::Grid;
  if (s == "bridge") return Monitoring::BrownianBridge;
  throw DomainError("unknown monitoring '" + s + "' (grid, bridge)");
}

std::size_t EnsembleConfig::n() const {
  std::size_t total = 0;
  for (const auto& g : pursuers) total += g.count;
  return total;
}

void EnsembleConfig::validate() const {
  if (pursuers.empty() || n() == 0) throw DomainError("ensemble needs at least one pursuer");
  for (const auto& g : pursuers)
    if (g.count == 0) throw DomainError("pursuer group multiplicity must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon T must be positive");
  if (!std::isfinite(level)) throw DomainError("level must be finite");
  if (!(grid_density > 0.0) || !std::isfinite(grid_density))
    throw DomainError("grid_density must be positive");
  if (formulation == Formulation::Stationary0T) {
    if (!leader.stationary()) throw DomainError("stationary formulation needs a stationary leader kernel");
    for (const auto& g : pursuers)
      if (!g.kernel.stationary()) throw DomainError("stationary formulation needs stationary pursuer kernels");
  } else {
    // Self-similar runs are restricted to FBM, the family with X(0) = 0.
    if (!is_fbm(leader)) throw DomainError("self-similar formulations need an FBM leader");
    for (const auto& g : pursuers)
      if (!is_fbm(g.kernel)) throw DomainError("self-similar formulations need FBM pursuers");
    if (formulation == Formulation::SelfSimilar1T && !(horizon > 1.0))
      throw DomainError("selfsimilar_1T needs T > 1");
  }
  if (monitoring == Monitoring::BrownianBridge) {
    const bool ok = formulation == Formulation::SelfSimilar0T && n() == 1 && leader.hurst() == 0.5 &&
                    pursuers[0].kernel.hurst() == 0.5;
    if (!ok)
      throw DomainError("bridge monitoring needs selfsimilar_0T, n = 1 and Brownian leader and pursuer");
  }
  const double length = formulation == Formulation::SelfSimilar1T ? std::log(horizon) : horizon;
  if (length * grid_density > 1e8) throw DomainError("grid too large (more than 1e8 points)");
}

GridSpec EnsembleConfig::grid() const {
  const double length = formulation == Formulation::SelfSimilar1T ? std::log(horizon) : horizon;
  const auto intervals = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(length * grid_density)));
  return GridSpec(0.0, length, intervals + 1);
}

EnsembleConfig EnsembleConfig::homogeneous(const KernelSpec& kernel, std::size_t n, double horizon,
                                           double level, Formulation formulation, double grid_density) {
  EnsembleConfig c;
  c.leader = kernel;
  c.pursuers = {{kernel, n}};
  c.horizon = horizon;
  c.level = level;
  c.formulation = formulation;
  c.grid_density = grid_density;
  return c;
}

MCEstimate MCEstimate::from_counts(std::uint64_t survivors, std::uint64_t samples) {
  if (samples == 0) throw DomainError("MCEstimate needs at least one sample");
  if (survivors > samples) throw DomainError("survivors exceed samples");
  MCEstimate e;
  e.samples = samples;
  e.survivors = survivors;
  const double n = static_cast<double>(samples);
  const double p = static_cast<double>(survivors) / n;
  e.p_hat = p;
  e.std_error = std::sqrt(p * (1.0 - p) / n);
  if (survivors == 0) {
    e.ci_low = 0.0;
    e.ci_high = std::min(1.0, 3.0 / n);
    e.zero_survivors = true;
    return e;
  }
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  e.ci_low = std::clamp(center - half, 0.0, p);
  e.ci_high = std::clamp(center + half, p, 1.0);
  return e;
}

PathBatch leader_gap(const PathBatch& leader, const std::vector<PathBatch>& pursuers) {
  if (pursuers.empty()) throw DomainError("leader_gap needs at least one pursuer batch");
  for (const auto& p : pursuers) {
    if (!(p.grid == leader.grid) || p.rows != leader.rows)
      throw GridMismatch("leader_gap: pursuer batch grid or size differs from the leader's");
  }
  PathBatch out;
  out.grid = leader.grid;
  out.rows = leader.rows;
  out.seed = leader.seed;
  out.values.assign(leader.values.size(), -std::numeric_limits<double>::infinity());
  for (const auto& p : pursuers)
    for (std::size_t j = 0; j < out.values.size(); ++j)
      out.values[j] = std::max(out.values[j], p.values[j] - leader.values[j]);
  return out;
}

MCEstimate estimate_survival(const EnsembleConfig& config, std::uint64_t seed, std::uint64_t samples,
                             const RunOptions& options) {
  const auto counts = run_capture(config, seed, samples, options, false, nullptr);
  return MCEstimate::from_counts(counts.never, samples);
}

CaptureCdf capture_time_cdf(const EnsembleConfig& config, std::uint64_t seed, std::uint64_t samples,
                            const RunOptions& options) {
  CaptureCdf out;
  const auto counts = run_capture(config, seed, samples, options, true, &out.times);
  out.samples = samples;
  out.never_captured = counts.never;
  out.captures = counts.at;
  out.cdf.resize(counts.at.size());
  std::uint64_t cumulative = 0;
  for (std::size_t k = 0; k < counts.at.size(); ++k) {
    cumulative += counts.at[k];
    out.cdf[k] = static_cast<double>(cumulative) / static_cast<double>(samples);
  }
  return out;
}

double CaptureCdf::at(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0.0;
  return cdf[static_cast<std::size_t>(it - times.begin()) - 1];
}

MCEstimate CaptureCdf::survival() const { return MCEstimate::from_counts(never_captured, samples); }

namespace {
// Time of the r-th smallest capture (1-based); +inf past the captured ones.
double order_statistic(const CaptureCdf& c, double rank) {
  if (rank < 1.0) rank = 1.0;
  std::uint64_t cumulative = 0;
  for (std::size_t k = 0; k < c.captures.size(); ++k) {
    cumulative += c.captures[k];
    if (static_cast<double>(cumulative) >= rank) return c.times[k];
  }
  return std::numeric_limits<double>::infinity();
}
}  // namespace

double CaptureCdf::quantile(double q) const {
  return order_statistic(*this, std::ceil(q * static_cast<double>(samples)));
}

std::pair<double, double> CaptureCdf::quantile_ci(double q) const {
  const double n = static_cast<double>(samples);
  const double spread = kZ95 * std::sqrt(n * q * (1.0 - q));
  return {order_statistic(*this, std::floor(n * q - spread)), order_statistic(*this, std::ceil(n * q + spread) + 1.0)};
}

FormulationComparison compare_formulations(const EnsembleConfig& config, std::uint64_t seed,
                                           std::uint64_t samples, const RunOptions& options) {
  EnsembleConfig cfg = config;
  cfg.formulation = Formulation::SelfSimilar0T;
  cfg.level = 1.0;
  cfg.monitoring = Monitoring::Grid;
  cfg.validate();
  if (!(cfg.horizon > 1.0)) throw DomainError("compare_formulations needs T > 1");
  if (samples == 0) throw DomainError("samples must be at least 1");

  const Ensemble ensemble(cfg, cfg.grid(), false, resolve_streams(options, cfg.n() + 1));
  const auto& grid = ensemble.grid();
  std::size_t first_late = 0;
  while (grid.time(first_late) < 1.0) ++first_late;

  struct Counts {
    std::uint64_t a = 0, b = 0, c = 0, violations = 0;
  };
  const std::size_t workers = resolve_workers(options.workers);
  const std::size_t chunks = (samples + kChunkSamples - 1) / kChunkSamples;
  std::vector<Counts> partial(std::min(workers, chunks));
  std::vector<Ensemble::Buffers> buffers;
  for (std::size_t w = 0; w < partial.size(); ++w) buffers.push_back(ensemble.make_buffers());

  run_chunks(chunks, partial.size(), [&](std::size_t chunk, std::size_t w) {
    const std::uint64_t begin = chunk * kChunkSamples;
    const std::uint64_t end = std::min<std::uint64_t>(samples, begin + kChunkSamples);
    auto& b = buffers[w];
    auto& counts = partial[w];
    for (std::uint64_t row = begin; row < end; ++row) {
      ensemble.draw(0, seed, row, b.leader, b);
      double max_early = -std::numeric_limits<double>::infinity();
      double max_late = max_early;
      for (std::size_t i = 1; i <= ensemble.pursuers(); ++i) {
        ensemble.draw(i, seed, row, b.pursuer, b);
        for (std::size_t k = 0; k < first_late; ++k) max_early = std::max(max_early, b.pursuer[k] - b.leader[k]);
        for (std::size_t k = first_late; k < grid.points; ++k)
          max_late = std::max(max_late, b.pursuer[k] - b.leader[k]);
        // Every event is already lost once the late maximum is positive and
        // the overall maximum exceeds 1.
        if (max_late > 0.0 && std::max(max_early, max_late) > 1.0) break;
      }
      const double max_all = std::max(max_early, max_late);
      const bool a = max_late <= 0.0;
      const bool bb = max_all <= 1.0;
      const bool c = max_all <= 0.0;
      counts.a += a;
      counts.b += bb;
      counts.c += c;
      counts.violations += c && !(a && bb);
    }
  });
  Counts total;
  for (const auto& p : partial) {
    total.a += p.a;
    total.b += p.b;
    total.c += p.c;
    total.violations += p.violations;
  }
  FormulationComparison out;
  out.interval_1T = MCEstimate::from_counts(total.a, samples);
  out.level_0T = MCEstimate::from_counts(total.b, samples);
  out.strict_0T = MCEstimate::from_counts(total.c, samples);
  out.ordering_violations = total.violations;
  const double pa = out.interval_1T.p_hat, pb = out.level_0T.p_hat;
  if (pa > 0.0 && pa < 1.0 && pb > 0.0 && pb < 1.0) out.log_ratio = std::log(pa) / std::log(pb);
  return out;
}

std::vector<RefinementLevel> refinement_study(const EnsembleConfig& config, std::uint64_t seed,
                                              std::uint64_t samples, std::size_t levels,
                                              const RunOptions& options) {
  if (levels == 0) throw DomainError("refinement_study needs at least one level");
  std::vector<RefinementLevel> out;
  EnsembleConfig cfg = config;
  for (std::size_t l = 0; l < levels; ++l) {
    out.push_back({cfg.grid_density, estimate_survival(cfg, seed, samples, options)});
    cfg.grid_density *= 2.0;
  }
  return out;
}

}  // namespace pursuit
