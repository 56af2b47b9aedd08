#include "pursuit/sampling.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>

#include "pursuit/errors.hpp"

namespace pursuit {
namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> real_dft_of_symmetric(const std::vector<double>& c) {
  const std::size_t m = c.size();
  std::vector<double> in(c);
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (m / 2 + 1)));
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.data(), out, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::vector<double> eig(m);
  for (std::size_t k = 0; k <= m / 2; ++k) eig[k] = out[k][0];
  for (std::size_t k = m / 2 + 1; k < m; ++k) eig[k] = eig[m - k];
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(out);
  return eig;
}

GridSpec index_grid(std::size_t dim) {
  if (dim >= 2) return GridSpec(0.0, static_cast<double>(dim - 1), dim);
  GridSpec g;
  g.t_end = 0.0;
  g.points = 1;
  return g;
}

}  // namespace

GridSpec::GridSpec(double start, double end, std::size_t n) : t_start(start), t_end(end), points(n) {
  if (n < 2) throw DomainError("GridSpec: need at least two points");
  if (!(end > start) || !std::isfinite(start) || !std::isfinite(end))
    throw DomainError("GridSpec: t_end must exceed t_start");
}

double GridSpec::time(std::size_t k) const noexcept {
  if (k + 1 == points) return t_end;
  return t_start + spacing() * static_cast<double>(k);
}

std::vector<double> circulant_spectrum(std::span<const double> correlations) {
  if (correlations.size() < 2) throw DomainError("circulant_spectrum: need r(0) and r(1) at least");
  const std::size_t m = correlations.size() - 1;
  std::vector<double> c(2 * m);
  for (std::size_t j = 0; j <= m; ++j) c[j] = correlations[j];
  for (std::size_t j = m + 1; j < 2 * m; ++j) c[j] = correlations[2 * m - j];
  auto eig = real_dft_of_symmetric(c);
  const double top = *std::max_element(eig.begin(), eig.end());
  const double lowest = *std::min_element(eig.begin(), eig.end());
  if (lowest < -kEigenvalueClip * std::max(top, 0.0)) throw NegativeEigenvalue(lowest, 2 * m);
  for (double& v : eig) v = std::max(v, 0.0);
  return eig;
}

struct SequenceSampler::Workspace::Impl {
  std::size_t embedding = 0;
  fftw_complex* spectrum = nullptr;
  double* signal = nullptr;
  fftw_plan plan = nullptr;
  std::vector<double> normals;

  explicit Impl(std::size_t m) : embedding(m) {
    if (m == 0) return;
    spectrum = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (m / 2 + 1)));
    signal = static_cast<double*>(fftw_malloc(sizeof(double) * m));
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(m), spectrum, signal, FFTW_ESTIMATE);
  }
  ~Impl() {
    if (plan) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
    fftw_free(spectrum);
    fftw_free(signal);
  }
};

SequenceSampler::Workspace::Workspace(std::size_t embedding) : impl_(std::make_unique<Impl>(embedding)) {}
SequenceSampler::Workspace::~Workspace() = default;
SequenceSampler::Workspace::Workspace(Workspace&&) noexcept = default;
SequenceSampler::Workspace& SequenceSampler::Workspace::operator=(Workspace&&) noexcept = default;

SequenceSampler::SequenceSampler(const Autocovariance& acov, std::size_t length) : length_(length) {
  if (length == 0) throw DomainError("SequenceSampler: length must be positive");
  std::size_t m = next_pow2(std::max<std::size_t>(2 * (length - 1), 2));
  double last_min = 0.0;
  for (int attempt = 0; attempt <= kMaxEmbeddingDoublings; ++attempt, m *= 2) {
    std::vector<double> r(m / 2 + 1);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = acov(k);
    try {
      const auto eig = circulant_spectrum(r);
      embedding_ = m;
      scale_.resize(m / 2 + 1);
      const double md = static_cast<double>(m);
      scale_[0] = std::sqrt(eig[0] / md);
      scale_[m / 2] = std::sqrt(eig[m / 2] / md);
      for (std::size_t k = 1; k < m / 2; ++k) scale_[k] = std::sqrt(eig[k] / (2.0 * md));
      return;
    } catch (const NegativeEigenvalue& e) {
      last_min = e.min_value();
    }
  }
  if (length > kCholeskyMaxDimension) throw NegativeEigenvalue(last_min, m / 2);
  Eigen::MatrixXd cov(length, length);
  for (std::size_t i = 0; i < length; ++i)
    for (std::size_t j = 0; j < length; ++j) cov(i, j) = acov(i > j ? i - j : j - i);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("SequenceSampler: Toeplitz covariance is not positive definite");
  embedding_ = 0;
  factor_ = llt.matrixL();
}

void SequenceSampler::draw(Engine& engine, std::span<double> out, Workspace& ws) const {
  std::normal_distribution<double> normal;
  if (embedding_ == 0) {
    Eigen::VectorXd z(static_cast<Eigen::Index>(length_));
    for (auto& v : z) v = normal(engine);
    const Eigen::VectorXd x = factor_.triangularView<Eigen::Lower>() * z;
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  auto& w = *ws.impl_;
  if (w.embedding != embedding_) throw DomainError("SequenceSampler: workspace size mismatch");
  const std::size_t half = embedding_ / 2;
  w.spectrum[0][0] = scale_[0] * normal(engine);
  w.spectrum[0][1] = 0.0;
  for (std::size_t k = 1; k < half; ++k) {
    w.spectrum[k][0] = scale_[k] * normal(engine);
    w.spectrum[k][1] = scale_[k] * normal(engine);
  }
  w.spectrum[half][0] = scale_[half] * normal(engine);
  w.spectrum[half][1] = 0.0;
  fftw_execute_dft_c2r(w.plan, w.spectrum, w.signal);
  std::copy_n(w.signal, length_, out.begin());
}

PathGenerator::PathGenerator(const KernelSpec& kernel, const GridSpec& grid)
    : kernel_(kernel),
      grid_(grid),
      sequence_(
          [&]() -> SequenceSampler::Autocovariance {
            const double dt = grid.spacing();
            if (kernel.family() == KernelFamily::Fbm) {
              if (grid.t_start != 0.0) throw DomainError("sample_fbm: grid must start at 0");
              const double h2 = 2.0 * kernel.hurst();
              const double scale = std::pow(dt, h2);
              // Fractional Gaussian noise autocovariance at spacing dt.
              return [h2, scale](std::size_t lag) {
                const double k = static_cast<double>(lag);
                return 0.5 * scale *
                       (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(std::abs(k - 1.0), h2));
              };
            }
            return [kernel, dt](std::size_t lag) { return kernel.correlation(dt * static_cast<double>(lag)); };
          }(),
          kernel.family() == KernelFamily::Fbm ? grid.points - 1 : grid.points) {}

void PathGenerator::generate(Engine& engine, std::span<double> out, Workspace& ws) const {
  if (kernel_.family() != KernelFamily::Fbm) {
    sequence_.draw(engine, out, ws);
    return;
  }
  out[0] = 0.0;
  sequence_.draw(engine, out.subspan(1), ws);
  for (std::size_t k = 1; k < grid_.points; ++k) out[k] += out[k - 1];
}

PathBatch sample_stationary(const KernelSpec& kernel, const GridSpec& grid, std::uint64_t seed,
                            std::size_t batch, std::uint64_t first_row, std::uint64_t stream) {
  if (!kernel.stationary()) throw DomainError("sample_stationary: kernel must be stationary");
  PathBatch out{grid, kernel, seed, stream, first_row, batch, {}};
  out.values.resize(batch * grid.points);
  if (batch == 0) return out;
  const PathGenerator gen(kernel, grid);
  auto ws = gen.make_workspace();
  for (std::size_t i = 0; i < batch; ++i) {
    auto engine = make_engine(seed, stream, first_row + i);
    gen.generate(engine, out.row(i), ws);
  }
  return out;
}

PathBatch sample_fbm(double hurst, const GridSpec& grid, std::uint64_t seed, std::size_t batch,
                     std::uint64_t first_row, std::uint64_t stream) {
  const auto kernel = KernelSpec::fbm(hurst);
  if (grid.t_start != 0.0) throw DomainError("sample_fbm: grid must start at 0");
  PathBatch out{grid, kernel, seed, stream, first_row, batch, {}};
  out.values.resize(batch * grid.points);
  if (batch == 0) return out;
  const PathGenerator gen(kernel, grid);
  auto ws = gen.make_workspace();
  for (std::size_t i = 0; i < batch; ++i) {
    auto engine = make_engine(seed, stream, first_row + i);
    gen.generate(engine, out.row(i), ws);
  }
  return out;
}

PathBatch cholesky_sample(const Eigen::MatrixXd& covariance, std::uint64_t seed, std::size_t batch,
                          std::uint64_t first_row, std::uint64_t stream) {
  const auto dim = static_cast<std::size_t>(covariance.rows());
  if (dim == 0 || covariance.cols() != covariance.rows())
    throw DomainError("cholesky_sample: covariance must be square and non-empty");
  if (dim > kCholeskyMaxDimension) throw DomainError("cholesky_sample: dimension above cap");
  if (!covariance.isApprox(covariance.transpose(), 1e-12))
    throw DomainError("cholesky_sample: covariance must be symmetric");

  Eigen::MatrixXd factor;
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() == Eigen::Success) {
    factor = llt.matrixL();
  } else {
    const double scale = covariance.diagonal().cwiseAbs().maxCoeff();
    bool ok = false;
    for (double jitter = 1e-12; jitter <= 1e-6 && !ok; jitter *= 10.0) {
      Eigen::MatrixXd shifted = covariance;
      shifted.diagonal().array() += jitter * scale;
      llt.compute(shifted);
      if (llt.info() == Eigen::Success) {
        factor = llt.matrixL();
        ok = true;
      }
    }
    if (!ok) throw NotPositiveDefinite("cholesky_sample: factorization failed after jitter");
  }

  PathBatch out{index_grid(dim), std::nullopt, seed, stream, first_row, batch, {}};
  out.values.resize(batch * dim);
  Eigen::VectorXd z(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < batch; ++i) {
    auto engine = make_engine(seed, stream, first_row + i);
    std::normal_distribution<double> normal;
    for (auto& v : z) v = normal(engine);
    const Eigen::VectorXd x = factor.triangularView<Eigen::Lower>() * z;
    std::copy(x.begin(), x.end(), out.row(i).begin());
  }
  return out;
}

void write_path_dump(const PathBatch& batch, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[64];
  out << "# pursuit-paths v1\n";
  out << "# kernel: " << (batch.kernel ? batch.kernel->tag() : std::string("covariance")) << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", batch.kernel ? batch.kernel->hurst() : 0.0);
  out << "# hurst: " << buf << '\n';
  out << "# grid:";
  for (double v : {batch.grid.t_start, batch.grid.t_end}) {
    std::snprintf(buf, sizeof buf, " %.17g", v);
    out << buf;
  }
  out << ' ' << batch.grid.points << '\n';
  out << "# seed: " << batch.seed << '\n';
  out << "# stream: " << batch.stream << '\n';
  out << "# first_row: " << batch.first_row << '\n';
  out << "# rows: " << batch.rows << '\n';
  for (std::size_t i = 0; i < batch.rows; ++i) {
    const auto row = batch.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", row[k]);
      if (k) out << ' ';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

PathBatch read_path_dump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "# pursuit-paths v1")
    throw IoError(path.string() + ": not a pursuit-paths v1 file");
  PathBatch out;
  std::string kernel_tag;
  double hurst = 0.0;
  auto field = [&](const std::string& key) -> std::string {
    if (!std::getline(in, line) || line.rfind("# " + key + ": ", 0) != 0)
      throw IoError(path.string() + ": missing header field " + key);
    return line.substr(key.size() + 4);
  };
  kernel_tag = field("kernel");
  hurst = std::stod(field("hurst"));
  {
    std::istringstream g(field("grid"));
    g >> out.grid.t_start >> out.grid.t_end >> out.grid.points;
    if (!g) throw IoError(path.string() + ": malformed grid header");
  }
  out.seed = std::stoull(field("seed"));
  out.stream = std::stoull(field("stream"));
  out.first_row = std::stoull(field("first_row"));
  out.rows = std::stoull(field("rows"));
  if (kernel_tag.rfind("fbm(", 0) == 0) out.kernel = KernelSpec::fbm(hurst);
  else if (kernel_tag.rfind("lamperti(", 0) == 0) out.kernel = KernelSpec::lamperti(hurst);
  out.values.reserve(out.rows * out.grid.points);
  double v;
  while (in >> v) out.values.push_back(v);
  if (out.values.size() != out.rows * out.grid.points)
    throw IoError(path.string() + ": value count does not match header");
  return out;
}

}  // namespace pursuit
