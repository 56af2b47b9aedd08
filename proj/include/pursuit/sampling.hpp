#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pursuit/kernels.hpp"
#include "pursuit/rng.hpp"

namespace pursuit {

/// Closed uniform grid t_k = t_start + k * spacing, k = 0 .. points-1.
struct GridSpec {
  double t_start = 0.0;
  double t_end = 1.0;
  std::size_t points = 2;

  GridSpec() = default;
  GridSpec(double start, double end, std::size_t n);

  double spacing() const noexcept { return (t_end - t_start) / static_cast<double>(points - 1); }
  double time(std::size_t k) const noexcept;
  bool operator==(const GridSpec&) const = default;
};

/// Row-major batch of sampled paths. Row i was drawn from substream
/// (seed, stream, first_row + i).
struct PathBatch {
  GridSpec grid;
  std::optional<KernelSpec> kernel;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t first_row = 0;
  std::size_t rows = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * grid.points, grid.points};
  }
  std::span<double> row(std::size_t i) { return {values.data() + i * grid.points, grid.points}; }
};

inline constexpr double kEigenvalueClip = 1e-10;
inline constexpr int kMaxEmbeddingDoublings = 3;
inline constexpr std::size_t kCholeskyMaxDimension = 2048;

/// Eigenvalues of the circulant of length 2m built from r(0..m). Values in
/// [-kEigenvalueClip * max, 0) are clipped to zero; anything more negative
/// raises NegativeEigenvalue.
std::vector<double> circulant_spectrum(std::span<const double> correlations);

/// Sampler for a stationary Gaussian sequence of fixed length. Uses circulant
/// embedding (length: smallest power of two >= 2(length-1), doubled up to
/// three times) and falls back to a Cholesky factor of the Toeplitz matrix
/// when every embedding fails and the length is at most kCholeskyMaxDimension.
class SequenceSampler {
 public:
  using Autocovariance = std::function<double(std::size_t lag)>;

  SequenceSampler(const Autocovariance& acov, std::size_t length);

  /// Scratch buffers (and the FFT plan) for one worker thread.
  class Workspace {
   public:
    explicit Workspace(std::size_t embedding);
    ~Workspace();
    Workspace(Workspace&&) noexcept;
    Workspace& operator=(Workspace&&) noexcept;
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

   private:
    friend class SequenceSampler;
    struct Impl;
    std::unique_ptr<Impl> impl_;
  };

  Workspace make_workspace() const { return Workspace(embedding_); }
  void draw(Engine& engine, std::span<double> out, Workspace& ws) const;

  std::size_t length() const noexcept { return length_; }
  /// Circulant length, or 0 when the Cholesky route is used.
  std::size_t embedding() const noexcept { return embedding_; }
  bool uses_cholesky() const noexcept { return embedding_ == 0; }

 private:
  std::size_t length_;
  std::size_t embedding_ = 0;
  std::vector<double> scale_;  // per-frequency standard deviations, size M/2 + 1
  Eigen::MatrixXd factor_;     // Cholesky route
};

/// Generates whole paths of one kernel on one grid. Stationary kernels are
/// sampled directly; FBM paths are the cumulative sum of fractional Gaussian
/// noise on the grid spacing, with the first value exactly 0.
class PathGenerator {
 public:
  PathGenerator(const KernelSpec& kernel, const GridSpec& grid);

  using Workspace = SequenceSampler::Workspace;
  Workspace make_workspace() const { return sequence_.make_workspace(); }
  void generate(Engine& engine, std::span<double> out, Workspace& ws) const;

  const KernelSpec& kernel() const noexcept { return kernel_; }
  const GridSpec& grid() const noexcept { return grid_; }
  const SequenceSampler& sequence() const noexcept { return sequence_; }

 private:
  KernelSpec kernel_;
  GridSpec grid_;
  SequenceSampler sequence_;
};

PathBatch sample_stationary(const KernelSpec& kernel, const GridSpec& grid, std::uint64_t seed,
                            std::size_t batch, std::uint64_t first_row = 0,
                            std::uint64_t stream = 0);

/// Grid must start at 0.
PathBatch sample_fbm(double hurst, const GridSpec& grid, std::uint64_t seed, std::size_t batch,
                     std::uint64_t first_row = 0, std::uint64_t stream = 0);

/// Exact draws with the given covariance through a lower-triangular factor.
/// Jitter (relative 1e-12, growing tenfold up to 1e-6) is added when the plain
/// factorization fails; NotPositiveDefinite after that. The grid of the
/// returned batch is the index grid 0 .. dim-1.
PathBatch cholesky_sample(const Eigen::MatrixXd& covariance, std::uint64_t seed,
                          std::size_t batch, std::uint64_t first_row = 0,
                          std::uint64_t stream = 0);

/// Text dump: a "# pursuit-paths v1" header block followed by one row per
/// line, values printed with 17 significant digits.
void write_path_dump(const PathBatch& batch, const std::filesystem::path& path);
PathBatch read_path_dump(const std::filesystem::path& path);

}  // namespace pursuit
