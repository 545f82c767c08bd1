#pragma once

#include "gbst/dataset.hpp"
#include "gbst/estimation.hpp"
#include "gbst/graph_core.hpp"
#include "gbst/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace gbst {

/// Zero-mean Gaussian with precision matrix `precision` (must be PD).
struct GMRFModel {
  LineGraphLaplacian precision;
  std::uint64_t seed = 0;
};

/// Draws vectors first_index .. first_index + count - 1. Vector i uses
/// CounterRng::stream(seed, i): g = its first N normals, then x solves
/// C^T x = g with L = C C^T (Cholesky), so x ~ N(0, L^-1).
std::vector<Eigen::VectorXd> sample_gmrf(const GMRFModel& model, std::size_t count,
                                         std::size_t first_index = 0);

/// Second-moment matrix of `count` draws, computed without storing them.
/// Identical for any thread count.
SampleCovariance gmrf_sample_covariance(const GMRFModel& model, std::size_t count,
                                        int threads = 1);

/// Blocks whose rows follow `row_precision` and columns `col_precision`
/// (X = C_col^-T G C_row^-1 with G i.i.d. normal from stream(seed, block)),
/// multiplied by `scale` and rounded to 16-bit samples.
ResidualDataset synthesize_dataset(const LineGraphLaplacian& row_precision,
                                   const LineGraphLaplacian& col_precision, std::uint64_t seed,
                                   std::size_t count, double scale);

/// 10 log10 of the arithmetic-over-geometric mean of the coefficient
/// variances diag(U^T S U). Throws NonPositiveDefinite unless S is PD.
double transform_coding_gain(const TransformMatrix& transform, const SampleCovariance& covariance);

struct CodingMetrics {
  double coding_gain_db = 0.0;
  double energy_compaction = 0.0;   // share of energy in the lowest K coefficients
  double entropy_proxy_bits = 0.0;  // mean high-rate Gaussian entropy per coefficient
};

struct MetricOptions {
  int compaction_count = 0;        // K; 0 means N / 4 (at least 1)
  double quantizer_step = 1.0;     // step used by the entropy proxy
};

/// Entropy proxy per coefficient: max(0, 0.5 log2(2 pi e d_k / step^2)), averaged.
CodingMetrics coding_metrics(const TransformMatrix& transform, const SampleCovariance& covariance,
                             const MetricOptions& options = {});

struct SweepRow {
  double alpha = 0.0;
  CodingMetrics metrics;
};

/// Evaluates the GBT of the normalized graph (w = 1, v = alpha) for every
/// alpha against `covariance`. Alphas must be nonnegative multiples of 0.25.
std::vector<SweepRow> alpha_sweep(const SampleCovariance& covariance, GraphFamily family,
                                  std::span<const double> alphas,
                                  const MetricOptions& options = {});

// "start:step:end", inclusive; step must be a positive multiple of 0.25.
std::vector<double> parse_alpha_range(std::string_view text);

// Header "alpha,coding_gain_db,energy_compaction,entropy_bits".
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

inline constexpr int kIntMatrixLimit = 127;

/// Row k holds basis vector k scaled by 64 sqrt(N) and rounded.
struct IntTransformMatrix {
  int size = 0;
  Eigen::MatrixXi entries;
  double scale_shift = 0.0;  // log2(64 sqrt(N)) = 6 + log2(N) / 2
};

// Throws Overflow if any rounded entry exceeds kIntMatrixLimit in magnitude.
IntTransformMatrix integerize(const TransformMatrix& transform);

// Header "INTGBT N=<N> shift=<scale_shift>" then N rows of integers.
void write_int_matrix(std::ostream& out, const IntTransformMatrix& matrix);

struct RdPoint {
  double mse = 0.0;
  double entropy_bits = 0.0;  // first-order entropy of quantization indices, per sample
};

/// Forward separable transform, uniform rounding quantizer (half away from
/// zero, no dead zone), inverse transform.
RdPoint quantize_roundtrip_distortion(std::span<const Block> blocks,
                                      const TransformMatrix& row_transform,
                                      const TransformMatrix& col_transform, double step);

/// MSE at the quantizer step whose entropy matches `target_bits`, found by
/// bisection on log(step).
RdPoint mse_at_entropy(std::span<const Block> blocks, const TransformMatrix& row_transform,
                       const TransformMatrix& col_transform, double target_bits);

}  // namespace gbst
