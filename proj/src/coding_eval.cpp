#include "gbst/coding_eval.hpp"

#include "gbst/error.hpp"
#include "gbst/parallel.hpp"
#include "gbst/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace gbst {

namespace {

// Solves C^T x = g in place where L = C C^T and C = unit-lower * sqrt(D).
void solve_cholesky_transpose(const TridiagonalFactor& f, Eigen::Ref<Eigen::VectorXd> x) {
  const std::size_t n = f.pivots.size();
  for (std::size_t i = 0; i < n; ++i) x[i] /= std::sqrt(f.pivots[i]);
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= f.multipliers[i] * x[i + 1];
}

Eigen::VectorXd draw_vector(const TridiagonalFactor& f, std::uint64_t seed, std::size_t index) {
  const int n = static_cast<int>(f.pivots.size());
  const CounterRng rng = CounterRng::stream(seed, index);
  Eigen::VectorXd x(n);
  for (int j = 0; j < n; ++j) x[j] = rng.normal(static_cast<std::uint64_t>(j));
  solve_cholesky_transpose(f, x);
  return x;
}

}  // namespace

std::vector<Eigen::VectorXd> sample_gmrf(const GMRFModel& model, std::size_t count,
                                         std::size_t first_index) {
  if (count < 1) throw Error(ErrorCode::InvalidParameter, "sample count must be >= 1");
  const auto factor = TridiagonalFactor::compute(model.precision);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(draw_vector(factor, model.seed, first_index + i));
  return out;
}

SampleCovariance gmrf_sample_covariance(const GMRFModel& model, std::size_t count, int threads) {
  if (count < 1) throw Error(ErrorCode::InvalidParameter, "sample count must be >= 1");
  const auto factor = TridiagonalFactor::compute(model.precision);
  const int n = model.precision.size();
  std::vector<CovarianceAccumulator> parts(chunk_count(count), CovarianceAccumulator(n));
  for_each_chunk(count, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) parts[c].add(draw_vector(factor, model.seed, i));
  });
  CovarianceAccumulator total(n);
  for (const auto& p : parts) total.merge(p);
  return total.finish();
}

ResidualDataset synthesize_dataset(const LineGraphLaplacian& row_precision,
                                   const LineGraphLaplacian& col_precision, std::uint64_t seed,
                                   std::size_t count, double scale) {
  const int n = row_precision.size();
  if (col_precision.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "row and column graphs differ in size");
  }
  const auto row_f = TridiagonalFactor::compute(row_precision);
  const auto col_f = TridiagonalFactor::compute(col_precision);

  ResidualDataset ds;
  ds.block_size = n;
  ds.samples.reserve(count * static_cast<std::size_t>(n) * n);
  for (std::size_t m = 0; m < count; ++m) {
    const CounterRng rng = CounterRng::stream(seed, m);
    Block x(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) x(r, c) = rng.normal(static_cast<std::uint64_t>(r * n + c));
    }
    for (int c = 0; c < n; ++c) solve_cholesky_transpose(col_f, x.col(c));
    Eigen::MatrixXd xt = x.transpose();
    for (int r = 0; r < n; ++r) solve_cholesky_transpose(row_f, xt.col(r));
    ds.append(scale * xt.transpose());
  }
  return ds;
}

namespace {

Eigen::VectorXd coefficient_variances(const TransformMatrix& t, const SampleCovariance& s) {
  if (t.size() != s.size()) {
    throw Error(ErrorCode::DimensionMismatch, "transform and covariance sizes differ");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(s.matrix()).info() != Eigen::Success) {
    throw Error(ErrorCode::NonPositiveDefinite, "covariance is not positive definite");
  }
  return (t.basis.transpose() * s.matrix() * t.basis).diagonal();
}

double gain_from_variances(const Eigen::VectorXd& d, double trace) {
  const double n = static_cast<double>(d.size());
  double log_geo = 0.0;
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    if (!(d[k] > 0.0)) {
      throw Error(ErrorCode::NonPositiveDefinite, "coefficient variance is not positive");
    }
    log_geo += std::log(d[k]);
  }
  log_geo /= n;
  return 10.0 * (std::log10(trace / n) - log_geo / std::numbers::ln10);
}

}  // namespace

double transform_coding_gain(const TransformMatrix& transform, const SampleCovariance& covariance) {
  return gain_from_variances(coefficient_variances(transform, covariance), covariance.trace());
}

CodingMetrics coding_metrics(const TransformMatrix& transform, const SampleCovariance& covariance,
                             const MetricOptions& options) {
  const Eigen::VectorXd d = coefficient_variances(transform, covariance);
  const int n = static_cast<int>(d.size());
  const int k = options.compaction_count > 0 ? std::min(options.compaction_count, n)
                                             : std::max(1, n / 4);
  if (!(options.quantizer_step > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "quantizer step must be positive");
  }

  CodingMetrics m;
  m.coding_gain_db = gain_from_variances(d, covariance.trace());
  m.energy_compaction = std::clamp(d.head(k).sum() / d.sum(), 0.0, 1.0);
  const double step2 = options.quantizer_step * options.quantizer_step;
  double h = 0.0;
  for (int i = 0; i < n; ++i) {
    h += std::max(0.0, 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e * d[i] / step2));
  }
  m.entropy_proxy_bits = h / n;
  return m;
}

std::vector<SweepRow> alpha_sweep(const SampleCovariance& covariance, GraphFamily family,
                                  std::span<const double> alphas, const MetricOptions& options) {
  if (alphas.empty()) throw Error(ErrorCode::InvalidParameter, "alpha list is empty");
  std::vector<SweepRow> rows;
  rows.reserve(alphas.size());
  for (double alpha : alphas) {
    if (!(alpha >= 0.0) || round_to_alpha_grid(alpha) != alpha) {
      throw Error(ErrorCode::InvalidParameter,
                  "alpha " + format_double(alpha) + " is not a nonnegative multiple of 0.25");
    }
    const auto gbt = derive_gbt(LineGraphLaplacian::build({1.0, alpha, family}, covariance.size()));
    rows.push_back({alpha, coding_metrics(gbt, covariance, options)});
  }
  return rows;
}

std::vector<double> parse_alpha_range(std::string_view text) {
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::InvalidParameter,
                 "bad alpha range '" + std::string(text) + "': " + why);
  };
  double parts[3];
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t colon = i < 2 ? text.find(':', pos) : text.size();
    if (colon == std::string_view::npos) throw fail("expected start:step:end");
    const std::string_view piece = text.substr(pos, colon - pos);
    const auto res = std::from_chars(piece.data(), piece.data() + piece.size(), parts[i]);
    if (res.ec != std::errc() || res.ptr != piece.data() + piece.size()) {
      throw fail("cannot parse '" + std::string(piece) + "'");
    }
    pos = colon + 1;
  }
  const auto [start, step, end] = parts;
  if (!(step > 0.0) || round_to_alpha_grid(step) != step) {
    throw fail("step must be a positive multiple of 0.25");
  }
  if (!(start >= 0.0) || round_to_alpha_grid(start) != start) {
    throw fail("start must be a nonnegative multiple of 0.25");
  }
  if (end < start) throw fail("end is below start");
  std::vector<double> out;
  for (int k = 0; start + k * step <= end + 1e-12; ++k) out.push_back(start + k * step);
  return out;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "alpha,coding_gain_db,energy_compaction,entropy_bits\n";
  for (const auto& r : rows) {
    out << format_double(r.alpha) << ',' << format_double(r.metrics.coding_gain_db) << ','
        << format_double(r.metrics.energy_compaction) << ','
        << format_double(r.metrics.entropy_proxy_bits) << '\n';
  }
}

IntTransformMatrix integerize(const TransformMatrix& transform) {
  const int n = transform.size();
  const double scale = 64.0 * std::sqrt(static_cast<double>(n));
  IntTransformMatrix out{n, Eigen::MatrixXi(n, n), 6.0 + 0.5 * std::log2(static_cast<double>(n))};
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const double v = std::round(scale * transform.basis(i, k));
      if (!(std::abs(v) <= kIntMatrixLimit)) {
        throw Error(ErrorCode::Overflow, "entry (" + std::to_string(k) + ", " + std::to_string(i) +
                                             ") = " + format_double(v) + " exceeds 8-bit range");
      }
      out.entries(k, i) = static_cast<int>(v);
    }
  }
  return out;
}

void write_int_matrix(std::ostream& out, const IntTransformMatrix& matrix) {
  out << "INTGBT N=" << matrix.size << " shift=" << format_double(matrix.scale_shift) << '\n';
  for (int k = 0; k < matrix.size; ++k) {
    for (int i = 0; i < matrix.size; ++i) {
      if (i) out << ' ';
      out << matrix.entries(k, i);
    }
    out << '\n';
  }
}

RdPoint quantize_roundtrip_distortion(std::span<const Block> blocks,
                                      const TransformMatrix& row_transform,
                                      const TransformMatrix& col_transform, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidParameter, "quantizer step must be positive");
  if (blocks.empty()) return {};

  std::vector<std::int64_t> indices;
  indices.reserve(blocks.size() * static_cast<std::size_t>(blocks.front().size()));
  double squared_error = 0.0;
  for (const Block& b : blocks) {
    const Block coeff = apply_separable(b, row_transform, col_transform);
    Block q(coeff.rows(), coeff.cols());
    for (Eigen::Index i = 0; i < coeff.size(); ++i) {
      const double idx = std::round(coeff.data()[i] / step);
      indices.push_back(static_cast<std::int64_t>(idx));
      q.data()[i] = idx * step;
    }
    squared_error += (inverse_separable(q, row_transform, col_transform) - b).squaredNorm();
  }

  RdPoint p;
  const double total = static_cast<double>(indices.size());
  p.mse = squared_error / total;
  std::sort(indices.begin(), indices.end());
  double h = 0.0;
  for (std::size_t i = 0; i < indices.size();) {
    std::size_t j = i;
    while (j < indices.size() && indices[j] == indices[i]) ++j;
    const double prob = static_cast<double>(j - i) / total;
    h -= prob * std::log2(prob);
    i = j;
  }
  p.entropy_bits = h;
  return p;
}

RdPoint mse_at_entropy(std::span<const Block> blocks, const TransformMatrix& row_transform,
                       const TransformMatrix& col_transform, double target_bits) {
  if (blocks.empty()) throw Error(ErrorCode::EmptyDataset, "no blocks to evaluate");
  double energy = 0.0;
  double samples = 0.0;
  for (const Block& b : blocks) {
    energy += b.squaredNorm();
    samples += static_cast<double>(b.size());
  }
  const double rms = std::sqrt(energy / samples);
  if (!(rms > 0.0)) throw Error(ErrorCode::DegenerateInput, "blocks carry no energy");

  double lo = std::log(rms * 1e-4);  // fine step, high rate
  double hi = std::log(rms * 1e3);   // coarse step, rate near zero
  RdPoint fine = quantize_roundtrip_distortion(blocks, row_transform, col_transform, std::exp(lo));
  RdPoint coarse = quantize_roundtrip_distortion(blocks, row_transform, col_transform, std::exp(hi));
  if (target_bits > fine.entropy_bits || target_bits < coarse.entropy_bits) {
    throw Error(ErrorCode::InvalidParameter,
                "target entropy " + format_double(target_bits) + " is outside the reachable range");
  }
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    const RdPoint p = quantize_roundtrip_distortion(blocks, row_transform, col_transform, std::exp(mid));
    if (p.entropy_bits >= target_bits) {
      lo = mid;
      fine = p;
    } else {
      hi = mid;
      coarse = p;
    }
  }
  // Interpolate log-MSE linearly in rate between the bracketing points.
  const double span = fine.entropy_bits - coarse.entropy_bits;
  if (span <= 0.0) return {fine.mse, target_bits};
  const double t = (fine.entropy_bits - target_bits) / span;
  const double log_mse = (1.0 - t) * std::log(fine.mse) + t * std::log(coarse.mse);
  return {std::exp(log_mse), target_bits};
}

}  // namespace gbst
