#include "gbst/trig_oracle.hpp"

#include "gbst/error.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace gbst {

std::string_view to_string(TrigKind kind) {
  switch (kind) {
    case TrigKind::DCT2: return "DCT2";
    case TrigKind::DCT4: return "DCT4";
    case TrigKind::DCT8: return "DCT8";
    case TrigKind::DST4: return "DST4";
    case TrigKind::DST7: return "DST7";
  }
  return "?";
}

TrigKind parse_trig_kind(std::string_view text) {
  for (TrigKind k : kAllTrigKinds) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::InvalidParameter, "unknown transform kind '" + std::string(text) + "'");
}

namespace {

constexpr double pi = std::numbers::pi;

double entry(TrigKind kind, int size, int k, int n) {
  const double N = size;
  switch (kind) {
    case TrigKind::DCT2: {
      const double ck = k == 0 ? std::numbers::sqrt2 / 2.0 : 1.0;
      return ck * std::sqrt(2.0 / N) * std::cos(pi * k * (2.0 * n + 1.0) / (2.0 * N));
    }
    case TrigKind::DCT4:
      return std::sqrt(2.0 / N) * std::cos(pi * (2.0 * k + 1.0) * (2.0 * n + 1.0) / (4.0 * N));
    case TrigKind::DST4:
      return std::sqrt(2.0 / N) * std::sin(pi * (2.0 * k + 1.0) * (2.0 * n + 1.0) / (4.0 * N));
    case TrigKind::DST7:
      return 2.0 / std::sqrt(2.0 * N + 1.0) *
             std::sin(pi * (2.0 * k + 1.0) * (n + 1.0) / (2.0 * N + 1.0));
    case TrigKind::DCT8:
      return 2.0 / std::sqrt(2.0 * N + 1.0) *
             std::cos(pi * (2.0 * k + 1.0) * (2.0 * n + 1.0) / (2.0 * (2.0 * N + 1.0)));
  }
  return 0.0;
}

// Spectrum of the unit-weight GGL, 2 - 2 cos(theta_k).
double eigenvalue(TrigKind kind, int size, int k) {
  const double N = size;
  double theta = 0.0;
  switch (kind) {
    case TrigKind::DCT2: theta = pi * k / N; break;
    case TrigKind::DCT4:
    case TrigKind::DST4: theta = pi * (2.0 * k + 1.0) / (2.0 * N); break;
    case TrigKind::DST7:
    case TrigKind::DCT8: theta = pi * (2.0 * k + 1.0) / (2.0 * N + 1.0); break;
  }
  return 2.0 - 2.0 * std::cos(theta);
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace

TransformMatrix trig_matrix(TrigKind kind, int size) {
  check_graph_size(size);
  TransformMatrix t{Eigen::MatrixXd(size, size), Eigen::VectorXd(size)};
  for (int k = 0; k < size; ++k) {
    for (int n = 0; n < size; ++n) t.basis(n, k) = entry(kind, size, k, n);
    t.eigenvalues[k] = eigenvalue(kind, size, k);
  }
  canonicalize_signs(t.basis);
  return t;
}

GraphParams correspondence_params(TrigKind kind) {
  switch (kind) {
    case TrigKind::DCT2: return {1.0, 0.0, GraphFamily::L1};
    case TrigKind::DST7: return {1.0, 1.0, GraphFamily::L1};
    case TrigKind::DCT8: return {1.0, 1.0, GraphFamily::L2};
    case TrigKind::DST4: return {1.0, 2.0, GraphFamily::L1};
    case TrigKind::DCT4: return {1.0, 2.0, GraphFamily::L2};
  }
  return {};
}

double oracle_check(TrigKind kind, const GraphParams& params, int size) {
  params.validate();
  const double w = params.edge_weight;
  const double v = params.vertex_weight;
  bool matches = w > 0.0;
  if (matches) {
    switch (kind) {
      case TrigKind::DCT2: matches = v == 0.0; break;
      case TrigKind::DST7: matches = params.family == GraphFamily::L1 && close(v, w); break;
      case TrigKind::DCT8: matches = params.family == GraphFamily::L2 && close(v, w); break;
      case TrigKind::DST4: matches = params.family == GraphFamily::L1 && close(v, 2.0 * w); break;
      case TrigKind::DCT4: matches = params.family == GraphFamily::L2 && close(v, 2.0 * w); break;
    }
  }
  if (!matches) {
    throw Error(ErrorCode::NotACorrespondence,
                "family=" + std::string(to_string(params.family)) + " w=" + format_double(w) +
                    " v=" + format_double(v) + " does not define " + std::string(to_string(kind)));
  }
  const TransformMatrix trig = trig_matrix(kind, size);
  const TransformMatrix gbt = derive_gbt(LineGraphLaplacian::build(params, size));
  return (trig.basis - gbt.basis).cwiseAbs().maxCoeff();
}

std::vector<CorrespondenceResult> run_correspondence_suite(const std::vector<TrigKind>& kinds,
                                                           const std::vector<int>& sizes,
                                                           const TrigGenerator& generator) {
  std::vector<CorrespondenceResult> results;
  for (TrigKind kind : kinds) {
    for (int size : sizes) {
      const GraphParams params = correspondence_params(kind);
      const TransformMatrix trig = generator(kind, size);
      const TransformMatrix gbt = derive_gbt(LineGraphLaplacian::build(params, size));
      double deviation = std::numeric_limits<double>::infinity();
      if (trig.basis.rows() == gbt.basis.rows() && trig.basis.cols() == gbt.basis.cols()) {
        deviation = (trig.basis - gbt.basis).cwiseAbs().maxCoeff();
      }
      results.push_back({kind, size, params, deviation, deviation <= kCorrespondenceTolerance});
    }
  }
  return results;
}

void write_trig_dump(std::ostream& out, TrigKind kind, const TransformMatrix& transform) {
  out << "TRIG kind=" << to_string(kind) << " N=" << transform.size() << '\n';
  write_basis_rows(out, transform);
}

}  // namespace gbst
