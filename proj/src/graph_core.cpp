#include "gbst/graph_core.hpp"

#include "gbst/error.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

namespace gbst {

std::string_view to_string(GraphFamily family) {
  return family == GraphFamily::L1 ? "L1" : "L2";
}

GraphFamily parse_family(std::string_view text) {
  if (text == "L1") return GraphFamily::L1;
  if (text == "L2") return GraphFamily::L2;
  throw Error(ErrorCode::InvalidParameter, "unknown graph family '" + std::string(text) + "'");
}

void GraphParams::validate() const {
  if (!std::isfinite(edge_weight) || edge_weight < 0.0) {
    throw Error(ErrorCode::InvalidParameter,
                "edge weight must be finite and >= 0, got " + std::to_string(edge_weight));
  }
  if (!std::isfinite(vertex_weight) || vertex_weight < 0.0) {
    throw Error(ErrorCode::InvalidParameter,
                "vertex weight must be finite and >= 0, got " + std::to_string(vertex_weight));
  }
}

void check_graph_size(int size) {
  if (size < kMinGraphSize || size > kMaxGraphSize) {
    throw Error(ErrorCode::InvalidDimension,
                "graph size must lie in [" + std::to_string(kMinGraphSize) + ", " +
                    std::to_string(kMaxGraphSize) + "], got " + std::to_string(size));
  }
}

LineGraphLaplacian LineGraphLaplacian::build(const GraphParams& params, int size) {
  check_graph_size(size);
  params.validate();

  const double w = params.edge_weight;
  std::vector<double> diag(static_cast<std::size_t>(size), 2.0 * w);
  diag.front() = w;
  diag.back() = w;
  const std::size_t loop = params.family == GraphFamily::L1 ? 0 : diag.size() - 1;
  diag[loop] += params.vertex_weight;

  std::vector<double> off(static_cast<std::size_t>(size - 1), -w);
  return LineGraphLaplacian(params, std::move(diag), std::move(off));
}

int LineGraphLaplacian::self_loop_vertex() const {
  return params_.family == GraphFamily::L1 ? 0 : size() - 1;
}

LineGraphLaplacian LineGraphLaplacian::normalized() const {
  const double w = params_.edge_weight;
  if (!(w > 0.0)) {
    throw Error(ErrorCode::DegenerateGraph, "cannot normalize a graph with zero edge weight");
  }
  GraphParams unit{1.0, params_.vertex_weight / w, params_.family};
  return build(unit, size());
}

Eigen::MatrixXd LineGraphLaplacian::dense() const {
  const int n = size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = diagonal_[static_cast<std::size_t>(i)];
  for (int i = 0; i + 1 < n; ++i) {
    m(i, i + 1) = off_diagonal_[static_cast<std::size_t>(i)];
    m(i + 1, i) = off_diagonal_[static_cast<std::size_t>(i)];
  }
  return m;
}

void write_matrix_text(std::ostream& out, const Eigen::MatrixXd& m) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << m(r, c);
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace gbst
