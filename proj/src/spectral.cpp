#include "gbst/spectral.hpp"

#include "gbst/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <vector>

namespace gbst {

TransformMatrix TransformMatrix::identity(int size) {
  return {Eigen::MatrixXd::Identity(size, size), Eigen::VectorXd::Zero(size)};
}

void canonicalize_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    for (Eigen::Index n = 0; n < basis.rows(); ++n) {
      const double x = basis(n, k);
      if (std::abs(x) > kSignThreshold) {
        if (x < 0.0) basis.col(k) = -basis.col(k);
        break;
      }
    }
  }
}

TridiagonalEigen tridiagonal_eigen(std::span<const double> diagonal,
                                   std::span<const double> off_diagonal, int max_sweeps) {
  const int n = static_cast<int>(diagonal.size());
  if (n < 1 || static_cast<int>(off_diagonal.size()) != n - 1) {
    throw Error(ErrorCode::DimensionMismatch, "tridiagonal bands have inconsistent lengths");
  }

  std::vector<double> d(diagonal.begin(), diagonal.end());
  // e[i] couples rows i and i+1; e[n-1] is scratch.
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  std::copy(off_diagonal.begin(), off_diagonal.end(), e.begin());
  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(n, n);

  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int sweeps = 0;
    while (true) {
      int m = l;
      for (; m + 1 < n; ++m) {
        const double scale = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * scale) break;
      }
      if (m == l) break;
      if (++sweeps > max_sweeps) {
        throw Error(ErrorCode::DecompositionFailure,
                    "QL iteration did not converge for eigenvalue " + std::to_string(l));
      }

      // Wilkinson-style shift from the leading 2x2 block.
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      int i = m - 1;
      for (; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          // Underflow: split the matrix and restart from the top.
          d[i + 1] -= p;
          e[m] = 0.0;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        for (int k = 0; k < n; ++k) {
          f = z(k, i + 1);
          z(k, i + 1) = s * z(k, i) + c * f;
          z(k, i) = c * z(k, i) - s * f;
        }
      }
      if (r == 0.0 && i >= l) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

  TridiagonalEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (int k = 0; k < n; ++k) {
    out.eigenvalues[k] = d[order[k]];
    out.eigenvectors.col(k) = z.col(order[k]);
  }
  return out;
}

TransformMatrix derive_gbt(const LineGraphLaplacian& laplacian) {
  const int n = laplacian.size();
  auto eig = tridiagonal_eigen(laplacian.diagonal(), laplacian.off_diagonal());

  const Eigen::MatrixXd dense = laplacian.dense();
  const double norm = std::max(1.0, dense.cwiseAbs().maxCoeff());
  const double scale = dense.cwiseAbs().maxCoeff();

  // Jacobi matrices with nonzero off-diagonal have a simple spectrum; anything
  // else (w = 0) leaves the basis undefined.
  for (int k = 0; k + 1 < n; ++k) {
    if (eig.eigenvalues[k + 1] - eig.eigenvalues[k] <= 1e-12 * scale) {
      throw Error(ErrorCode::DegenerateGraph,
                  "repeated eigenvalue " + format_double(eig.eigenvalues[k]) +
                      "; basis is not unique");
    }
  }

  // Eigenvalues of a PSD matrix can come out as -1e-17; clamp that roundoff.
  for (int k = 0; k < n; ++k) {
    if (eig.eigenvalues[k] < 0.0) {
      if (eig.eigenvalues[k] < -1e-12 * norm) {
        throw Error(ErrorCode::DecompositionFailure, "negative eigenvalue from a PSD Laplacian");
      }
      eig.eigenvalues[k] = 0.0;
    }
  }

  canonicalize_signs(eig.eigenvectors);

  const Eigen::MatrixXd rebuilt =
      eig.eigenvectors * eig.eigenvalues.asDiagonal() * eig.eigenvectors.transpose();
  if ((dense - rebuilt).cwiseAbs().maxCoeff() > 1e-9 * norm) {
    throw Error(ErrorCode::DecompositionFailure, "eigendecomposition failed reconstruction check");
  }
  return {std::move(eig.eigenvectors), std::move(eig.eigenvalues)};
}

namespace {

void check_sizes(const Block& block, const TransformMatrix& row_t, const TransformMatrix& col_t) {
  if (block.rows() != col_t.size() || block.cols() != row_t.size() || block.rows() != block.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "block is " + std::to_string(block.rows()) + "x" + std::to_string(block.cols()) +
                    ", transforms are " + std::to_string(col_t.size()) + " (col) and " +
                    std::to_string(row_t.size()) + " (row)");
  }
}

}  // namespace

Block apply_separable(const Block& block, const TransformMatrix& row_transform,
                      const TransformMatrix& col_transform) {
  check_sizes(block, row_transform, col_transform);
  return col_transform.basis.transpose() * block * row_transform.basis;
}

Block inverse_separable(const Block& coefficients, const TransformMatrix& row_transform,
                        const TransformMatrix& col_transform) {
  check_sizes(coefficients, row_transform, col_transform);
  return col_transform.basis * coefficients * row_transform.basis.transpose();
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_basis_rows(std::ostream& out, const TransformMatrix& transform) {
  write_matrix_text(out, transform.basis);
}

void write_basis_dump(std::ostream& out, const TransformMatrix& transform,
                      const GraphParams& params) {
  out << "GBT N=" << transform.size() << " family=" << to_string(params.family)
      << " w=" << format_double(params.edge_weight) << " v=" << format_double(params.vertex_weight)
      << '\n';
  write_basis_rows(out, transform);
}

void write_plot_data(std::ostream& out, const TransformMatrix& transform) {
  const int n = transform.size();
  for (int k = 0; k < n; ++k) {
    if (k) out << '\n';
    for (int i = 0; i < n; ++i) {
      out << i << ' ' << k << ' ' << format_double(transform.basis(i, k)) << '\n';
    }
  }
}

}  // namespace gbst
