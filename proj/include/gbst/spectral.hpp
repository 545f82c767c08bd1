#pragma once

#include "gbst/graph_core.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string>

namespace gbst {

// Residual block (or its coefficients): N x N, row-major semantics.
using Block = Eigen::MatrixXd;

/// Orthonormal N-point transform. Column k of `basis` is the k-th basis
/// vector; columns are ordered by ascending `eigenvalues` (lowest frequency
/// first) and each column's first entry with magnitude above 1e-12 is
/// positive.
struct TransformMatrix {
  Eigen::MatrixXd basis;
  Eigen::VectorXd eigenvalues;

  int size() const { return static_cast<int>(basis.cols()); }

  static TransformMatrix identity(int size);
};

inline constexpr double kSignThreshold = 1e-12;

// Flips each column so that its first entry with |x| > kSignThreshold is positive.
void canonicalize_signs(Eigen::MatrixXd& basis);

struct TridiagonalEigen {
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors; // column k pairs with eigenvalues[k]
};

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix.
/// `off_diagonal` holds the N-1 entries (i, i+1). Throws DecompositionFailure
/// if any eigenvalue needs more than `max_sweeps` sweeps.
TridiagonalEigen tridiagonal_eigen(std::span<const double> diagonal,
                                   std::span<const double> off_diagonal, int max_sweeps = 60);

/// GBT of a line-graph GGL: L = U diag(lambda) U^T with the ordering and
/// sign convention of TransformMatrix.
TransformMatrix derive_gbt(const LineGraphLaplacian& laplacian);

Block apply_separable(const Block& block, const TransformMatrix& row_transform,
                      const TransformMatrix& col_transform);
Block inverse_separable(const Block& coefficients, const TransformMatrix& row_transform,
                        const TransformMatrix& col_transform);

// Shortest decimal text that round-trips the value.
std::string format_double(double value);

// "GBT N=<N> family=<L1|L2> w=<w> v=<v>" followed by the basis rows.
void write_basis_dump(std::ostream& out, const TransformMatrix& transform,
                      const GraphParams& params);
void write_basis_rows(std::ostream& out, const TransformMatrix& transform);

// One "n k u_k(n)" line per sample for every basis vector, blank line between vectors.
void write_plot_data(std::ostream& out, const TransformMatrix& transform);

}  // namespace gbst
