#pragma once

#include "gbst/dataset.hpp"
#include "gbst/graph_core.hpp"

#include <Eigen/Dense>

#include <utility>

namespace gbst {

/// Symmetric PSD matrix of second moments.
class SampleCovariance {
 public:
  /// Validates symmetry (1e-12, relative to the largest entry) and PSD-ness
  /// (smallest eigenvalue >= -1e-9 * trace / N).
  static SampleCovariance from_matrix(Eigen::MatrixXd matrix);

  int size() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double trace() const { return matrix_.trace(); }
  SampleCovariance scaled(double factor) const;

 private:
  explicit SampleCovariance(Eigen::MatrixXd m) : matrix_(std::move(m)) {}
  Eigen::MatrixXd matrix_;
};

/// Accumulates x x^T over a stream of vectors. Sums are plain within a chunk
/// and compensated (Neumaier) across merged chunks.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(int size);

  void add(const Eigen::Ref<const Eigen::VectorXd>& x);
  // Adds block^T block, i.e. the outer products of every row.
  void add_rows(const Eigen::Ref<const Eigen::MatrixXd>& block);
  // Adds block block^T, i.e. the outer products of every column.
  void add_cols(const Eigen::Ref<const Eigen::MatrixXd>& block);
  void merge(const CovarianceAccumulator& other);

  std::size_t count() const { return count_; }
  // Second-moment matrix divided by the number of accumulated vectors.
  SampleCovariance finish() const;

 private:
  void fold_partial();

  Eigen::MatrixXd partial_;
  Eigen::MatrixXd sum_;
  Eigen::MatrixXd compensation_;
  std::size_t count_ = 0;
};

struct ResidualCovariances {
  SampleCovariance row;
  SampleCovariance col;
};

/// Zero-mean second moments of all block rows and all block columns,
/// each normalized by M*N.
ResidualCovariances residual_covariances(const ResidualDataset& dataset, int threads = 1);

/// Factorization of a symmetric tridiagonal matrix as L D L^T.
struct TridiagonalFactor {
  std::vector<double> pivots;       // D
  std::vector<double> multipliers;  // unit lower bidiagonal entries

  // Throws NonPositiveDefinite if any leading principal minor is <= 0.
  static TridiagonalFactor compute(const LineGraphLaplacian& laplacian);
  double log_determinant() const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd inverse() const;
};

// Tr(L S) - log det L.
double ml_objective(const GraphParams& params, const SampleCovariance& covariance);

struct MlGradient {
  double d_edge = 0.0;
  double d_vertex = 0.0;
};

MlGradient ml_gradient(const GraphParams& params, const SampleCovariance& covariance);

// [[H_ww, H_wv], [H_wv, H_vv]] of the objective; independent of S.
Eigen::Matrix2d ml_hessian(const GraphParams& params, int size);

struct SolverOptions {
  int max_iterations = 10000;
  double tolerance = 1e-8;    // on projected-gradient norm, scaled by 1 + |objective|
  double lower_bound = 1e-9;  // box is [lower_bound, inf)^2
  double armijo = 1e-4;
  int max_backtracks = 60;
};

struct MlSolution {
  double w_star = 0.0;
  double v_star = 0.0;
  double objective = 0.0;
  double projected_gradient_norm = 0.0;
  bool converged = false;
  bool at_boundary = false;  // some coordinate ended clipped at lower_bound
  int iterations = 0;
  GraphFamily family = GraphFamily::L1;
  int size = 0;

  double ratio() const { return v_star / w_star; }
};

/// Minimizes Tr(L S) - log det L over L(w, v) in the given family with
/// w, v >= lower_bound, starting from (N / Tr S, N / Tr S).
MlSolution solve_ml(const SampleCovariance& covariance, GraphFamily family,
                    const SolverOptions& options = {});

inline constexpr double kAlphaStep = 0.25;

struct RefinedParam {
  double alpha = 0.0;  // exact multiple of kAlphaStep
  int size = 0;
};

// Nearest multiple of 0.25, ties away from zero.
double round_to_alpha_grid(double ratio);
RefinedParam refine(const MlSolution& solution);

struct LearnedGbst {
  MlSolution row_solution;
  MlSolution col_solution;
  RefinedParam row;
  RefinedParam col;
};

LearnedGbst learn_gbst(const ResidualDataset& dataset, GraphFamily row_family,
                       GraphFamily col_family, const SolverOptions& options = {},
                       int threads = 1);

}  // namespace gbst
