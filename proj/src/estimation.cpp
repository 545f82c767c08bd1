#include "gbst/estimation.hpp"

#include "gbst/error.hpp"
#include "gbst/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace gbst {

SampleCovariance SampleCovariance::from_matrix(Eigen::MatrixXd matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "covariance must be square and nonempty");
  }
  if (!matrix.allFinite()) throw Error(ErrorCode::InvalidParameter, "covariance has non-finite entries");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::InvalidParameter, "covariance is not symmetric");
  }
  matrix = 0.5 * (matrix + matrix.transpose()).eval();
  const double n = static_cast<double>(matrix.rows());
  const double smallest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                              matrix, Eigen::EigenvaluesOnly).eigenvalues()[0];
  if (smallest < -1e-9 * std::abs(matrix.trace()) / n) {
    throw Error(ErrorCode::NonPositiveDefinite,
                "covariance has negative eigenvalue " + std::to_string(smallest));
  }
  return SampleCovariance(std::move(matrix));
}

SampleCovariance SampleCovariance::scaled(double factor) const {
  return SampleCovariance(matrix_ * factor);
}

// ---------------------------------------------------------------------------

CovarianceAccumulator::CovarianceAccumulator(int size)
    : partial_(Eigen::MatrixXd::Zero(size, size)),
      sum_(Eigen::MatrixXd::Zero(size, size)),
      compensation_(Eigen::MatrixXd::Zero(size, size)) {}

void CovarianceAccumulator::add(const Eigen::Ref<const Eigen::VectorXd>& x) {
  partial_.noalias() += x * x.transpose();
  ++count_;
}

void CovarianceAccumulator::add_rows(const Eigen::Ref<const Eigen::MatrixXd>& block) {
  partial_.noalias() += block.transpose() * block;
  count_ += static_cast<std::size_t>(block.rows());
}

void CovarianceAccumulator::add_cols(const Eigen::Ref<const Eigen::MatrixXd>& block) {
  partial_.noalias() += block * block.transpose();
  count_ += static_cast<std::size_t>(block.cols());
}

namespace {

void neumaier_add(Eigen::MatrixXd& sum, Eigen::MatrixXd& comp, const Eigen::MatrixXd& x) {
  for (Eigen::Index i = 0; i < sum.size(); ++i) {
    const double s = sum.data()[i];
    const double v = x.data()[i];
    const double t = s + v;
    comp.data()[i] += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    sum.data()[i] = t;
  }
}

}  // namespace

void CovarianceAccumulator::fold_partial() {
  neumaier_add(sum_, compensation_, partial_);
  partial_.setZero();
}

void CovarianceAccumulator::merge(const CovarianceAccumulator& other) {
  fold_partial();
  neumaier_add(sum_, compensation_, other.sum_);
  neumaier_add(sum_, compensation_, other.compensation_);
  neumaier_add(sum_, compensation_, other.partial_);
  count_ += other.count_;
}

SampleCovariance CovarianceAccumulator::finish() const {
  if (count_ == 0) throw Error(ErrorCode::EmptyDataset, "no samples accumulated");
  Eigen::MatrixXd total = sum_;
  Eigen::MatrixXd comp = compensation_;
  neumaier_add(total, comp, partial_);
  total += comp;
  total /= static_cast<double>(count_);
  return SampleCovariance::from_matrix(0.5 * (total + total.transpose()));
}

ResidualCovariances residual_covariances(const ResidualDataset& dataset, int threads) {
  const std::size_t blocks = dataset.block_count();
  if (blocks == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no blocks");
  const int n = dataset.block_size;
  const std::size_t expected = blocks * static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  if (dataset.samples.size() != expected) {
    throw Error(ErrorCode::InconsistentBlockSize,
                "sample count is not a multiple of N*N = " + std::to_string(n * n));
  }

  std::vector<CovarianceAccumulator> rows(chunk_count(blocks), CovarianceAccumulator(n));
  std::vector<CovarianceAccumulator> cols(chunk_count(blocks), CovarianceAccumulator(n));
  for_each_chunk(blocks, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    for (std::size_t m = begin; m < end; ++m) {
      const Block b = dataset.block(m);
      rows[c].add_rows(b);
      cols[c].add_cols(b);
    }
  });

  CovarianceAccumulator row_total(n);
  CovarianceAccumulator col_total(n);
  for (std::size_t c = 0; c < rows.size(); ++c) {
    row_total.merge(rows[c]);
    col_total.merge(cols[c]);
  }
  return {row_total.finish(), col_total.finish()};
}

// ---------------------------------------------------------------------------

TridiagonalFactor TridiagonalFactor::compute(const LineGraphLaplacian& laplacian) {
  const auto& a = laplacian.diagonal();
  const auto& b = laplacian.off_diagonal();
  TridiagonalFactor f;
  f.pivots.resize(a.size());
  f.multipliers.resize(b.size());
  // pivot_k = d_k / d_{k-1}, the ratio form of d_k = a_k d_{k-1} - b_{k-1}^2 d_{k-2}.
  double prev = 1.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double p = a[k];
    if (k > 0) {
      f.multipliers[k - 1] = b[k - 1] / prev;
      p -= b[k - 1] * f.multipliers[k - 1];
    }
    if (!(p > 0.0)) {
      throw Error(ErrorCode::NonPositiveDefinite,
                  "leading principal minor " + std::to_string(k + 1) + " is not positive");
    }
    f.pivots[k] = p;
    prev = p;
  }
  return f;
}

double TridiagonalFactor::log_determinant() const {
  double s = 0.0;
  for (double p : pivots) s += std::log(p);
  return s;
}

Eigen::VectorXd TridiagonalFactor::solve(const Eigen::VectorXd& rhs) const {
  const std::size_t n = pivots.size();
  Eigen::VectorXd x = rhs;
  for (std::size_t i = 1; i < n; ++i) x[i] -= multipliers[i - 1] * x[i - 1];
  for (std::size_t i = 0; i < n; ++i) x[i] /= pivots[i];
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= multipliers[i] * x[i + 1];
  return x;
}

Eigen::MatrixXd TridiagonalFactor::inverse() const {
  const int n = static_cast<int>(pivots.size());
  Eigen::MatrixXd inv(n, n);
  for (int j = 0; j < n; ++j) inv.col(j) = solve(Eigen::VectorXd::Unit(n, j));
  return 0.5 * (inv + inv.transpose());
}

namespace {

// Tr(T M) for a symmetric tridiagonal T given by its bands.
double trace_product(const std::vector<double>& diag, const std::vector<double>& off,
                     const Eigen::MatrixXd& m) {
  double t = 0.0;
  for (std::size_t i = 0; i < diag.size(); ++i) t += diag[i] * m(i, i);
  for (std::size_t i = 0; i < off.size(); ++i) t += 2.0 * off[i] * m(i, i + 1);
  return t;
}

// Tr(Lc M) where Lc is the unit-weight combinatorial path Laplacian.
double edge_pattern_trace(const Eigen::MatrixXd& m) {
  double t = 0.0;
  for (Eigen::Index i = 0; i + 1 < m.rows(); ++i) t += m(i, i) + m(i + 1, i + 1) - 2.0 * m(i, i + 1);
  return t;
}

Eigen::MatrixXd edge_pattern(int n) {
  return LineGraphLaplacian::build({1.0, 0.0, GraphFamily::L1}, n).dense();
}

}  // namespace

double ml_objective(const GraphParams& params, const SampleCovariance& covariance) {
  const auto lap = LineGraphLaplacian::build(params, covariance.size());
  const auto factor = TridiagonalFactor::compute(lap);
  return trace_product(lap.diagonal(), lap.off_diagonal(), covariance.matrix()) -
         factor.log_determinant();
}

MlGradient ml_gradient(const GraphParams& params, const SampleCovariance& covariance) {
  const auto lap = LineGraphLaplacian::build(params, covariance.size());
  const Eigen::MatrixXd residual =
      covariance.matrix() - TridiagonalFactor::compute(lap).inverse();
  const int s = lap.self_loop_vertex();
  return {edge_pattern_trace(residual), residual(s, s)};
}

Eigen::Matrix2d ml_hessian(const GraphParams& params, int size) {
  const auto lap = LineGraphLaplacian::build(params, size);
  const Eigen::MatrixXd k = TridiagonalFactor::compute(lap).inverse();
  const Eigen::MatrixXd kl = k * edge_pattern(size);
  const int s = lap.self_loop_vertex();
  Eigen::Matrix2d h;
  h(0, 0) = (kl * kl).trace();
  h(0, 1) = h(1, 0) = (kl * k)(s, s);
  h(1, 1) = k(s, s) * k(s, s);
  return h;
}

// ---------------------------------------------------------------------------

namespace {
constexpr double kPolishDecrement = 1e-20;
constexpr int kMaxPolishSteps = 8;
}  // namespace

MlSolution solve_ml(const SampleCovariance& covariance, GraphFamily family,
                    const SolverOptions& options) {
  const int n = covariance.size();
  check_graph_size(n);
  const double trace = covariance.trace();
  if (!(trace > 0.0)) {
    throw Error(ErrorCode::DegenerateInput, "sample covariance has zero trace");
  }
  const double lb = options.lower_bound;
  auto project = [lb](Eigen::Vector2d x) { return x.cwiseMax(lb); };
  auto params_at = [family](const Eigen::Vector2d& x) { return GraphParams{x[0], x[1], family}; };
  auto objective_at = [&](const Eigen::Vector2d& x) {
    try {
      return ml_objective(params_at(x), covariance);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonPositiveDefinite) throw;
      return std::numeric_limits<double>::infinity();
    }
  };

  Eigen::Vector2d x = project(Eigen::Vector2d::Constant(n / trace));
  MlSolution sol;
  sol.family = family;
  sol.size = n;

  double f = objective_at(x);
  int polish_steps = 0;
  for (int it = 0;; ++it) {
    const MlGradient grad = ml_gradient(params_at(x), covariance);
    const Eigen::Vector2d g(grad.d_edge, grad.d_vertex);
    sol.projected_gradient_norm = (project(x - g) - x).norm();
    sol.iterations = it;
    const Eigen::Matrix2d h = ml_hessian(params_at(x), n);
    sol.converged = sol.projected_gradient_norm <= options.tolerance * (1.0 + std::abs(f));
    if (sol.converged) {
      // The gradient test is not scale-free (S -> cS scales g by c); polish
      // with a few Newton steps until the decrement g^T H^-1 g is negligible.
      const bool interior = x[0] > lb && x[1] > lb;
      const double decrement = interior ? g.dot(h.ldlt().solve(g)) : 0.0;
      if (!(decrement > kPolishDecrement) || polish_steps >= kMaxPolishSteps) break;
      ++polish_steps;
    }
    if (it >= options.max_iterations) break;

    // Newton scaling on the free coordinates, diagonal scaling on those held
    // at the bound (projected Newton).
    Eigen::Vector2d step = g.cwiseQuotient(h.diagonal());
    const bool held0 = x[0] <= lb && g[0] > 0.0;
    const bool held1 = x[1] <= lb && g[1] > 0.0;
    if (!held0 && !held1) {
      const Eigen::Vector2d newton = h.ldlt().solve(g);
      if (newton.allFinite() && newton.dot(g) > 0.0) step = newton;
    }

    // Near the optimum the predicted decrease falls below the rounding noise
    // of f; allow for it so Newton steps are not rejected spuriously.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));
    bool accepted = false;
    double t = 1.0;
    for (int bt = 0; bt <= options.max_backtracks; ++bt, t *= 0.5) {
      const Eigen::Vector2d trial = project(x - t * step);
      const double ft = objective_at(trial);
      if (ft <= f + options.armijo * g.dot(trial - x) + noise) {
        x = trial;
        f = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // stalled; converged reflects the test at x
  }

  sol.w_star = x[0];
  sol.v_star = x[1];
  sol.objective = f;
  sol.at_boundary = x[0] <= lb || x[1] <= lb;
  return sol;
}

double round_to_alpha_grid(double ratio) {
  return std::round(ratio / kAlphaStep) * kAlphaStep;
}

RefinedParam refine(const MlSolution& solution) {
  if (!(solution.w_star > 0.0)) {
    throw Error(ErrorCode::DegenerateGraph, "edge weight must be positive to normalize");
  }
  return {round_to_alpha_grid(solution.v_star / solution.w_star), solution.size};
}

LearnedGbst learn_gbst(const ResidualDataset& dataset, GraphFamily row_family,
                       GraphFamily col_family, const SolverOptions& options, int threads) {
  const ResidualCovariances cov = residual_covariances(dataset, threads);
  LearnedGbst out;
  out.row_solution = solve_ml(cov.row, row_family, options);
  out.col_solution = solve_ml(cov.col, col_family, options);
  out.row = refine(out.row_solution);
  out.col = refine(out.col_solution);
  return out;
}

}  // namespace gbst
