#include "gbst/coding_eval.hpp"
#include "gbst/error.hpp"
#include "gbst/estimation.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace gbst {
namespace {

using testing::exact_inverse;
using testing::kFamilies;
using testing::random_interior;
using testing::random_psd;

SampleCovariance cov(const Eigen::MatrixXd& m) { return SampleCovariance::from_matrix(m); }

template <typename Fn>
ErrorCode error_of(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

// Finite-difference oracle for the objective, independent of ml_gradient.
Eigen::Vector2d fd_gradient(const GraphParams& p, const SampleCovariance& s, double h) {
  auto f = [&](double w, double v) { return ml_objective({w, v, p.family}, s); };
  const double w = p.edge_weight;
  const double v = p.vertex_weight;
  return {(f(w + h, v) - f(w - h, v)) / (2 * h), (f(w, v + h) - f(w, v - h)) / (2 * h)};
}

// Objective evaluated densely: trace product and LU determinant.
double dense_objective(const GraphParams& p, const Eigen::MatrixXd& s) {
  const Eigen::MatrixXd l = LineGraphLaplacian::build(p, static_cast<int>(s.rows())).dense();
  return (l * s).trace() - std::log(l.determinant());
}

TEST(SampleCovariance, Validation) {
  Eigen::Matrix2d asym;
  asym << 1, 0.5, 0.4, 1;
  EXPECT_EQ(error_of([&] { cov(asym); }), ErrorCode::InvalidParameter);
  Eigen::Matrix2d indefinite;
  indefinite << 1, 2, 2, 1;
  EXPECT_EQ(error_of([&] { cov(indefinite); }), ErrorCode::NonPositiveDefinite);
  EXPECT_NO_THROW(cov(Eigen::MatrixXd::Zero(3, 3)));
}

TEST(ResidualCovariances, IdentityBlock) {
  ResidualDataset ds{2, {1, 0, 0, 1}};
  const auto c = residual_covariances(ds);
  // Two rows (1,0) and (0,1): sum of outer products is I, divided by M*N = 2.
  EXPECT_EQ(c.row.matrix(), 0.5 * Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(c.col.matrix(), 0.5 * Eigen::MatrixXd::Identity(2, 2));
}

TEST(ResidualCovariances, RowsAndColumnsAreDistinguished) {
  // Single block [[1,2],[3,4]]: rows (1,2),(3,4); columns (1,3),(2,4).
  ResidualDataset ds{2, {1, 2, 3, 4}};
  const auto c = residual_covariances(ds);
  Eigen::Matrix2d row, col;
  row << 10, 14, 14, 20;
  col << 5, 11, 11, 25;
  EXPECT_EQ(c.row.matrix(), Eigen::MatrixXd(row / 2));
  EXPECT_EQ(c.col.matrix(), Eigen::MatrixXd(col / 2));
}

TEST(ResidualCovariances, ZeroBlocksAndErrors) {
  ResidualDataset zeros{4, std::vector<std::int16_t>(3 * 16, 0)};
  EXPECT_EQ(residual_covariances(zeros).row.matrix(), Eigen::MatrixXd::Zero(4, 4));
  EXPECT_EQ(error_of([&] { solve_ml(residual_covariances(zeros).row, GraphFamily::L1); }),
            ErrorCode::DegenerateInput);

  ResidualDataset empty{4, {}};
  EXPECT_EQ(error_of([&] { residual_covariances(empty); }), ErrorCode::EmptyDataset);
  ResidualDataset ragged{4, std::vector<std::int16_t>(20, 1)};
  EXPECT_EQ(error_of([&] { residual_covariances(ragged); }), ErrorCode::InconsistentBlockSize);
}

TEST(ResidualCovariances, ThreadCountDoesNotChangeResult) {
  const auto l = LineGraphLaplacian::build({1, 0.5, GraphFamily::L1}, 4);
  const auto ds = synthesize_dataset(l, l, 9, 5000, 8.0);
  const auto a = residual_covariances(ds, 1);
  const auto b = residual_covariances(ds, 4);
  EXPECT_EQ(a.row.matrix(), b.row.matrix());
  EXPECT_EQ(a.col.matrix(), b.col.matrix());
}

TEST(ResidualCovariances, MonteCarloRowsMatchGeneratingModel) {
  const GraphParams p{1, 1, GraphFamily::L1};
  const int n = 4;
  const auto model = GMRFModel{LineGraphLaplacian::build(p, n), 21};
  CovarianceAccumulator acc(n);
  for (const auto& x : sample_gmrf(model, 10000)) acc.add(x);
  const Eigen::MatrixXd s = acc.finish().matrix();
  const Eigen::MatrixXd k = exact_inverse(p, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double se = std::sqrt((k(i, i) * k(j, j) + k(i, j) * k(i, j)) / 10000.0);
      EXPECT_LE(std::abs(s(i, j) - k(i, j)), 4 * se) << i << "," << j;
    }
  }
}

TEST(MlObjective, HandValues) {
  const GraphParams p{1, 1, GraphFamily::L1};
  EXPECT_NEAR(ml_objective(p, cov(Eigen::MatrixXd::Identity(2, 2))), 3.0, 1e-15);
  EXPECT_NEAR(ml_objective(p, cov(exact_inverse(p, 2))), 2.0, 1e-14);
}

TEST(MlObjective, HomogeneityInParameters) {
  std::mt19937_64 rng(4);
  const auto s = cov(random_psd(6, rng));
  const GraphParams p{0.7, 1.9, GraphFamily::L2};
  for (double c : {0.3, 2.0, 7.5}) {
    const GraphParams q{c * p.edge_weight, c * p.vertex_weight, p.family};
    const double trace_term = ml_objective(p, s) + std::log(LineGraphLaplacian::build(p, 6).dense().determinant());
    const double expected = c * trace_term - std::log(LineGraphLaplacian::build(p, 6).dense().determinant()) -
                            6 * std::log(c);
    EXPECT_NEAR(ml_objective(q, s), expected, 1e-10 * std::abs(expected));
  }
}

TEST(MlObjective, LogdetRecurrenceMatchesDenseDeterminant) {
  std::mt19937_64 rng(8);
  for (int n = 2; n <= 8; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = random_interior(kFamilies[trial % 2], rng);
      const auto lap = LineGraphLaplacian::build(p, n);
      const double ours = TridiagonalFactor::compute(lap).log_determinant();
      const double ref = std::log(lap.dense().determinant());
      ASSERT_NEAR(ours, ref, 1e-9 * std::max(1.0, std::abs(ref)));
      const Eigen::MatrixXd s = random_psd(n, rng);
      ASSERT_NEAR(ml_objective(p, cov(s)), dense_objective(p, s), 1e-9 * (1 + std::abs(dense_objective(p, s))));
    }
  }
}

TEST(MlObjective, BoundaryIsNotPositiveDefinite) {
  const auto s = cov(Eigen::MatrixXd::Identity(4, 4));
  EXPECT_EQ(error_of([&] { ml_objective({1, 0, GraphFamily::L1}, s); }), ErrorCode::NonPositiveDefinite);
  EXPECT_EQ(error_of([&] { ml_objective({0, 1, GraphFamily::L2}, s); }), ErrorCode::NonPositiveDefinite);
}

TEST(TridiagonalFactor, InverseMatchesDense) {
  const auto lap = LineGraphLaplacian::build({1.5, 0.3, GraphFamily::L2}, 12);
  const auto f = TridiagonalFactor::compute(lap);
  EXPECT_LE((f.inverse() - lap.dense().inverse()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(MlGradient, TwoPointHandValues) {
  // f = (2w + v) - log(v w) for L1, N = 2, S = I: df/dw = 2 - 1/w, df/dv = 1 - 1/v.
  const auto g = ml_gradient({1, 1, GraphFamily::L1}, cov(Eigen::MatrixXd::Identity(2, 2)));
  EXPECT_NEAR(g.d_edge, 1.0, 1e-14);
  EXPECT_NEAR(g.d_vertex, 0.0, 1e-14);
  const auto g2 = ml_gradient({0.5, 2, GraphFamily::L1}, cov(Eigen::MatrixXd::Identity(2, 2)));
  EXPECT_NEAR(g2.d_edge, 0.0, 1e-14);
  EXPECT_NEAR(g2.d_vertex, 0.5, 1e-14);
}

TEST(MlGradient, VanishesAtGeneratingModel) {
  std::mt19937_64 rng(2);
  for (int n : {3, 8, 16}) {
    for (GraphFamily fam : kFamilies) {
      const auto p = random_interior(fam, rng);
      const auto g = ml_gradient(p, cov(exact_inverse(p, n)));
      EXPECT_NEAR(g.d_edge, 0.0, 1e-10);
      EXPECT_NEAR(g.d_vertex, 0.0, 1e-10);
    }
  }
}

TEST(MlGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 15;
    const auto p = random_interior(kFamilies[trial % 2], rng);
    const auto s = cov(random_psd(n, rng));
    const auto g = ml_gradient(p, s);
    const Eigen::Vector2d analytic(g.d_edge, g.d_vertex);
    const Eigen::Vector2d fd = fd_gradient(p, s, 1e-6);
    ASSERT_LE((analytic - fd).norm() / std::max(fd.norm(), 1e-3), 1e-5) << "trial " << trial;
  }
}

TEST(MlHessian, MatchesFiniteDifferencesOfGradient) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial;
    const auto p = random_interior(kFamilies[trial % 2], rng);
    const auto s = cov(random_psd(n, rng));
    const double h = 1e-6;
    auto grad = [&](double w, double v) {
      const auto g = ml_gradient({w, v, p.family}, s);
      return Eigen::Vector2d(g.d_edge, g.d_vertex);
    };
    Eigen::Matrix2d fd;
    fd.col(0) = (grad(p.edge_weight + h, p.vertex_weight) - grad(p.edge_weight - h, p.vertex_weight)) / (2 * h);
    fd.col(1) = (grad(p.edge_weight, p.vertex_weight + h) - grad(p.edge_weight, p.vertex_weight - h)) / (2 * h);
    const Eigen::Matrix2d an = ml_hessian(p, n);
    ASSERT_LE((an - fd).norm() / fd.norm(), 1e-5);
  }
}

TEST(MlObjective, ConvexAlongSegments) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 31;
    const GraphFamily fam = kFamilies[trial % 2];
    const auto s = cov(random_psd(n, rng));
    const auto a = random_interior(fam, rng);
    const auto b = random_interior(fam, rng);
    for (double t : {0.25, 0.5, 0.75}) {
      const GraphParams m{t * a.edge_weight + (1 - t) * b.edge_weight,
                          t * a.vertex_weight + (1 - t) * b.vertex_weight, fam};
      ASSERT_LE(ml_objective(m, s), t * ml_objective(a, s) + (1 - t) * ml_objective(b, s) + 1e-9);
    }
  }
}

TEST(SolveMl, RecoversGeneratingRatioExactly) {
  for (int n : {4, 8, 16, 32}) {
    for (GraphFamily fam : kFamilies) {
      for (const auto& [w, v] : {std::pair{1.0, 1.0}, {1.0, 0.25}, {0.4, 1.1}, {3.0, 6.0}}) {
        const auto sol = solve_ml(cov(exact_inverse({w, v, fam}, n)), fam);
        ASSERT_TRUE(sol.converged);
        EXPECT_FALSE(sol.at_boundary);
        EXPECT_NEAR(sol.ratio(), v / w, 1e-6) << "n=" << n << " w=" << w << " v=" << v;
        EXPECT_NEAR(sol.w_star, w, 1e-5 * w);
        EXPECT_LE(sol.projected_gradient_norm, 1e-8 * (1 + std::abs(sol.objective)));
      }
    }
  }
}

TEST(SolveMl, ScaleEquivariance) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4 + 3 * trial;
    const auto s = cov(random_psd(n, rng));
    const auto base = solve_ml(s, GraphFamily::L1);
    ASSERT_TRUE(base.converged);
    for (double c : {0.01, 3.0, 250.0}) {
      const auto scaled = solve_ml(s.scaled(c), GraphFamily::L1);
      ASSERT_TRUE(scaled.converged);
      EXPECT_NEAR(scaled.w_star * c, base.w_star, 1e-5 * base.w_star);
      EXPECT_NEAR(scaled.v_star * c, base.v_star, 1e-5 * base.v_star);
      EXPECT_EQ(refine(scaled).alpha, refine(base).alpha);
    }
  }
}

TEST(SolveMl, WhiteResidualsSettleAtInteriorStationaryPoint) {
  for (int n : {4, 8, 32}) {
    const auto s = cov(Eigen::MatrixXd::Identity(n, n));
    const auto sol = solve_ml(s, GraphFamily::L1);
    ASSERT_TRUE(sol.converged);
    EXPECT_FALSE(sol.at_boundary);
    // (w, v) = (1/2, 1): K = L^-1 has K_00 = 1 and Tr(Lc K) = 2(N-1); check densely.
    const Eigen::MatrixXd k = LineGraphLaplacian::build({0.5, 1, GraphFamily::L1}, n).dense().inverse();
    const Eigen::MatrixXd lc = LineGraphLaplacian::build({1, 0, GraphFamily::L1}, n).dense();
    EXPECT_NEAR(k(0, 0), 1.0, 1e-12);
    EXPECT_NEAR((lc * k).trace(), 2.0 * (n - 1), 1e-9);
    EXPECT_NEAR(sol.w_star, 0.5, 1e-6);
    EXPECT_NEAR(sol.v_star, 1.0, 1e-6);
  }
}

TEST(SolveMl, IterationCapIsReported) {
  SolverOptions opts;
  opts.max_iterations = 0;
  const auto sol = solve_ml(cov(exact_inverse({1, 0.25, GraphFamily::L1}, 16)), GraphFamily::L1, opts);
  EXPECT_FALSE(sol.converged);
  EXPECT_EQ(sol.iterations, 0);
}

TEST(SolveMl, UnboundedObjectiveRunsAway) {
  // Constant rows: f = v - log v - (N-1) log w has no minimizer; w grows
  // without bound while the gradient decays like 1/w.
  const int n = 4;
  const auto s = cov(Eigen::MatrixXd::Constant(n, n, 1.0));
  SolverOptions capped;
  capped.max_iterations = 5;
  const auto early = solve_ml(s, GraphFamily::L1, capped);
  EXPECT_FALSE(early.converged);
  const auto sol = solve_ml(s, GraphFamily::L1);
  EXPECT_GT(sol.w_star, 1e6);
  EXPECT_NEAR(sol.v_star, 1.0, 1e-6);
}

TEST(Refine, RoundsToQuarterGrid) {
  auto alpha = [](double w, double v) {
    MlSolution s;
    s.w_star = w;
    s.v_star = v;
    s.size = 8;
    return refine(s).alpha;
  };
  EXPECT_EQ(alpha(2.0, 1.6), 0.75);
  EXPECT_EQ(alpha(1.0, 1.0), 1.0);
  EXPECT_EQ(alpha(1.0, 2.06), 2.0);
  EXPECT_EQ(alpha(1.0, 0.125), 0.25);  // tie rounds away from zero
  EXPECT_EQ(alpha(1.0, 0.375), 0.5);
  EXPECT_EQ(alpha(1.0, 0.1), 0.0);
  MlSolution bad;
  EXPECT_EQ(error_of([&] { refine(bad); }), ErrorCode::DegenerateGraph);
}

TEST(LearnGbst, SyntheticRowsAndColumns) {
  const auto rows = LineGraphLaplacian::build({1, 1, GraphFamily::L1}, 8);
  const auto cols = LineGraphLaplacian::build({1, 1, GraphFamily::L2}, 8);
  const auto ds = synthesize_dataset(rows, cols, 5, 4000, 16.0);
  const auto learned = learn_gbst(ds, GraphFamily::L1, GraphFamily::L2);
  EXPECT_TRUE(learned.row_solution.converged);
  EXPECT_TRUE(learned.col_solution.converged);
  EXPECT_EQ(learned.row.alpha, 1.0);
  EXPECT_EQ(learned.col.alpha, 1.0);
  EXPECT_EQ(learned.row.size, 8);
}

TEST(LearnGbst, ThirtyTwoPointNearDct2) {
  const auto g = LineGraphLaplacian::build({1, 0.25, GraphFamily::L1}, 32);
  const auto ds = synthesize_dataset(g, g, 6, 1500, 8.0);
  const auto learned = learn_gbst(ds, GraphFamily::L1, GraphFamily::L1);
  EXPECT_EQ(learned.row.alpha, 0.25);
  EXPECT_EQ(learned.col.alpha, 0.25);
}

TEST(LearnGbst, EmptyDataset) {
  ResidualDataset empty{8, {}};
  EXPECT_EQ(error_of([&] { learn_gbst(empty, GraphFamily::L1, GraphFamily::L1); }),
            ErrorCode::EmptyDataset);
}

}  // namespace
}  // namespace gbst
