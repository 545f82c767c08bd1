#include "gbst/error.hpp"
#include "gbst/spectral.hpp"
#include "gbst/trig_oracle.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>

namespace gbst {
namespace {

using testing::kFamilies;

constexpr double kGrid[] = {0.25, 0.5, 1.0, 2.0, 4.0};
constexpr int kSizes[] = {4, 8, 16, 32};

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

TEST(TridiagonalEigen, MatchesDenseSolverOnRandomBands) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int n : {1, 2, 3, 7, 20, 64}) {
    std::vector<double> d(n), e(n > 0 ? n - 1 : 0);
    for (auto& x : d) x = g(rng);
    for (auto& x : e) x = g(rng);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) dense(i, i) = d[i];
    for (int i = 0; i + 1 < n; ++i) dense(i, i + 1) = dense(i + 1, i) = e[i];

    const auto eig = tridiagonal_eigen(d, e);
    const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense).eigenvalues();
    EXPECT_LE((eig.eigenvalues - ref).cwiseAbs().maxCoeff(), 1e-12 * (1 + ref.cwiseAbs().maxCoeff()));
    EXPECT_LE(max_abs(eig.eigenvectors.transpose() * eig.eigenvectors - Eigen::MatrixXd::Identity(n, n)),
              1e-12);
    EXPECT_LE(max_abs(dense * eig.eigenvectors - eig.eigenvectors * eig.eigenvalues.asDiagonal()),
              1e-12 * (1 + ref.cwiseAbs().maxCoeff()));
  }
}

TEST(TridiagonalEigen, SweepCapSurfacesFailure) {
  const std::vector<double> d = {1, 2, 3, 4};
  const std::vector<double> e = {1, 1, 1};
  try {
    (void)tridiagonal_eigen(d, e, 0);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::DecompositionFailure);
  }
}

TEST(DeriveGbt, TwoPointEigenvaluesFromCharacteristicPolynomial) {
  // det([[2,-1],[-1,1]] - l I) = l^2 - 3l + 1
  const auto t = derive_gbt(LineGraphLaplacian::build({1, 1, GraphFamily::L1}, 2));
  EXPECT_NEAR(t.eigenvalues[0], (3 - std::sqrt(5.0)) / 2, 1e-14);
  EXPECT_NEAR(t.eigenvalues[1], (3 + std::sqrt(5.0)) / 2, 1e-14);
}

TEST(DeriveGbt, NoSelfLoopGivesDct2) {
  const auto t = derive_gbt(LineGraphLaplacian::build({1, 0, GraphFamily::L1}, 4));
  const double s = 1 / std::sqrt(2.0);
  for (int k = 0; k < 4; ++k) {
    const double ck = k == 0 ? s : 1.0;
    Eigen::VectorXd col(4);
    for (int n = 0; n < 4; ++n) col[n] = ck * std::sqrt(0.5) * std::cos(M_PI * k * (2 * n + 1) / 8.0);
    if (col[0] < 0) col = -col;
    EXPECT_LE((t.basis.col(k) - col).cwiseAbs().maxCoeff(), 1e-12) << "k=" << k;
  }
  EXPECT_NEAR(t.eigenvalues[0], 0.0, 1e-15);
}

TEST(DeriveGbt, ZeroEdgeWeightHasNoUniqueBasis) {
  try {
    (void)derive_gbt(LineGraphLaplacian::build({0, 1, GraphFamily::L1}, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateGraph);
  }
}

TEST(DeriveGbt, GridInvariants) {
  for (int n : kSizes) {
    for (double w : kGrid) {
      for (double v : kGrid) {
        for (GraphFamily fam : kFamilies) {
          const auto lap = LineGraphLaplacian::build({w, v, fam}, n);
          const auto t = derive_gbt(lap);
          const Eigen::MatrixXd dense = lap.dense();
          ASSERT_LE(max_abs(t.basis.transpose() * t.basis - Eigen::MatrixXd::Identity(n, n)), 1e-10);
          ASSERT_LE(max_abs(dense - t.basis * t.eigenvalues.asDiagonal() * t.basis.transpose()),
                    1e-9 * std::max(1.0, max_abs(dense)));
          for (int k = 0; k < n; ++k) {
            ASSERT_GE(t.eigenvalues[k], 0.0);
            ASSERT_LE(t.eigenvalues[k], 4 * w + v);  // Gershgorin
            if (k) ASSERT_GT(t.eigenvalues[k], t.eigenvalues[k - 1]);
            int first = 0;
            while (std::abs(t.basis(first, k)) <= kSignThreshold) ++first;
            ASSERT_GT(t.basis(first, k), 0.0);
          }
        }
      }
    }
  }
}

TEST(DeriveGbt, ScaleInvariantBasis) {
  for (int n : kSizes) {
    for (GraphFamily fam : kFamilies) {
      const GraphParams p{1.3, 0.7, fam};
      const auto base = derive_gbt(LineGraphLaplacian::build(p, n));
      for (double c : {0.5, 2.0, 10.0}) {
        const auto scaled =
            derive_gbt(LineGraphLaplacian::build({c * p.edge_weight, c * p.vertex_weight, fam}, n));
        EXPECT_LE(max_abs(scaled.basis - base.basis), 1e-12) << "n=" << n << " c=" << c;
        EXPECT_LE((scaled.eigenvalues - c * base.eigenvalues).cwiseAbs().maxCoeff(), 1e-12 * c * 8);
      }
    }
  }
}

TEST(DeriveGbt, L2IsColumnwiseFlipOfL1) {
  for (int n : kSizes) {
    for (double w : kGrid) {
      for (double v : kGrid) {
        const auto a = derive_gbt(LineGraphLaplacian::build({w, v, GraphFamily::L1}, n));
        const auto b = derive_gbt(LineGraphLaplacian::build({w, v, GraphFamily::L2}, n));
        for (int k = 0; k < n; ++k) {
          const Eigen::VectorXd flipped = a.basis.col(k).reverse();
          const double sign = flipped.dot(b.basis.col(k)) >= 0 ? 1.0 : -1.0;
          ASSERT_LE((b.basis.col(k) - sign * flipped).cwiseAbs().maxCoeff(), 1e-10);
        }
      }
    }
  }
}

TEST(Separable, IdentityTransformsAndEnergy) {
  const auto id = TransformMatrix::identity(4);
  EXPECT_EQ(apply_separable(Eigen::MatrixXd::Identity(4, 4), id, id), Eigen::MatrixXd::Identity(4, 4));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const auto row = derive_gbt(LineGraphLaplacian::build({1, 0.75, GraphFamily::L1}, 8));
  const auto col = derive_gbt(LineGraphLaplacian::build({2, 1, GraphFamily::L2}, 8));
  for (int trial = 0; trial < 20; ++trial) {
    Block x(8, 8);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    const Block xh = apply_separable(x, row, col);
    EXPECT_NEAR(xh.norm(), x.norm(), 1e-10);
    EXPECT_LE(max_abs(inverse_separable(xh, row, col) - x), 1e-10);
    EXPECT_LE(max_abs(xh - col.basis.transpose() * x * row.basis), 0.0);
  }
  EXPECT_EQ(inverse_separable(Block::Zero(8, 8), row, col), Block::Zero(8, 8));
}

TEST(Separable, OuterProductOfBasisVectorsHitsOneCoefficient) {
  const auto row = derive_gbt(LineGraphLaplacian::build({1, 0.25, GraphFamily::L1}, 6));
  const auto col = derive_gbt(LineGraphLaplacian::build({1, 2, GraphFamily::L2}, 6));
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      const Block x = col.basis.col(a) * row.basis.col(b).transpose();
      Block expected = Block::Zero(6, 6);
      expected(a, b) = 1.0;
      ASSERT_LE(max_abs(apply_separable(x, row, col) - expected), 1e-12);
    }
  }
}

TEST(Separable, Dst7RoundTripAt32) {
  const auto t = derive_gbt(LineGraphLaplacian::build({1, 1, GraphFamily::L1}, 32));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-255, 255);
  Block x(32, 32);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  EXPECT_LE(max_abs(inverse_separable(apply_separable(x, t, t), t, t) - x), 1e-9);
}

TEST(Separable, DimensionMismatch) {
  const auto t4 = TransformMatrix::identity(4);
  const auto t8 = TransformMatrix::identity(8);
  EXPECT_THROW(apply_separable(Block::Zero(4, 4), t8, t4), Error);
  EXPECT_THROW(inverse_separable(Block::Zero(4, 8), t4, t4), Error);
}

TEST(BasisDump, HeaderAndRows) {
  const GraphParams p{1, 0.75, GraphFamily::L1};
  const auto t = derive_gbt(LineGraphLaplacian::build(p, 8));
  std::ostringstream s;
  write_basis_dump(s, t, p);
  std::istringstream in(s.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "GBT N=8 family=L1 w=1 v=0.75");
  Eigen::MatrixXd back(8, 8);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) in >> back(r, c);
  }
  EXPECT_EQ(back, t.basis);  // 17 digits round-trip doubles exactly
}

}  // namespace
}  // namespace gbst
