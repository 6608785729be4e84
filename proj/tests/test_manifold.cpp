#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracheat/eigensystem.hpp"
#include "fracheat/errors.hpp"
#include "fracheat/manifold.hpp"

using namespace fracheat;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Smallest K values of xi^T G^{-1} xi over the dual lattice, by enumeration.
std::vector<double> dual_lattice_eigenvalues(const Eigen::Matrix2d& G, double L0, double L1, int K) {
  const Eigen::Matrix2d Gi = G.inverse();
  std::vector<double> out;
  for (int a = -20; a <= 20; ++a)
    for (int b = -20; b <= 20; ++b) {
      const Eigen::Vector2d xi(kTwoPi * a / L0, kTwoPi * b / L1);
      out.push_back(xi.dot(Gi * xi));
    }
  std::sort(out.begin(), out.end());
  out.resize(static_cast<std::size_t>(K));
  return out;
}

}  // namespace

TEST(ManifoldSpectra, FlatCircleEigenvalues) {
  const EigenSystem sys = build_eigensystem(ManifoldModel::flat_circle(kTwoPi), 7);
  const std::vector<double> expected{0, 1, 1, 4, 4, 9, 9};
  ASSERT_EQ(sys.size(), 7);
  for (int k = 0; k < 7; ++k) EXPECT_NEAR(sys.eigenvalue(k), expected[static_cast<std::size_t>(k)], 1e-12);
}

TEST(ManifoldSpectra, DiagonalTorusMatchesLatticeEnumeration) {
  const double a = 1.7, b = 0.6;
  Eigen::Matrix2d G;
  G << a, 0, 0, b;
  const EigenSystem sys = build_eigensystem(ManifoldModel::flat_torus(G, {kTwoPi, kTwoPi}), 40);
  const auto expected = dual_lattice_eigenvalues(G, kTwoPi, kTwoPi, 40);
  for (int k = 0; k < 40; ++k) EXPECT_NEAR(sys.eigenvalue(k), expected[static_cast<std::size_t>(k)], 1e-10) << k;
}

TEST(ManifoldSpectra, SkewTorusMatchesLatticeEnumeration) {
  Eigen::Matrix2d G;
  G << 1.3, 0.4, 0.4, 0.9;
  const EigenSystem sys = build_eigensystem(ManifoldModel::flat_torus(G, {kTwoPi, 5.0}), 60);
  const auto expected = dual_lattice_eigenvalues(G, kTwoPi, 5.0, 60);
  for (int k = 0; k < 60; ++k) EXPECT_NEAR(sys.eigenvalue(k), expected[static_cast<std::size_t>(k)], 1e-10) << k;
  EXPECT_LT(sys.orthonormality_defect(), 1e-10);
}

TEST(ManifoldSpectra, ConstantGammaCircleIsRescaledFlatCircle) {
  const EigenSystem sys = build_eigensystem(ManifoldModel::variable_circle({4.0}, kTwoPi), 5);
  const std::vector<double> expected{0, 0.25, 0.25, 1, 1};
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(sys.eigenvalue(k), expected[static_cast<std::size_t>(k)], 1e-10);
  EXPECT_NEAR(sys.volume(), 2.0 * kTwoPi, 1e-12);
}

TEST(ManifoldSpectra, VariableCircleInvariants) {
  const ManifoldModel m = ManifoldModel::variable_circle({2.0, 0.0, 1.0}, kTwoPi);
  const EigenSystem sys = build_eigensystem(m, 24);
  EXPECT_EQ(sys.eigenvalue(0), 0.0);
  for (int k = 1; k < sys.size(); ++k) EXPECT_GE(sys.eigenvalue(k), sys.eigenvalue(k - 1));
  EXPECT_GT(sys.eigenvalue(1), 0.0);
  EXPECT_LT(sys.orthonormality_defect(), 1e-10);
  EXPECT_LT(sys.constant_overlap(), 1e-10);
  const Eigen::MatrixXd phi = sys.node_values();
  EXPECT_NEAR(phi.row(0).minCoeff(), 1.0 / std::sqrt(sys.volume()), 1e-12);
  EXPECT_NEAR(phi.row(0).maxCoeff(), 1.0 / std::sqrt(sys.volume()), 1e-12);
}

TEST(ManifoldSpectra, GalerkinDoublingLeavesEigenvaluesUnchanged) {
  const ManifoldModel m = ManifoldModel::variable_circle({2.0, 0.3, 0.5, -0.2}, kTwoPi);
  const int K = 24;
  const EigenSystem a = build_eigensystem(m, K, BuildOptions{4 * K + 1});
  const EigenSystem b = build_eigensystem(m, K, BuildOptions{8 * K + 1});
  for (int k = 1; k < K; ++k) EXPECT_NEAR(a.eigenvalue(k), b.eigenvalue(k), 1e-8 * b.eigenvalue(k)) << k;
}

TEST(ManifoldSpectra, MetricScalingDividesEigenvalues) {
  Eigen::Matrix2d G;
  G << 1.1, 0.2, 0.2, 0.8;
  const double c = 2.5;
  const EigenSystem a = build_eigensystem(ManifoldModel::flat_torus(G, {kTwoPi, kTwoPi}), 30);
  const EigenSystem b = build_eigensystem(ManifoldModel::flat_torus(c * G, {kTwoPi, kTwoPi}), 30);
  for (int k = 0; k < 30; ++k) EXPECT_NEAR(b.eigenvalue(k), a.eigenvalue(k) / c, 1e-13 * (1 + a.eigenvalue(k)));
}

TEST(ManifoldSpectra, InnerProductExamples) {
  const EigenSystem sys = build_eigensystem(ManifoldModel::flat_circle(kTwoPi), 9);
  const Eigen::MatrixXd phi = sys.node_values();
  std::vector<double> p3(phi.cols()), p5(phi.cols()), one(phi.cols(), 1.0);
  for (Eigen::Index i = 0; i < phi.cols(); ++i) {
    p3[static_cast<std::size_t>(i)] = phi(3, i);
    p5[static_cast<std::size_t>(i)] = phi(5, i);
  }
  EXPECT_NEAR(inner_product(p3, p3, sys), 1.0, 1e-12);
  EXPECT_NEAR(inner_product(p3, p5, sys), 0.0, 1e-12);
  EXPECT_NEAR(inner_product(one, one, sys), kTwoPi, 1e-12);
  std::vector<double> short_samples(3, 1.0);
  EXPECT_THROW(inner_product(short_samples, one, sys), ContractError);
}

TEST(ManifoldSpectra, ComplexInnerProductIsConjugateSymmetric) {
  const EigenSystem sys = build_eigensystem(ManifoldModel::flat_circle(kTwoPi), 9);
  const int n = sys.node_count();
  std::vector<std::complex<double>> f(static_cast<std::size_t>(n)), h(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = sys.quadrature().points(0, i);
    f[static_cast<std::size_t>(i)] = {std::cos(x), std::sin(2 * x)};
    h[static_cast<std::size_t>(i)] = {1.0 + std::sin(x), std::cos(3 * x)};
  }
  const auto fh = inner_product(f, h, sys), hf = inner_product(h, f, sys);
  EXPECT_NEAR(std::abs(fh - std::conj(hf)), 0.0, 1e-14);
}

TEST(ManifoldSpectra, InvalidModelsAreRejected) {
  Eigen::Matrix2d nonsym;
  nonsym << 1, 0.5, 0.2, 1;
  EXPECT_THROW(ManifoldModel::flat_torus(nonsym, {1.0, 1.0}), ConstructionError);
  Eigen::Matrix2d indefinite;
  indefinite << 1, 2, 2, 1;
  EXPECT_THROW(ManifoldModel::flat_torus(indefinite, {1.0, 1.0}), ConstructionError);
  EXPECT_THROW(ManifoldModel::variable_circle({0.5, 1.0}, kTwoPi), ConstructionError);
  EXPECT_THROW(ManifoldModel::flat_circle(-1.0), ConstructionError);
}

TEST(ManifoldSpectra, DegenerateTieBreakIsDeterministic) {
  Eigen::Matrix2d G = Eigen::Matrix2d::Identity();
  const ManifoldModel m = ManifoldModel::flat_torus(G, {kTwoPi, kTwoPi}, {24, 24});
  const EigenSystem a = build_eigensystem(m, 50), b = build_eigensystem(m, 50);
  EXPECT_EQ((a.node_values() - b.node_values()).cwiseAbs().maxCoeff(), 0.0);
  for (int k = 0; k < 50; ++k) EXPECT_EQ(a.mode_label(k), b.mode_label(k));
}

TEST(ManifoldSpectra, GeodesicDistance) {
  const ManifoldModel circle = ManifoldModel::flat_circle(kTwoPi);
  EXPECT_NEAR(geodesic_distance(circle, {0.1}, {6.2}), kTwoPi - 6.1, 1e-14);
  Eigen::Matrix2d G;
  G << 4, 0, 0, 1;
  const ManifoldModel torus = ManifoldModel::flat_torus(G, {kTwoPi, kTwoPi});
  EXPECT_NEAR(geodesic_distance(torus, {0.0, 0.0}, {1.0, 0.0}), 2.0, 1e-14);
  // gamma = 4 makes the metric length twice the coordinate length.
  const ManifoldModel vc = ManifoldModel::variable_circle({4.0}, kTwoPi);
  EXPECT_NEAR(geodesic_distance(vc, {1.0}, {2.5}), 3.0, 1e-9);
}
