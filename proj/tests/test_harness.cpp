#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fracheat/errors.hpp"
#include "fracheat/harness.hpp"
#include "fracheat/heat_kernel.hpp"
#include "fracheat/multiplier.hpp"
#include "fracheat/operators.hpp"
#include "fracheat/parallel.hpp"
#include "fracheat/random_fields.hpp"

using namespace fracheat;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

// Circles of lengths 2 pi and 2.5 pi with node spacing pi / 40 on both.
MetricPair circle_pair(bool distinct, int K) {
  const ManifoldModel a = ManifoldModel::flat_circle(kTwoPi, 1.0, 80);
  const ManifoldModel b = distinct ? ManifoldModel::flat_circle(2.5 * kPi, 1.0, 100) : a;
  return MetricPair(a, b, K, {{1.6}, {4.7}}, {{1.9}, {2.9}}, {{3.4}, {4.4}});
}

TimeGrid harness_grid() { return TimeGrid::padded(3.0, 4.0, 512); }

SpaceTimeField random_field(const EigenSystem& sys, const TimeGrid& g, std::uint64_t seed, bool mean_zero) {
  RandomFieldOptions o;
  o.seed = seed;
  o.support_lo = -1.5;
  o.support_hi = 1.5;
  o.min_half_width = 0.6;
  o.max_half_width = 0.9;
  o.mean_zero = mean_zero;
  return random_smooth_field(sys, g, o);
}

// Dense DFT matrix with the forward transform normalization.
Eigen::MatrixXcd dft_matrix(const TimeGrid& g) {
  Eigen::MatrixXcd F(g.size(), g.size());
  for (int m = 0; m < g.size(); ++m)
    for (int j = 0; j < g.size(); ++j)
      F(m, j) = std::polar(g.dt() / std::sqrt(kTwoPi), -g.frequency(m) * g.time(j));
  return F;
}

}  // namespace

TEST(InverseHarness, FiniteDifferenceWeights) {
  const std::vector<double> o3{-1.0, 0.0, 1.0};
  const auto d1 = fd_weights(1, o3), d2 = fd_weights(2, o3);
  EXPECT_NEAR(d1[0], -0.5, 1e-15);
  EXPECT_NEAR(d1[1], 0.0, 1e-15);
  EXPECT_NEAR(d1[2], 0.5, 1e-15);
  EXPECT_NEAR(d2[0], 1.0, 1e-15);
  EXPECT_NEAR(d2[1], -2.0, 1e-15);
  EXPECT_NEAR(d2[2], 1.0, 1e-15);
  // One-sided stencils differentiate polynomials of degree < n exactly.
  const std::vector<double> o5{0.0, 1.0, 2.0, 3.0, 4.0};
  const auto w = fd_weights(1, o5);
  double acc = 0.0;
  for (std::size_t i = 0; i < o5.size(); ++i) acc += w[i] * std::pow(o5[i] + 0.5, 4);
  EXPECT_NEAR(acc, 4 * std::pow(0.5, 3), 1e-12);
  EXPECT_THROW(fd_weights(3, o3), ContractError);
}

TEST(InverseHarness, LocalPowerMatchesSpectralOperator) {
  const ManifoldModel model = ManifoldModel::flat_circle(kTwoPi, 1.0, 256);
  const EigenSystem sys = build_eigensystem(model, 255);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 1024);
  const std::vector<int> patch = nodes_in_box(sys.quadrature(), {1.0}, {5.0});
  const SourceFunction f = raised_cosine_source(sys, g, patch, {{2.0}, {4.0}}, -1.5, 1.5, 9);
  const SourceFunction h = local_parabolic_power(f, 1, model, patch);
  const auto op = SpectralMultiplier::custom([](double rho, double lam) { return cplx(lam, rho); }, "H", true);
  const SpaceTimeField ref = apply_multiplier(f.field(), op);
  std::vector<int> times(static_cast<std::size_t>(g.size()));
  for (int j = 0; j < g.size(); ++j) times[static_cast<std::size_t>(j)] = j;
  const Eigen::MatrixXcd r = ref.synthesize(h.support().patch, times);
  const double scale = r.cwiseAbs().maxCoeff();
  EXPECT_LT((r.real() - h.samples()).cwiseAbs().maxCoeff(), 1e-8 * scale);
}

TEST(InverseHarness, LocalPowerPreservesSupportAndMeanZero) {
  const ManifoldModel model = ManifoldModel::flat_circle(kTwoPi, 1.0, 128);
  const EigenSystem sys = build_eigensystem(model, 64);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 512);
  const std::vector<int> patch = nodes_in_box(sys.quadrature(), {1.0}, {5.0});
  const SourceFunction f = raised_cosine_source(sys, g, patch, {{2.0}, {4.0}}, -1.5, 1.5, 9);
  const SourceFunction h = local_parabolic_power(f, 2, model, patch);
  EXPECT_EQ(h.support().patch, f.support().patch);
  EXPECT_EQ(h.support().t_a, f.support().t_a);
  // Space-time integral of a derivative of a compactly supported function.
  double total = 0.0, mag = 0.0;
  const auto& w = sys.quadrature().weights;
  for (Eigen::Index i = 0; i < h.samples().rows(); ++i) {
    total += w(h.support().patch[static_cast<std::size_t>(i)]) * h.samples().row(i).sum() * g.dt();
    mag += w(h.support().patch[static_cast<std::size_t>(i)]) * h.samples().row(i).cwiseAbs().sum() * g.dt();
  }
  EXPECT_LT(std::abs(total), 1e-8 * mag);
  const SourceFunction tight = raised_cosine_source(sys, g, patch, {{1.0}, {5.0}}, -1.5, 1.5, 9);
  EXPECT_THROW(local_parabolic_power(tight, 1, model, nodes_in_box(sys.quadrature(), {1.0}, {5.0})), ContractError);
}

TEST(InverseHarness, RaisedCosineHasUnitMass) {
  const EigenSystem sys = build_eigensystem(ManifoldModel::flat_circle(kTwoPi, 1.0, 128), 16);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 512);
  const std::vector<int> all = nodes_in_box(sys.quadrature(), {0.0}, {kTwoPi});
  const SourceFunction f = raised_cosine_source(sys, g, all, {{2.0}, {4.0}}, -1.0, 1.0, 9);
  double mass = 0.0;
  for (Eigen::Index i = 0; i < f.samples().rows(); ++i)
    mass += sys.quadrature().weights(f.support().patch[static_cast<std::size_t>(i)]) * f.samples().row(i).sum() * g.dt();
  EXPECT_NEAR(mass, 1.0, 1e-13);
  for (int j = 0; j < g.size(); ++j)
    if (!(g.time(j) > -1.0 && g.time(j) < 1.0)) {
      EXPECT_EQ(f.samples().col(j).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(InverseHarness, SourceToSolutionMatchesDenseOperator) {
  const EigenSystem sys = build_eigensystem(ManifoldModel::flat_circle(kTwoPi, 1.0, 16), 3);
  const TimeGrid g = TimeGrid::padded(3.0, 2.0, 64);
  const std::vector<int> patch = nodes_in_box(sys.quadrature(), {1.0}, {4.0});
  const SourceToSolutionMap S = make_sts(sys, patch, 3.0, 0.5, g);
  const SourceFunction f = raised_cosine_source(sys, g, patch, {{1.5}, {3.5}}, -1.0, 1.0, 3);
  const RestrictedSamples out = S(f);

  const Eigen::MatrixXcd F = dft_matrix(g);
  const Eigen::MatrixXcd Finv = F.inverse();
  const SpaceTimeField fk = f.field();
  const auto inv = SpectralMultiplier::inv_frac_power(0.5);
  Eigen::MatrixXcd u(sys.size(), g.size());
  for (int k = 0; k < sys.size(); ++k) {
    Eigen::VectorXcd m(g.size());
    for (int b = 0; b < g.size(); ++b) m(b) = inv.bin_value(g, b, sys.eigenvalue(k));
    const Eigen::VectorXcd row = fk.coeffs().row(k).transpose();
    u.row(k) = (Finv * m.asDiagonal() * F * row).transpose();
  }
  const Eigen::MatrixXd phi = sys.node_values(patch);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < patch.size(); ++i)
    for (std::size_t c = 0; c < out.times.size(); ++c) {
      const cplx v = phi.col(static_cast<Eigen::Index>(i)).cast<cplx>().dot(u.col(out.times[c]));
      worst = std::max(worst, std::abs(v - out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c))));
      scale = std::max(scale, std::abs(v));
    }
  EXPECT_LT(worst, 1e-12 * scale);
}

TEST(InverseHarness, EqualPairIsBitIdentical) {
  set_thread_count(1);
  const MetricPair pair = circle_pair(false, 64);
  EXPECT_EQ(pair.metric_mismatch(), 0.0);
  const TimeGrid g = harness_grid();
  HarnessOptions opt;
  opt.taus = log_spaced(0.1, 5.0, 8);
  opt.eta = log_spaced(0.05, 20.0, 16);
  const DistinguishReport r = kernel_compare(pair, g, opt);
  for (const cplx& m : r.moments.moments) EXPECT_EQ(m, cplx(0.0));
  for (const cplx& p : r.phi.phi) EXPECT_EQ(p, cplx(0.0));
  EXPECT_EQ(r.kernels.max_difference, 0.0);
  EXPECT_EQ(r.verdict, Verdict::ConsistentWithEqualKernels);
  EXPECT_EQ(r.moments.moments.size(), 9u);
  for (double sc : r.moments.source_scale) EXPECT_GT(sc, 0.0);
}

TEST(InverseHarness, DistinctCirclesAreDistinguished) {
  const MetricPair pair = circle_pair(true, 64);
  const TimeGrid g = harness_grid();
  HarnessOptions opt;
  opt.taus = log_spaced(0.1, 5.0, 8);
  opt.eta = log_spaced(0.05, 20.0, 16);
  const DistinguishReport r = kernel_compare(pair, g, opt);
  EXPECT_EQ(r.verdict, Verdict::Distinguished);
  EXPECT_GT(std::max(r.max_moment_ratio, r.kernel_ratio), 1e-5);
}

TEST(InverseHarness, PatchesMustAgreeAndOmegasMustSeparate) {
  const ManifoldModel a = ManifoldModel::flat_circle(kTwoPi, 1.0, 80);
  const ManifoldModel b = ManifoldModel::flat_circle(kTwoPi, 2.0, 80);
  EXPECT_THROW(MetricPair(a, b, 16, {{1.6}, {4.7}}, {{1.9}, {2.9}}, {{3.4}, {4.4}}), ConstructionError);
  EXPECT_THROW(MetricPair(a, a, 16, {{1.6}, {4.7}}, {{1.9}, {3.4}}, {{3.4}, {4.4}}), ContractError);
  EXPECT_THROW(MetricPair(a, a, 16, {{1.6}, {4.7}}, {{1.0}, {2.9}}, {{3.4}, {4.4}}), ContractError);
}

TEST(InverseHarness, ShearChartGivesIsometricKernels) {
  Eigen::Matrix2d A;
  A << 1, 1, 0, 1;
  const Eigen::Matrix2d G2 = A.transpose() * A;
  const ManifoldModel first = ManifoldModel::flat_torus(Eigen::Matrix2d::Identity(), {kTwoPi, kTwoPi}, {32, 32});
  const ManifoldModel second = ManifoldModel::flat_torus(G2, {kTwoPi, kTwoPi}, {32, 32});
  // 81 = number of integer points with a^2 + b^2 <= 25, a complete set of shells.
  const MetricPair pair(first, second, 81, {{1.6, 1.6}, {4.7, 4.7}}, {{1.9, 1.9}, {2.9, 4.4}},
                        {{3.4, 1.9}, {4.4, 4.4}}, AffineChart{A, Eigen::Vector2d::Zero()});
  EXPECT_LT(pair.metric_mismatch(), 1e-14);
  for (int k = 0; k < 81; ++k) EXPECT_NEAR(pair.system(0).eigenvalue(k), pair.system(1).eigenvalue(k), 1e-12);
  const KernelComparison kc = compare_kernels(pair, {0.1, 1.0, 5.0}, 64);
  EXPECT_LT(kc.max_difference, 1e-10);
}

TEST(InverseHarness, SwappedOmegasExchangeRoles) {
  const MetricPair pair = circle_pair(true, 32);
  const MetricPair sw = pair.swapped_omegas();
  EXPECT_EQ(sw.omega1(), pair.omega2());
  EXPECT_EQ(sw.omega2(), pair.omega1());
  EXPECT_EQ(sw.omega_box(1).lo, pair.omega_box(2).lo);
  const KernelComparison a = compare_kernels(pair, {0.5}, 64), b = compare_kernels(sw, {0.5}, 64);
  EXPECT_EQ(a.max_difference, b.max_difference);
}

TEST(InverseHarness, KernelIsInvariantUnderDegenerateMixing) {
  const EigenSystem sys = build_eigensystem(ManifoldModel::flat_circle(kTwoPi, 1.0, 64), 33);
  const EigenSystem mixed = mix_degenerate_modes(sys, 17);
  EXPECT_GT((mixed.node_values() - sys.node_values()).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_LT(mixed.orthonormality_defect(), 1e-12);
  for (double tau : {0.05, 0.5, 2.0})
    for (int z : {0, 5, 31}) EXPECT_NEAR(heat_kernel(3, z, tau, sys).value, heat_kernel(3, z, tau, mixed).value, 1e-12);
}

TEST(InverseHarness, TimeIntegratedFlowIsTheHeatFlow) {
  const EigenSystem sys = build_eigensystem(ManifoldModel::variable_circle({2.0, 0.0, 1.0}, kTwoPi), 16);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 512);
  const SpaceTimeField f = random_field(sys, g, 4, false);
  const TimeIntegratedFlow r = time_integrated_flow(f, {0.0, 0.1, 1.0, 5.0});
  EXPECT_LT(r.max_deviation, 1e-12);
  EXPECT_LT(r.heat_residual, 1e-8);
  for (double m : r.mass) EXPECT_NEAR(m, r.mass.front(), 1e-12 * std::abs(r.mass.front()));
}

TEST(InverseHarness, TildeSolutionSatisfiesTheDoubleHeatEquation) {
  const EigenSystem sys = build_eigensystem(ManifoldModel::flat_circle(kTwoPi), 17);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 512);
  const SpaceTimeField u = random_field(sys, g, 6, false);
  const TildeReport r = tilde_solution_check(u, {0.0, 0.5, 2.0, 5.0});
  EXPECT_EQ(r.initial_defect, 0.0);
  EXPECT_LT(r.max_pde_residual, 1e-6);
  EXPECT_LT(r.max_past_value, 1e-6);
}

TEST(InverseHarness, SemigroupPointValueVanishesBeforeTheSupport) {
  const EigenSystem sys = build_eigensystem(ManifoldModel::flat_circle(kTwoPi, 1.0, 64), 16);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 256);
  const std::vector<int> all = nodes_in_box(sys.quadrature(), {0.0}, {kTwoPi});
  const SourceFunction f = raised_cosine_source(sys, g, all, {{2.0}, {4.0}}, -1.0, 1.0, 9);
  const int j = g.nearest_index(0.5);
  EXPECT_EQ(semigroup_point_value(f, 1.6, 20, j), cplx(0.0));
  EXPECT_NE(semigroup_point_value(f, 0.2, 20, j), cplx(0.0));
  const SpaceTimeField ref = heat_semigroup_apply(f.field(), 0.5);
  const cplx direct = ref.synthesize({20}, {j})(0, 0);
  EXPECT_NEAR(std::abs(semigroup_point_value(f, 0.5, 20, j) - direct), 0.0, 1e-12 * std::abs(direct));
}

TEST(InverseHarness, VerdictClassification) {
  const Thresholds t;
  EXPECT_EQ(classify(2e-5, 0.0, t), Verdict::Distinguished);
  EXPECT_EQ(classify(0.0, 2e-5, t), Verdict::Distinguished);
  EXPECT_EQ(classify(1e-9, 1e-9, t), Verdict::ConsistentWithEqualKernels);
  EXPECT_EQ(classify(1e-6, 0.0, t), Verdict::Inconclusive);
  EXPECT_EQ(to_string(Verdict::ConsistentWithEqualKernels), "consistent-with-equal-kernels");
  const auto v = log_spaced(0.1, 10.0, 3);
  EXPECT_DOUBLE_EQ(v[0], 0.1);
  EXPECT_NEAR(v[1], 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(v[2], 10.0);
}
