#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fracheat/errors.hpp"
#include "fracheat/forward_solver.hpp"
#include "fracheat/operators.hpp"
#include "fracheat/random_fields.hpp"
#include "fracheat/sts_map.hpp"

using namespace fracheat;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

EigenSystem circle(int K) { return build_eigensystem(ManifoldModel::flat_circle(kTwoPi), K); }

SpaceTimeField random_field(const EigenSystem& sys, const TimeGrid& g, std::uint64_t seed, bool mean_zero) {
  RandomFieldOptions o;
  o.seed = seed;
  o.support_lo = -1.5;
  o.support_hi = 1.5;
  o.min_half_width = 0.5;
  o.max_half_width = 0.9;
  o.mean_zero = mean_zero;
  return random_smooth_field(sys, g, o);
}

}  // namespace

TEST(ForwardSolver, ZeroSourceGivesZeroSolution) {
  const EigenSystem sys = circle(9);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 256);
  const SolveReport r = solve_field(SpaceTimeField(sys, g, true), 0.5);
  EXPECT_EQ(r.solution.coeffs().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_FALSE(r.flagged);
}

TEST(ForwardSolver, ManufacturedMeanZeroSolution) {
  const EigenSystem sys = circle(64);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 1024);
  const SpaceTimeField w = random_field(sys, g, 12, true);
  const SpaceTimeField f = truncate_time(apply_Hs(w, 0.5), TimeSet::between(-3.0, 3.0));
  const SolveReport r = solve_field(f, 0.5);
  // The floor is set by the truncation of f at +-T, of order e^{-lambda_1 T / 2}.
  EXPECT_LT(r.relative_residual, 1e-5);
  EXPECT_LT(r.past_violation, 1e-6 * r.source_norm);
  const SpaceTimeField d = r.solution - w;
  EXPECT_LT(l2_norm_on(d, interior_mask(g, 3.0)), 1e-5 * l2_norm(w));
}

TEST(ForwardSolver, SourceWithConstantModeIsFlagged) {
  const EigenSystem sys = circle(9);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 1024);
  const SpaceTimeField f = random_field(sys, g, 13, false);
  const SolveReport r = solve_field(f, 0.5);
  EXPECT_TRUE(r.flagged);
  EXPECT_FALSE(r.diagnostics.empty());
  EXPECT_GT(r.relative_residual, 1e-6);
}

TEST(ForwardSolver, SolveIsLinear) {
  const EigenSystem sys = circle(9);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 256);
  const SpaceTimeField a = random_field(sys, g, 1, true), b = random_field(sys, g, 2, true);
  const SpaceTimeField lhs = solve_field(2.0 * a - b, 0.4).solution;
  const SpaceTimeField rhs = 2.0 * solve_field(a, 0.4).solution - solve_field(b, 0.4).solution;
  EXPECT_LT((lhs.coeffs() - rhs.coeffs()).cwiseAbs().maxCoeff(), 1e-12 * lhs.coeffs().cwiseAbs().maxCoeff());
}

TEST(ForwardSolver, SolveIsDeterministic) {
  const EigenSystem sys = circle(9);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 256);
  const SpaceTimeField f = random_field(sys, g, 3, true);
  const SolveReport a = solve_field(f, 0.5), b = solve_field(f, 0.5);
  EXPECT_EQ((a.solution.coeffs() - b.solution.coeffs()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(a.residual, b.residual);
}

TEST(ForwardSolver, BilinearFormsAgree) {
  const EigenSystem sys = circle(9);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 256);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SpaceTimeField u = random_field(sys, g, seed, false), v = random_field(sys, g, seed + 50, false);
    for (double s : {0.25, 0.5, 0.75}) {
      const cplx a = bilinear_form(u, v, s), b = bilinear_form_two_factor(u, v, s);
      EXPECT_LT(std::abs(a - b), 1e-12 * l2_norm(u) * l2_norm(v)) << seed << " " << s;
      EXPECT_LT(std::abs(a - l2_inner(apply_Hs(u, s), v)), 1e-12 * l2_norm(u) * l2_norm(v));
    }
  }
}

TEST(ForwardSolver, CoercivityFloorHoldsPerBin) {
  const EigenSystem sys = circle(9);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 256);
  for (double s : {0.25, 0.5, 0.99}) {
    const WellposednessReport r = verify_wellposedness(6, s, sys, g, 5);
    EXPECT_TRUE(r.passed) << s;
    EXPECT_GE(r.min_coercivity_ratio, std::cos(s * std::numbers::pi / 2) - 1e-9);
    EXPECT_LE(r.max_boundedness_ratio, 1.0 + 1e-9);
  }
}

TEST(ForwardSolver, HorizonIsRequired) {
  const EigenSystem sys = circle(3);
  const TimeGrid g(6.0, 64);
  EXPECT_THROW(solve_field(SpaceTimeField(sys, g, true), 0.5), ContractError);
}

TEST(ForwardSolver, SourceToSolutionMapIsLinearAndRestricted) {
  const EigenSystem sys = circle(17);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 256);
  const std::vector<int> patch = nodes_in_box(sys.quadrature(), {1.0}, {3.0});
  ASSERT_FALSE(patch.empty());
  const SourceToSolutionMap S = make_sts(sys, patch, 3.0, 0.5, g);
  const Cylinder cyl{patch, -1.5, 1.5};
  const SourceFunction f1 = SourceFunction::from_field(random_field(sys, g, 21, false), cyl);
  const SourceFunction f2 = SourceFunction::from_field(random_field(sys, g, 22, false), cyl);

  const RestrictedSamples zero = S(SourceFunction::zero(sys, g, cyl));
  EXPECT_EQ(zero.values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(zero.nodes, patch);
  EXPECT_EQ(zero.times, interior_indices(g, -3.0, 3.0));

  const RestrictedSamples a = S(f1.scaled(2.0).plus(f2.scaled(-1.0)));
  const RestrictedSamples b1 = S(f1), b2 = S(f2);
  const Eigen::MatrixXcd lin = 2.0 * b1.values - b2.values;
  EXPECT_LT((a.values - lin).cwiseAbs().maxCoeff(), 1e-12 * lin.cwiseAbs().maxCoeff());

  const SpaceTimePoint p{patch[patch.size() / 2], g.nearest_index(1.0)};
  const cplx probe = S.probe(f1, p);
  const auto it = std::find(b1.times.begin(), b1.times.end(), p.time);
  ASSERT_NE(it, b1.times.end());
  EXPECT_NEAR(std::abs(probe - b1.values(static_cast<Eigen::Index>(patch.size() / 2), it - b1.times.begin())), 0.0,
              1e-13 * std::abs(probe));
}

TEST(ForwardSolver, SourceMustStayOnThePatch) {
  const EigenSystem sys = circle(17);
  const TimeGrid g = TimeGrid::padded(3.0, 4.0, 128);
  const std::vector<int> patch = nodes_in_box(sys.quadrature(), {1.0}, {3.0});
  const SourceToSolutionMap S = make_sts(sys, patch, 3.0, 0.5, g);
  const std::vector<int> elsewhere = nodes_in_box(sys.quadrature(), {4.0}, {5.0});
  const SourceFunction off = SourceFunction::zero(sys, g, Cylinder{elsewhere, -1.0, 1.0});
  EXPECT_THROW(S(off), ContractError);
}
