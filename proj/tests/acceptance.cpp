// Acceptance suite: one PASS/FAIL line per criterion, detail lines indented.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracheat/balakrishnan.hpp"
#include "fracheat/forward_solver.hpp"
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

// Default scale.
constexpr int kDefaultModes = 64;  // per dimension
constexpr int kSamples = 1024;
constexpr double kPad = 4.0;
constexpr double kHorizon = 3.0;

// Pinned tolerances and thresholds.
constexpr double kSymbolRelTol = 1e-6;          // 1
constexpr double kMassAbsTol = 1e-8;            // 2
constexpr double kCoercivitySlack = 1e-9;       // 3
constexpr double kBoundednessSlack = 1e-9;      // 3
constexpr int kMinTrials = 100;                 // 3, 4, 10
constexpr double kAdjointRelTol = 1e-10;        // 4
constexpr double kRoundTripRelTol = 1e-6;       // 5
constexpr double kLeakageRelTol = 1e-6;         // 5
constexpr double kPadImprovement = 10.0;        // 5
constexpr double kCausalityRelTol = 1e-6;       // 6
constexpr double kTildeResidualTol = 1e-6;      // 7
constexpr double kTildePastTol = 1e-6;          // 7
constexpr double kTauStep = 1e-3;               // 7
constexpr double kTildeTauMax = 5.0;            // 7
constexpr double kEqualPipelineTol = 1e-10;     // 8
constexpr double kDistinguishTol = 1e-5;        // 9
constexpr double kVolumeRatioMin = 1.2;         // 9
constexpr double kSensitivityTauLo = 0.1;       // 9
constexpr double kSensitivityTauHi = 5.0;       // 9
constexpr double kRuntimeBudgetSeconds = 300.0; // 9
constexpr double kDecaySlack = 1e-9;            // 10
constexpr double kFitTauLo = 0.01;              // 11
constexpr double kFitTauHi = 1.0;               // 11
constexpr double kFitR2Min = 0.999;             // 11

struct Outcome {
  bool pass = false;
  std::vector<std::string> details;
  std::string verdict;  // criteria with a categorical result
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

void note(Outcome& o, std::string s) { o.details.push_back(std::move(s)); }

TimeGrid default_grid(double pad = kPad, int samples = kSamples) {
  return TimeGrid::padded(kHorizon, pad, samples);
}

EigenSystem flat_circle(int K) { return build_eigensystem(ManifoldModel::flat_circle(kTwoPi), K); }

// gamma(x) = 2 + sin x.
ManifoldModel variable_circle() { return ManifoldModel::variable_circle({2.0, 0.0, 1.0}, kTwoPi); }

// Smooth random fields supported in [lo, hi] with bumps resolved on the default grid.
SpaceTimeField random_field(const EigenSystem& sys, const TimeGrid& g, std::uint64_t seed, bool mean_zero,
                            double lo, double hi, bool complex_values = false) {
  RandomFieldOptions o;
  o.seed = seed;
  o.support_lo = lo;
  o.support_hi = hi;
  o.min_half_width = 0.15 * (hi - lo);
  o.max_half_width = 0.3 * (hi - lo);
  o.mean_zero = mean_zero;
  o.complex_values = complex_values;
  return random_smooth_field(sys, g, o);
}

// ---------------------------------------------------------------------------

Outcome criterion_1(int) {
  Outcome o;
  o.pass = true;
  const std::vector<double> lambdas{0.0, 1.0, 10.0};
  const std::vector<double> rhos{0.0, 1.0, -1.0, 10.0, -10.0};
  for (double s : {0.25, 0.5, 0.75}) {
    double worst_fwd = 0.0, worst_inv = 0.0;
    for (double lam : lambdas)
      for (double rho : rhos) {
        if (lam == 0.0 && rho == 0.0) continue;
        const cplx exact = principal_power(rho, lam, s);
        const cplx exact_inv = principal_power(rho, lam, -s);
        worst_fwd = std::max(worst_fwd, std::abs(balakrishnan_symbol(s, lam, rho) - exact) / std::abs(exact));
        worst_inv =
            std::max(worst_inv, std::abs(gamma_inverse_symbol(s, lam, rho) - exact_inv) / std::abs(exact_inv));
      }
    note(o, "s=" + fmt("%.2f", s) + " max rel err H^s " + sci(worst_fwd) + ", H^-s " + sci(worst_inv) + " (tol " +
                sci(kSymbolRelTol) + ")");
    o.pass = o.pass && worst_fwd < kSymbolRelTol && worst_inv < kSymbolRelTol;
  }
  return o;
}

Outcome criterion_2(int K) {
  Outcome o;
  o.pass = true;
  const std::vector<std::pair<std::string, ManifoldModel>> models{
      {"flat circle", ManifoldModel::flat_circle(kTwoPi)}, {"variable circle 2+sin x", variable_circle()}};
  for (const auto& [name, model] : models) {
    const HeatKernelEvaluator H(build_eigensystem(model, K));
    double worst = 0.0;
    for (double tau : {0.1, 1.0, 10.0})
      for (int x = 0; x < H.system().node_count(); ++x) worst = std::max(worst, std::abs(H.row_integral(x, tau) - 1.0));
    note(o, name + ": max |mass - 1| " + sci(worst) + " over " + std::to_string(H.system().node_count()) +
                " nodes (tol " + sci(kMassAbsTol) + ")");
    o.pass = o.pass && worst < kMassAbsTol;
  }
  return o;
}

Outcome criterion_3(int K) {
  Outcome o;
  o.pass = true;
  const EigenSystem sys = flat_circle(K);
  const TimeGrid g = default_grid();
  for (double s : {0.25, 0.5, 0.75, 0.99}) {
    const WellposednessReport r = verify_wellposedness(kMinTrials, s, sys, g, 11);
    const double floor = std::cos(s * kPi / 2);
    const bool ok = r.min_coercivity_ratio >= floor - kCoercivitySlack &&
                    r.max_boundedness_ratio <= 1.0 + kBoundednessSlack;
    note(o, "s=" + fmt("%.2f", s) + " trials " + std::to_string(r.trials) + ": min coercivity " +
                fmt("%.12f", r.min_coercivity_ratio) + " vs floor " + fmt("%.12f", floor) + ", max boundedness " +
                fmt("%.12f", r.max_boundedness_ratio));
    o.pass = o.pass && ok;
  }
  return o;
}

Outcome criterion_4(int K) {
  Outcome o;
  const EigenSystem sys = flat_circle(K);
  const TimeGrid g = default_grid();
  double worst = 0.0;
  int pairs = 0;
  for (double s : {0.25, 0.5, 0.75})
    for (int t = 0; t < kMinTrials; ++t) {
      const auto seed = static_cast<std::uint64_t>(1000 * t + 7);
      const SpaceTimeField u = random_field(sys, g, seed, false, -0.9 * kHorizon, 0.9 * kHorizon, true);
      const SpaceTimeField v = random_field(sys, g, seed + 1, false, -0.9 * kHorizon, 0.9 * kHorizon, true);
      const cplx a = l2_inner(apply_Hs(u, s), v);
      const cplx b = l2_inner(apply_Hs(u, s / 2), apply_Hs_adjoint(v, s / 2));
      worst = std::max(worst, std::abs(a - b) / (l2_norm(u) * l2_norm(v)));
      ++pairs;
    }
  note(o, std::to_string(pairs) + " pairs, max |<H^s u,v> - (H^{s/2}u, H^{s/2}_* v)| / (|u||v|) " + sci(worst) +
              " (tol " + sci(kAdjointRelTol) + ")");
  o.pass = worst < kAdjointRelTol;
  return o;
}

struct RoundTrip {
  double residual = 0.0;
  double leakage = 0.0;
};

// Manufactured w supported in [-T/2, T/2]; f is H^s w cut to its support cylinder.
RoundTrip round_trip(const EigenSystem& sys, double pad, int samples, std::uint64_t seed, bool mean_zero, double s) {
  const TimeGrid g = default_grid(pad, samples);
  const SpaceTimeField w = random_field(sys, g, seed, mean_zero, -0.5 * kHorizon, 0.5 * kHorizon);
  const SpaceTimeField f = truncate_time(apply_Hs(w, s), TimeSet::between(-kHorizon, kHorizon));
  const SolveReport r = solve_field(f, s);
  return {r.relative_residual, r.past_violation / r.source_norm};
}

Outcome criterion_5(int K) {
  Outcome o;
  o.pass = true;
  const EigenSystem sys = flat_circle(K);
  const double s = 0.5;
  for (bool mean_zero : {false, true}) {
    RoundTrip a{}, b{};
    double min_gain_res = std::numeric_limits<double>::infinity(), min_gain_leak = min_gain_res;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const RoundTrip p4 = round_trip(sys, kPad, kSamples, seed, mean_zero, s);
      // Doubling the pad keeps dt fixed.
      const RoundTrip p8 = round_trip(sys, 2 * kPad, 2 * kSamples, seed, mean_zero, s);
      a.residual = std::max(a.residual, p4.residual);
      a.leakage = std::max(a.leakage, p4.leakage);
      b.residual = std::max(b.residual, p8.residual);
      b.leakage = std::max(b.leakage, p8.leakage);
      min_gain_res = std::min(min_gain_res, p4.residual / p8.residual);
      min_gain_leak = std::min(min_gain_leak, p4.leakage / p8.leakage);
    }
    const bool ok = a.residual < kRoundTripRelTol && a.leakage < kLeakageRelTol && min_gain_res >= kPadImprovement &&
                    min_gain_leak >= kPadImprovement;
    note(o, std::string(mean_zero ? "mean-zero fields" : "general fields") + ": residual " + sci(a.residual) +
                " (pad 8: " + sci(b.residual) + ", gain " + fmt("%.2f", min_gain_res) + "x), leakage " +
                sci(a.leakage) + " (pad 8: " + sci(b.leakage) + ", gain " + fmt("%.2f", min_gain_leak) + "x)" +
                (ok ? "" : " -> fails"));
    o.pass = o.pass && ok;
  }
  return o;
}

// Smooth bump supported in (T, T + 2) added to every mode.
SpaceTimeField future_bump(const EigenSystem& sys, const TimeGrid& g) {
  SpaceTimeField d(sys, g, true);
  for (int j = 0; j < g.size(); ++j) {
    const double v = gaussian_window(g.time(j), kHorizon + 1.0, 0.9);
    if (v == 0.0) continue;
    for (int k = 0; k < d.modes(); ++k) d(k, j) = v / (1.0 + k);
  }
  return d;
}

Outcome criterion_6(int K) {
  Outcome o;
  o.pass = true;
  const EigenSystem sys = flat_circle(K);
  const TimeGrid g = default_grid();
  const std::vector<bool> inner = interior_mask(g, kHorizon);
  const double s = 0.5;
  SpaceTimeField bump = future_bump(sys, g);
  SpaceTimeField bump_mz = bump;
  bump_mz.coeffs().row(0).setZero();
  for (bool mean_zero : {false, true}) {
    const SpaceTimeField& d = mean_zero ? bump_mz : bump;
    double worst_op = 0.0, worst_solve = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const SpaceTimeField u = random_field(sys, g, seed, mean_zero, -0.9 * kHorizon, 0.9 * kHorizon);
      const SpaceTimeField hu = apply_Hs(u, s);
      const double op = l2_norm_on(apply_Hs(u + d, s) - hu, inner) / l2_norm_on(hu, inner);
      const SpaceTimeField base = solve_field(u, s).solution;
      const double sv = l2_norm_on(solve_field(u + d, s).solution - base, inner) / l2_norm_on(base, inner);
      worst_op = std::max(worst_op, op);
      worst_solve = std::max(worst_solve, sv);
    }
    const bool ok = worst_op < kCausalityRelTol && worst_solve < kCausalityRelTol;
    note(o, std::string(mean_zero ? "mean-zero fields" : "general fields") + ": H^s change " + sci(worst_op) +
                ", solve change " + sci(worst_solve) + " (tol " + sci(kCausalityRelTol) + ")" + (ok ? "" : " -> fails"));
    o.pass = o.pass && ok;
  }
  return o;
}

Outcome criterion_7(int K) {
  Outcome o;
  const EigenSystem sys = build_eigensystem(variable_circle(), K);
  const TimeGrid g = default_grid();
  std::vector<double> taus = log_spaced(1e-3, kTildeTauMax, 24);
  double res = 0.0, past = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SpaceTimeField u = random_field(sys, g, seed, false, -0.9 * kHorizon, 0.9 * kHorizon);
    const TildeReport r = tilde_solution_check(u, taus, kTauStep);
    res = std::max(res, r.max_pde_residual);
    past = std::max(past, r.max_past_value);
  }
  note(o, "variable circle, 5 fields, 24 taus in (0, 5]: PDE residual " + sci(res) + ", |u~(-T)| " + sci(past) +
              " relative to |u| (tol " + sci(kTildeResidualTol) + ")");
  o.pass = res < kTildeResidualTol && past < kTildePastTol;
  return o;
}

MetricPair torus_pair(int modes, bool distinct) {
  const std::vector<double> p1{kTwoPi, kTwoPi};
  const std::vector<double> p2{distinct ? 2.5 * kPi : kTwoPi, kTwoPi};
  const ManifoldModel a = ManifoldModel::flat_torus(Eigen::Matrix2d::Identity(), p1, {80, 80});
  const ManifoldModel b = ManifoldModel::flat_torus(Eigen::Matrix2d::Identity(), p2, {distinct ? 100 : 80, 80});
  return MetricPair(a, b, modes * modes, {{1.6, 1.6}, {4.7, 4.7}}, {{1.9, 1.9}, {2.9, 4.4}},
                    {{3.4, 1.9}, {4.4, 4.4}});
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const cplx& c : v) m = std::max(m, std::abs(c));
  return m;
}

Outcome criterion_8(int modes) {
  Outcome o;
  const int saved = thread_count();
  set_thread_count(1);
  const MetricPair pair = torus_pair(modes, false);
  const DistinguishReport r = kernel_compare(pair, default_grid());
  set_thread_count(saved);
  const double m = max_abs(r.moments.moments), p = max_abs(r.phi.phi), k = r.kernels.max_difference;
  const bool bit = m == 0.0 && p == 0.0 && k == 0.0;
  note(o, "K=" + std::to_string(modes) + "^2: max |moment| " + sci(m) + " (m <= " +
              std::to_string(r.moments.moments.size() - 1) + "), max |phi| " + sci(p) + " over " +
              std::to_string(r.phi.phi.size()) + " etas, kernel sup diff " + sci(k) + (bit ? ", bit-identical" : ""));
  o.verdict = to_string(r.verdict);
  note(o, "verdict " + o.verdict);
  o.pass = m < kEqualPipelineTol && p < kEqualPipelineTol && k < kEqualPipelineTol && bit;
  return o;
}

Outcome criterion_9(int modes) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const MetricPair pair = torus_pair(modes, true);
  const double ratio = pair.system(1).volume() / pair.system(0).volume();
  HarnessOptions opt;
  opt.taus = log_spaced(kSensitivityTauLo, kSensitivityTauHi, 40);
  opt.thresholds.distinguish = kDistinguishTol;
  const DistinguishReport r = kernel_compare(pair, default_grid(), opt);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.verdict = to_string(r.verdict);
  note(o, "K=" + std::to_string(modes) + "^2, volume ratio " + fmt("%.3f", ratio) + ", metric mismatch on O " +
              sci(pair.metric_mismatch()));
  note(o, "max normalized moment " + sci(r.max_moment_ratio) + ", kernel ratio " + sci(r.kernel_ratio) +
              " on tau in [0.1, 5] (threshold " + sci(kDistinguishTol) + ")");
  note(o, "verdict " + o.verdict + ", runtime " + fmt("%.1f", seconds) + " s (budget " +
              fmt("%.0f", kRuntimeBudgetSeconds) + " s)");
  o.pass = r.verdict == Verdict::Distinguished && std::max(r.max_moment_ratio, r.kernel_ratio) > kDistinguishTol &&
           ratio >= kVolumeRatioMin && seconds < kRuntimeBudgetSeconds;
  return o;
}

Outcome criterion_10(int K) {
  Outcome o;
  o.pass = true;
  const TimeGrid g = default_grid();
  const std::vector<std::pair<std::string, ManifoldModel>> models{
      {"flat circle", ManifoldModel::flat_circle(kTwoPi)}, {"variable circle", variable_circle()}};
  for (const auto& [name, model] : models) {
    const EigenSystem sys = build_eigensystem(model, K);
    const double l1 = sys.eigenvalue(1);
    double worst = 0.0;
    for (int t = 0; t < kMinTrials; ++t) {
      const SpaceTimeField u = random_field(sys, g, static_cast<std::uint64_t>(t + 1), true, -2.0, 2.0);
      const double nu = l2_norm(u);
      for (double tau : {0.1, 1.0, 10.0})
        worst = std::max(worst, l2_norm(heat_semigroup_apply(u, tau)) / (std::exp(-tau * l1) * nu));
    }
    note(o, name + " (lambda_1 " + fmt("%.6f", l1) + "), " + std::to_string(kMinTrials) +
                " mean-zero fields: max |e^{-tau H}u| / (e^{-tau lambda_1}|u|) " + fmt("%.15f", worst));
    o.pass = o.pass && worst <= 1.0 + kDecaySlack;
  }
  // Counterexample: the constant-in-space field does not decay.
  const EigenSystem sys = flat_circle(K);
  SpaceTimeField c(sys, g, true);
  for (int j = 0; j < g.size(); ++j) c(0, j) = gaussian_window(g.time(j), 0.0, 1.5);
  const double r = l2_norm(heat_semigroup_apply(c, 1.0)) / l2_norm(c);
  note(o, "constant-in-space field at tau=1: ratio " + fmt("%.15f", r) + " > e^{-lambda_1} = " +
              fmt("%.6f", std::exp(-sys.eigenvalue(1))) + " (mean-zero restriction is required)");
  o.pass = o.pass && r > std::exp(-sys.eigenvalue(1));
  return o;
}

Outcome criterion_11(int K) {
  Outcome o;
  const ManifoldModel model = ManifoldModel::flat_circle(kTwoPi);
  const EigenSystem sys = build_eigensystem(model, K);
  std::vector<int> zs(static_cast<std::size_t>(sys.node_count()));
  for (int i = 0; i < sys.node_count(); ++i) zs[static_cast<std::size_t>(i)] = i;
  const GaussianFit f = fit_gaussian_bound(model, sys, 0, zs, log_spaced(kFitTauLo, kFitTauHi, 24));
  note(o, "flat circle, all nodes, 24 taus in [0.01, 1]: R^2 " + fmt("%.6f", f.r_squared) + ", c " +
              fmt("%.4f", f.c) + ", C " + fmt("%.4f", f.C) + ", samples " + std::to_string(f.samples));
  o.pass = f.r_squared > kFitR2Min && f.c > 0.0;
  return o;
}

using Criterion = std::function<Outcome(int)>;

const std::map<int, Criterion>& criteria() {
  static const std::map<int, Criterion> table{
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},  {5, criterion_5},  {6, criterion_6},
      {7, criterion_7}, {8, criterion_8}, {9, criterion_9}, {10, criterion_10}, {11, criterion_11}};
  return table;
}

void print(int id, const Outcome& o) {
  for (const auto& d : o.details) std::printf("  %s\n", d.c_str());
  std::printf("criterion %d: %s\n", id, o.pass ? "PASS" : "FAIL");
  std::fflush(stdout);
}

Outcome criterion_12() {
  Outcome o;
  o.pass = true;
  for (int id = 1; id <= 9; ++id) {
    const Outcome lo = criteria().at(id)(32);
    const Outcome hi = criteria().at(id)(64);
    const bool same = lo.pass == hi.pass && lo.verdict == hi.verdict;
    std::string line = "criterion " + std::to_string(id) + ": K=32 " + (lo.pass ? "PASS" : "FAIL") + ", K=64 " +
                       (hi.pass ? "PASS" : "FAIL");
    if (!lo.verdict.empty()) line += " (verdicts " + lo.verdict + " / " + hi.verdict + ")";
    if (!(same && lo.pass)) line += " -> fails";
    note(o, line);
    o.pass = o.pass && same && lo.pass && hi.pass;
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fracheat acceptance criteria"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "criterion numbers to run (default: all)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty())
    for (int i = 1; i <= 12; ++i) selected.push_back(i);

  bool all = true;
  for (int id : selected) {
    const Outcome o = id == 12 ? criterion_12() : criteria().at(id)(kDefaultModes);
    print(id, o);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
