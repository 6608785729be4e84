#include "fracheat/forward_solver.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fracheat/errors.hpp"
#include "fracheat/operators.hpp"
#include "fracheat/random_fields.hpp"

namespace fracheat {

namespace {

double homogeneous_energy(const FrequencyField& uhat, double s) {
  const double n = sobolev_norm(uhat, s, NormFlavor::Homogeneous);
  return n * n;
}

}  // namespace

SolveReport solve_field(const SpaceTimeField& f, double s, const SolveOptions& options) {
  const double T = f.grid().horizon();
  if (!(T > 0.0)) throw ContractError("solve needs a grid with a physical horizon T");
  const SpaceTimeField u = apply_H_minus_s(f, s);
  const std::vector<bool> inner = interior_mask(f.grid(), T);
  std::vector<bool> past(static_cast<std::size_t>(f.samples()), false);
  for (int j = 0; j < f.samples(); ++j) past[static_cast<std::size_t>(j)] = f.grid().time(j) < -T;

  SolveReport r{truncate_time(u, TimeSet::between(-T, T)), 0.0, 0.0, 0.0, 0.0, 0.0, false, {}};
  r.past_violation = l2_norm_on(u, past);
  const SpaceTimeField back = apply_Hs(r.solution, s);
  r.residual = l2_norm_on(back - f, inner);
  r.source_norm = l2_norm_on(f, inner);
  r.relative_residual = r.source_norm > 0.0 ? r.residual / r.source_norm : 0.0;
  const FrequencyField uhat = to_frequency(r.solution);
  const double energy = homogeneous_energy(uhat, s);
  r.coercivity_ratio = energy > 0.0 ? bilinear_form(r.solution, r.solution, s).real() / energy : 0.0;
  if (r.residual > options.rtol * r.source_norm) {
    r.flagged = true;
    std::ostringstream os;
    os.precision(6);
    os << "residual " << r.residual << " exceeds rtol " << options.rtol << " * ||f|| = "
       << options.rtol * r.source_norm << "; past leakage " << r.past_violation;
    r.diagnostics = os.str();
  }
  return r;
}

SolveReport solve(const SourceFunction& f, double s, const SolveOptions& options) {
  return solve_field(f.field(), s, options);
}

cplx bilinear_form(const SpaceTimeField& u, const SpaceTimeField& v, double s) {
  if (!u.compatible(v)) throw ContractError("fields live on different eigensystems or grids");
  const FrequencyField uh = to_frequency(u), vh = to_frequency(v);
  const auto m = SpectralMultiplier::frac_power(s);
  const auto& lam = u.system().eigenvalues();
  cplx acc = 0.0;
  for (int k = 0; k < u.modes(); ++k)
    for (int j = 0; j < u.samples(); ++j)
      acc += m.bin_value(u.grid(), j, lam[static_cast<std::size_t>(k)]) * uh(k, j) * std::conj(vh(k, j));
  return acc * u.grid().drho();
}

cplx bilinear_form_two_factor(const SpaceTimeField& u, const SpaceTimeField& v, double s) {
  return l2_inner(apply_Hs(u, 0.5 * s), apply_Hs_adjoint(v, 0.5 * s));
}

WellposednessReport verify_wellposedness(int trials, double s, const EigenSystem& sys, const TimeGrid& grid,
                                         std::uint64_t seed) {
  if (trials < 1) throw ContractError("need at least one trial");
  const double T = grid.horizon();
  if (!(T > 0.0)) throw ContractError("grid needs a physical horizon T");
  WellposednessReport rep;
  rep.trials = trials;
  rep.s = s;
  rep.coercivity_floor = std::cos(0.5 * s * std::numbers::pi);
  rep.min_coercivity_ratio = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    RandomFieldOptions o;
    o.seed = seed + 1000003ull * static_cast<std::uint64_t>(t);
    o.support_lo = -0.9 * T;
    o.support_hi = 0.9 * T;
    o.min_half_width = 0.15 * T;
    o.max_half_width = 0.3 * T;
    const SpaceTimeField field = random_smooth_field(sys, grid, o);
    o.seed += 7;
    const SpaceTimeField other = random_smooth_field(sys, grid, o);

    const SolveReport sr = solve_field(field, s);
    rep.max_relative_residual = std::max(rep.max_relative_residual, sr.relative_residual);

    for (const SpaceTimeField* u : {&field, &sr.solution}) {
      const FrequencyField uh = to_frequency(*u);
      const double energy = homogeneous_energy(uh, s);
      if (energy == 0.0) continue;
      const double ratio = bilinear_form(*u, *u, s).real() / energy;
      rep.min_coercivity_ratio = std::min(rep.min_coercivity_ratio, ratio);
      if (ratio < rep.coercivity_floor * (1.0 - 1e-9)) ++rep.coercivity_failures;
    }
    const double nu = sobolev_norm(field, s, NormFlavor::Homogeneous);
    const double nv = sobolev_norm(other, s, NormFlavor::Homogeneous);
    if (nu > 0.0 && nv > 0.0) {
      const double ratio = std::abs(bilinear_form(field, other, s)) / (nu * nv);
      rep.max_boundedness_ratio = std::max(rep.max_boundedness_ratio, ratio);
      if (ratio > 1.0 + 1e-9) ++rep.boundedness_failures;
    }
  }
  rep.passed = rep.coercivity_failures == 0 && rep.boundedness_failures == 0;
  return rep;
}

}  // namespace fracheat
