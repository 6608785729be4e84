#include "fracheat/operators.hpp"

#include <cmath>

#include "fracheat/errors.hpp"
#include "fracheat/parallel.hpp"

namespace fracheat {

SpaceTimeField apply_Hs(const SpaceTimeField& u, double s) {
  return apply_multiplier(u, SpectralMultiplier::frac_power(s));
}

SpaceTimeField apply_Hs_adjoint(const SpaceTimeField& v, double s) {
  return apply_multiplier(v, SpectralMultiplier::adjoint_frac_power(s));
}

SpaceTimeField apply_H_minus_s(const SpaceTimeField& f, double s) {
  return apply_multiplier(f, SpectralMultiplier::inv_frac_power(s));
}

FrequencyField heat_semigroup_apply(const FrequencyField& uhat, double tau) {
  if (!(tau >= 0.0)) throw ContractError("semigroup time tau must be nonnegative");
  const auto& grid = uhat.grid();
  const auto& lam = uhat.system().eigenvalues();
  const int N = uhat.samples();
  std::vector<cplx> phase(static_cast<std::size_t>(N));
  for (int m = 0; m < N; ++m)
    phase[static_cast<std::size_t>(m)] = grid.is_nyquist(m) ? cplx(1.0) : std::polar(1.0, -tau * grid.frequency(m));
  FrequencyField out = uhat;
  parallel_for(static_cast<std::size_t>(uhat.modes()), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      const double damp = std::exp(-tau * lam[k]);
      cplx* row = out.coeffs().row(static_cast<Eigen::Index>(k)).data();
      for (int m = 0; m < N; ++m) row[m] *= damp * phase[static_cast<std::size_t>(m)];
    }
  });
  return out;
}

SpaceTimeField heat_semigroup_apply(const SpaceTimeField& u, double tau, SemigroupPath path) {
  if (!(tau >= 0.0)) throw ContractError("semigroup time tau must be nonnegative");
  if (tau == 0.0) return u;
  if (path == SemigroupPath::Multiplier) return apply_multiplier(u, SpectralMultiplier::semigroup(tau));
  SpaceTimeField shifted = apply_multiplier(u, SpectralMultiplier::time_shift(tau));
  const auto& lam = u.system().eigenvalues();
  for (int k = 0; k < u.modes(); ++k) shifted.coeffs().row(k) *= std::exp(-tau * lam[static_cast<std::size_t>(k)]);
  return shifted;
}

std::vector<bool> interior_mask(const TimeGrid& grid, double T) {
  std::vector<bool> mask(static_cast<std::size_t>(grid.size()), false);
  for (int j : interior_indices(grid, -T, T)) mask[static_cast<std::size_t>(j)] = true;
  return mask;
}

CausalityReport causality_check(const SpaceTimeField& u, double s, double T) {
  const SpaceTimeField a = apply_Hs(u, s);
  const SpaceTimeField b = apply_Hs(truncate_time(u, TimeSet::up_to(T)), s);
  const SpaceTimeField d = a - b;
  CausalityReport r;
  r.l2 = l2_norm_on(d, interior_mask(u.grid(), T));
  r.max_abs = max_abs_on(d, interior_indices(u.grid(), -T, T));
  const double n = l2_norm(u);
  r.relative_l2 = n > 0.0 ? r.l2 / n : 0.0;
  return r;
}

}  // namespace fracheat
