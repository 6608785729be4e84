#pragma once

#include "fracheat/field.hpp"
#include "fracheat/multiplier.hpp"

namespace fracheat {

// H^s = (d/dt - Delta_g)^s with symbol (i rho + lambda)^s.
SpaceTimeField apply_Hs(const SpaceTimeField& u, double s);
// H^s_* = (-d/dt - Delta_g)^s with symbol (-i rho + lambda)^s.
SpaceTimeField apply_Hs_adjoint(const SpaceTimeField& v, double s);
// Symbol (i rho + lambda)^{-s}; the (k = 0, rho = 0) bin uses the cell average.
SpaceTimeField apply_H_minus_s(const SpaceTimeField& f, double s);

enum class SemigroupPath {
  Multiplier,    // e^{-tau (i rho + lambda)} on every bin
  ShiftDamping,  // shift by tau through the phase e^{-i rho tau}, then e^{-tau lambda_k}
};

SpaceTimeField heat_semigroup_apply(const SpaceTimeField& u, double tau,
                                    SemigroupPath path = SemigroupPath::Multiplier);
// Frequency-level form used inside quadratures: separable damping times phase.
FrequencyField heat_semigroup_apply(const FrequencyField& uhat, double tau);

struct CausalityReport {
  double max_abs = 0.0;       // over nodes and interior times of (-T, T)
  double l2 = 0.0;            // L2 over M x (-T, T)
  double relative_l2 = 0.0;   // l2 / ||u||
};

// Compares H^s u with H^s of the past truncation chi_{(-inf, T]} u on M x (-T, T).
CausalityReport causality_check(const SpaceTimeField& u, double s, double T);

// Mask of grid times strictly inside (-T, T).
std::vector<bool> interior_mask(const TimeGrid& grid, double T);

}  // namespace fracheat
