#pragma once

#include <vector>

#include "fracheat/field.hpp"

namespace fracheat {

// Quadrature for the semigroup integrals over tau in (0, inf).
//  - (0, tau_lo):  Taylor series of e^{-tau z} integrated term by term.
//  - [tau_lo, tau_hi]: Gauss-Legendre panels; widths double from tau_lo and are
//    capped by min(max_panel_width, phase_per_panel / rho_max).
//  - (tau_hi, inf): integration-by-parts series of the tail, truncated at its
//    smallest term, which serves as the tail estimate.
// tau_hi = tail_argument / |z|_min, so the tail series argument is at least
// tail_argument for every bin.
struct BalakrishnanSpec {
  double tau_lo = 1e-8;
  double tau_split = 1.0;
  int nodes_per_panel = 16;
  double max_panel_width = 0.25;
  double phase_per_panel = 8.0;
  double tail_argument = 36.0;
  double tail_tolerance = 1e-10;
  int max_tail_terms = 80;
};

struct QuadratureDiagnostics {
  int nodes = 0;
  double tau_hi = 0.0;
  double max_tail_estimate = 0.0;  // relative to max(1, |value|)
};

// (1/Gamma(-s)) int (e^{-tau (i rho + lambda)} - 1) tau^{-1-s} dtau.
cplx balakrishnan_symbol(double s, double lambda, double rho, const BalakrishnanSpec& spec = {},
                         QuadratureDiagnostics* diag = nullptr);
// (1/Gamma(s)) int e^{-tau (i rho + lambda)} tau^{s-1} dtau; z = 0 is divergent.
cplx gamma_inverse_symbol(double s, double lambda, double rho, const BalakrishnanSpec& spec = {},
                          QuadratureDiagnostics* diag = nullptr);

// Field paths share one node set across all bins. The Nyquist bin uses the
// modulus convention of the multiplier path; the (k = 0, rho = 0) bin of the
// inverse uses the cell average.
SpaceTimeField balakrishnan_apply(const SpaceTimeField& u, double s, const BalakrishnanSpec& spec = {},
                                  QuadratureDiagnostics* diag = nullptr);
SpaceTimeField gamma_inverse_apply(const SpaceTimeField& f, double s, const BalakrishnanSpec& spec = {},
                                   QuadratureDiagnostics* diag = nullptr);

struct GridPoint {
  int node = 0;
  int time = 0;
};

// int_0^inf int_M K_s(x, z; tau) (u(z, t - tau) - u(x, t)) dz dtau at the given
// points. The body [tau_lo, tau_hi] uses the spatial kernel and quadrature
// nodes; head and tail use their per-bin series.
std::vector<cplx> representation_formula_apply(const SpaceTimeField& u, double s,
                                               const std::vector<GridPoint>& points,
                                               const BalakrishnanSpec& spec = {});

}  // namespace fracheat
