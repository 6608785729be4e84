#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracheat/field.hpp"
#include "fracheat/source.hpp"

namespace fracheat {

struct SolveOptions {
  double rtol = 1e-6;
};

struct SolveReport {
  SpaceTimeField solution;          // H^{-s} f truncated to [-T, T]
  double source_norm = 0.0;         // ||f|| on M x (-T, T)
  double residual = 0.0;            // ||H^s u_T - f|| on M x (-T, T)
  double relative_residual = 0.0;   // residual / source_norm
  double past_violation = 0.0;      // ||H^{-s} f|| on t < -T before truncation
  double coercivity_ratio = 0.0;    // Re B(u, u) / ||u||^2 in the homogeneous s-norm
  bool flagged = false;
  std::string diagnostics;
};

// Diagonal inversion by the InvFracPower multiplier, then truncation to [-T, T].
SolveReport solve(const SourceFunction& f, double s, const SolveOptions& options = {});
// Same for a mode-space source already known to vanish on t <= -T and beyond T.
SolveReport solve_field(const SpaceTimeField& f, double s, const SolveOptions& options = {});

// sum_{k,m} (i rho + lambda)^s hat u conj(hat v) drho with grid bin values.
cplx bilinear_form(const SpaceTimeField& u, const SpaceTimeField& v, double s);
// (H^{s/2} u, H^{s/2}_* v) in L2(M x R).
cplx bilinear_form_two_factor(const SpaceTimeField& u, const SpaceTimeField& v, double s);

struct WellposednessReport {
  int trials = 0;
  double s = 0.0;
  double coercivity_floor = 0.0;   // cos(s pi / 2)
  double min_coercivity_ratio = 0.0;
  double max_boundedness_ratio = 0.0;
  double max_relative_residual = 0.0;
  int coercivity_failures = 0;
  int boundedness_failures = 0;
  bool passed = false;
};

// Random smooth sources and random test fields; coercivity ratios must reach
// cos(s pi / 2) (1 - 1e-9) and boundedness ratios must stay at most 1 + 1e-9.
WellposednessReport verify_wellposedness(int trials, double s, const EigenSystem& sys, const TimeGrid& grid,
                                         std::uint64_t seed = 1);

}  // namespace fracheat
