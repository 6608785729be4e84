#pragma once

#include <cstdint>

#include "fracheat/field.hpp"

namespace fracheat {

// Smooth random fields: mode k carries sum_b a_kb g_b(t) with normal a_kb
// scaled by exp(-lambda_k / mode_scale). Each g_b is a Gaussian of standard
// deviation half_width / 7 cut to exactly zero outside its center +- half_width,
// and every window lies inside [support_lo, support_hi].
struct RandomFieldOptions {
  std::uint64_t seed = 1;
  double support_lo = -1.0;
  double support_hi = 1.0;
  double min_half_width = 0.3;
  double max_half_width = 0.5;
  int bumps = 3;
  double mode_scale = 8.0;
  bool mean_zero = false;
  bool complex_values = false;
};

SpaceTimeField random_smooth_field(const EigenSystem& sys, const TimeGrid& grid, const RandomFieldOptions& options);

// Truncated Gaussian window used by random_smooth_field.
double gaussian_window(double t, double center, double half_width);

}  // namespace fracheat
