#include "fracheat/random_fields.hpp"

#include <cmath>
#include <random>

#include "fracheat/errors.hpp"

namespace fracheat {

double gaussian_window(double t, double center, double half_width) {
  const double d = t - center;
  if (std::abs(d) >= half_width) return 0.0;
  const double sigma = half_width / 7.0;
  return std::exp(-0.5 * d * d / (sigma * sigma));
}

SpaceTimeField random_smooth_field(const EigenSystem& sys, const TimeGrid& grid, const RandomFieldOptions& o) {
  if (!(o.min_half_width > 0.0 && o.min_half_width <= o.max_half_width)) throw ContractError("invalid bump widths");
  if (!(o.support_hi - o.support_lo >= 2.0 * o.max_half_width)) throw ContractError("support window too narrow for bumps");
  if (o.bumps < 1) throw ContractError("need at least one bump");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  std::vector<double> centers, widths;
  for (int b = 0; b < o.bumps; ++b) {
    const double w = o.min_half_width + (o.max_half_width - o.min_half_width) * unit(rng);
    const double lo = o.support_lo + w, hi = o.support_hi - w;
    centers.push_back(lo + (hi - lo) * unit(rng));
    widths.push_back(w);
  }
  SpaceTimeField u(sys, grid, !o.complex_values);
  for (int k = 0; k < sys.size(); ++k) {
    const double scale = std::exp(-sys.eigenvalue(k) / o.mode_scale);
    std::vector<cplx> a(static_cast<std::size_t>(o.bumps));
    for (auto& v : a) {
      const double re = normal(rng);
      const double im = o.complex_values ? normal(rng) : 0.0;
      v = scale * cplx(re, im);
    }
    if (k == 0 && o.mean_zero) continue;
    for (int j = 0; j < grid.size(); ++j) {
      cplx acc = 0.0;
      for (int b = 0; b < o.bumps; ++b)
        acc += a[static_cast<std::size_t>(b)] * gaussian_window(grid.time(j), centers[static_cast<std::size_t>(b)],
                                                                widths[static_cast<std::size_t>(b)]);
      u(k, j) = acc;
    }
  }
  return u;
}

}  // namespace fracheat
