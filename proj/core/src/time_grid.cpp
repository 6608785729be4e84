#include "fracheat/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracheat/errors.hpp"

namespace fracheat {

TimeGrid::TimeGrid(double half_width, int samples, double horizon)
    : half_width_(half_width), samples_(samples), horizon_(horizon) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ContractError("time grid half width must be positive");
  if (samples < 2 || samples % 2 != 0) throw ContractError("time grid sample count must be even and at least 2");
  if (horizon < 0.0 || horizon > half_width) throw ContractError("horizon must lie in [0, T_grid]");
}

TimeGrid TimeGrid::padded(double horizon, double pad_factor, int samples) {
  if (!(horizon > 0.0)) throw ContractError("horizon must be positive");
  if (!(pad_factor >= 1.0)) throw ContractError("pad factor must be at least 1");
  return TimeGrid(pad_factor * horizon, samples, horizon);
}

double TimeGrid::drho() const { return std::numbers::pi / half_width_; }

double TimeGrid::frequency(int m) const { return signed_bin(m) * drho(); }

int TimeGrid::nearest_index(double t) const {
  if (t <= -half_width_) return 0;
  const double r = std::nearbyint((t + half_width_) / dt());
  if (r >= samples_ - 1) return samples_ - 1;
  return static_cast<int>(r);
}

std::vector<bool> TimeSet::mask(const TimeGrid& grid) const {
  std::vector<bool> m(static_cast<std::size_t>(grid.size()), false);
  for (const auto& part : parts_) {
    if (!(part.lo <= part.hi)) continue;
    if (part.hi < -grid.half_width() - 0.5 * grid.dt()) continue;
    if (part.lo > grid.time(grid.size() - 1) + 0.5 * grid.dt()) continue;
    const int a = std::isinf(part.lo) ? 0 : grid.nearest_index(part.lo);
    const int b = std::isinf(part.hi) ? grid.size() - 1 : grid.nearest_index(part.hi);
    for (int j = a; j <= b; ++j) m[static_cast<std::size_t>(j)] = true;
  }
  return m;
}

std::vector<int> interior_indices(const TimeGrid& grid, double a, double b) {
  std::vector<int> out;
  const double eps = 1e-9 * grid.dt();
  for (int j = 0; j < grid.size(); ++j) {
    const double t = grid.time(j);
    if (t > a + eps && t < b - eps) out.push_back(j);
  }
  return out;
}

}  // namespace fracheat
