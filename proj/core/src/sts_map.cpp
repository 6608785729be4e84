#include "fracheat/sts_map.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "fracheat/errors.hpp"
#include "fracheat/operators.hpp"

namespace fracheat {

std::vector<int> nodes_in_box(const SpatialQuadrature& q, const std::vector<double>& lo,
                              const std::vector<double>& hi) {
  const int d = q.dim();
  if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
    throw ContractError("box bounds must give one interval per dimension");
  for (int r = 0; r < d; ++r)
    if (!(lo[static_cast<std::size_t>(r)] <= hi[static_cast<std::size_t>(r)]))
      throw ContractError("box needs lo <= hi");
  std::vector<int> out;
  for (int i = 0; i < q.size(); ++i) {
    bool inside = true;
    for (int r = 0; r < d && inside; ++r) {
      const double x = q.points(r, i);
      inside = x >= lo[static_cast<std::size_t>(r)] && x <= hi[static_cast<std::size_t>(r)];
    }
    if (inside) out.push_back(i);
  }
  return out;
}

SourceToSolutionMap::SourceToSolutionMap(EigenSystem sys, TimeGrid grid, std::vector<int> patch, double s)
    : sys_(std::move(sys)), grid_(grid), patch_(std::move(patch)), s_(s) {
  if (patch_.empty()) throw ContractError("source-to-solution map needs a nonempty patch");
  if (!(grid_.horizon() > 0.0)) throw ContractError("source-to-solution map needs a grid with horizon T");
  if (!(s_ > 0.0 && s_ < 1.0)) throw ContractError("order s must lie in (0, 1)");
  std::set<int> seen;
  for (int i : patch_) {
    if (i < 0 || i >= sys_.node_count()) throw ContractError("patch node out of range");
    if (!seen.insert(i).second) throw ContractError("patch lists a node twice");
  }
}

void SourceToSolutionMap::check_source(const SourceFunction& f) const {
  if (!f.system().same_as(sys_) || !f.grid().compatible(grid_))
    throw ContractError("source lives on a different eigensystem or grid");
  if (f.horizon() != grid_.horizon()) throw ContractError("source horizon differs from the map horizon");
  const std::set<int> in(patch_.begin(), patch_.end());
  for (int i : f.support().patch)
    if (!in.count(i)) throw ContractError("source support leaves the patch O");
}

RestrictedSamples SourceToSolutionMap::operator()(const SourceFunction& f) const {
  check_source(f);
  const double T = grid_.horizon();
  return restrict(apply_H_minus_s(f.field(), s_), Cylinder{patch_, -T, T});
}

SolveReport SourceToSolutionMap::solve(const SourceFunction& f) const {
  check_source(f);
  return fracheat::solve(f, s_);
}

cplx SourceToSolutionMap::probe(const SourceFunction& f, SpaceTimePoint p) const {
  check_source(f);
  if (std::find(patch_.begin(), patch_.end(), p.node) == patch_.end())
    throw ContractError("probe node lies outside the patch O");
  const double T = grid_.horizon();
  const double t = p.time >= 0 && p.time < grid_.size() ? grid_.time(p.time) : -2.0 * grid_.half_width();
  if (!(t > -T && t < T)) throw ContractError("probe time must lie strictly inside (-T, T)");

  const FrequencyField fh = to_frequency(f.field());
  const auto inv = SpectralMultiplier::inv_frac_power(s_);
  const int N = grid_.size();
  std::vector<cplx> phase(static_cast<std::size_t>(N));
  for (int m = 0; m < N; ++m) {
    const double sign = m % 2 == 0 ? 1.0 : -1.0;
    const double arg = 2.0 * std::numbers::pi * static_cast<double>((static_cast<long long>(p.time) * m) % N) / N;
    phase[static_cast<std::size_t>(m)] = sign * std::polar(1.0, arg);
  }
  const double scale = grid_.drho() / std::sqrt(2.0 * std::numbers::pi);
  const Eigen::MatrixXd phi = sys_.node_values({p.node});
  const auto& lam = sys_.eigenvalues();
  cplx acc = 0.0;
  for (int k = 0; k < fh.modes(); ++k) {
    cplx row = 0.0;
    for (int m = 0; m < N; ++m)
      row += phase[static_cast<std::size_t>(m)] * inv.bin_value(grid_, m, lam[static_cast<std::size_t>(k)]) * fh(k, m);
    acc += phi(k, 0) * row;
  }
  return scale * acc;
}

SourceToSolutionMap make_sts(const EigenSystem& sys, std::vector<int> patch, double T, double s,
                             const TimeGrid& grid) {
  if (!(T > 0.0) || T >= grid.half_width()) throw ContractError("horizon T must lie in (0, T_grid)");
  return SourceToSolutionMap(sys, TimeGrid(grid.half_width(), grid.size(), T), std::move(patch), s);
}

SourceToSolutionMap make_sts(const ManifoldModel& model, std::vector<int> patch, double T, double s, int K,
                             const TimeGrid& grid, const BuildOptions& options) {
  return make_sts(build_eigensystem(model, K, options), std::move(patch), T, s, grid);
}

}  // namespace fracheat
