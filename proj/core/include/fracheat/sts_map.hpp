#pragma once

#include <vector>

#include "fracheat/eigensystem.hpp"
#include "fracheat/forward_solver.hpp"
#include "fracheat/source.hpp"

namespace fracheat {

// Quadrature nodes with lo_r <= x_r <= hi_r in every dimension. Coordinates
// live in [0, L_r); boxes do not wrap.
std::vector<int> nodes_in_box(const SpatialQuadrature& q, const std::vector<double>& lo,
                              const std::vector<double>& hi);

struct SpaceTimePoint {
  int node = 0;
  int time = 0;
};

// Local source-to-solution map f -> (H^{-s} f) restricted to O x (-T, T).
// Sources must be supported on nodes of O.
class SourceToSolutionMap {
 public:
  SourceToSolutionMap(EigenSystem sys, TimeGrid grid, std::vector<int> patch, double s);

  const EigenSystem& system() const { return sys_; }
  const TimeGrid& grid() const { return grid_; }
  const std::vector<int>& patch() const { return patch_; }
  double horizon() const { return grid_.horizon(); }
  double order() const { return s_; }

  RestrictedSamples operator()(const SourceFunction& f) const;
  // One output sample; p.node must lie in O and p.time strictly inside (-T, T).
  cplx probe(const SourceFunction& f, SpaceTimePoint p) const;
  // Full solve of the same source, for diagnostics.
  SolveReport solve(const SourceFunction& f) const;

 private:
  void check_source(const SourceFunction& f) const;

  EigenSystem sys_;
  TimeGrid grid_;
  std::vector<int> patch_;
  double s_;
};

// grid supplies T_grid and N_t; the map's grid carries horizon T.
SourceToSolutionMap make_sts(const ManifoldModel& model, std::vector<int> patch, double T, double s, int K,
                             const TimeGrid& grid, const BuildOptions& options = {});
SourceToSolutionMap make_sts(const EigenSystem& sys, std::vector<int> patch, double T, double s,
                             const TimeGrid& grid);

}  // namespace fracheat
