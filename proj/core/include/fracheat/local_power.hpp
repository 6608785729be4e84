#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fracheat/manifold.hpp"
#include "fracheat/source.hpp"

namespace fracheat {

// Finite-difference weights for the derivative of the given order at 0 from
// samples at the offsets (Fornberg's recursion).
std::vector<double> fd_weights(int derivative, std::span<const double> offsets);

struct LocalPowerOptions {
  int stencil_radius = 6;  // central stencils of order 2 * radius
  int min_margin = 2;      // grid cells between supp f and the boundary of O
};

// (d/dt - Delta_g) applied m times to nodal samples on `nodes` (rows) at every
// grid time (columns). Samples off `nodes` are taken as zero. Delta_g uses the
// metric of `model` at the evaluation node only; d/dt is spectral on the
// periodic grid with the Nyquist bin dropped. No masking.
Eigen::MatrixXd parabolic_power_samples(const ManifoldModel& model, const SpatialQuadrature& q,
                                        const std::vector<int>& nodes, const TimeGrid& grid,
                                        const Eigen::MatrixXd& samples, int m,
                                        const LocalPowerOptions& options = {});

// m-fold (d/dt - Delta_g) of an admissible source whose support sits inside O
// with the required margin. After each application the result is cut back to
// the support cylinder of f, so it is again admissible with the same support.
SourceFunction local_parabolic_power(const SourceFunction& f, int m, const ManifoldModel& model,
                                     const std::vector<int>& patch, const LocalPowerOptions& options = {});

}  // namespace fracheat
