#pragma once

#include <Eigen/Dense>

#include "fracheat/field.hpp"

namespace fracheat {

// Admissible source f in C_c(O x (-T, T)) given by nodal samples on the support
// patch. Rows follow support().patch; columns are grid times. Every sample at a
// time outside (t_a, t_b) is exactly zero, and f vanishes off the patch.
class SourceFunction {
 public:
  SourceFunction(EigenSystem sys, TimeGrid grid, Cylinder support, Eigen::MatrixXd samples);

  // Samples f on the support patch and zeroes times outside (t_a, t_b).
  static SourceFunction from_field(const SpaceTimeField& f, const Cylinder& support);
  static SourceFunction zero(const EigenSystem& sys, const TimeGrid& grid, const Cylinder& support);

  const EigenSystem& system() const { return sys_; }
  const TimeGrid& grid() const { return grid_; }
  const Cylinder& support() const { return support_; }
  const Eigen::MatrixXd& samples() const { return samples_; }
  double horizon() const { return grid_.horizon(); }
  double max_abs() const { return samples_.size() ? samples_.cwiseAbs().maxCoeff() : 0.0; }

  // Mode coefficients f_k(t_j) = sum_i w_i phi_k(x_i) f(x_i, t_j).
  SpaceTimeField field() const;

  SourceFunction scaled(double a) const;
  SourceFunction plus(const SourceFunction& other) const;

 private:
  EigenSystem sys_;
  TimeGrid grid_;
  Cylinder support_;
  Eigen::MatrixXd samples_;
};

}  // namespace fracheat
