#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fracheat/eigensystem.hpp"
#include "fracheat/time_grid.hpp"

namespace fracheat {

using cplx = std::complex<double>;
// K x N_t, one contiguous row per mode.
using ModeMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

// Shared storage for both field representations.
class FieldBase {
 public:
  FieldBase(EigenSystem sys, TimeGrid grid, bool real);
  FieldBase(EigenSystem sys, TimeGrid grid, ModeMatrix coeffs, bool real);

  const EigenSystem& system() const { return sys_; }
  const TimeGrid& grid() const { return grid_; }
  int modes() const { return static_cast<int>(coeffs_.rows()); }
  int samples() const { return static_cast<int>(coeffs_.cols()); }
  const ModeMatrix& coeffs() const { return coeffs_; }
  ModeMatrix& coeffs() { return coeffs_; }
  cplx& operator()(int k, int j) { return coeffs_(k, j); }
  const cplx& operator()(int k, int j) const { return coeffs_(k, j); }
  bool is_real() const { return real_; }
  void set_real(bool real) { real_ = real; }
  bool compatible(const FieldBase& other) const;

 protected:
  void require_compatible(const FieldBase& other) const;

  EigenSystem sys_;
  TimeGrid grid_;
  ModeMatrix coeffs_;
  bool real_;
};

}  // namespace detail

// u(x, t_j) = sum_k u_k(t_j) phi_k(x).
class SpaceTimeField : public detail::FieldBase {
 public:
  using FieldBase::FieldBase;

  // u(x_i, t_j) for the given nodes (rows) and time indices (columns).
  Eigen::MatrixXcd synthesize(const std::vector<int>& nodes, const std::vector<int>& times) const;
  cplx value_at(std::span<const double> x, int j) const;

  SpaceTimeField& operator+=(const SpaceTimeField& other);
  SpaceTimeField& operator-=(const SpaceTimeField& other);
  SpaceTimeField& operator*=(cplx a);
  SpaceTimeField& operator*=(double a);
};

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator*(cplx a, SpaceTimeField u);
SpaceTimeField operator*(double a, SpaceTimeField u);

// Coefficients hat u_k(rho_m) in DFT bin order.
class FrequencyField : public detail::FieldBase {
 public:
  using FieldBase::FieldBase;
};

// hat u_k(rho_m) = dt / sqrt(2 pi) sum_j e^{-i rho_m t_j} u_k(t_j).
FrequencyField to_frequency(const SpaceTimeField& u);
// u_k(t_j) = drho / sqrt(2 pi) sum_m e^{i rho_m t_j} hat u_k(rho_m).
SpaceTimeField from_frequency(const FrequencyField& uhat);

double l2_norm(const SpaceTimeField& u);
double l2_norm(const FrequencyField& uhat);
cplx l2_inner(const SpaceTimeField& u, const SpaceTimeField& v);
// L2 norm restricted to time indices where mask is set.
double l2_norm_on(const SpaceTimeField& u, const std::vector<bool>& mask);
// Largest synthesized |u(x_i, t_j)| over all nodes and the given time indices.
double max_abs_on(const SpaceTimeField& u, const std::vector<int>& times);

enum class NormFlavor {
  Inhomogeneous,  // (1 + rho^2 + lambda^2)^{a/2}
  Homogeneous,    // (rho^2 + lambda^2)^{a/2}
};

double sobolev_weight(double rho, double lambda, double a, NormFlavor flavor);
double sobolev_norm(const FrequencyField& uhat, double a, NormFlavor flavor = NormFlavor::Inhomogeneous);
double sobolev_norm(const SpaceTimeField& u, double a, NormFlavor flavor = NormFlavor::Inhomogeneous);

// Zeroes every sample whose time node lies outside A.
SpaceTimeField truncate_time(const SpaceTimeField& u, const TimeSet& A);
// t -> -t on the symmetric grid, index j -> (N - j) mod N.
SpaceTimeField time_reverse(const SpaceTimeField& u);

struct Cylinder {
  std::vector<int> patch;  // quadrature node indices
  double t_a = 0.0;
  double t_b = 0.0;
};

struct RestrictedSamples {
  std::vector<int> nodes;
  std::vector<int> times;
  Eigen::MatrixXcd values;  // nodes x times
};

// Point values on patch x {t_a < t_j < t_b}.
RestrictedSamples restrict(const SpaceTimeField& u, const Cylinder& cyl);

}  // namespace fracheat
