#include "fracheat/field.hpp"

#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "fracheat/errors.hpp"

namespace fracheat {

namespace detail {

FieldBase::FieldBase(EigenSystem sys, TimeGrid grid, bool real)
    : sys_(std::move(sys)), grid_(grid), real_(real) {
  coeffs_ = ModeMatrix::Zero(sys_.size(), grid_.size());
}

FieldBase::FieldBase(EigenSystem sys, TimeGrid grid, ModeMatrix coeffs, bool real)
    : sys_(std::move(sys)), grid_(grid), coeffs_(std::move(coeffs)), real_(real) {
  if (coeffs_.rows() != sys_.size() || coeffs_.cols() != grid_.size())
    throw ContractError("coefficient array must be K x N_t");
}

bool FieldBase::compatible(const FieldBase& other) const {
  return sys_.same_as(other.sys_) && grid_.compatible(other.grid_);
}

void FieldBase::require_compatible(const FieldBase& other) const {
  if (!compatible(other)) throw ContractError("fields live on different eigensystems or grids");
}

}  // namespace detail

Eigen::MatrixXcd SpaceTimeField::synthesize(const std::vector<int>& nodes, const std::vector<int>& times) const {
  const Eigen::MatrixXd phi = sys_.node_values(nodes);
  ModeMatrix sub(modes(), static_cast<Eigen::Index>(times.size()));
  for (std::size_t c = 0; c < times.size(); ++c) {
    const int j = times[c];
    if (j < 0 || j >= samples()) throw ContractError("time index out of range");
    sub.col(static_cast<Eigen::Index>(c)) = coeffs_.col(j);
  }
  return phi.transpose().cast<cplx>() * sub;
}

cplx SpaceTimeField::value_at(std::span<const double> x, int j) const {
  if (j < 0 || j >= samples()) throw ContractError("time index out of range");
  const Eigen::VectorXd phi = sys_.phi_all(x);
  return phi.cast<cplx>().dot(coeffs_.col(j));
}

SpaceTimeField& SpaceTimeField::operator+=(const SpaceTimeField& other) {
  require_compatible(other);
  coeffs_ += other.coeffs_;
  real_ = real_ && other.real_;
  return *this;
}

SpaceTimeField& SpaceTimeField::operator-=(const SpaceTimeField& other) {
  require_compatible(other);
  coeffs_ -= other.coeffs_;
  real_ = real_ && other.real_;
  return *this;
}

SpaceTimeField& SpaceTimeField::operator*=(cplx a) {
  coeffs_ *= a;
  real_ = real_ && a.imag() == 0.0;
  return *this;
}

SpaceTimeField& SpaceTimeField::operator*=(double a) {
  coeffs_ *= a;
  return *this;
}

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b) { return a += b; }
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) { return a -= b; }
SpaceTimeField operator*(cplx a, SpaceTimeField u) { return u *= a; }
SpaceTimeField operator*(double a, SpaceTimeField u) { return u *= a; }

FrequencyField to_frequency(const SpaceTimeField& u) {
  ModeMatrix c = u.coeffs();
  detail::dft_rows(c, -1);
  const double scale = u.grid().dt() / std::sqrt(2.0 * std::numbers::pi);
  for (Eigen::Index m = 0; m < c.cols(); ++m) c.col(m) *= (m % 2 == 0 ? scale : -scale);
  return FrequencyField(u.system(), u.grid(), std::move(c), u.is_real());
}

SpaceTimeField from_frequency(const FrequencyField& uhat) {
  ModeMatrix c = uhat.coeffs();
  const double scale = uhat.grid().drho() / std::sqrt(2.0 * std::numbers::pi);
  for (Eigen::Index m = 0; m < c.cols(); ++m) c.col(m) *= (m % 2 == 0 ? scale : -scale);
  detail::dft_rows(c, +1);
  // A real flag asserts Hermitian symmetry; the residual imaginary part is rounding.
  if (uhat.is_real()) c = c.real().cast<cplx>();
  return SpaceTimeField(uhat.system(), uhat.grid(), std::move(c), uhat.is_real());
}

double l2_norm(const SpaceTimeField& u) {
  return std::sqrt(u.coeffs().squaredNorm() * u.grid().dt());
}

double l2_norm(const FrequencyField& uhat) {
  return std::sqrt(uhat.coeffs().squaredNorm() * uhat.grid().drho());
}

cplx l2_inner(const SpaceTimeField& u, const SpaceTimeField& v) {
  if (!u.compatible(v)) throw ContractError("fields live on different eigensystems or grids");
  cplx acc = 0.0;
  for (int k = 0; k < u.modes(); ++k)
    for (int j = 0; j < u.samples(); ++j) acc += u(k, j) * std::conj(v(k, j));
  return acc * u.grid().dt();
}

double l2_norm_on(const SpaceTimeField& u, const std::vector<bool>& mask) {
  if (static_cast<int>(mask.size()) != u.samples()) throw ContractError("mask length mismatch");
  double acc = 0.0;
  for (int k = 0; k < u.modes(); ++k)
    for (int j = 0; j < u.samples(); ++j)
      if (mask[static_cast<std::size_t>(j)]) acc += std::norm(u(k, j));
  return std::sqrt(acc * u.grid().dt());
}

double max_abs_on(const SpaceTimeField& u, const std::vector<int>& times) {
  const int n = u.system().node_count();
  double best = 0.0;
  const int chunk = 256;
  for (int start = 0; start < n; start += chunk) {
    std::vector<int> nodes;
    for (int i = start; i < std::min(n, start + chunk); ++i) nodes.push_back(i);
    best = std::max(best, u.synthesize(nodes, times).cwiseAbs().maxCoeff());
  }
  return best;
}

double sobolev_weight(double rho, double lambda, double a, NormFlavor flavor) {
  const double r2 = rho * rho + lambda * lambda;
  if (flavor == NormFlavor::Inhomogeneous) return std::pow(1.0 + r2, 0.5 * a);
  if (r2 == 0.0) return a == 0.0 ? 1.0 : (a > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return std::pow(r2, 0.5 * a);
}

double sobolev_norm(const FrequencyField& uhat, double a, NormFlavor flavor) {
  const auto& g = uhat.grid();
  const auto& lam = uhat.system().eigenvalues();
  double acc = 0.0;
  for (int k = 0; k < uhat.modes(); ++k)
    for (int m = 0; m < uhat.samples(); ++m) {
      const double v = std::norm(uhat(k, m));
      if (v == 0.0) continue;
      acc += sobolev_weight(g.frequency(m), lam[static_cast<std::size_t>(k)], a, flavor) * v;
    }
  return std::sqrt(acc * g.drho());
}

double sobolev_norm(const SpaceTimeField& u, double a, NormFlavor flavor) {
  return sobolev_norm(to_frequency(u), a, flavor);
}

SpaceTimeField truncate_time(const SpaceTimeField& u, const TimeSet& A) {
  const auto mask = A.mask(u.grid());
  SpaceTimeField out = u;
  for (int j = 0; j < u.samples(); ++j)
    if (!mask[static_cast<std::size_t>(j)]) out.coeffs().col(j).setZero();
  return out;
}

SpaceTimeField time_reverse(const SpaceTimeField& u) {
  SpaceTimeField out = u;
  const int n = u.samples();
  for (int j = 0; j < n; ++j) out.coeffs().col((n - j) % n) = u.coeffs().col(j);
  return out;
}

RestrictedSamples restrict(const SpaceTimeField& u, const Cylinder& cyl) {
  if (cyl.patch.empty()) throw ContractError("cylinder patch is empty");
  if (!(cyl.t_a < cyl.t_b)) throw ContractError("cylinder needs t_a < t_b");
  RestrictedSamples r;
  r.nodes = cyl.patch;
  r.times = interior_indices(u.grid(), cyl.t_a, cyl.t_b);
  if (r.times.empty()) throw ContractError("cylinder time interval contains no grid node");
  r.values = u.synthesize(r.nodes, r.times);
  return r;
}

}  // namespace fracheat
