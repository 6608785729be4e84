#include "fracheat/multiplier.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fracheat/errors.hpp"
#include "fracheat/parallel.hpp"
#include "gauss_legendre.hpp"

namespace fracheat {

cplx principal_power(double rho, double lambda, double p) {
  const double r = std::hypot(rho, lambda);
  if (r == 0.0) {
    if (p > 0.0) return 0.0;
    if (p == 0.0) return 1.0;
    return {std::numeric_limits<double>::infinity(), 0.0};
  }
  return std::polar(std::pow(r, p), p * std::atan2(rho, lambda));
}

double dc_cell_average(double s, double drho) {
  // (1/drho) * integral over |rho| < drho/2 of |rho|^{-s} e^{-i s (pi/2) sign rho};
  // the odd imaginary part cancels. With rho = h y^{1/(1-s)} the integrand on
  // [0, h] becomes the constant h^{1-s} / (1 - s) in y.
  const double h = 0.5 * drho;
  const auto& gl = detail::gauss_legendre(16);
  const double e = 1.0 / (1.0 - s);
  double acc = 0.0;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    const double y = 0.5 * (gl.nodes[q] + 1.0);
    const double rho = h * std::pow(y, e);
    const double jac = h * e * std::pow(y, e - 1.0);
    acc += 0.5 * gl.weights[q] * std::pow(rho, -s) * jac;
  }
  return 2.0 * std::cos(0.5 * s * std::numbers::pi) * acc / drho;
}

namespace {

void check_order(double s) {
  if (!(s > 0.0 && s < 1.0)) throw ContractError("fractional order s must lie in (0, 1)");
}

}  // namespace

SpectralMultiplier SpectralMultiplier::frac_power(double s) {
  check_order(s);
  SpectralMultiplier m;
  m.kind_ = MultiplierKind::FracPower;
  m.parameter_ = s;
  return m;
}

SpectralMultiplier SpectralMultiplier::inv_frac_power(double s) {
  check_order(s);
  SpectralMultiplier m;
  m.kind_ = MultiplierKind::InvFracPower;
  m.parameter_ = s;
  return m;
}

SpectralMultiplier SpectralMultiplier::semigroup(double tau) {
  if (!(tau >= 0.0)) throw ContractError("semigroup time tau must be nonnegative");
  SpectralMultiplier m;
  m.kind_ = MultiplierKind::Semigroup;
  m.parameter_ = tau;
  return m;
}

SpectralMultiplier SpectralMultiplier::adjoint_frac_power(double s) {
  check_order(s);
  SpectralMultiplier m;
  m.kind_ = MultiplierKind::AdjointFracPower;
  m.parameter_ = s;
  return m;
}

SpectralMultiplier SpectralMultiplier::time_shift(double tau) {
  SpectralMultiplier m;
  m.kind_ = MultiplierKind::TimeShift;
  m.parameter_ = tau;
  return m;
}

SpectralMultiplier SpectralMultiplier::custom(std::function<cplx(double, double)> symbol, std::string name,
                                              bool hermitian) {
  SpectralMultiplier m;
  m.kind_ = MultiplierKind::Custom;
  m.custom_ = std::move(symbol);
  m.name_ = std::move(name);
  m.hermitian_ = hermitian;
  return m;
}

std::string SpectralMultiplier::descriptor() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case MultiplierKind::FracPower: os << "FracPower(" << parameter_ << ")"; break;
    case MultiplierKind::InvFracPower: os << "InvFracPower(" << parameter_ << ")"; break;
    case MultiplierKind::Semigroup: os << "Semigroup(" << parameter_ << ")"; break;
    case MultiplierKind::AdjointFracPower: os << "AdjointFracPower(" << parameter_ << ")"; break;
    case MultiplierKind::TimeShift: os << "TimeShift(" << parameter_ << ")"; break;
    case MultiplierKind::Custom: os << "Custom(" << name_ << ")"; break;
    case MultiplierKind::Product:
      for (std::size_t i = 0; i < factors_.size(); ++i) os << (i ? "*" : "") << factors_[i].descriptor();
      break;
  }
  return os.str();
}

cplx SpectralMultiplier::symbol(double rho, double lambda) const {
  switch (kind_) {
    case MultiplierKind::FracPower: return principal_power(rho, lambda, parameter_);
    case MultiplierKind::InvFracPower: return principal_power(rho, lambda, -parameter_);
    case MultiplierKind::AdjointFracPower: return principal_power(-rho, lambda, parameter_);
    case MultiplierKind::Semigroup: return std::polar(std::exp(-parameter_ * lambda), -parameter_ * rho);
    case MultiplierKind::TimeShift: return std::polar(1.0, -parameter_ * rho);
    case MultiplierKind::Custom: return custom_(rho, lambda);
    case MultiplierKind::Product: {
      cplx v = 1.0;
      for (const auto& f : factors_) v *= f.symbol(rho, lambda);
      return v;
    }
  }
  return 0.0;
}

cplx SpectralMultiplier::bin_value(const TimeGrid& grid, int m, double lambda) const {
  if (kind_ == MultiplierKind::Product) {
    cplx v = 1.0;
    for (const auto& f : factors_) v *= f.bin_value(grid, m, lambda);
    return v;
  }
  if (kind_ == MultiplierKind::InvFracPower && m == 0 && lambda == 0.0)
    return dc_cell_average(parameter_, grid.drho());
  const cplx v = symbol(grid.frequency(m), lambda);
  if (grid.is_nyquist(m)) return std::abs(v);
  return v;
}

bool SpectralMultiplier::hermitian() const {
  if (kind_ == MultiplierKind::Custom) return hermitian_;
  if (kind_ == MultiplierKind::Product) {
    for (const auto& f : factors_)
      if (!f.hermitian()) return false;
  }
  return true;
}

SpectralMultiplier SpectralMultiplier::operator*(const SpectralMultiplier& other) const {
  SpectralMultiplier p;
  p.kind_ = MultiplierKind::Product;
  auto append = [&p](const SpectralMultiplier& f) {
    if (f.kind_ == MultiplierKind::Product)
      p.factors_.insert(p.factors_.end(), f.factors_.begin(), f.factors_.end());
    else
      p.factors_.push_back(f);
  };
  append(*this);
  append(other);
  return p;
}

FrequencyField apply_multiplier(const FrequencyField& uhat, const SpectralMultiplier& m) {
  FrequencyField out = uhat;
  const auto& lam = uhat.system().eigenvalues();
  const auto& grid = uhat.grid();
  parallel_for(static_cast<std::size_t>(uhat.modes()), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k)
      for (int j = 0; j < uhat.samples(); ++j)
        out(static_cast<int>(k), j) *= m.bin_value(grid, j, lam[k]);
  });
  out.set_real(uhat.is_real() && m.hermitian());
  return out;
}

SpaceTimeField apply_multiplier(const SpaceTimeField& u, const SpectralMultiplier& m) {
  return from_frequency(apply_multiplier(to_frequency(u), m));
}

}  // namespace fracheat
