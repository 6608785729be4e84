#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fracheat/field.hpp"

namespace fracheat {

enum class MultiplierKind { FracPower, InvFracPower, Semigroup, AdjointFracPower, TimeShift, Product, Custom };

// Diagonal operator m(rho, lambda) on mode-frequency coefficients.
//
// Grid rules, both multiplicative so products of multipliers stay exact:
//  - Nyquist bin: the value is |m(rho_N, lambda)|, which keeps real fields real.
//  - InvFracPower at (lambda = 0, rho = 0): the cell average of the symbol over
//    [-drho/2, drho/2], i.e. cos(s pi / 2) (drho/2)^{-s} / (1 - s).
class SpectralMultiplier {
 public:
  static SpectralMultiplier frac_power(double s);
  static SpectralMultiplier inv_frac_power(double s);
  static SpectralMultiplier semigroup(double tau);
  static SpectralMultiplier adjoint_frac_power(double s);
  // e^{-i rho tau}: shifts u(t) to u(t - tau).
  static SpectralMultiplier time_shift(double tau);
  // hermitian means m(-rho, lambda) = conj m(rho, lambda).
  static SpectralMultiplier custom(std::function<cplx(double, double)> symbol, std::string name,
                                   bool hermitian);

  MultiplierKind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  std::string descriptor() const;

  // Continuous symbol; infinite at the InvFracPower singular point.
  cplx symbol(double rho, double lambda) const;
  cplx bin_value(const TimeGrid& grid, int m, double lambda) const;
  bool hermitian() const;

  SpectralMultiplier operator*(const SpectralMultiplier& other) const;

 private:
  MultiplierKind kind_ = MultiplierKind::Custom;
  double parameter_ = 0.0;
  std::string name_;
  bool hermitian_ = true;
  std::function<cplx(double, double)> custom_;
  std::vector<SpectralMultiplier> factors_;
};

// Principal branch (lambda + i rho)^p for lambda >= 0.
cplx principal_power(double rho, double lambda, double p);
// Cell-average value of the InvFracPower symbol on the zero bin.
double dc_cell_average(double s, double drho);

FrequencyField apply_multiplier(const FrequencyField& uhat, const SpectralMultiplier& m);
SpaceTimeField apply_multiplier(const SpaceTimeField& u, const SpectralMultiplier& m);

}  // namespace fracheat
