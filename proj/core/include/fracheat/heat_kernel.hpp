#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fracheat/eigensystem.hpp"
#include "fracheat/manifold.hpp"

namespace fracheat {

struct KernelValue {
  double value = 0.0;
  // tau below the trust floor tau_min(K); truncation ripple may dominate.
  bool below_trust_floor = false;
};

// e^{-tau L}(x, z) = sum_k e^{-tau lambda_k} phi_k(x) phi_k(z). Negative
// truncation ripple is returned as computed.
class HeatKernelEvaluator {
 public:
  explicit HeatKernelEvaluator(EigenSystem sys);

  const EigenSystem& system() const { return sys_; }
  // tau at which e^{-tau lambda_{K-1}} equals 1e-3.
  double tau_min() const;

  KernelValue at_nodes(int x, int z, double tau) const;
  KernelValue at_points(std::span<const double> x, std::span<const double> z, double tau) const;
  // xs.size() x zs.size() kernel block between quadrature nodes.
  Eigen::MatrixXd matrix(const std::vector<int>& xs, const std::vector<int>& zs, double tau) const;
  // Quadrature of z -> e^{-tau L}(x, z) over M for one node x.
  double row_integral(int x, double tau) const;

 private:
  EigenSystem sys_;
};

KernelValue heat_kernel(int x, int z, double tau, const EigenSystem& sys);
// K_s = e^{-tau L}(x, z) / (Gamma(-s) tau^{1+s}).
KernelValue kernel_Ks(int x, int z, double tau, double s, const EigenSystem& sys);

struct GaussianFit {
  double log_C = 0.0;
  double C = 0.0;
  double c = 0.0;
  double r_squared = 0.0;
  int samples = 0;
};

// Least squares for log H = log C - (1/2) log tau - d^2 / (c tau) over the
// given taus and target nodes. At each tau only samples above
// max(value_floor, 10 e^{-tau lambda_{K-1}}) times that tau's peak enter, which
// keeps truncation ripple out of the logarithm.
GaussianFit fit_gaussian_bound(const ManifoldModel& model, const EigenSystem& sys, int x,
                               const std::vector<int>& zs, const std::vector<double>& taus,
                               double value_floor = 1e-10);

}  // namespace fracheat
