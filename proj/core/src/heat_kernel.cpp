#include "fracheat/heat_kernel.hpp"

#include <algorithm>
#include <cmath>

#include "fracheat/errors.hpp"

namespace fracheat {

HeatKernelEvaluator::HeatKernelEvaluator(EigenSystem sys) : sys_(std::move(sys)) {}

double HeatKernelEvaluator::tau_min() const {
  const double top = sys_.eigenvalues().back();
  return top > 0.0 ? std::log(1000.0) / top : 0.0;
}

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0)) throw ContractError("heat kernel needs tau > 0");
}

Eigen::VectorXd damping(const EigenSystem& sys, double tau) {
  Eigen::VectorXd d(sys.size());
  for (int k = 0; k < sys.size(); ++k) d(k) = std::exp(-tau * sys.eigenvalue(k));
  return d;
}

}  // namespace

KernelValue HeatKernelEvaluator::at_nodes(int x, int z, double tau) const {
  check_tau(tau);
  const Eigen::MatrixXd phi = sys_.node_values({x, z});
  const Eigen::VectorXd d = damping(sys_, tau);
  double acc = 0.0;
  for (int k = 0; k < sys_.size(); ++k) acc += d(k) * phi(k, 0) * phi(k, 1);
  return {acc, tau < tau_min()};
}

KernelValue HeatKernelEvaluator::at_points(std::span<const double> x, std::span<const double> z,
                                           double tau) const {
  check_tau(tau);
  const Eigen::VectorXd px = sys_.phi_all(x);
  const Eigen::VectorXd pz = sys_.phi_all(z);
  const Eigen::VectorXd d = damping(sys_, tau);
  double acc = 0.0;
  for (int k = 0; k < sys_.size(); ++k) acc += d(k) * px(k) * pz(k);
  return {acc, tau < tau_min()};
}

Eigen::MatrixXd HeatKernelEvaluator::matrix(const std::vector<int>& xs, const std::vector<int>& zs,
                                            double tau) const {
  check_tau(tau);
  const Eigen::MatrixXd px = sys_.node_values(xs);
  const Eigen::MatrixXd pz = xs == zs ? px : sys_.node_values(zs);
  const Eigen::VectorXd d = damping(sys_, tau);
  return px.transpose() * d.asDiagonal() * pz;
}

double HeatKernelEvaluator::row_integral(int x, double tau) const {
  check_tau(tau);
  const int n = sys_.node_count();
  const auto& w = sys_.quadrature().weights;
  double acc = 0.0;
  const int chunk = 512;
  for (int start = 0; start < n; start += chunk) {
    std::vector<int> zs;
    for (int i = start; i < std::min(n, start + chunk); ++i) zs.push_back(i);
    const Eigen::MatrixXd row = matrix({x}, zs, tau);
    for (std::size_t c = 0; c < zs.size(); ++c) acc += w(zs[c]) * row(0, static_cast<Eigen::Index>(c));
  }
  return acc;
}

KernelValue heat_kernel(int x, int z, double tau, const EigenSystem& sys) {
  return HeatKernelEvaluator(sys).at_nodes(x, z, tau);
}

KernelValue kernel_Ks(int x, int z, double tau, double s, const EigenSystem& sys) {
  if (!(s > 0.0 && s < 1.0)) throw ContractError("fractional order s must lie in (0, 1)");
  KernelValue v = heat_kernel(x, z, tau, sys);
  v.value /= std::tgamma(-s) * std::pow(tau, 1.0 + s);
  return v;
}

GaussianFit fit_gaussian_bound(const ManifoldModel& model, const EigenSystem& sys, int x,
                               const std::vector<int>& zs, const std::vector<double>& taus,
                               double value_floor) {
  HeatKernelEvaluator ev(sys);
  const auto& pts = sys.quadrature().points;
  auto coords = [&pts](int i) {
    std::vector<double> v(static_cast<std::size_t>(pts.rows()));
    for (Eigen::Index r = 0; r < pts.rows(); ++r) v[static_cast<std::size_t>(r)] = pts(r, i);
    return v;
  };
  const auto xc = coords(x);
  std::vector<double> d2(zs.size());
  for (std::size_t c = 0; c < zs.size(); ++c) {
    const double d = geodesic_distance(model, xc, coords(zs[c]));
    d2[c] = d * d;
  }
  std::vector<double> ys, a, b;
  const double lambda_top = sys.eigenvalue(sys.size() - 1);
  for (double tau : taus) {
    const Eigen::MatrixXd row = ev.matrix({x}, zs, tau);
    const double floor = std::max(value_floor, 10.0 * std::exp(-tau * lambda_top)) * row.maxCoeff();
    for (std::size_t c = 0; c < zs.size(); ++c) {
      const double v = row(0, static_cast<Eigen::Index>(c));
      if (!(v > floor)) continue;
      ys.push_back(std::log(v));
      a.push_back(-0.5 * std::log(tau));
      b.push_back(d2[c] / tau);
    }
  }
  GaussianFit fit;
  fit.samples = static_cast<int>(ys.size());
  if (fit.samples < 3) throw NumericalError("too few kernel samples above the noise floor", fit.samples);
  // y - a = log C - beta * b with beta = 1 / c.
  Eigen::MatrixXd X(fit.samples, 2);
  Eigen::VectorXd rhs(fit.samples), y(fit.samples);
  for (int i = 0; i < fit.samples; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = -b[static_cast<std::size_t>(i)];
    rhs(i) = ys[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)];
    y(i) = ys[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d beta = X.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd residual = rhs - X * beta;
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  fit.log_C = beta(0);
  fit.C = std::exp(beta(0));
  fit.c = 1.0 / beta(1);
  fit.r_squared = ss_tot > 0.0 ? 1.0 - residual.squaredNorm() / ss_tot : 1.0;
  return fit;
}

}  // namespace fracheat
