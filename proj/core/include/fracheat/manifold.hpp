#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fracheat {

enum class ManifoldKind { FlatTorus, VariableCircle };

std::string to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(const std::string& name);

// Closed model manifold. FlatTorus: R^d / (L_1 Z x ... x L_d Z) with a constant
// metric G in the coordinate frame. VariableCircle: R / L Z with metric
// gamma(x) dx^2, gamma given by a real Fourier series [a0, a1, b1, a2, b2, ...]
// meaning a0 + sum_j a_j cos(2 pi j x / L) + b_j sin(2 pi j x / L).
class ManifoldModel {
 public:
  static ManifoldModel flat_torus(const Eigen::MatrixXd& metric, std::vector<double> periods,
                                  std::vector<int> nodes = {});
  static ManifoldModel flat_circle(double period, double metric = 1.0, int nodes = 0);
  static ManifoldModel variable_circle(std::vector<double> gamma_fourier, double period,
                                       int nodes = 0);

  ManifoldKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(periods_.size()); }
  const Eigen::MatrixXd& metric() const { return metric_; }
  const std::vector<double>& periods() const { return periods_; }
  // Requested quadrature nodes per dimension; 0 means choose automatically.
  const std::vector<int>& nodes() const { return nodes_; }
  const std::vector<double>& gamma_fourier() const { return gamma_; }

  // Metric profile of a VariableCircle and its x-derivative.
  double gamma(double x) const;
  double gamma_derivative(double x) const;
  // Minimum of gamma over a dense uniform sampling (4096 points).
  double gamma_min() const;

  double volume() const;

  bool operator==(const ManifoldModel& other) const;

 private:
  ManifoldKind kind_ = ManifoldKind::FlatTorus;
  Eigen::MatrixXd metric_;
  std::vector<double> periods_;
  std::vector<int> nodes_;
  std::vector<double> gamma_;
};

// Riemannian distance between coordinate points. FlatTorus minimizes the metric
// length over lattice translates within one period in every direction;
// VariableCircle integrates gamma^{1/2} along the shorter arc.
double geodesic_distance(const ManifoldModel& model, const std::vector<double>& x,
                         const std::vector<double>& z);

}  // namespace fracheat
