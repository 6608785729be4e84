#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fracheat/manifold.hpp"

namespace fracheat {

// Uniform tensor-product nodes on the fundamental domain. Node i has multi-index
// (i_0, ..., i_{d-1}) with the last index varying fastest; coordinate along
// dimension r is i_r * spacing[r].
struct SpatialQuadrature {
  Eigen::MatrixXd points;   // dim x n
  Eigen::VectorXd weights;  // n, sum equals the volume
  std::vector<int> shape;
  std::vector<double> spacing;
  std::vector<double> periods;

  int size() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(shape.size()); }
  std::vector<int> multi_index(int node) const;
  // Wraps each component periodically.
  int node_index(std::span<const int> multi) const;
};

// Real orthonormal eigenfunctions evaluated at arbitrary points.
class ModeBasis {
 public:
  virtual ~ModeBasis() = default;
  virtual int size() const = 0;
  virtual int dim() const = 0;
  // out[k] = phi_k(x) for all k.
  virtual void values(std::span<const double> x, std::span<double> out) const = 0;
  virtual std::string label(int k) const = 0;
};

// Immutable truncated spectrum of -Delta_g. Copies share the same data.
class EigenSystem {
 public:
  EigenSystem(std::vector<double> eigenvalues, std::shared_ptr<const ModeBasis> basis,
              SpatialQuadrature quadrature, double volume);

  int size() const;
  int dim() const;
  const std::vector<double>& eigenvalues() const;
  double eigenvalue(int k) const { return eigenvalues()[static_cast<std::size_t>(k)]; }
  double volume() const;
  const SpatialQuadrature& quadrature() const;
  int node_count() const { return quadrature().size(); }
  const ModeBasis& basis() const;
  std::shared_ptr<const ModeBasis> basis_ptr() const;

  double phi(int k, std::span<const double> x) const;
  Eigen::VectorXd phi_all(std::span<const double> x) const;
  std::string mode_label(int k) const { return basis().label(k); }

  // K x nodes.size() matrix of phi_k at quadrature nodes.
  Eigen::MatrixXd node_values(const std::vector<int>& nodes) const;
  // Full K x n table, built once on first use.
  const Eigen::MatrixXd& node_values() const;

  // Index ranges [begin, end) of clusters with gap below 1e-9 (1 + lambda).
  std::vector<std::pair<int, int>> degenerate_clusters() const;

  // max |Gram - I| under the quadrature, accumulated over node chunks.
  double orthonormality_defect() const;
  // max_{k>=1} |(phi_k, phi_0)|.
  double constant_overlap() const;

  // Same underlying data (copies of one build).
  bool same_as(const EigenSystem& other) const { return impl_ == other.impl_; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

struct BuildOptions {
  int galerkin_N = 0;  // 0 selects 4K + 1
};

EigenSystem build_eigensystem(const ManifoldModel& model, int K, const BuildOptions& options = {});

// Quadrature approximation of the integral of f conj(h) dV.
std::complex<double> inner_product(std::span<const std::complex<double>> f,
                                   std::span<const std::complex<double>> h,
                                   const EigenSystem& sys);
double inner_product(std::span<const double> f, std::span<const double> h, const EigenSystem& sys);

// Rotates every degenerate cluster by a seeded random orthogonal matrix. The
// result spans the same eigenspaces with a different basis.
EigenSystem mix_degenerate_modes(const EigenSystem& sys, std::uint64_t seed);

}  // namespace fracheat
