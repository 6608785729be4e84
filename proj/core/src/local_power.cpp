#include "fracheat/local_power.hpp"

#include <cmath>
#include <set>
#include <unordered_map>

#include <Eigen/Sparse>

#include "fft.hpp"
#include "fracheat/errors.hpp"

namespace fracheat {

std::vector<double> fd_weights(int derivative, std::span<const double> offsets) {
  const int n = static_cast<int>(offsets.size());
  if (derivative < 0 || n <= derivative) throw ContractError("stencil too small for the derivative order");
  const int M = derivative;
  std::vector<std::vector<double>> c(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(M + 1), 0.0));
  double c1 = 1.0;
  double c4 = offsets[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, M);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = offsets[static_cast<std::size_t>(i)];
    for (int j = 0; j < i; ++j) {
      const double c3 = offsets[static_cast<std::size_t>(i)] - offsets[static_cast<std::size_t>(j)];
      if (c3 == 0.0) throw ContractError("stencil offsets must be distinct");
      c2 *= c3;
      auto& ci = c[static_cast<std::size_t>(i)];
      auto& cj = c[static_cast<std::size_t>(j)];
      if (j == i - 1) {
        const auto& prev = c[static_cast<std::size_t>(i - 1)];
        for (int k = mn; k >= 1; --k)
          ci[static_cast<std::size_t>(k)] = c1 * (k * prev[static_cast<std::size_t>(k - 1)] - c5 * prev[static_cast<std::size_t>(k)]) / c2;
        ci[0] = -c1 * c5 * prev[0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        cj[static_cast<std::size_t>(k)] = (c4 * cj[static_cast<std::size_t>(k)] - k * cj[static_cast<std::size_t>(k - 1)]) / c3;
      cj[0] = c4 * cj[0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) w[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)][static_cast<std::size_t>(M)];
  return w;
}

namespace {

// Sparse matrix of Delta_g restricted to the node set, zero extension outside.
Eigen::SparseMatrix<double> laplacian_on(const ManifoldModel& model, const SpatialQuadrature& q,
                                         const std::vector<int>& nodes, int radius) {
  const int d = q.dim();
  if (model.dim() != d) throw ContractError("metric model and quadrature differ in dimension");
  std::unordered_map<int, int> row_of;
  for (std::size_t r = 0; r < nodes.size(); ++r) row_of.emplace(nodes[r], static_cast<int>(r));

  std::vector<double> offs;
  for (int o = -radius; o <= radius; ++o) offs.push_back(o);
  const std::vector<double> w1 = fd_weights(1, offs);
  const std::vector<double> w2 = fd_weights(2, offs);

  Eigen::MatrixXd ginv;
  if (model.kind() == ManifoldKind::FlatTorus) ginv = model.metric().inverse();

  std::vector<Eigen::Triplet<double>> trip;
  std::vector<int> multi(static_cast<std::size_t>(d));
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    const std::vector<int> base = q.multi_index(nodes[r]);
    auto add = [&](const std::vector<int>& shift, double w) {
      if (w == 0.0) return;
      for (int a = 0; a < d; ++a) multi[static_cast<std::size_t>(a)] = base[static_cast<std::size_t>(a)] + shift[static_cast<std::size_t>(a)];
      const auto it = row_of.find(q.node_index(multi));
      if (it != row_of.end()) trip.emplace_back(static_cast<int>(r), it->second, w);
    };
    std::vector<int> shift(static_cast<std::size_t>(d), 0);
    if (model.kind() == ManifoldKind::VariableCircle) {
      const double x = q.points(0, nodes[r]);
      const double h = q.spacing[0];
      const double g = model.gamma(x), dg = model.gamma_derivative(x);
      for (int o = -radius; o <= radius; ++o) {
        shift[0] = o;
        const auto i = static_cast<std::size_t>(o + radius);
        add(shift, w2[i] / (g * h * h) - dg / (2.0 * g * g) * w1[i] / h);
      }
      continue;
    }
    for (int a = 0; a < d; ++a) {
      const double ha = q.spacing[static_cast<std::size_t>(a)];
      std::fill(shift.begin(), shift.end(), 0);
      for (int o = -radius; o <= radius; ++o) {
        shift[static_cast<std::size_t>(a)] = o;
        add(shift, ginv(a, a) * w2[static_cast<std::size_t>(o + radius)] / (ha * ha));
      }
      for (int b = a + 1; b < d; ++b) {
        if (ginv(a, b) == 0.0) continue;
        const double hb = q.spacing[static_cast<std::size_t>(b)];
        std::fill(shift.begin(), shift.end(), 0);
        for (int oa = -radius; oa <= radius; ++oa)
          for (int ob = -radius; ob <= radius; ++ob) {
            shift[static_cast<std::size_t>(a)] = oa;
            shift[static_cast<std::size_t>(b)] = ob;
            add(shift, 2.0 * ginv(a, b) * w1[static_cast<std::size_t>(oa + radius)] *
                           w1[static_cast<std::size_t>(ob + radius)] / (ha * hb));
          }
      }
    }
  }
  Eigen::SparseMatrix<double> L(static_cast<Eigen::Index>(nodes.size()), static_cast<Eigen::Index>(nodes.size()));
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

Eigen::MatrixXd time_derivative(const Eigen::MatrixXd& samples, const TimeGrid& grid) {
  const int N = grid.size();
  ModeMatrix c = samples.cast<cplx>();
  detail::dft_rows(c, -1);
  for (int m = 0; m < N; ++m) {
    const cplx f = grid.is_nyquist(m) ? cplx(0.0) : cplx(0.0, grid.frequency(m) / N);
    c.col(m) *= f;
  }
  detail::dft_rows(c, +1);
  return c.real();
}

}  // namespace

Eigen::MatrixXd parabolic_power_samples(const ManifoldModel& model, const SpatialQuadrature& q,
                                        const std::vector<int>& nodes, const TimeGrid& grid,
                                        const Eigen::MatrixXd& samples, int m, const LocalPowerOptions& options) {
  if (m < 0) throw ContractError("power m must be nonnegative");
  if (samples.rows() != static_cast<Eigen::Index>(nodes.size()) || samples.cols() != grid.size())
    throw ContractError("samples must be nodes x N_t");
  Eigen::MatrixXd out = samples;
  if (m == 0) return out;
  const Eigen::SparseMatrix<double> L = laplacian_on(model, q, nodes, options.stencil_radius);
  for (int p = 0; p < m; ++p) out = time_derivative(out, grid) - L * out;
  return out;
}

SourceFunction local_parabolic_power(const SourceFunction& f, int m, const ManifoldModel& model,
                                     const std::vector<int>& patch, const LocalPowerOptions& options) {
  if (m < 0) throw ContractError("power m must be nonnegative");
  if (m == 0) return f;
  const SpatialQuadrature& q = f.system().quadrature();
  const TimeGrid& grid = f.grid();
  const Cylinder& supp = f.support();

  const std::set<int> in_patch(patch.begin(), patch.end());
  const int d = q.dim();
  const int g = options.min_margin;
  std::vector<int> shift(static_cast<std::size_t>(d), -g);
  std::vector<int> multi(static_cast<std::size_t>(d));
  for (int node : supp.patch) {
    const std::vector<int> base = q.multi_index(node);
    std::fill(shift.begin(), shift.end(), -g);
    while (true) {
      for (int a = 0; a < d; ++a) multi[static_cast<std::size_t>(a)] = base[static_cast<std::size_t>(a)] + shift[static_cast<std::size_t>(a)];
      if (!in_patch.count(q.node_index(multi)))
        throw ContractError("source support is closer than the required margin to the boundary of O");
      int a = d - 1;
      while (a >= 0 && ++shift[static_cast<std::size_t>(a)] > g) shift[static_cast<std::size_t>(a--)] = -g;
      if (a < 0) break;
    }
  }
  const double T = f.horizon();
  if (supp.t_a < -T + g * grid.dt() || supp.t_b > T - g * grid.dt())
    throw ContractError("source time support is closer than the required margin to -T or T");

  const Eigen::SparseMatrix<double> L = laplacian_on(model, q, supp.patch, options.stencil_radius);
  std::vector<bool> keep(static_cast<std::size_t>(grid.size()), false);
  for (int j : interior_indices(grid, supp.t_a, supp.t_b)) keep[static_cast<std::size_t>(j)] = true;
  Eigen::MatrixXd h = f.samples();
  for (int p = 0; p < m; ++p) {
    h = time_derivative(h, grid) - L * h;
    for (int j = 0; j < grid.size(); ++j)
      if (!keep[static_cast<std::size_t>(j)]) h.col(j).setZero();
  }
  return SourceFunction(f.system(), grid, supp, std::move(h));
}

}  // namespace fracheat
