#include "fracheat/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "fracheat/errors.hpp"
#include "fracheat/heat_kernel.hpp"
#include "fracheat/operators.hpp"

namespace fracheat {

namespace {

Eigen::MatrixXd metric_at(const ManifoldModel& model, double x0) {
  if (model.kind() == ManifoldKind::FlatTorus) return model.metric();
  return Eigen::MatrixXd::Constant(1, 1, model.gamma(x0));
}

bool box_inside(const CoordinateBox& inner, const CoordinateBox& outer) {
  for (std::size_t r = 0; r < inner.lo.size(); ++r)
    if (inner.lo[r] < outer.lo[r] || inner.hi[r] > outer.hi[r]) return false;
  return true;
}

bool closures_disjoint(const CoordinateBox& a, const CoordinateBox& b) {
  for (std::size_t r = 0; r < a.lo.size(); ++r)
    if (a.hi[r] < b.lo[r] || b.hi[r] < a.lo[r]) return true;
  return false;
}

void check_box(const CoordinateBox& box, int d, const char* name) {
  if (static_cast<int>(box.lo.size()) != d || static_cast<int>(box.hi.size()) != d)
    throw ContractError(std::string(name) + " needs one interval per dimension");
  for (int r = 0; r < d; ++r)
    if (!(box.lo[static_cast<std::size_t>(r)] < box.hi[static_cast<std::size_t>(r)]))
      throw ContractError(std::string(name) + " needs lo < hi");
}

int node_at(const SpatialQuadrature& q, const Eigen::VectorXd& x) {
  std::vector<int> multi(static_cast<std::size_t>(q.dim()));
  for (int r = 0; r < q.dim(); ++r) {
    const double h = q.spacing[static_cast<std::size_t>(r)];
    const double L = q.periods[static_cast<std::size_t>(r)];
    double v = std::fmod(x(r), L);
    if (v < 0) v += L;
    const double idx = std::round(v / h);
    if (std::abs(v - idx * h) > 1e-9 * h) throw ConstructionError("patch node has no counterpart node on the second model");
    multi[static_cast<std::size_t>(r)] = static_cast<int>(idx);
  }
  return q.node_index(multi);
}

// Positions into `nodes` of those whose coordinates lie in the box.
std::vector<int> positions_in(const SpatialQuadrature& q, const std::vector<int>& nodes, const CoordinateBox& box) {
  std::vector<int> out;
  for (std::size_t p = 0; p < nodes.size(); ++p) {
    bool inside = true;
    for (int r = 0; r < q.dim() && inside; ++r) {
      const double x = q.points(r, nodes[p]);
      inside = x >= box.lo[static_cast<std::size_t>(r)] && x <= box.hi[static_cast<std::size_t>(r)];
    }
    if (inside) out.push_back(static_cast<int>(p));
  }
  return out;
}

double raised_cosine(double u, int power) {
  if (std::abs(u) >= 1.0) return 0.0;
  return std::pow(0.5 * (1.0 + std::cos(std::numbers::pi * u)), power);
}

// Point evaluation of e^{-tau H} f at one node and grid time, reusing one FFT.
class PointSemigroup {
 public:
  PointSemigroup(const SourceFunction& f, int node, int time)
      : grid_(f.grid()), t_a_(f.support().t_a), time_(time), lam_(f.system().eigenvalues()) {
    if (time < 0 || time >= grid_.size()) throw ContractError("probe time index out of range");
    fh_ = to_frequency(f.field()).coeffs();
    phi_ = f.system().node_values({node}).col(0);
    const int N = grid_.size();
    base_.resize(static_cast<std::size_t>(N));
    for (int m = 0; m < N; ++m) {
      const double sign = m % 2 == 0 ? 1.0 : -1.0;
      const double arg = 2.0 * std::numbers::pi * static_cast<double>((static_cast<long long>(time) * m) % N) / N;
      base_[static_cast<std::size_t>(m)] = sign * std::polar(1.0, arg);
    }
  }

  cplx operator()(double tau) const {
    if (grid_.time(time_) - tau <= t_a_) return 0.0;
    const int N = grid_.size();
    std::vector<cplx> ph(static_cast<std::size_t>(N));
    for (int m = 0; m < N; ++m)
      ph[static_cast<std::size_t>(m)] =
          base_[static_cast<std::size_t>(m)] * (grid_.is_nyquist(m) ? cplx(1.0) : std::polar(1.0, -tau * grid_.frequency(m)));
    cplx acc = 0.0;
    for (Eigen::Index k = 0; k < fh_.rows(); ++k) {
      const double e = tau * lam_[static_cast<std::size_t>(k)];
      if (e > 40.0) continue;
      cplx row = 0.0;
      const cplx* c = fh_.row(k).data();
      for (int m = 0; m < N; ++m) row += ph[static_cast<std::size_t>(m)] * c[m];
      acc += phi_(k) * std::exp(-e) * row;
    }
    return acc * grid_.drho() / std::sqrt(2.0 * std::numbers::pi);
  }

 private:
  TimeGrid grid_;
  double t_a_;
  int time_;
  std::vector<double> lam_;
  ModeMatrix fh_;
  Eigen::VectorXd phi_;
  std::vector<cplx> base_;
};

// Eighth-order stencil offsets for d/dtau at tau >= 0, shifted to stay nonnegative.
std::vector<double> tau_offsets(double tau, double step) {
  int shift = 0;
  while (tau + (shift - 4) * step < 0.0) ++shift;
  std::vector<double> o;
  for (int k = -4; k <= 4; ++k) o.push_back(k + shift);
  return o;
}

}  // namespace

MetricPair::MetricPair(ManifoldModel first, ManifoldModel second, int K, CoordinateBox patch, CoordinateBox omega1,
                       CoordinateBox omega2, std::optional<AffineChart> chart, const BuildOptions& options)
    : first_(std::move(first)),
      second_(std::move(second)),
      sys1_(build_eigensystem(first_, K, options)),
      sys2_(build_eigensystem(second_, K, options)),
      box_(std::move(patch)),
      box1_(std::move(omega1)),
      box2_(std::move(omega2)) {
  const int d = first_.dim();
  if (second_.dim() != d) throw ConstructionError("paired models must have the same dimension");
  check_box(box_, d, "patch O");
  check_box(box1_, d, "omega_1");
  check_box(box2_, d, "omega_2");
  if (!box_inside(box1_, box_) || !box_inside(box2_, box_)) throw ContractError("omega_1 and omega_2 must lie in O");
  if (!closures_disjoint(box1_, box2_)) throw ContractError("omega_1 and omega_2 must have disjoint closures");

  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  if (chart) {
    if (chart->A.rows() != d || chart->A.cols() != d || chart->b.size() != d)
      throw ConstructionError("chart must be a dim x dim matrix and a dim vector");
    A = chart->A;
    b = chart->b;
  }
  const Eigen::MatrixXd Ainv = A.inverse();

  const SpatialQuadrature& q1 = sys1_.quadrature();
  const SpatialQuadrature& q2 = sys2_.quadrature();
  patch1_ = nodes_in_box(q1, box_.lo, box_.hi);
  if (patch1_.empty()) throw ContractError("patch O contains no quadrature node");
  patch2_.reserve(patch1_.size());
  double gscale = 0.0;
  for (int node : patch1_) {
    const Eigen::VectorXd x1 = q1.points.col(node);
    const Eigen::VectorXd x2 = Ainv * (x1 - b);
    const int n2 = node_at(q2, x2);
    patch2_.push_back(n2);
    const Eigen::MatrixXd g1 = A.transpose() * metric_at(first_, x1(0)) * A;
    const Eigen::MatrixXd g2 = metric_at(second_, q2.points(0, n2));
    gscale = std::max(gscale, g1.cwiseAbs().maxCoeff());
    mismatch_ = std::max(mismatch_, (g1 - g2).cwiseAbs().maxCoeff());
  }
  mismatch_ = gscale > 0.0 ? mismatch_ / gscale : mismatch_;
  if (mismatch_ > 1e-12) throw ConstructionError("metrics differ on the shared patch O");

  omega1_ = positions_in(q1, patch1_, box1_);
  omega2_ = positions_in(q1, patch1_, box2_);
  if (omega1_.empty() || omega2_.empty()) throw ContractError("omega_1 and omega_2 must contain quadrature nodes");
}

std::vector<int> MetricPair::omega_nodes(int omega, int which) const {
  const auto& pos = omega == 1 ? omega1_ : omega2_;
  const auto& p = patch(which);
  std::vector<int> out;
  out.reserve(pos.size());
  for (int i : pos) out.push_back(p[static_cast<std::size_t>(i)]);
  return out;
}

int MetricPair::transfer_node(int node, int to) const {
  const auto& from = patch(1 - to);
  const auto it = std::find(from.begin(), from.end(), node);
  if (it == from.end()) throw ContractError("node is not part of the patch O");
  return patch(to)[static_cast<std::size_t>(it - from.begin())];
}

SourceFunction MetricPair::transfer(const SourceFunction& f, int to, const TimeGrid& grid) const {
  const auto& from = patch(1 - to);
  std::unordered_map<int, int> pos;
  for (std::size_t p = 0; p < from.size(); ++p) pos.emplace(from[p], static_cast<int>(p));
  Cylinder c = f.support();
  for (int& node : c.patch) {
    const auto it = pos.find(node);
    if (it == pos.end()) throw ContractError("source support leaves the patch O");
    node = patch(to)[static_cast<std::size_t>(it->second)];
  }
  return SourceFunction(system(to), grid, std::move(c), f.samples());
}

MetricPair MetricPair::swapped_omegas() const {
  MetricPair p = *this;
  std::swap(p.omega1_, p.omega2_);
  std::swap(p.box1_, p.box2_);
  return p;
}

SourceFunction raised_cosine_source(const EigenSystem& sys, const TimeGrid& grid, const std::vector<int>& nodes,
                                    const CoordinateBox& box, double t_lo, double t_hi, int power) {
  const SpatialQuadrature& q = sys.quadrature();
  check_box(box, q.dim(), "source box");
  if (!(t_lo < t_hi)) throw ContractError("source time interval needs t_lo < t_hi");
  std::vector<int> support;
  std::vector<double> space;
  for (int node : nodes) {
    double v = 1.0;
    for (int r = 0; r < q.dim(); ++r) {
      const double c = 0.5 * (box.lo[static_cast<std::size_t>(r)] + box.hi[static_cast<std::size_t>(r)]);
      const double w = 0.5 * (box.hi[static_cast<std::size_t>(r)] - box.lo[static_cast<std::size_t>(r)]);
      v *= raised_cosine((q.points(r, node) - c) / w, power);
    }
    if (v > 0.0) {
      support.push_back(node);
      space.push_back(v);
    }
  }
  if (support.empty()) throw ContractError("source box contains no interior node");
  Eigen::VectorXd time = Eigen::VectorXd::Zero(grid.size());
  const double tc = 0.5 * (t_lo + t_hi), tw = 0.5 * (t_hi - t_lo);
  for (int j : interior_indices(grid, t_lo, t_hi)) time(j) = raised_cosine((grid.time(j) - tc) / tw, power);
  double mass_x = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) mass_x += q.weights(support[i]) * space[i];
  const double mass = mass_x * time.sum() * grid.dt();
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(support.size()), grid.size());
  for (std::size_t i = 0; i < support.size(); ++i) samples.row(static_cast<Eigen::Index>(i)) = (space[i] / mass) * time.transpose();
  return SourceFunction(sys, grid, Cylinder{support, t_lo, t_hi}, std::move(samples));
}

SourceFunction default_pair_source(const MetricPair& pair, const TimeGrid& grid, int power) {
  const double T = grid.horizon();
  return raised_cosine_source(pair.system(0), grid, pair.omega_nodes(1, 0), pair.omega_box(1), -0.5 * T, 0.5 * T, power);
}

HarnessProbe default_probe(const MetricPair& pair, const TimeGrid& grid) {
  const SpatialQuadrature& q = pair.system(0).quadrature();
  const CoordinateBox& box = pair.omega_box(2);
  int best = pair.omega2().front();
  double best_d = std::numeric_limits<double>::infinity();
  for (int pos : pair.omega2()) {
    double d2 = 0.0;
    for (int r = 0; r < q.dim(); ++r) {
      const double c = 0.5 * (box.lo[static_cast<std::size_t>(r)] + box.hi[static_cast<std::size_t>(r)]);
      const double v = q.points(r, pair.patch(0)[static_cast<std::size_t>(pos)]) - c;
      d2 += v * v;
    }
    if (d2 < best_d) {
      best_d = d2;
      best = pos;
    }
  }
  return HarnessProbe{best, grid.nearest_index(0.5 * grid.horizon())};
}

MomentSequence moment_sequence(const MetricPair& pair, const SourceFunction& f, int m_max, const ProbeMap& map_first,
                               const ProbeMap& map_second, const LocalPowerOptions& local) {
  if (m_max < 0) throw ContractError("m_max must be nonnegative");
  const auto w1 = pair.omega_nodes(1, 0);
  for (int node : f.support().patch)
    if (std::find(w1.begin(), w1.end(), node) == w1.end()) throw ContractError("source support leaves omega_1");
  MomentSequence out;
  SourceFunction h = f;
  for (int m = 0; m <= m_max; ++m) {
    if (m > 0) h = local_parabolic_power(h, 1, pair.model(0), pair.patch(0), local);
    const cplx v = map_first(h) - map_second(pair.transfer(h, 1, f.grid()));
    const double scale = h.max_abs();
    out.moments.push_back(v);
    out.source_scale.push_back(scale);
    out.normalized.push_back(scale > 0.0 ? std::abs(v) / scale : std::abs(v));
  }
  return out;
}

MomentSequence moment_sequence(const MetricPair& pair, const SourceFunction& f, int m_max, HarnessProbe probe,
                               double s, const LocalPowerOptions& local) {
  const auto& w2 = pair.omega2();
  if (std::find(w2.begin(), w2.end(), probe.patch_position) == w2.end())
    throw ContractError("probe must lie in omega_2");
  const TimeGrid& grid = f.grid();
  const double T = grid.horizon();
  const auto sts1 = make_sts(pair.system(0), pair.patch(0), T, s, grid);
  const auto sts2 = make_sts(pair.system(1), pair.patch(1), T, s, grid);
  const SpaceTimePoint p1{pair.patch(0)[static_cast<std::size_t>(probe.patch_position)], probe.time};
  const SpaceTimePoint p2{pair.patch(1)[static_cast<std::size_t>(probe.patch_position)], probe.time};
  // The maps carry their own grid object; sources are rebuilt on it.
  auto first = [&](const SourceFunction& h) {
    return sts1.probe(SourceFunction(h.system(), sts1.grid(), h.support(), h.samples()), p1);
  };
  auto second = [&](const SourceFunction& h) {
    return sts2.probe(SourceFunction(h.system(), sts2.grid(), h.support(), h.samples()), p2);
  };
  return moment_sequence(pair, f, m_max, first, second, local);
}

cplx semigroup_point_value(const SourceFunction& f, double tau, int node, int time) {
  if (!(tau >= 0.0)) throw ContractError("semigroup time tau must be nonnegative");
  return PointSemigroup(f, node, time)(tau);
}

PhiSamples phi_eta(const MetricPair& pair, const SourceFunction& f, HarnessProbe probe, const std::vector<double>& eta,
                   double s, int m_max) {
  const auto& w2 = pair.omega2();
  if (std::find(w2.begin(), w2.end(), probe.patch_position) == w2.end())
    throw ContractError("probe must lie in omega_2");
  for (double e : eta)
    if (!(e > 0.0)) throw ContractError("eta samples must be positive");
  const SourceFunction f2 = pair.transfer(f, 1, f.grid());
  const PointSemigroup a(f, pair.patch(0)[static_cast<std::size_t>(probe.patch_position)], probe.time);
  const PointSemigroup b(f2, pair.patch(1)[static_cast<std::size_t>(probe.patch_position)], probe.time);

  PhiSamples out;
  out.eta = eta;
  out.phi.resize(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double tau = 1.0 / eta[i];
    out.phi[i] = (a(tau) - b(tau)) / std::pow(eta[i], s);
  }
  for (int m = 0; m <= m_max; ++m) {
    cplx acc = 0.0;
    for (std::size_t i = 1; i < eta.size(); ++i)
      acc += 0.5 * (eta[i] - eta[i - 1]) *
             (out.phi[i] * std::pow(eta[i], m) + out.phi[i - 1] * std::pow(eta[i - 1], m));
    out.eta_moments.push_back(acc);
  }

  // Upper envelope on the decaying side of the peak of |phi| eta^s.
  std::vector<double> xs, ys;
  std::size_t peak = 0;
  double peak_v = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double v = std::abs(out.phi[i]) * std::pow(eta[i], s);
    if (v > peak_v) {
      peak_v = v;
      peak = i;
    }
  }
  for (std::size_t i = peak; i < eta.size(); ++i) {
    const double v = std::abs(out.phi[i]) * std::pow(eta[i], s);
    if (v > 1e-12 * peak_v && v > 0.0) {
      xs.push_back(eta[i]);
      ys.push_back(std::log(v));
    }
  }
  if (xs.size() >= 3) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0, lift = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double fit = icpt + slope * xs[i];
      ss_res += (ys[i] - fit) * (ys[i] - fit);
      ss_tot += (ys[i] - sy / n) * (ys[i] - sy / n);
      lift = std::max(lift, ys[i] - fit);
    }
    out.envelope.c = -slope;
    out.envelope.C = std::exp(icpt + lift);
    out.envelope.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    out.envelope.samples = static_cast<int>(xs.size());
  }
  return out;
}

TimeIntegratedFlow time_integrated_flow(const SpaceTimeField& f, const std::vector<double>& taus, double fd_step) {
  const EigenSystem& sys = f.system();
  const int K = f.modes();
  const FrequencyField fh = to_frequency(f);
  const double dt = f.grid().dt();
  auto flow_at = [&](double tau) {
    const SpaceTimeField g = from_frequency(heat_semigroup_apply(fh, tau));
    Eigen::VectorXcd out(K);
    for (int k = 0; k < K; ++k) out(k) = g.coeffs().row(k).sum() * dt;
    return out;
  };
  Eigen::VectorXcd mean(K);
  for (int k = 0; k < K; ++k) mean(k) = f.coeffs().row(k).sum() * dt;

  TimeIntegratedFlow r;
  r.taus = taus;
  r.flow.resize(K, static_cast<Eigen::Index>(taus.size()));
  r.heat_flow.resize(K, static_cast<Eigen::Index>(taus.size()));
  double top = 0.0, dev = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double tau = taus[i];
    if (!(tau >= 0.0)) throw ContractError("flow times must be nonnegative");
    const auto c = static_cast<Eigen::Index>(i);
    r.flow.col(c) = flow_at(tau);
    for (int k = 0; k < K; ++k) r.heat_flow(k, c) = std::exp(-tau * sys.eigenvalue(k)) * mean(k);
    top = std::max(top, r.heat_flow.col(c).cwiseAbs().maxCoeff());
    dev = std::max(dev, (r.flow.col(c) - r.heat_flow.col(c)).cwiseAbs().maxCoeff());
    r.mass.push_back(r.flow(0, c).real() * std::sqrt(sys.volume()));

    const std::vector<double> offs = tau_offsets(tau, fd_step);
    const std::vector<double> w = fd_weights(1, offs);
    Eigen::VectorXcd dF = Eigen::VectorXcd::Zero(K);
    for (std::size_t o = 0; o < offs.size(); ++o) dF += (w[o] / fd_step) * flow_at(tau + offs[o] * fd_step);
    Eigen::VectorXcd res = dF;
    for (int k = 0; k < K; ++k) res(k) += sys.eigenvalue(k) * r.flow(k, c);
    const double nF = r.flow.col(c).norm();
    if (nF > 0.0) r.heat_residual = std::max(r.heat_residual, res.norm() / nF);
  }
  r.max_deviation = top > 0.0 ? dev / top : dev;
  return r;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::ConsistentWithEqualKernels: return "consistent-with-equal-kernels";
    case Verdict::Distinguished: return "distinguished";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict classify(double max_moment_ratio, double kernel_ratio, const Thresholds& t) {
  const double worst = std::max(max_moment_ratio, kernel_ratio);
  if (worst > t.distinguish) return Verdict::Distinguished;
  if (worst < t.consistent) return Verdict::ConsistentWithEqualKernels;
  return Verdict::Inconclusive;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi >= lo) || n < 1) throw ContractError("log grid needs 0 < lo <= hi and n >= 1");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return out;
}

KernelComparison compare_kernels(const MetricPair& pair, const std::vector<double>& taus, int max_points) {
  const std::size_t P = pair.patch(0).size();
  const std::size_t stride = std::max<std::size_t>(1, (P + static_cast<std::size_t>(max_points) - 1) / static_cast<std::size_t>(max_points));
  std::vector<int> n1, n2;
  for (std::size_t p = 0; p < P; p += stride) {
    n1.push_back(pair.patch(0)[p]);
    n2.push_back(pair.patch(1)[p]);
  }
  const Eigen::MatrixXd phi1 = pair.system(0).node_values(n1);
  const Eigen::MatrixXd phi2 = pair.system(1).node_values(n2);
  const auto& lam1 = pair.system(0).eigenvalues();
  const auto& lam2 = pair.system(1).eigenvalues();
  auto kernel = [](const Eigen::MatrixXd& phi, const std::vector<double>& lam, double tau) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(lam.size()));
    for (std::size_t k = 0; k < lam.size(); ++k) d(static_cast<Eigen::Index>(k)) = std::exp(-tau * lam[k]);
    return Eigen::MatrixXd(phi.transpose() * d.asDiagonal() * phi);
  };
  KernelComparison r;
  r.taus = taus;
  r.points = static_cast<int>(n1.size());
  for (double tau : taus) {
    if (!(tau > 0.0)) throw ContractError("kernel times must be positive");
    const Eigen::MatrixXd k1 = kernel(phi1, lam1, tau);
    const Eigen::MatrixXd k2 = kernel(phi2, lam2, tau);
    const double diff = (k1 - k2).cwiseAbs().maxCoeff();
    r.sup_difference.push_back(diff);
    r.max_difference = std::max(r.max_difference, diff);
    r.kernel_scale = std::max(r.kernel_scale, k1.cwiseAbs().maxCoeff());
  }
  return r;
}

DistinguishReport kernel_compare(const MetricPair& pair, const TimeGrid& grid, const HarnessOptions& options) {
  if (!(grid.horizon() > 0.0)) throw ContractError("harness grid needs a horizon T");
  std::vector<double> taus = options.taus.empty() ? log_spaced(0.05, 10.0, 40) : options.taus;
  std::vector<double> eta = options.eta;
  if (eta.empty()) {
    const double tmin = std::max(HeatKernelEvaluator(pair.system(0)).tau_min(), HeatKernelEvaluator(pair.system(1)).tau_min());
    eta = log_spaced(0.05, 1.0 / tmin, 96);
  }
  const SourceFunction f = default_pair_source(pair, grid, options.source_power);
  const HarnessProbe probe = default_probe(pair, grid);

  DistinguishReport r;
  r.thresholds = options.thresholds;
  r.moments = moment_sequence(pair, f, options.m_max, probe, options.s, options.local);
  r.phi = phi_eta(pair, f, probe, eta, options.s, options.m_max);
  r.kernels = compare_kernels(pair, taus, options.kernel_points);
  for (double v : r.moments.normalized) r.max_moment_ratio = std::max(r.max_moment_ratio, v);
  r.kernel_ratio = r.kernels.kernel_scale > 0.0 ? r.kernels.max_difference / r.kernels.kernel_scale : 0.0;
  r.verdict = classify(r.max_moment_ratio, r.kernel_ratio, r.thresholds);
  return r;
}

TildeReport tilde_solution_check(const SpaceTimeField& u, const std::vector<double>& taus, double step) {
  const TimeGrid& grid = u.grid();
  const double T = grid.horizon();
  if (!(T > 0.0)) throw ContractError("tilde check needs a grid with horizon T");
  const EigenSystem& sys = u.system();
  const int K = u.modes(), N = u.samples();
  const FrequencyField uh = to_frequency(u);
  const double norm = l2_norm(u);
  const int jT = grid.nearest_index(-T);
  const Eigen::MatrixXd& phi_all = sys.node_values();

  std::vector<double> rho(static_cast<std::size_t>(N));
  std::vector<cplx> base(static_cast<std::size_t>(N));
  for (int m = 0; m < N; ++m) {
    rho[static_cast<std::size_t>(m)] = grid.is_nyquist(m) ? 0.0 : grid.frequency(m);
    const double sign = m % 2 == 0 ? 1.0 : -1.0;
    const double arg = 2.0 * std::numbers::pi * static_cast<double>((static_cast<long long>(jT) * m) % N) / N;
    base[static_cast<std::size_t>(m)] = sign * std::polar(1.0, arg);
  }
  const double scale = grid.drho() / std::sqrt(2.0 * std::numbers::pi);

  TildeReport r;
  r.taus = taus;
  r.initial_defect = l2_norm(heat_semigroup_apply(u, 0.0) - u);
  for (double tau : taus) {
    if (!(tau >= 0.0)) throw ContractError("tau samples must be nonnegative");
    const std::vector<double> offs = tau_offsets(tau, step);
    const std::vector<double> w = fd_weights(1, offs);
    double acc = 0.0;
    Eigen::VectorXcd at_past(K);
    for (int k = 0; k < K; ++k) {
      const double lam = sys.eigenvalue(k);
      cplx past = 0.0;
      for (int m = 0; m < N; ++m) {
        const double r_m = rho[static_cast<std::size_t>(m)];
        const cplx z(lam, r_m);
        const cplx e0 = std::exp(-tau * z);
        cplx d = 0.0;
        for (std::size_t o = 0; o < offs.size(); ++o) d += w[o] * std::exp(-(tau + offs[o] * step) * z);
        const cplx bin = (z * e0 + d / step) * uh(k, m);
        acc += std::norm(bin);
        past += base[static_cast<std::size_t>(m)] * e0 * uh(k, m);
      }
      at_past(k) = scale * past;
    }
    const double res = std::sqrt(acc * grid.drho());
    const double pv = (phi_all.transpose().cast<cplx>() * at_past).cwiseAbs().maxCoeff();
    r.pde_residual.push_back(norm > 0.0 ? res / norm : res);
    r.past_value.push_back(norm > 0.0 ? pv / norm : pv);
    r.max_pde_residual = std::max(r.max_pde_residual, r.pde_residual.back());
    r.max_past_value = std::max(r.max_past_value, r.past_value.back());
  }
  return r;
}

}  // namespace fracheat
