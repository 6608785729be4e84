#include "fracheat/eigensystem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "fracheat/errors.hpp"

namespace fracheat {

std::vector<int> SpatialQuadrature::multi_index(int node) const {
  std::vector<int> idx(shape.size());
  for (int r = dim() - 1; r >= 0; --r) {
    idx[static_cast<std::size_t>(r)] = node % shape[static_cast<std::size_t>(r)];
    node /= shape[static_cast<std::size_t>(r)];
  }
  return idx;
}

int SpatialQuadrature::node_index(std::span<const int> multi) const {
  int node = 0;
  for (std::size_t r = 0; r < shape.size(); ++r) {
    int i = multi[r] % shape[r];
    if (i < 0) i += shape[r];
    node = node * shape[r] + i;
  }
  return node;
}

struct EigenSystem::Impl {
  std::vector<double> eigenvalues;
  std::shared_ptr<const ModeBasis> basis;
  SpatialQuadrature quadrature;
  double volume = 0.0;
  mutable std::once_flag table_once;
  mutable Eigen::MatrixXd table;
};

EigenSystem::EigenSystem(std::vector<double> eigenvalues, std::shared_ptr<const ModeBasis> basis,
                         SpatialQuadrature quadrature, double volume) {
  if (!basis) throw ContractError("eigensystem needs a basis");
  if (static_cast<int>(eigenvalues.size()) != basis->size())
    throw ContractError("eigenvalue count does not match basis size");
  if (quadrature.points.rows() != basis->dim())
    throw ContractError("quadrature dimension does not match basis");
  auto impl = std::make_shared<Impl>();
  impl->eigenvalues = std::move(eigenvalues);
  impl->basis = std::move(basis);
  impl->quadrature = std::move(quadrature);
  impl->volume = volume;
  impl_ = std::move(impl);
}

int EigenSystem::size() const { return static_cast<int>(impl_->eigenvalues.size()); }
int EigenSystem::dim() const { return impl_->basis->dim(); }
const std::vector<double>& EigenSystem::eigenvalues() const { return impl_->eigenvalues; }
double EigenSystem::volume() const { return impl_->volume; }
const SpatialQuadrature& EigenSystem::quadrature() const { return impl_->quadrature; }
const ModeBasis& EigenSystem::basis() const { return *impl_->basis; }
std::shared_ptr<const ModeBasis> EigenSystem::basis_ptr() const { return impl_->basis; }

double EigenSystem::phi(int k, std::span<const double> x) const {
  if (k < 0 || k >= size()) throw ContractError("mode index out of range");
  Eigen::VectorXd v = phi_all(x);
  return v(k);
}

Eigen::VectorXd EigenSystem::phi_all(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) throw ContractError("point dimension mismatch");
  Eigen::VectorXd v(size());
  impl_->basis->values(x, std::span<double>(v.data(), static_cast<std::size_t>(v.size())));
  return v;
}

Eigen::MatrixXd EigenSystem::node_values(const std::vector<int>& nodes) const {
  const auto& q = impl_->quadrature;
  Eigen::MatrixXd out(size(), static_cast<Eigen::Index>(nodes.size()));
  std::vector<double> x(static_cast<std::size_t>(dim()));
  for (std::size_t c = 0; c < nodes.size(); ++c) {
    const int i = nodes[c];
    if (i < 0 || i >= q.size()) throw ContractError("node index out of range");
    for (int r = 0; r < dim(); ++r) x[static_cast<std::size_t>(r)] = q.points(r, i);
    impl_->basis->values(x, std::span<double>(out.col(static_cast<Eigen::Index>(c)).data(),
                                              static_cast<std::size_t>(size())));
  }
  return out;
}

const Eigen::MatrixXd& EigenSystem::node_values() const {
  std::call_once(impl_->table_once, [this] {
    std::vector<int> all(static_cast<std::size_t>(node_count()));
    std::iota(all.begin(), all.end(), 0);
    impl_->table = node_values(all);
  });
  return impl_->table;
}

std::vector<std::pair<int, int>> EigenSystem::degenerate_clusters() const {
  std::vector<std::pair<int, int>> out;
  const auto& lam = eigenvalues();
  int begin = 0;
  for (int k = 1; k <= size(); ++k) {
    const bool split = k == size() ||
                       lam[static_cast<std::size_t>(k)] - lam[static_cast<std::size_t>(k - 1)] >=
                           1e-9 * (1.0 + lam[static_cast<std::size_t>(k - 1)]);
    if (split) {
      out.emplace_back(begin, k);
      begin = k;
    }
  }
  return out;
}

double EigenSystem::orthonormality_defect() const {
  const auto& q = impl_->quadrature;
  const int n = q.size();
  const int chunk = 512;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(size(), size());
  for (int start = 0; start < n; start += chunk) {
    const int stop = std::min(n, start + chunk);
    std::vector<int> nodes(static_cast<std::size_t>(stop - start));
    std::iota(nodes.begin(), nodes.end(), start);
    const Eigen::MatrixXd phi = node_values(nodes);
    const Eigen::VectorXd w = q.weights.segment(start, stop - start);
    gram.noalias() += phi * w.asDiagonal() * phi.transpose();
  }
  gram -= Eigen::MatrixXd::Identity(size(), size());
  return gram.cwiseAbs().maxCoeff();
}

double EigenSystem::constant_overlap() const {
  const auto& q = impl_->quadrature;
  const int n = q.size();
  const int chunk = 512;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(size());
  for (int start = 0; start < n; start += chunk) {
    const int stop = std::min(n, start + chunk);
    std::vector<int> nodes(static_cast<std::size_t>(stop - start));
    std::iota(nodes.begin(), nodes.end(), start);
    const Eigen::MatrixXd phi = node_values(nodes);
    acc.noalias() += phi * (q.weights.segment(start, stop - start).cwiseProduct(
                               phi.row(0).transpose()));
  }
  if (size() < 2) return 0.0;
  return acc.tail(size() - 1).cwiseAbs().maxCoeff();
}

namespace {

SpatialQuadrature uniform_quadrature(const std::vector<double>& periods, const std::vector<int>& shape,
                                     double density) {
  SpatialQuadrature q;
  q.shape = shape;
  q.periods = periods;
  const std::size_t d = periods.size();
  q.spacing.resize(d);
  int n = 1;
  for (std::size_t r = 0; r < d; ++r) {
    q.spacing[r] = periods[r] / shape[r];
    n *= shape[r];
  }
  double cell = density;
  for (double h : q.spacing) cell *= h;
  q.points.resize(static_cast<Eigen::Index>(d), n);
  q.weights = Eigen::VectorXd::Constant(n, cell);
  for (int i = 0; i < n; ++i) {
    const auto idx = q.multi_index(i);
    for (std::size_t r = 0; r < d; ++r)
      q.points(static_cast<Eigen::Index>(r), i) = idx[r] * q.spacing[r];
  }
  return q;
}

// ---- flat torus ----

struct TorusMode {
  std::vector<int> n;
  int type = 0;  // 0 constant, 1 cos, 2 sin
  double lambda = 0.0;
};

class TorusBasis final : public ModeBasis {
 public:
  TorusBasis(std::vector<TorusMode> modes, std::vector<double> periods, double volume)
      : modes_(std::move(modes)), periods_(std::move(periods)) {
    c0_ = 1.0 / std::sqrt(volume);
    c1_ = std::sqrt(2.0 / volume);
    xi_.resize(modes_.size() * periods_.size());
    for (std::size_t k = 0; k < modes_.size(); ++k)
      for (std::size_t r = 0; r < periods_.size(); ++r)
        xi_[k * periods_.size() + r] = 2.0 * std::numbers::pi * modes_[k].n[r] / periods_[r];
  }
  int size() const override { return static_cast<int>(modes_.size()); }
  int dim() const override { return static_cast<int>(periods_.size()); }
  void values(std::span<const double> x, std::span<double> out) const override {
    const std::size_t d = periods_.size();
    for (std::size_t k = 0; k < modes_.size(); ++k) {
      const int t = modes_[k].type;
      if (t == 0) {
        out[k] = c0_;
        continue;
      }
      double phase = 0.0;
      for (std::size_t r = 0; r < d; ++r) phase += xi_[k * d + r] * x[r];
      out[k] = c1_ * (t == 1 ? std::cos(phase) : std::sin(phase));
    }
  }
  std::string label(int k) const override {
    const auto& m = modes_[static_cast<std::size_t>(k)];
    std::ostringstream os;
    os << "n=(";
    for (std::size_t r = 0; r < m.n.size(); ++r) os << (r ? "," : "") << m.n[r];
    os << ")" << (m.type == 0 ? " const" : m.type == 1 ? " cos" : " sin");
    return os.str();
  }

 private:
  std::vector<TorusMode> modes_;
  std::vector<double> periods_;
  std::vector<double> xi_;
  double c0_ = 0.0, c1_ = 0.0;
};

bool canonical_representative(const std::vector<int>& n) {
  for (int v : n) {
    if (v > 0) return true;
    if (v < 0) return false;
  }
  return false;
}

std::vector<TorusMode> enumerate_torus_modes(const ManifoldModel& model, int K) {
  const Eigen::MatrixXd ginv = model.metric().inverse();
  const auto& L = model.periods();
  const std::size_t d = L.size();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ginv, Eigen::EigenvaluesOnly);
  const double mu = es.eigenvalues().minCoeff();
  const double Lmax = *std::max_element(L.begin(), L.end());

  int R = 1;
  while (true) {
    std::vector<TorusMode> modes;
    std::vector<int> n(d, -R);
    while (true) {
      const bool zero = std::all_of(n.begin(), n.end(), [](int v) { return v == 0; });
      if (zero || canonical_representative(n)) {
        Eigen::VectorXd xi(static_cast<Eigen::Index>(d));
        for (std::size_t r = 0; r < d; ++r) xi(static_cast<Eigen::Index>(r)) = 2.0 * std::numbers::pi * n[r] / L[r];
        const double lambda = zero ? 0.0 : xi.dot(ginv * xi);
        if (zero) {
          modes.push_back({n, 0, 0.0});
        } else {
          modes.push_back({n, 1, lambda});
          modes.push_back({n, 2, lambda});
        }
      }
      std::size_t r = d;
      while (r > 0) {
        --r;
        if (++n[r] <= R) break;
        n[r] = -R;
        if (r == 0) goto done;
      }
      if (d == 0) break;
    }
  done:
    std::stable_sort(modes.begin(), modes.end(),
                     [](const TorusMode& a, const TorusMode& b) { return a.lambda < b.lambda; });
    // Any n outside the box has lambda at least the bound below.
    const double bound = mu * std::pow(2.0 * std::numbers::pi * (R + 1) / Lmax, 2);
    if (static_cast<int>(modes.size()) > K) {
      const double last = modes[static_cast<std::size_t>(K)].lambda;
      if (last * (1.0 + 1e-8) + 1e-9 < bound) {
        // Cluster the full list, then order each cluster by (n, type).
        std::size_t begin = 0;
        for (std::size_t k = 1; k <= modes.size(); ++k) {
          if (k == modes.size() || modes[k].lambda - modes[k - 1].lambda >= 1e-9 * (1.0 + modes[k - 1].lambda)) {
            std::sort(modes.begin() + static_cast<std::ptrdiff_t>(begin),
                      modes.begin() + static_cast<std::ptrdiff_t>(k),
                      [](const TorusMode& a, const TorusMode& b) {
                        if (a.n != b.n) return a.n < b.n;
                        return a.type < b.type;
                      });
            begin = k;
          }
        }
        modes.resize(static_cast<std::size_t>(K));
        return modes;
      }
    }
    R = R < 4 ? R + 1 : R + R / 2;
  }
}

EigenSystem build_flat_torus(const ManifoldModel& model, int K) {
  auto modes = enumerate_torus_modes(model, K);
  const auto& L = model.periods();
  const std::size_t d = L.size();
  std::vector<int> shape(d);
  for (std::size_t r = 0; r < d; ++r) {
    int maxn = 0;
    for (const auto& m : modes) maxn = std::max(maxn, std::abs(m.n[r]));
    const int need = 2 * maxn + 1;
    const int requested = model.nodes()[r];
    if (requested > 0) {
      if (requested < need)
        throw ConstructionError("quadrature needs at least " + std::to_string(need) +
                                " nodes along dimension " + std::to_string(r));
      shape[r] = requested;
    } else {
      shape[r] = std::max(4, need + 1 + (need + 1) % 2);
    }
  }
  const double sqrt_det = std::sqrt(model.metric().determinant());
  double volume = sqrt_det;
  for (double p : L) volume *= p;
  SpatialQuadrature q = uniform_quadrature(L, shape, sqrt_det);
  std::vector<double> lambdas;
  lambdas.reserve(modes.size());
  for (const auto& m : modes) lambdas.push_back(m.lambda);
  auto basis = std::make_shared<TorusBasis>(std::move(modes), L, volume);
  return EigenSystem(std::move(lambdas), std::move(basis), std::move(q), volume);
}

// ---- variable circle ----

// Fourier basis on [0, L): e_0 = 1, e_{2j-1} = cos(j w x), e_{2j} = sin(j w x).
void fourier_row(double x, double w, int J, double* e, double* de) {
  e[0] = 1.0;
  if (de) de[0] = 0.0;
  for (int j = 1; j <= J; ++j) {
    const double c = std::cos(j * w * x);
    const double s = std::sin(j * w * x);
    e[2 * j - 1] = c;
    e[2 * j] = s;
    if (de) {
      de[2 * j - 1] = -j * w * s;
      de[2 * j] = j * w * c;
    }
  }
}

class GalerkinBasis final : public ModeBasis {
 public:
  GalerkinBasis(Eigen::MatrixXd coeffs, double period, std::vector<std::string> labels)
      : coeffs_(std::move(coeffs)), w_(2.0 * std::numbers::pi / period), labels_(std::move(labels)) {
    J_ = static_cast<int>((coeffs_.rows() - 1) / 2);
  }
  int size() const override { return static_cast<int>(coeffs_.cols()); }
  int dim() const override { return 1; }
  void values(std::span<const double> x, std::span<double> out) const override {
    Eigen::VectorXd e(coeffs_.rows());
    fourier_row(x[0], w_, J_, e.data(), nullptr);
    Eigen::Map<Eigen::VectorXd>(out.data(), size()).noalias() = coeffs_.transpose() * e;
  }
  std::string label(int k) const override { return labels_[static_cast<std::size_t>(k)]; }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }

 private:
  Eigen::MatrixXd coeffs_;
  double w_;
  int J_ = 0;
  std::vector<std::string> labels_;
};

std::string fourier_label(int a) {
  if (a == 0) return "e0 const";
  const int j = (a + 1) / 2;
  return "e" + std::to_string(j) + (a % 2 == 1 ? " cos" : " sin");
}

// Rotates a B-orthonormal cluster so its vectors align with their dominant
// basis indices, ordered by index, with positive dominant coefficients.
void canonicalize_cluster(Eigen::Ref<Eigen::MatrixXd> V, std::vector<int>& dominant) {
  const Eigen::Index c = V.cols();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V.transpose());
  std::vector<int> piv(static_cast<std::size_t>(c));
  for (Eigen::Index i = 0; i < c; ++i) piv[static_cast<std::size_t>(i)] = qr.colsPermutation().indices()(i);
  std::sort(piv.begin(), piv.end());
  Eigen::MatrixXd S(c, c);
  for (Eigen::Index i = 0; i < c; ++i) S.row(i) = V.row(piv[static_cast<std::size_t>(i)]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd Q = svd.matrixV() * svd.matrixU().transpose();
  V = (V * Q).eval();
  dominant = piv;
}

EigenSystem build_variable_circle(const ManifoldModel& model, int K, const BuildOptions& options) {
  const int NG_req = options.galerkin_N > 0 ? options.galerkin_N : 4 * K + 1;
  if (NG_req < 4 * K)
    throw ConstructionError("galerkin_N must be at least 4K");
  const int J = (NG_req) / 2;
  const int NG = 2 * J + 1;
  const double L = model.periods()[0];
  const double w = 2.0 * std::numbers::pi / L;
  int M = std::max(model.nodes()[0], 4 * J + 128);
  M += M % 2;

  SpatialQuadrature q = uniform_quadrature({L}, {M}, 1.0);
  Eigen::MatrixXd E(M, NG), D(M, NG);
  Eigen::VectorXd sg(M), isg(M);
  for (int i = 0; i < M; ++i) {
    const double x = q.points(0, i);
    const double g = model.gamma(x);
    if (!(g > 0.0)) throw ConstructionError("gamma must be positive at every quadrature node");
    sg(i) = std::sqrt(g);
    isg(i) = 1.0 / sg(i);
    Eigen::VectorXd e(NG), de(NG);
    fourier_row(x, w, J, e.data(), de.data());
    E.row(i) = e.transpose();
    D.row(i) = de.transpose();
  }
  const double h = L / M;
  q.weights = h * sg;
  const double volume = q.weights.sum();

  const Eigen::MatrixXd A = D.transpose() * (h * isg).asDiagonal() * D;
  const Eigen::MatrixXd B = E.transpose() * q.weights.asDiagonal() * E;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
      0.5 * (A + A.transpose()), 0.5 * (B + B.transpose()), Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success)
    throw NumericalError("Galerkin eigensolver did not converge", std::numeric_limits<double>::infinity());

  Eigen::MatrixXd V = ges.eigenvectors().leftCols(K);
  Eigen::VectorXd lam = ges.eigenvalues().head(K);
  const double residual =
      (A * V - B * V * lam.asDiagonal()).cwiseAbs().maxCoeff() / std::max(1.0, A.cwiseAbs().maxCoeff());
  if (!(residual < 1e-8))
    throw NumericalError("Galerkin eigenpairs fail the residual check", residual);

  // Null space is exactly the constants since A e_0 = 0.
  lam(0) = 0.0;
  V.col(0).setZero();
  V(0, 0) = 1.0 / std::sqrt(volume);
  const Eigen::VectorXd Bc = B * V.col(0);
  for (int k = 1; k < K; ++k) {
    V.col(k) -= V.col(k).dot(Bc) * V.col(0);
    V.col(k) /= std::sqrt(V.col(k).dot(B * V.col(k)));
  }

  std::vector<double> lambdas(lam.data(), lam.data() + K);
  std::vector<std::string> labels(static_cast<std::size_t>(K));
  labels[0] = fourier_label(0);
  int begin = 1;
  for (int k = 2; k <= K; ++k) {
    if (k == K || lambdas[static_cast<std::size_t>(k)] - lambdas[static_cast<std::size_t>(k - 1)] >=
                      1e-9 * (1.0 + lambdas[static_cast<std::size_t>(k - 1)])) {
      std::vector<int> dom;
      canonicalize_cluster(V.middleCols(begin, k - begin), dom);
      for (int i = begin; i < k; ++i)
        labels[static_cast<std::size_t>(i)] = "dominant " + fourier_label(dom[static_cast<std::size_t>(i - begin)]);
      begin = k;
    }
  }
  auto basis = std::make_shared<GalerkinBasis>(V, L, std::move(labels));
  return EigenSystem(std::move(lambdas), std::move(basis), std::move(q), volume);
}

// ---- mixed basis ----

class RotatedBasis final : public ModeBasis {
 public:
  RotatedBasis(std::shared_ptr<const ModeBasis> base, Eigen::MatrixXd rotation)
      : base_(std::move(base)), rotation_(std::move(rotation)) {}
  int size() const override { return base_->size(); }
  int dim() const override { return base_->dim(); }
  void values(std::span<const double> x, std::span<double> out) const override {
    Eigen::VectorXd v(size());
    base_->values(x, std::span<double>(v.data(), static_cast<std::size_t>(v.size())));
    Eigen::Map<Eigen::VectorXd>(out.data(), size()).noalias() = rotation_ * v;
  }
  std::string label(int k) const override { return "mixed " + base_->label(k); }

 private:
  std::shared_ptr<const ModeBasis> base_;
  Eigen::MatrixXd rotation_;
};

}  // namespace

EigenSystem build_eigensystem(const ManifoldModel& model, int K, const BuildOptions& options) {
  if (K < 1) throw ContractError("mode count K must be at least 1");
  if (model.kind() == ManifoldKind::FlatTorus) return build_flat_torus(model, K);
  return build_variable_circle(model, K, options);
}

std::complex<double> inner_product(std::span<const std::complex<double>> f,
                                   std::span<const std::complex<double>> h, const EigenSystem& sys) {
  const auto& w = sys.quadrature().weights;
  if (f.size() != h.size() || static_cast<Eigen::Index>(f.size()) != w.size())
    throw ContractError("sample length does not match the quadrature");
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += w(static_cast<Eigen::Index>(i)) * f[i] * std::conj(h[i]);
  return acc;
}

double inner_product(std::span<const double> f, std::span<const double> h, const EigenSystem& sys) {
  const auto& w = sys.quadrature().weights;
  if (f.size() != h.size() || static_cast<Eigen::Index>(f.size()) != w.size())
    throw ContractError("sample length does not match the quadrature");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += w(static_cast<Eigen::Index>(i)) * f[i] * h[i];
  return acc;
}

EigenSystem mix_degenerate_modes(const EigenSystem& sys, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int K = sys.size();
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(K, K);
  for (auto [b, e] : sys.degenerate_clusters()) {
    const int c = e - b;
    if (c < 2) continue;
    Eigen::MatrixXd G(c, c);
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < c; ++j) G(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    R.block(b, b, c, c) = qr.householderQ() * Eigen::MatrixXd::Identity(c, c);
  }
  auto basis = std::make_shared<RotatedBasis>(sys.basis_ptr(), R);
  return EigenSystem(sys.eigenvalues(), std::move(basis), sys.quadrature(), sys.volume());
}

}  // namespace fracheat
