#include "fracheat/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fracheat/errors.hpp"

namespace fracheat {

std::string to_string(ManifoldKind kind) {
  return kind == ManifoldKind::FlatTorus ? "FlatTorus" : "VariableCircle";
}

ManifoldKind manifold_kind_from_string(const std::string& name) {
  if (name == "FlatTorus" || name == "flat_torus") return ManifoldKind::FlatTorus;
  if (name == "VariableCircle" || name == "variable_circle") return ManifoldKind::VariableCircle;
  throw ConstructionError("unknown manifold kind '" + name + "'");
}

namespace {

void check_periods(const std::vector<double>& periods) {
  if (periods.empty()) throw ConstructionError("manifold needs at least one period");
  for (double L : periods)
    if (!(L > 0.0) || !std::isfinite(L)) throw ConstructionError("periods must be positive");
}

}  // namespace

ManifoldModel ManifoldModel::flat_torus(const Eigen::MatrixXd& metric, std::vector<double> periods,
                                        std::vector<int> nodes) {
  check_periods(periods);
  const Eigen::Index d = static_cast<Eigen::Index>(periods.size());
  if (metric.rows() != d || metric.cols() != d)
    throw ConstructionError("metric must be a dim x dim matrix");
  if (!metric.allFinite()) throw ConstructionError("metric has non-finite entries");
  if ((metric - metric.transpose()).cwiseAbs().maxCoeff() > 1e-14 * metric.cwiseAbs().maxCoeff())
    throw ConstructionError("metric must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(metric, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw ConstructionError("metric must be positive definite");
  if (!nodes.empty() && nodes.size() != periods.size())
    throw ConstructionError("nodes must list one count per dimension");
  for (int n : nodes)
    if (n < 0) throw ConstructionError("node counts must be nonnegative");

  ManifoldModel m;
  m.kind_ = ManifoldKind::FlatTorus;
  m.metric_ = 0.5 * (metric + metric.transpose());
  m.periods_ = std::move(periods);
  m.nodes_ = nodes.empty() ? std::vector<int>(m.periods_.size(), 0) : std::move(nodes);
  return m;
}

ManifoldModel ManifoldModel::flat_circle(double period, double metric, int nodes) {
  Eigen::MatrixXd g(1, 1);
  g(0, 0) = metric;
  return flat_torus(g, {period}, {nodes});
}

ManifoldModel ManifoldModel::variable_circle(std::vector<double> gamma_fourier, double period,
                                             int nodes) {
  check_periods({period});
  if (gamma_fourier.empty()) throw ConstructionError("gamma needs at least the mean coefficient");
  if (gamma_fourier.size() % 2 == 0) gamma_fourier.push_back(0.0);
  for (double c : gamma_fourier)
    if (!std::isfinite(c)) throw ConstructionError("gamma coefficients must be finite");
  if (nodes < 0) throw ConstructionError("node count must be nonnegative");

  ManifoldModel m;
  m.kind_ = ManifoldKind::VariableCircle;
  m.metric_ = Eigen::MatrixXd::Constant(1, 1, gamma_fourier[0]);
  m.periods_ = {period};
  m.nodes_ = {nodes};
  m.gamma_ = std::move(gamma_fourier);
  if (!(m.gamma_min() > 0.0)) throw ConstructionError("gamma must stay strictly positive");
  return m;
}

double ManifoldModel::gamma(double x) const {
  if (kind_ == ManifoldKind::FlatTorus) return metric_(0, 0);
  const double w = 2.0 * std::numbers::pi / periods_[0];
  double v = gamma_[0];
  for (std::size_t j = 1; 2 * j <= gamma_.size() - 1; ++j) {
    const double a = gamma_[2 * j - 1];
    const double b = gamma_[2 * j];
    v += a * std::cos(w * static_cast<double>(j) * x) + b * std::sin(w * static_cast<double>(j) * x);
  }
  return v;
}

double ManifoldModel::gamma_derivative(double x) const {
  if (kind_ == ManifoldKind::FlatTorus) return 0.0;
  const double w = 2.0 * std::numbers::pi / periods_[0];
  double v = 0.0;
  for (std::size_t j = 1; 2 * j <= gamma_.size() - 1; ++j) {
    const double a = gamma_[2 * j - 1];
    const double b = gamma_[2 * j];
    const double f = w * static_cast<double>(j);
    v += f * (-a * std::sin(f * x) + b * std::cos(f * x));
  }
  return v;
}

double ManifoldModel::gamma_min() const {
  constexpr int samples = 4096;
  double lo = gamma(0.0);
  for (int i = 1; i < samples; ++i) lo = std::min(lo, gamma(periods_[0] * i / samples));
  return lo;
}

double ManifoldModel::volume() const {
  if (kind_ == ManifoldKind::FlatTorus) {
    double v = std::sqrt(metric_.determinant());
    for (double L : periods_) v *= L;
    return v;
  }
  constexpr int samples = 4096;
  double sum = 0.0;
  for (int i = 0; i < samples; ++i) sum += std::sqrt(gamma(periods_[0] * i / samples));
  return sum * periods_[0] / samples;
}

bool ManifoldModel::operator==(const ManifoldModel& other) const {
  return kind_ == other.kind_ && metric_ == other.metric_ && periods_ == other.periods_ &&
         nodes_ == other.nodes_ && gamma_ == other.gamma_;
}

double geodesic_distance(const ManifoldModel& model, const std::vector<double>& x,
                         const std::vector<double>& z) {
  const std::size_t d = model.periods().size();
  if (x.size() != d || z.size() != d) throw ContractError("point dimension mismatch");
  if (model.kind() == ManifoldKind::FlatTorus) {
    const auto& L = model.periods();
    Eigen::VectorXd base(static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < d; ++r) {
      double v = std::fmod(x[r] - z[r], L[r]);
      if (v < 0) v += L[r];
      base(static_cast<Eigen::Index>(r)) = v;
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> shift(d, -2);
    while (true) {
      Eigen::VectorXd v = base;
      for (std::size_t r = 0; r < d; ++r) v(static_cast<Eigen::Index>(r)) += shift[r] * L[r];
      best = std::min(best, v.dot(model.metric() * v));
      std::size_t r = d;
      bool done = true;
      while (r > 0) {
        --r;
        if (++shift[r] <= 1) {
          done = false;
          break;
        }
        shift[r] = -2;
      }
      if (done) break;
    }
    return std::sqrt(best);
  }
  const double L = model.periods()[0];
  double a = std::fmod(x[0], L), b = std::fmod(z[0], L);
  if (a < 0) a += L;
  if (b < 0) b += L;
  if (a > b) std::swap(a, b);
  // Arc length of [a, b] by Gauss-Legendre on 64 panels; the other arc is the rest.
  auto arc = [&model](double lo, double hi) {
    static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    const int panels = 64;
    const double h = (hi - lo) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double c = lo + (p + 0.5) * h;
      for (int q = 0; q < 5; ++q) acc += 0.5 * h * gw[q] * std::sqrt(model.gamma(c + 0.5 * h * gx[q]));
    }
    return acc;
  };
  const double inner = arc(a, b);
  const double whole = arc(0.0, L);
  return std::min(inner, whole - inner);
}

}  // namespace fracheat
