#include "fracheat/balakrishnan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fracheat/errors.hpp"
#include "fracheat/heat_kernel.hpp"
#include "fracheat/multiplier.hpp"
#include "gauss_legendre.hpp"

namespace fracheat {

namespace {

enum class Integral { Balakrishnan, GammaInverse };

struct Rule {
  std::vector<double> tau;
  std::vector<double> weight;  // Gauss weight times tau^{-1-s} or tau^{s-1}
  std::size_t split = 0;       // nodes below use e^{-tau z} - 1
  double tau_lo = 0.0, tau_split = 0.0, tau_hi = 0.0;
};

Rule make_rule(Integral kind, double s, double rho_max, double z_min, const BalakrishnanSpec& spec) {
  if (!(spec.tau_lo > 0.0 && spec.tau_lo < spec.tau_split)) throw ContractError("need 0 < tau_lo < tau_split");
  if (spec.nodes_per_panel < 2) throw ContractError("need at least two nodes per panel");
  Rule r;
  r.tau_lo = spec.tau_lo;
  r.tau_split = spec.tau_split;
  r.tau_hi = std::max(spec.tau_split, spec.tail_argument / z_min);
  const double width_cap = rho_max > 0.0 ? std::min(spec.max_panel_width, spec.phase_per_panel / rho_max)
                                         : spec.max_panel_width;
  const double p = kind == Integral::Balakrishnan ? -1.0 - s : s - 1.0;
  const auto& gl = detail::gauss_legendre(spec.nodes_per_panel);
  auto add_panels = [&](double lo, double hi) {
    double a = lo;
    while (a < hi) {
      double b = std::min(hi, a + std::min(a, width_cap));
      if (hi - b < 1e-12 * hi) b = hi;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double t = mid + half * gl.nodes[q];
        r.tau.push_back(t);
        r.weight.push_back(half * gl.weights[q] * std::pow(t, p));
      }
      a = b;
    }
  };
  add_panels(r.tau_lo, r.tau_split);
  r.split = r.tau.size();
  add_panels(r.tau_split, r.tau_hi);
  return r;
}

// int_0^{tau_lo} (e^{-tau z} - 1) tau^{-1-s} or e^{-tau z} tau^{s-1}, termwise.
cplx head_series(Integral kind, double s, cplx z, double tau_lo) {
  cplx acc = 0.0;
  cplx term = 1.0;  // (-z)^n tau_lo^n / n!
  const int start = kind == Integral::Balakrishnan ? 1 : 0;
  const double shift = kind == Integral::Balakrishnan ? -s : s;
  for (int n = 0; n < 60; ++n) {
    if (n > 0) term *= -z * tau_lo / static_cast<double>(n);
    if (n < start) continue;
    const cplx t = term / (n + shift);
    acc += t;
    if (std::abs(t) < 1e-18 * std::max(1.0, std::abs(acc))) break;
  }
  return acc * std::pow(tau_lo, shift);
}

// int_a^inf e^{-tau z} tau^{-q} dtau by repeated integration by parts:
// e^{-a z} a^{-q} / z * sum_j (-1)^j (q)_j / (z a)^j, stopped at the smallest term.
struct TailValue {
  cplx value = 0.0;
  double estimate = 0.0;
};

TailValue tail_series(double q, cplx z, double a, int max_terms) {
  TailValue out;
  const cplx pref = std::exp(-a * z) * std::pow(a, -q) / z;
  if (std::abs(pref) < 1e-300) return out;
  const cplx x = z * a;
  cplx term = 1.0;
  cplx acc = 0.0;
  double last = std::numeric_limits<double>::infinity();
  for (int j = 0; j < max_terms; ++j) {
    if (j > 0) term *= -(q + j - 1) / x;
    const double mag = std::abs(term);
    if (mag > last) break;
    acc += term;
    last = mag;
    if (mag < 1e-17 * std::abs(acc)) break;
  }
  out.value = pref * acc;
  out.estimate = std::abs(pref) * last;
  return out;
}

struct BinTable {
  Eigen::MatrixXcd values;  // lambdas x rhos
  QuadratureDiagnostics diag;
};

// Symbol table for all pairs (lambda_k, rho_m). Bins with z = 0 are left at 0.
BinTable evaluate_bins(Integral kind, double s, const std::vector<double>& lambdas,
                       const std::vector<double>& rhos, const BalakrishnanSpec& spec) {
  double rho_max = 0.0, z_min = std::numeric_limits<double>::infinity();
  double rho_min_nonzero = std::numeric_limits<double>::infinity();
  for (double r : rhos) {
    rho_max = std::max(rho_max, std::abs(r));
    if (r != 0.0) rho_min_nonzero = std::min(rho_min_nonzero, std::abs(r));
  }
  for (double l : lambdas) {
    if (l > 0.0) z_min = std::min(z_min, l);
    else if (std::isfinite(rho_min_nonzero)) z_min = std::min(z_min, rho_min_nonzero);
  }
  if (!std::isfinite(z_min)) z_min = 1.0;
  const Rule rule = make_rule(kind, s, rho_max, z_min, spec);
  const std::size_t K = lambdas.size(), M = rhos.size(), Q = rule.tau.size();

  BinTable table;
  table.values = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(M));
  table.diag.nodes = static_cast<int>(Q) + 2;
  table.diag.tau_hi = rule.tau_hi;

  // Quadrature body, node-major so each phase row is computed once.
  std::vector<cplx> phase(M), phase_m1(M);
  for (std::size_t q = 0; q < Q; ++q) {
    const double t = rule.tau[q];
    const double w = rule.weight[q];
    const bool minus_one = kind == Integral::Balakrishnan && q < rule.split;
    for (std::size_t m = 0; m < M; ++m) {
      const double th = t * rhos[m];
      phase[m] = cplx(std::cos(th), -std::sin(th));
      const double sh = std::sin(0.5 * th);
      phase_m1[m] = cplx(-2.0 * sh * sh, -std::sin(th));
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double tl = t * lambdas[k];
      if (!minus_one && tl > 40.0) continue;
      auto row = table.values.row(static_cast<Eigen::Index>(k));
      if (minus_one) {
        const double em1 = std::expm1(-tl);
        for (std::size_t m = 0; m < M; ++m)
          row(static_cast<Eigen::Index>(m)) += w * (em1 * phase[m] + phase_m1[m]);
      } else {
        const double d = w * std::exp(-tl);
        for (std::size_t m = 0; m < M; ++m) row(static_cast<Eigen::Index>(m)) += d * phase[m];
      }
    }
  }

  const double tail_q = kind == Integral::Balakrishnan ? 1.0 + s : 1.0 - s;
  const double minus_one_beyond = kind == Integral::Balakrishnan ? -std::pow(rule.tau_split, -s) / s : 0.0;
  const double norm = kind == Integral::Balakrishnan ? 1.0 / std::tgamma(-s) : 1.0 / std::tgamma(s);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m) {
      const cplx z(lambdas[k], rhos[m]);
      cplx& v = table.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
      if (z == cplx(0.0)) {
        v = 0.0;
        continue;
      }
      const TailValue tail = tail_series(tail_q, z, rule.tau_hi, spec.max_tail_terms);
      v += head_series(kind, s, z, rule.tau_lo) + minus_one_beyond + tail.value;
      v *= norm;
      const double rel = std::abs(norm) * tail.estimate / std::max(1.0, std::abs(v));
      table.diag.max_tail_estimate = std::max(table.diag.max_tail_estimate, rel);
      if (rel > spec.tail_tolerance) {
        std::ostringstream os;
        os.precision(6);
        os << "tail estimate " << rel << " exceeds tolerance at lambda=" << lambdas[k] << " rho=" << rhos[m]
           << " (tau_hi=" << rule.tau_hi << ")";
        throw NumericalError(os.str(), rel);
      }
    }
  return table;
}

cplx scalar(Integral kind, double s, double lambda, double rho, const BalakrishnanSpec& spec,
            QuadratureDiagnostics* diag) {
  if (!(s > 0.0 && s < 1.0)) throw ContractError("fractional order s must lie in (0, 1)");
  if (!(lambda >= 0.0)) throw ContractError("lambda must be nonnegative");
  if (lambda == 0.0 && rho == 0.0) {
    if (kind == Integral::Balakrishnan) return 0.0;
    throw ContractError("the Gamma integral diverges at z = 0");
  }
  BinTable t = evaluate_bins(kind, s, {lambda}, {rho}, spec);
  if (diag) *diag = t.diag;
  return t.values(0, 0);
}

SpaceTimeField apply_bins(Integral kind, const SpaceTimeField& u, double s, const BalakrishnanSpec& spec,
                          QuadratureDiagnostics* diag) {
  if (!(s > 0.0 && s < 1.0)) throw ContractError("fractional order s must lie in (0, 1)");
  const auto& grid = u.grid();
  std::vector<double> rhos(static_cast<std::size_t>(grid.size()));
  for (int m = 0; m < grid.size(); ++m) rhos[static_cast<std::size_t>(m)] = grid.frequency(m);
  BinTable t = evaluate_bins(kind, s, u.system().eigenvalues(), rhos, spec);
  if (diag) *diag = t.diag;
  FrequencyField uhat = to_frequency(u);
  const int nyq = grid.size() / 2;
  for (int k = 0; k < uhat.modes(); ++k) {
    for (int m = 0; m < uhat.samples(); ++m) {
      cplx v = t.values(k, m);
      if (m == nyq) v = std::abs(v);
      if (kind == Integral::GammaInverse && m == 0 && u.system().eigenvalue(k) == 0.0)
        v = dc_cell_average(s, grid.drho());
      uhat(k, m) *= v;
    }
  }
  return from_frequency(uhat);
}

}  // namespace

cplx balakrishnan_symbol(double s, double lambda, double rho, const BalakrishnanSpec& spec,
                         QuadratureDiagnostics* diag) {
  return scalar(Integral::Balakrishnan, s, lambda, rho, spec, diag);
}

cplx gamma_inverse_symbol(double s, double lambda, double rho, const BalakrishnanSpec& spec,
                          QuadratureDiagnostics* diag) {
  return scalar(Integral::GammaInverse, s, lambda, rho, spec, diag);
}

SpaceTimeField balakrishnan_apply(const SpaceTimeField& u, double s, const BalakrishnanSpec& spec,
                                  QuadratureDiagnostics* diag) {
  return apply_bins(Integral::Balakrishnan, u, s, spec, diag);
}

SpaceTimeField gamma_inverse_apply(const SpaceTimeField& f, double s, const BalakrishnanSpec& spec,
                                   QuadratureDiagnostics* diag) {
  return apply_bins(Integral::GammaInverse, f, s, spec, diag);
}

std::vector<cplx> representation_formula_apply(const SpaceTimeField& u, double s,
                                               const std::vector<GridPoint>& points,
                                               const BalakrishnanSpec& spec) {
  if (!(s > 0.0 && s < 1.0)) throw ContractError("fractional order s must lie in (0, 1)");
  const auto& sys = u.system();
  const auto& grid = u.grid();
  const int K = sys.size(), N = grid.size(), n = sys.node_count();
  const auto& lam = sys.eigenvalues();

  double z_min = std::numeric_limits<double>::infinity();
  for (double l : lam) z_min = std::min(z_min, l > 0.0 ? l : grid.drho());
  double rho_max = 0.0;
  for (int m = 0; m < N; ++m) rho_max = std::max(rho_max, std::abs(grid.frequency(m)));
  const Rule rule = make_rule(Integral::Balakrishnan, s, rho_max, z_min, spec);

  const FrequencyField uhat = to_frequency(u);
  const double c = grid.drho() / std::sqrt(2.0 * std::numbers::pi);
  const Eigen::MatrixXd& phi = sys.node_values();
  const auto& w = sys.quadrature().weights;
  const double norm = 1.0 / std::tgamma(-s);

  std::vector<cplx> out;
  out.reserve(points.size());
  for (const auto& pt : points) {
    if (pt.node < 0 || pt.node >= n || pt.time < 0 || pt.time >= N) throw ContractError("grid point out of range");
    const double t = grid.time(pt.time);
    // a_km = c e^{i rho_m t} hat u_km, so u_k(t - tau) = sum_m a_km e^{-i rho_m tau}.
    Eigen::MatrixXcd a(K, N);
    for (int m = 0; m < N; ++m) {
      const cplx e = grid.is_nyquist(m) ? cplx(std::cos(grid.frequency(m) * t), 0.0)
                                        : std::polar(1.0, grid.frequency(m) * t);
      for (int k = 0; k < K; ++k) a(k, m) = c * e * uhat(k, m);
    }
    const Eigen::VectorXd phi_x = phi.col(pt.node);
    const cplx u_xt = phi_x.cast<cplx>().dot(u.coeffs().col(pt.time));

    // Head and tail per bin, synthesized at (x, t).
    cplx spectral = 0.0;
    for (int k = 0; k < K; ++k)
      for (int m = 0; m < N; ++m) {
        const cplx z(lam[static_cast<std::size_t>(k)], grid.frequency(m));
        // The z = 0 bin only cancels the constant tail below.
        if (z == cplx(0.0)) {
          spectral += phi_x(k) * a(k, m) * std::pow(rule.tau_hi, -s) / s;
          continue;
        }
        const cplx series = head_series(Integral::Balakrishnan, s, z, rule.tau_lo) +
                            tail_series(1.0 + s, z, rule.tau_hi, spec.max_tail_terms).value;
        spectral += phi_x(k) * a(k, m) * series;
      }
    // Constant part of the tail: -u(x, t) int_{tau_hi}^inf tau^{-1-s}.
    cplx body = -u_xt * std::pow(rule.tau_hi, -s) / s;

    Eigen::VectorXcd shifted(K);
    Eigen::VectorXcd phase(N);
    for (std::size_t q = 0; q < rule.tau.size(); ++q) {
      const double tau = rule.tau[q];
      for (int m = 0; m < N; ++m)
        phase(m) = grid.is_nyquist(m) ? cplx(1.0) : std::polar(1.0, -grid.frequency(m) * tau);
      shifted = a * phase;
      Eigen::VectorXd damp(K);
      for (int k = 0; k < K; ++k) damp(k) = std::exp(-tau * lam[static_cast<std::size_t>(k)]);
      // Kernel row H(x, z; tau) at every node z, then the spatial quadrature.
      const Eigen::VectorXd hrow = phi.transpose() * damp.cwiseProduct(phi_x);
      const Eigen::VectorXcd uz = phi.transpose().cast<cplx>() * shifted;
      cplx inner = 0.0;
      for (int i = 0; i < n; ++i) inner += w(i) * hrow(i) * (uz(i) - u_xt);
      body += rule.weight[q] * inner;
    }
    out.push_back(norm * (spectral + body));
  }
  return out;
}

}  // namespace fracheat
