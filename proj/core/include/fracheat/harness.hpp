#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracheat/local_power.hpp"
#include "fracheat/sts_map.hpp"

namespace fracheat {

// Closed coordinate box [lo, hi] per dimension, in the coordinates of the first
// model of a pair.
struct CoordinateBox {
  std::vector<double> lo;
  std::vector<double> hi;
};

// x_first = A x_second + b, reduced modulo the first model's periods.
struct AffineChart {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

// Two manifold models observed on a common patch O. The O node lists of both
// models are aligned by position: patch(0)[i] and patch(1)[i] are the same
// point of O. Construction fails unless the metric samples agree on O after
// pulling back through the chart.
class MetricPair {
 public:
  MetricPair(ManifoldModel first, ManifoldModel second, int K, CoordinateBox patch, CoordinateBox omega1,
             CoordinateBox omega2, std::optional<AffineChart> chart = {}, const BuildOptions& options = {});

  const ManifoldModel& model(int which) const { return which == 0 ? first_ : second_; }
  const EigenSystem& system(int which) const { return which == 0 ? sys1_ : sys2_; }
  const std::vector<int>& patch(int which) const { return which == 0 ? patch1_ : patch2_; }
  // Positions into patch() of the nodes of omega_1 and omega_2.
  const std::vector<int>& omega1() const { return omega1_; }
  const std::vector<int>& omega2() const { return omega2_; }
  std::vector<int> omega_nodes(int omega, int which) const;
  const CoordinateBox& patch_box() const { return box_; }
  const CoordinateBox& omega_box(int omega) const { return omega == 1 ? box1_ : box2_; }
  // Largest relative disagreement of the pulled-back metric on O.
  double metric_mismatch() const { return mismatch_; }

  // Same source on the other model, rows mapped through the patch alignment.
  SourceFunction transfer(const SourceFunction& f, int to, const TimeGrid& grid) const;
  int transfer_node(int node, int to) const;

  MetricPair swapped_omegas() const;

 private:
  ManifoldModel first_, second_;
  EigenSystem sys1_, sys2_;
  CoordinateBox box_, box1_, box2_;
  std::vector<int> patch1_, patch2_;
  std::vector<int> omega1_, omega2_;
  double mismatch_ = 0.0;
};

// Product of [ (1 + cos(pi r / w)) / 2 ]^power over the box in space and over
// (t_lo, t_hi) in time, normalized to unit space-time mass. power >= 9 keeps
// eight applications of (d/dt - Delta_g) continuous.
SourceFunction raised_cosine_source(const EigenSystem& sys, const TimeGrid& grid, const std::vector<int>& nodes,
                                    const CoordinateBox& box, double t_lo, double t_hi, int power = 9);

// Default probe source on omega_1 of the pair, expressed on the first model.
SourceFunction default_pair_source(const MetricPair& pair, const TimeGrid& grid, int power = 9);

struct MomentSequence {
  std::vector<cplx> moments;          // (S_1 - S_2)((d/dt - Delta)^m f) at the probe
  std::vector<double> source_scale;   // max |(d/dt - Delta)^m f|
  std::vector<double> normalized;     // |moment| / source_scale
};

using ProbeMap = std::function<cplx(const SourceFunction&)>;

// f lives on the first model with support in omega_1; probe is a position into
// patch() inside omega_2 and a grid time strictly inside (-T, T).
struct HarnessProbe {
  int patch_position = 0;
  int time = 0;
};

HarnessProbe default_probe(const MetricPair& pair, const TimeGrid& grid);

MomentSequence moment_sequence(const MetricPair& pair, const SourceFunction& f, int m_max, HarnessProbe probe,
                               double s, const LocalPowerOptions& local = {});
// Same, with the two probe maps supplied by the caller. map_second receives the
// source already transferred to the second model.
MomentSequence moment_sequence(const MetricPair& pair, const SourceFunction& f, int m_max,
                               const ProbeMap& map_first, const ProbeMap& map_second,
                               const LocalPowerOptions& local = {});

struct EnvelopeFit {
  double C = 0.0;        // upper envelope |phi| eta^s <= C e^{-c eta}
  double c = 0.0;
  double r_squared = 0.0;
  int samples = 0;
};

struct PhiSamples {
  std::vector<double> eta;
  std::vector<cplx> phi;
  std::vector<cplx> eta_moments;   // trapezoid integral of phi eta^m over the grid, m = 0..m_max
  EnvelopeFit envelope;
};

// phi(eta) = ((e^{-H_1 / eta} - e^{-H_2 / eta}) f)(x, t) / eta^s. The semigroup
// annihilates the source once t - 1/eta leaves its time support.
PhiSamples phi_eta(const MetricPair& pair, const SourceFunction& f, HarnessProbe probe,
                   const std::vector<double>& eta, double s, int m_max = 8);

// (e^{-tau H} f)(x_node, t_j) of one model evaluated at a single point.
cplx semigroup_point_value(const SourceFunction& f, double tau, int node, int time);

struct TimeIntegratedFlow {
  std::vector<double> taus;
  Eigen::MatrixXcd flow;        // K x taus: sum_j dt (e^{-tau H} f)_k(t_j)
  Eigen::MatrixXcd heat_flow;   // K x taus: e^{-tau lambda_k} (int f dt)_k
  double max_deviation = 0.0;   // max |flow - heat_flow| / max |heat_flow|
  double heat_residual = 0.0;   // max_tau ||(d_tau - Delta) F|| / ||F||, central differences
  std::vector<double> mass;     // int_M F(x, tau) dV
};

TimeIntegratedFlow time_integrated_flow(const SpaceTimeField& f, const std::vector<double>& taus,
                                        double fd_step = 1e-3);

enum class Verdict { ConsistentWithEqualKernels, Distinguished, Inconclusive };
std::string to_string(Verdict v);

struct Thresholds {
  double distinguish = 1e-5;
  double consistent = 1e-8;
};

struct KernelComparison {
  std::vector<double> taus;
  std::vector<double> sup_difference;   // per tau over the sampled O x O
  double max_difference = 0.0;
  double kernel_scale = 0.0;            // max |e^{-tau L_1}| over the same samples
  int points = 0;
};

// Kernel sup difference on O x O. At most max_points nodes of O are sampled,
// evenly by position.
KernelComparison compare_kernels(const MetricPair& pair, const std::vector<double>& taus, int max_points = 160);

struct DistinguishReport {
  MomentSequence moments;
  PhiSamples phi;
  KernelComparison kernels;
  Thresholds thresholds;
  double max_moment_ratio = 0.0;
  double kernel_ratio = 0.0;
  Verdict verdict = Verdict::Inconclusive;
};

struct HarnessOptions {
  double s = 0.5;
  int m_max = 8;
  std::vector<double> taus;   // empty: 40 log-spaced points on [0.05, 10]
  std::vector<double> eta;    // empty: 96 log-spaced points on [0.05, 1 / tau_min]
  Thresholds thresholds;
  int kernel_points = 160;
  int source_power = 9;
  LocalPowerOptions local;
};

std::vector<double> log_spaced(double lo, double hi, int n);

DistinguishReport kernel_compare(const MetricPair& pair, const TimeGrid& grid, const HarnessOptions& options = {});
// Verdict from precomputed pieces.
Verdict classify(double max_moment_ratio, double kernel_ratio, const Thresholds& t);

struct TildeReport {
  std::vector<double> taus;
  std::vector<double> pde_residual;    // ||(d_t + d_tau - Delta) u~(tau)|| / ||u||
  std::vector<double> past_value;      // max_x |u~(x, -T, tau)| / ||u||
  double max_pde_residual = 0.0;
  double max_past_value = 0.0;
  double initial_defect = 0.0;         // ||u~(0) - u||
};

// u~(x, t, tau) = (e^{-tau H} u)(x, t). d_tau uses an eighth-order stencil of the
// given step (one-sided near tau = 0); d_t and Delta are spectral.
TildeReport tilde_solution_check(const SpaceTimeField& u, const std::vector<double>& taus, double step = 1e-3);

}  // namespace fracheat
