#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <ostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fracheat/balakrishnan.hpp"
#include "fracheat/errors.hpp"
#include "fracheat/forward_solver.hpp"
#include "fracheat/harness.hpp"
#include "fracheat/heat_kernel.hpp"
#include "fracheat/io/config.hpp"
#include "fracheat/io/files.hpp"
#include "fracheat/io/run_record.hpp"
#include "fracheat/operators.hpp"
#include "fracheat/parallel.hpp"
#include "fracheat/random_fields.hpp"
#include "fracheat/sts_map.hpp"
#include "fracheat/version.hpp"

namespace fracheat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reported quality targets that turn a completed run into exit code 3.
constexpr double kBalakrishnanTolerance = 1e-6;

class Run {
 public:
  Run(std::string command, io::ExperimentConfig config, fs::path config_dir, int threads)
      : command_(std::move(command)), config_(std::move(config)), config_dir_(std::move(config_dir)),
        threads_(threads), started_(timestamp()) {
    const char* env = std::getenv("FRACHEAT_OUT");
    out_dir_ = (env && *env) ? fs::path(env) : fs::path(config_.output.directory);
    const auto& f = config_.output.formats;
    csv_ = std::find(f.begin(), f.end(), "csv") != f.end();
    json_ = std::find(f.begin(), f.end(), "json") != f.end();
  }

  const io::ExperimentConfig& config() const { return config_; }
  const fs::path& out_dir() const { return out_dir_; }

  fs::path input(const std::string& p) const {
    const fs::path path(p);
    if (path.is_absolute() || fs::exists(path)) return path;
    const fs::path alt = config_dir_ / path;
    return fs::exists(alt) ? alt : path;
  }

  void table(const std::string& name, const io::CsvWriter& w) {
    if (!csv_) return;
    io::write_text(out_dir_ / name, w.text());
    files_.push_back(name);
  }

  void report(const std::string& name, const json& j) {
    if (!json_) return;
    io::write_text(out_dir_ / name, j.dump(2) + "\n");
    files_.push_back(name);
  }

  void field(const std::string& stem, const SpaceTimeField& u) {
    if (!csv_) return;
    io::write_field(u, out_dir_ / (stem + ".csv"));
    files_.push_back(stem + ".csv");
    files_.push_back(stem + ".json");
  }

  void source(const std::string& stem, const SourceFunction& f) {
    if (!csv_) return;
    io::write_source(f, out_dir_ / (stem + ".csv"));
    files_.push_back(stem + ".csv");
    files_.push_back(stem + ".json");
  }

  void quality_failure(std::ostream& err, const std::string& what) {
    err << "fracheat " << command_ << ": " << what << "\n";
    exit_code_ = kNumerical;
  }

  int finish() {
    io::RunRecord r;
    r.command = command_;
    r.version = kVersion;
    r.config_yaml = io::to_yaml(config_);
    r.threads = threads_;
    r.started = started_;
    r.finished = timestamp();
    r.exit_code = exit_code_;
    fs::create_directories(out_dir_);
    io::write_run_record(out_dir_, std::move(r), files_);
    return exit_code_;
  }

 private:
  // SOURCE_DATE_EPOCH pins timestamps so run.json is reproducible too.
  static std::string timestamp() {
    const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
    if (epoch && *epoch) {
      const std::time_t t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
      std::tm tm{};
      gmtime_r(&t, &tm);
      char buf[32];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
      return buf;
    }
    return io::utc_timestamp();
  }

  std::string command_;
  io::ExperimentConfig config_;
  fs::path config_dir_;
  fs::path out_dir_;
  int threads_;
  std::string started_;
  bool csv_ = true;
  bool json_ = true;
  std::vector<std::string> files_;
  int exit_code_ = kSuccess;
};

std::string fmt(double x) { return io::format_double(x); }

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

EigenSystem build_system(const io::ManifoldConfig& m, const std::string& path, const io::SpectralConfig& sp) {
  return build_eigensystem(io::to_model(m, path), sp.K, BuildOptions{sp.galerkin_N});
}

CoordinateBox whole_domain(const EigenSystem& sys) {
  CoordinateBox b;
  for (double L : sys.quadrature().periods) {
    b.lo.push_back(0.0);
    b.hi.push_back(L);
  }
  return b;
}

CoordinateBox source_box(const io::ExperimentConfig& c, const EigenSystem& sys) {
  if (!c.source.box.lo.empty()) return io::to_box(c.source.box, "source.box");
  if (c.harness && !c.harness->omega1.lo.empty()) return io::to_box(c.harness->omega1, "harness.omega1");
  return whole_domain(sys);
}

SourceFunction make_source(const Run& run, const EigenSystem& sys, const TimeGrid& grid) {
  const io::ExperimentConfig& c = run.config();
  if (!c.source.file.empty()) {
    SourceFunction f = io::read_source(run.input(c.source.file), sys);
    if (!f.grid().compatible(grid) || f.horizon() != grid.horizon())
      throw io::ConfigError("source.file", "source grid differs from the configured grid");
    return f;
  }
  const CoordinateBox box = source_box(c, sys);
  if (box.lo.size() != static_cast<std::size_t>(sys.dim())) throw io::ConfigError("source.box", "dimension mismatch");
  const std::vector<int> nodes = nodes_in_box(sys.quadrature(), box.lo, box.hi);
  return raised_cosine_source(sys, grid, nodes, box, c.source.t_lo, c.source.t_hi, c.source.power);
}

json grid_json(const TimeGrid& g) {
  return {{"T", g.horizon()}, {"T_grid", g.half_width()}, {"N_t", g.size()}, {"dt", g.dt()}, {"drho", g.drho()}};
}

double max_abs(const ModeMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

int cmd_spectrum(Run& run, std::ostream&) {
  const auto& c = run.config();
  const EigenSystem sys = build_system(c.manifold, "manifold", c.spectral);
  io::CsvWriter t({"k", "lambda"});
  for (int k = 0; k < sys.size(); ++k) t.row(std::vector<std::string>{std::to_string(k), fmt(sys.eigenvalue(k))});
  run.table("eigenvalues.csv", t);
  const auto clusters = sys.degenerate_clusters();
  int widest = 0;
  for (const auto& [b, e] : clusters) widest = std::max(widest, e - b);
  run.report("orthonormality.json", {{"modes", sys.size()},
                                     {"nodes", sys.node_count()},
                                     {"volume", sys.volume()},
                                     {"orthonormality_defect", sys.orthonormality_defect()},
                                     {"constant_overlap", sys.constant_overlap()},
                                     {"lambda_1", sys.size() > 1 ? sys.eigenvalue(1) : 0.0},
                                     {"degenerate_clusters", clusters.size()},
                                     {"largest_cluster", widest}});
  return run.finish();
}

int cmd_apply(Run& run, std::ostream& err) {
  const auto& c = run.config();
  const EigenSystem sys = build_system(c.manifold, "manifold", c.spectral);
  const SpaceTimeField u = io::read_field(run.input(c.input_field), sys);
  const double s = c.op.s;
  const double scale = max_abs(u.coeffs());
  json rep = {{"operator", c.op.apply}, {"s", s}, {"grid", grid_json(u.grid())}, {"input_max_abs", scale}};
  SpaceTimeField out = u;
  if (c.op.apply == "Hs" || c.op.apply == "Hinv") {
    const bool forward = c.op.apply == "Hs";
    out = forward ? apply_Hs(u, s) : apply_H_minus_s(u, s);
    const SpaceTimeField back = forward ? apply_H_minus_s(out, s) : apply_Hs(out, s);
    const double dev = max_abs((back - u).coeffs());
    rep["round_trip_max_deviation"] = scale > 0.0 ? dev / scale : dev;
  } else if (c.op.apply == "semigroup") {
    out = heat_semigroup_apply(u, c.op.tau);
    rep["tau"] = c.op.tau;
  } else {
    QuadratureDiagnostics diag;
    out = balakrishnan_apply(u, s, BalakrishnanSpec{}, &diag);
    const SpaceTimeField reference = apply_Hs(u, s);
    const double ref = max_abs(reference.coeffs());
    const double dev = max_abs((out - reference).coeffs());
    const double rel = ref > 0.0 ? dev / ref : dev;
    rep["multiplier_max_deviation"] = rel;
    rep["tolerance"] = kBalakrishnanTolerance;
    rep["quadrature_nodes"] = diag.nodes;
    rep["tau_hi"] = diag.tau_hi;
    rep["max_tail_estimate"] = diag.max_tail_estimate;
    if (!(rel < kBalakrishnanTolerance))
      run.quality_failure(err, "Balakrishnan deviation " + fmt(rel) + " exceeds " + fmt(kBalakrishnanTolerance));
  }
  rep["output_max_abs"] = max_abs(out.coeffs());
  run.field("output", out);
  run.report("report.json", rep);
  return run.finish();
}

int cmd_solve(Run& run, std::ostream& err) {
  const auto& c = run.config();
  const EigenSystem sys = build_system(c.manifold, "manifold", c.spectral);
  const TimeGrid grid = io::to_grid(c.grid);
  const SourceFunction f = make_source(run, sys, grid);
  const SolveReport r = solve(f, c.op.s);
  run.source("source", f);
  run.field("solution", r.solution);
  run.report("report.json", {{"s", c.op.s},
                             {"grid", grid_json(grid)},
                             {"source_norm", r.source_norm},
                             {"residual", r.residual},
                             {"relative_residual", r.relative_residual},
                             {"past_violation", r.past_violation},
                             {"coercivity_ratio", r.coercivity_ratio},
                             {"flagged", r.flagged},
                             {"diagnostics", r.diagnostics}});
  if (r.flagged) run.quality_failure(err, r.diagnostics);
  return run.finish();
}

int cmd_sts(Run& run, std::ostream&) {
  const auto& c = run.config();
  const EigenSystem sys = build_system(c.manifold, "manifold", c.spectral);
  const TimeGrid grid = io::to_grid(c.grid);
  const CoordinateBox patch_box =
      c.harness && !c.harness->patch.lo.empty() ? io::to_box(c.harness->patch, "harness.patch") : whole_domain(sys);
  std::vector<int> patch = nodes_in_box(sys.quadrature(), patch_box.lo, patch_box.hi);
  if (patch.empty()) throw io::ConfigError("harness.patch", "contains no quadrature node");
  const SourceToSolutionMap map = make_sts(sys, patch, c.grid.T, c.op.s, grid);
  const SourceFunction f = make_source(run, sys, map.grid());
  const RestrictedSamples out = map(f);

  io::CsvWriter t({"node", "j", "t", "re", "im"});
  double peak = 0.0;
  for (std::size_t i = 0; i < out.nodes.size(); ++i)
    for (std::size_t j = 0; j < out.times.size(); ++j) {
      const cplx v = out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      peak = std::max(peak, std::abs(v));
      t.row(std::vector<std::string>{std::to_string(out.nodes[i]), std::to_string(out.times[j]),
                                     fmt(map.grid().time(out.times[j])), fmt(v.real()), fmt(v.imag())});
    }
  run.source("source", f);
  run.table("sts.csv", t);

  const SpatialQuadrature& q = sys.quadrature();
  int probe_node = patch.front();
  double best = std::numeric_limits<double>::infinity();
  for (int node : patch) {
    double d2 = 0.0;
    for (int r = 0; r < q.dim(); ++r) {
      const double v = q.points(r, node) - 0.5 * (patch_box.lo[static_cast<std::size_t>(r)] + patch_box.hi[static_cast<std::size_t>(r)]);
      d2 += v * v;
    }
    if (d2 < best) {
      best = d2;
      probe_node = node;
    }
  }
  const SpaceTimePoint p{probe_node, map.grid().nearest_index(0.5 * c.grid.T)};
  const cplx value = map.probe(f, p);
  run.report("report.json", {{"s", c.op.s},
                             {"grid", grid_json(map.grid())},
                             {"patch_nodes", patch.size()},
                             {"times", out.times.size()},
                             {"max_abs", peak},
                             {"probe", {{"node", p.node}, {"j", p.time}, {"t", map.grid().time(p.time)},
                                        {"value", complex_json(value)}}}});
  return run.finish();
}

int cmd_invharness(Run& run, std::ostream&) {
  const auto& c = run.config();
  const io::HarnessConfig& h = *c.harness;
  const ManifoldModel m1 = io::to_model(c.manifold, "manifold");
  const ManifoldModel m2 = io::to_model(*c.manifold2, "manifold2");
  std::optional<AffineChart> chart;
  if (h.chart) {
    const auto d = static_cast<Eigen::Index>(m1.dim());
    if (h.chart->A.size() != static_cast<std::size_t>(d) || h.chart->b.size() != static_cast<std::size_t>(d))
      throw io::ConfigError("harness.chart", "A must be dim x dim and b must have dim entries");
    AffineChart ac{Eigen::MatrixXd(d, d), Eigen::VectorXd(d)};
    for (Eigen::Index i = 0; i < d; ++i) {
      if (h.chart->A[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(d))
        throw io::ConfigError("harness.chart.A", "must be dim x dim");
      for (Eigen::Index j = 0; j < d; ++j) ac.A(i, j) = h.chart->A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      ac.b(i) = h.chart->b[static_cast<std::size_t>(i)];
    }
    chart = ac;
  }
  const MetricPair pair(m1, m2, c.spectral.K, io::to_box(h.patch, "harness.patch"),
                        io::to_box(h.omega1, "harness.omega1"), io::to_box(h.omega2, "harness.omega2"), chart,
                        BuildOptions{c.spectral.galerkin_N});
  const TimeGrid grid = io::to_grid(c.grid);

  HarnessOptions opt;
  opt.s = c.op.s;
  opt.m_max = h.m_max;
  opt.taus = io::to_values(h.taus, 0.05, 10.0, 40, "harness.taus");
  const double tmin = std::max(HeatKernelEvaluator(pair.system(0)).tau_min(), HeatKernelEvaluator(pair.system(1)).tau_min());
  opt.eta = io::to_values(h.eta, 0.05, 1.0 / tmin, 96, "harness.eta");
  opt.thresholds = Thresholds{h.distinguish, h.consistent};
  opt.kernel_points = h.kernel_points;
  opt.source_power = h.source_power;
  const DistinguishReport r = kernel_compare(pair, grid, opt);

  io::CsvWriter mt({"m", "re", "im", "source_scale", "normalized"});
  for (std::size_t m = 0; m < r.moments.moments.size(); ++m)
    mt.row(std::vector<std::string>{std::to_string(m), fmt(r.moments.moments[m].real()), fmt(r.moments.moments[m].imag()),
                                    fmt(r.moments.source_scale[m]), fmt(r.moments.normalized[m])});
  run.table("moments.csv", mt);
  io::CsvWriter pt({"eta", "re", "im"});
  for (std::size_t i = 0; i < r.phi.eta.size(); ++i) pt.row({r.phi.eta[i], r.phi.phi[i].real(), r.phi.phi[i].imag()});
  run.table("phi.csv", pt);
  io::CsvWriter et({"m", "re", "im"});
  for (std::size_t m = 0; m < r.phi.eta_moments.size(); ++m)
    et.row(std::vector<std::string>{std::to_string(m), fmt(r.phi.eta_moments[m].real()), fmt(r.phi.eta_moments[m].imag())});
  run.table("phi_moments.csv", et);
  io::CsvWriter kt({"tau", "sup_difference"});
  for (std::size_t i = 0; i < r.kernels.taus.size(); ++i) kt.row({r.kernels.taus[i], r.kernels.sup_difference[i]});
  run.table("kernel.csv", kt);

  run.report("distinguish.json",
             {{"verdict", to_string(r.verdict)},
              {"max_moment_ratio", r.max_moment_ratio},
              {"kernel_ratio", r.kernel_ratio},
              {"kernel_max_difference", r.kernels.max_difference},
              {"kernel_scale", r.kernels.kernel_scale},
              {"kernel_points", r.kernels.points},
              {"thresholds", {{"distinguish", r.thresholds.distinguish}, {"consistent", r.thresholds.consistent}}},
              {"metric_mismatch", pair.metric_mismatch()},
              {"patch_nodes", pair.patch(0).size()},
              {"omega1_nodes", pair.omega1().size()},
              {"omega2_nodes", pair.omega2().size()},
              {"phi_envelope", {{"C", r.phi.envelope.C}, {"c", r.phi.envelope.c},
                                {"r_squared", r.phi.envelope.r_squared}, {"samples", r.phi.envelope.samples}}},
              {"s", c.op.s},
              {"grid", grid_json(grid)}});
  return run.finish();
}

int cmd_kernel(Run& run, std::ostream&) {
  const auto& c = run.config();
  const ManifoldModel model = io::to_model(c.manifold, "manifold");
  const EigenSystem sys = build_eigensystem(model, c.spectral.K, BuildOptions{c.spectral.galerkin_N});
  const HeatKernelEvaluator ev(sys);
  const std::vector<double> taus = io::to_values(c.kernel.taus, 0.01, 10.0, 32, "kernel.taus");
  for (int x : c.kernel.x_nodes)
    if (x < 0 || x >= sys.node_count()) throw io::ConfigError("kernel.x_nodes", "node index out of range");
  std::vector<int> all(static_cast<std::size_t>(sys.node_count()));
  for (int i = 0; i < sys.node_count(); ++i) all[static_cast<std::size_t>(i)] = i;

  io::CsvWriter t({"x", "z", "tau", "value"});
  json fits = json::array();
  double mass_defect = 0.0;
  for (int x : c.kernel.x_nodes) {
    for (double tau : taus) {
      const Eigen::MatrixXd row = ev.matrix({x}, all, tau);
      for (int z = 0; z < sys.node_count(); ++z)
        t.row(std::vector<std::string>{std::to_string(x), std::to_string(z), fmt(tau), fmt(row(0, z))});
      mass_defect = std::max(mass_defect, std::abs(ev.row_integral(x, tau) - 1.0));
    }
    std::vector<double> fit_taus;
    for (double tau : taus)
      if (tau >= 0.01 && tau <= 1.0) fit_taus.push_back(tau);
    if (fit_taus.size() >= 3) {
      const GaussianFit g = fit_gaussian_bound(model, sys, x, all, fit_taus);
      fits.push_back({{"x", x}, {"C", g.C}, {"c", g.c}, {"r_squared", g.r_squared}, {"samples", g.samples}});
    }
  }
  run.table("kernel.csv", t);
  json below = json::array();
  for (double tau : taus)
    if (tau < ev.tau_min()) below.push_back(tau);
  run.report("kernel.json", {{"tau_min", ev.tau_min()},
                             {"taus_below_trust_floor", below},
                             {"max_mass_defect", mass_defect},
                             {"gaussian_fits", fits}});
  return run.finish();
}

int cmd_sample(Run& run, std::ostream&) {
  const auto& c = run.config();
  const EigenSystem sys = build_system(c.manifold, "manifold", c.spectral);
  const TimeGrid grid = io::to_grid(c.grid);
  RandomFieldOptions opt;
  opt.seed = c.sample.seed;
  opt.mean_zero = c.sample.mean_zero;
  opt.support_lo = c.source.t_lo;
  opt.support_hi = c.source.t_hi;
  const SpaceTimeField u = random_smooth_field(sys, grid, opt);
  run.field("field", u);
  run.report("report.json", {{"seed", c.sample.seed}, {"mean_zero", c.sample.mean_zero}, {"grid", grid_json(grid)},
                             {"l2_norm", l2_norm(u)}});
  return run.finish();
}

using Command = int (*)(Run&, std::ostream&);

struct CommandInfo {
  const char* name;
  const char* help;
  Command fn;
};

constexpr CommandInfo kCommands[] = {
    {"spectrum", "Eigenvalue table and orthonormality diagnostics", cmd_spectrum},
    {"apply", "Apply Hs, Hinv, semigroup or balakrishnan to a field file", cmd_apply},
    {"solve", "Solve H^s u = f for the configured source", cmd_solve},
    {"sts", "Source-to-solution map on the patch", cmd_sts},
    {"invharness", "Compare two metrics through the moment and kernel tests", cmd_invharness},
    {"kernel", "Tabulate the heat kernel", cmd_kernel},
    {"sample", "Write a seeded random smooth field", cmd_sample},
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional parabolic operators on closed model manifolds", "fracheat"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  std::string config_path;
  int threads = 1;
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& info : kCommands) {
    CLI::App* sub = app.add_subcommand(info.name, info.help);
    sub->add_option("-c,--config", config_path, "Experiment config file (YAML)")->required();
    sub->add_option("--threads", threads, "Worker threads; 1 is the bit-reproducible serial mode")
        ->check(CLI::PositiveNumber);
    sub->allow_extras();
    sub->footer("Any config key can be overridden as --path.to.key=value.");
    subs.emplace_back(sub, info.fn);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? std::string(kVersion) + "\n" : app.help());
      for (const auto& [sub, fn] : subs)
        if (sub->parsed() && !dynamic_cast<const CLI::CallForVersion*>(&e)) out << sub->help();
      return kSuccess;
    }
    err << "fracheat: " << e.what() << "\n";
    return kUsage;
  }

  for (const auto& [sub, fn] : subs) {
    if (!sub->parsed()) continue;
    const std::string name = sub->get_name();
    try {
      std::vector<io::Override> overrides;
      for (const auto& extra : sub->remaining()) {
        if (extra.rfind("--", 0) != 0) throw io::ConfigError(extra, "unexpected argument");
        overrides.push_back(io::parse_override(extra));
      }
      io::ExperimentConfig config = io::load_config(config_path, overrides);
      io::validate(config, name);
      set_thread_count(threads);
      Run r(name, std::move(config), fs::path(config_path).parent_path(), threads);
      const int code = fn(r, err);
      out << "fracheat " << name << ": wrote " << r.out_dir().string() << "\n";
      return code;
    } catch (const io::ConfigError& e) {
      err << "fracheat " << name << ": config error at " << e.what() << "\n";
      return kUsage;
    } catch (const io::IoError& e) {
      err << "fracheat " << name << ": I/O error: " << e.what() << "\n";
      return kIo;
    } catch (const fs::filesystem_error& e) {
      err << "fracheat " << name << ": I/O error: " << e.what() << "\n";
      return kIo;
    } catch (const NumericalError& e) {
      err << "fracheat " << name << ": numerical failure: " << e.what() << " (residual " << e.residual() << ")\n";
      return kNumerical;
    } catch (const ConstructionError& e) {
      err << "fracheat " << name << ": invalid model: " << e.what() << "\n";
      return kUsage;
    } catch (const ContractError& e) {
      err << "fracheat " << name << ": invalid request: " << e.what() << "\n";
      return kUsage;
    }
  }
  return kUsage;
}

}  // namespace fracheat::cli
