#include "fracheat/io/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fracheat/errors.hpp"
#include "fracheat/io/files.hpp"

namespace fracheat::io {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void only_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> keys) {
  if (!node) return;
  if (!node.IsMap()) throw ConfigError(path.empty() ? "<root>" : path, "expected a table");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& kv : node) {
    const std::string k = kv.first.as<std::string>();
    if (!allowed.count(k)) throw ConfigError(join(path, k), "unknown key");
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& path, const char* what) {
  if (!node.IsScalar()) throw ConfigError(path, std::string("expected ") + what);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, std::string("expected ") + what);
  }
}

template <typename T>
void read(const YAML::Node& parent, const std::string& path, const char* key, T& out, const char* what) {
  const YAML::Node n = parent[key];
  if (n) out = scalar<T>(n, join(path, key), what);
}

template <typename T>
void read_list(const YAML::Node& parent, const std::string& path, const char* key, std::vector<T>& out,
               const char* what) {
  const YAML::Node n = parent[key];
  if (!n) return;
  const std::string p = join(path, key);
  if (!n.IsSequence()) throw ConfigError(p, std::string("expected a list of ") + what);
  out.clear();
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(scalar<T>(n[i], p, what));
}

void read_matrix(const YAML::Node& parent, const std::string& path, const char* key,
                 std::vector<std::vector<double>>& out) {
  const YAML::Node n = parent[key];
  if (!n) return;
  const std::string p = join(path, key);
  if (!n.IsSequence()) throw ConfigError(p, "expected a list of rows");
  out.clear();
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!n[i].IsSequence()) throw ConfigError(p, "expected a list of rows");
    std::vector<double> row;
    for (std::size_t j = 0; j < n[i].size(); ++j) row.push_back(scalar<double>(n[i][j], p, "numbers"));
    out.push_back(std::move(row));
  }
}

ManifoldConfig decode_manifold(const YAML::Node& n, const std::string& path) {
  only_keys(n, path, {"kind", "dim", "periods", "metric", "gamma", "nodes"});
  ManifoldConfig m;
  read(n, path, "kind", m.kind, "a string");
  read(n, path, "dim", m.dim, "an integer");
  read_list(n, path, "periods", m.periods, "numbers");
  // metric: rows, a flat row-major list, or the gamma coefficients of a variable circle.
  if (const YAML::Node g = n["metric"]; g && g.IsSequence() && g.size() > 0 && g[0].IsScalar()) {
    std::vector<double> flat;
    read_list(n, path, "metric", flat, "numbers");
    if (m.kind == "variable_circle" || m.kind == "VariableCircle") {
      m.gamma = flat;
      m.metric.clear();
    } else {
      const std::size_t d = m.dim > 0 ? static_cast<std::size_t>(m.dim) : m.periods.size();
      if (d == 0 || flat.size() != d * d) throw ConfigError(join(path, "metric"), "must be a dim x dim matrix");
      m.metric.assign(d, std::vector<double>(d));
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) m.metric[i][j] = flat[i * d + j];
    }
  } else {
    read_matrix(n, path, "metric", m.metric);
  }
  read_list(n, path, "gamma", m.gamma, "numbers");
  read_list(n, path, "nodes", m.nodes, "integers");
  return m;
}

LogRange decode_range(const YAML::Node& n, const std::string& path, LogRange r) {
  if (!n) return r;
  only_keys(n, path, {"lo", "hi", "count"});
  read(n, path, "lo", r.lo, "a number");
  read(n, path, "hi", r.hi, "a number");
  read(n, path, "count", r.count, "an integer");
  return r;
}

BoxConfig decode_box(const YAML::Node& n, const std::string& path) {
  BoxConfig b;
  if (!n) return b;
  only_keys(n, path, {"lo", "hi"});
  read_list(n, path, "lo", b.lo, "numbers");
  read_list(n, path, "hi", b.hi, "numbers");
  return b;
}

ExperimentConfig decode(const YAML::Node& root) {
  only_keys(root, "", {"manifold", "manifold2", "spectral", "grid", "operator", "harness", "source", "kernel", "sample",
                       "input", "output"});
  ExperimentConfig c;
  if (!root["manifold"]) throw ConfigError("manifold", "missing block");
  c.manifold = decode_manifold(root["manifold"], "manifold");
  if (root["manifold2"]) c.manifold2 = decode_manifold(root["manifold2"], "manifold2");

  if (const auto n = root["spectral"]) {
    only_keys(n, "spectral", {"K", "galerkin_N"});
    read(n, "spectral", "K", c.spectral.K, "an integer");
    read(n, "spectral", "galerkin_N", c.spectral.galerkin_N, "an integer");
  }
  if (const auto n = root["grid"]) {
    only_keys(n, "grid", {"T", "pad_factor", "N_t"});
    read(n, "grid", "T", c.grid.T, "a number");
    read(n, "grid", "pad_factor", c.grid.pad_factor, "a number");
    read(n, "grid", "N_t", c.grid.N_t, "an integer");
  }
  if (const auto n = root["operator"]) {
    only_keys(n, "operator", {"s", "apply", "tau"});
    read(n, "operator", "s", c.op.s, "a number");
    read(n, "operator", "apply", c.op.apply, "a string");
    read(n, "operator", "tau", c.op.tau, "a number");
  }
  if (const auto n = root["harness"]) {
    only_keys(n, "harness", {"patch", "omega1", "omega2", "m_max", "taus", "eta", "thresholds", "kernel_points",
                             "source_power", "chart"});
    HarnessConfig h;
    h.patch = decode_box(n["patch"], "harness.patch");
    h.omega1 = decode_box(n["omega1"], "harness.omega1");
    h.omega2 = decode_box(n["omega2"], "harness.omega2");
    read(n, "harness", "m_max", h.m_max, "an integer");
    h.taus = decode_range(n["taus"], "harness.taus", h.taus);
    h.eta = decode_range(n["eta"], "harness.eta", h.eta);
    if (const auto t = n["thresholds"]) {
      only_keys(t, "harness.thresholds", {"distinguish", "consistent"});
      read(t, "harness.thresholds", "distinguish", h.distinguish, "a number");
      read(t, "harness.thresholds", "consistent", h.consistent, "a number");
    }
    read(n, "harness", "kernel_points", h.kernel_points, "an integer");
    read(n, "harness", "source_power", h.source_power, "an integer");
    if (const auto ch = n["chart"]) {
      only_keys(ch, "harness.chart", {"A", "b"});
      ChartConfig cc;
      read_matrix(ch, "harness.chart", "A", cc.A);
      read_list(ch, "harness.chart", "b", cc.b, "numbers");
      h.chart = cc;
    }
    c.harness = h;
  }
  if (const auto n = root["source"]) {
    only_keys(n, "source", {"file", "box", "t_lo", "t_hi", "power"});
    read(n, "source", "file", c.source.file, "a string");
    c.source.box = decode_box(n["box"], "source.box");
    read(n, "source", "t_lo", c.source.t_lo, "a number");
    read(n, "source", "t_hi", c.source.t_hi, "a number");
    read(n, "source", "power", c.source.power, "an integer");
  }
  if (const auto n = root["kernel"]) {
    only_keys(n, "kernel", {"x_nodes", "taus"});
    read_list(n, "kernel", "x_nodes", c.kernel.x_nodes, "integers");
    c.kernel.taus = decode_range(n["taus"], "kernel.taus", c.kernel.taus);
  }
  if (const auto n = root["sample"]) {
    only_keys(n, "sample", {"seed", "mean_zero"});
    read(n, "sample", "seed", c.sample.seed, "an integer");
    read(n, "sample", "mean_zero", c.sample.mean_zero, "a boolean");
  }
  if (const auto n = root["input"]) {
    only_keys(n, "input", {"field"});
    read(n, "input", "field", c.input_field, "a string");
  }
  if (const auto n = root["output"]) {
    only_keys(n, "output", {"directory", "formats"});
    read(n, "output", "directory", c.output.directory, "a string");
    read_list(n, "output", "formats", c.output.formats, "strings");
  }
  return c;
}

void apply_override(YAML::Node& root, const Override& o) {
  std::vector<std::string> parts;
  std::stringstream ss(o.first);
  for (std::string p; std::getline(ss, p, '.');) {
    if (p.empty()) throw ConfigError(o.first, "malformed override path");
    parts.push_back(p);
  }
  if (parts.empty()) throw ConfigError(o.first, "malformed override path");
  YAML::Node value;
  try {
    value = YAML::Load(o.second);
  } catch (const YAML::Exception& e) {
    throw ConfigError(o.first, std::string("unparsable override value: ") + e.what());
  }
  YAML::Node cur = root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!cur[parts[i]]) cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
    YAML::Node next = cur[parts[i]];
    if (!next.IsMap()) throw ConfigError(o.first, "override descends into a non-table value");
    cur.reset(next);
  }
  cur[parts.back()] = value;
}

void emit_box(YAML::Emitter& e, const char* key, const BoxConfig& b) {
  e << YAML::Key << key << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "lo" << YAML::Value << YAML::Flow << b.lo;
  e << YAML::Key << "hi" << YAML::Value << YAML::Flow << b.hi;
  e << YAML::EndMap;
}

void emit_range(YAML::Emitter& e, const char* key, const LogRange& r) {
  e << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "lo" << YAML::Value << r.lo
    << YAML::Key << "hi" << YAML::Value << r.hi << YAML::Key << "count" << YAML::Value << r.count << YAML::EndMap;
}

void emit_matrix(YAML::Emitter& e, const char* key, const std::vector<std::vector<double>>& m) {
  e << YAML::Key << key << YAML::Value << YAML::BeginSeq;
  for (const auto& row : m) e << YAML::Flow << row;
  e << YAML::EndSeq;
}

void emit_manifold(YAML::Emitter& e, const char* key, const ManifoldConfig& m) {
  e << YAML::Key << key << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << m.kind;
  e << YAML::Key << "dim" << YAML::Value << m.dim;
  e << YAML::Key << "periods" << YAML::Value << YAML::Flow << m.periods;
  emit_matrix(e, "metric", m.metric);
  e << YAML::Key << "gamma" << YAML::Value << YAML::Flow << m.gamma;
  e << YAML::Key << "nodes" << YAML::Value << YAML::Flow << m.nodes;
  e << YAML::EndMap;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::vector<Override>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<root>", std::string("malformed config: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& o : overrides) apply_override(root, o);
  return decode(root);
}

ExperimentConfig load_config(const std::string& path, const std::vector<Override>& overrides) {
  return parse_config(read_text(path), overrides);
}

std::string to_yaml(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  emit_manifold(e, "manifold", c.manifold);
  if (c.manifold2) emit_manifold(e, "manifold2", *c.manifold2);
  e << YAML::Key << "spectral" << YAML::Value << YAML::BeginMap << YAML::Key << "K" << YAML::Value << c.spectral.K
    << YAML::Key << "galerkin_N" << YAML::Value << c.spectral.galerkin_N << YAML::EndMap;
  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap << YAML::Key << "T" << YAML::Value << c.grid.T << YAML::Key
    << "pad_factor" << YAML::Value << c.grid.pad_factor << YAML::Key << "N_t" << YAML::Value << c.grid.N_t
    << YAML::EndMap;
  e << YAML::Key << "operator" << YAML::Value << YAML::BeginMap << YAML::Key << "s" << YAML::Value << c.op.s
    << YAML::Key << "apply" << YAML::Value << c.op.apply << YAML::Key << "tau" << YAML::Value << c.op.tau
    << YAML::EndMap;
  if (c.harness) {
    const HarnessConfig& h = *c.harness;
    e << YAML::Key << "harness" << YAML::Value << YAML::BeginMap;
    emit_box(e, "patch", h.patch);
    emit_box(e, "omega1", h.omega1);
    emit_box(e, "omega2", h.omega2);
    e << YAML::Key << "m_max" << YAML::Value << h.m_max;
    emit_range(e, "taus", h.taus);
    emit_range(e, "eta", h.eta);
    e << YAML::Key << "thresholds" << YAML::Value << YAML::BeginMap << YAML::Key << "distinguish" << YAML::Value
      << h.distinguish << YAML::Key << "consistent" << YAML::Value << h.consistent << YAML::EndMap;
    e << YAML::Key << "kernel_points" << YAML::Value << h.kernel_points;
    e << YAML::Key << "source_power" << YAML::Value << h.source_power;
    if (h.chart) {
      e << YAML::Key << "chart" << YAML::Value << YAML::BeginMap;
      emit_matrix(e, "A", h.chart->A);
      e << YAML::Key << "b" << YAML::Value << YAML::Flow << h.chart->b << YAML::EndMap;
    }
    e << YAML::EndMap;
  }
  e << YAML::Key << "source" << YAML::Value << YAML::BeginMap << YAML::Key << "file" << YAML::Value
    << YAML::DoubleQuoted << c.source.file;
  emit_box(e, "box", c.source.box);
  e << YAML::Key << "t_lo" << YAML::Value << c.source.t_lo << YAML::Key << "t_hi" << YAML::Value << c.source.t_hi
    << YAML::Key << "power" << YAML::Value << c.source.power << YAML::EndMap;
  e << YAML::Key << "kernel" << YAML::Value << YAML::BeginMap << YAML::Key << "x_nodes" << YAML::Value << YAML::Flow
    << c.kernel.x_nodes;
  emit_range(e, "taus", c.kernel.taus);
  e << YAML::EndMap;
  e << YAML::Key << "sample" << YAML::Value << YAML::BeginMap << YAML::Key << "seed" << YAML::Value << c.sample.seed
    << YAML::Key << "mean_zero" << YAML::Value << c.sample.mean_zero << YAML::EndMap;
  e << YAML::Key << "input" << YAML::Value << YAML::BeginMap << YAML::Key << "field" << YAML::Value
    << YAML::DoubleQuoted << c.input_field << YAML::EndMap;
  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap << YAML::Key << "directory" << YAML::Value
    << YAML::DoubleQuoted << c.output.directory << YAML::Key << "formats" << YAML::Value << YAML::Flow
    << c.output.formats << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

Override parse_override(const std::string& arg) {
  std::string a = arg;
  while (!a.empty() && a.front() == '-') a.erase(a.begin());
  const auto eq = a.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(arg, "override must look like --path.to.key=value");
  return {a.substr(0, eq), a.substr(eq + 1)};
}

ManifoldModel to_model(const ManifoldConfig& m, const std::string& path) {
  const std::size_t d = m.periods.size();
  if (d == 0) throw ConfigError(path + ".periods", "needs at least one period");
  if (m.dim != 0 && static_cast<std::size_t>(m.dim) != d) throw ConfigError(path + ".dim", "disagrees with periods");
  for (double L : m.periods)
    if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError(path + ".periods", "periods must be positive");
  if (!m.nodes.empty() && m.nodes.size() != d) throw ConfigError(path + ".nodes", "needs one count per dimension");
  try {
    if (m.kind == "flat_torus" || m.kind == "FlatTorus") {
      if (m.metric.size() != d) throw ConfigError(path + ".metric", "must be a dim x dim matrix");
      Eigen::MatrixXd G(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < d; ++i) {
        if (m.metric[i].size() != d) throw ConfigError(path + ".metric", "must be a dim x dim matrix");
        for (std::size_t j = 0; j < d; ++j) G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.metric[i][j];
      }
      try {
        return ManifoldModel::flat_torus(G, m.periods, m.nodes);
      } catch (const ConstructionError& e) {
        const std::string what = e.what();
        if (what.find("metric") != std::string::npos) throw ConfigError(path + ".metric", what);
        throw;
      }
    }
    if (m.kind == "variable_circle" || m.kind == "VariableCircle") {
      if (d != 1) throw ConfigError(path + ".periods", "variable_circle takes one period");
      try {
        return ManifoldModel::variable_circle(m.gamma, m.periods[0], m.nodes.empty() ? 0 : m.nodes[0]);
      } catch (const ConstructionError& e) {
        throw ConfigError(path + ".gamma", e.what());
      }
    }
  } catch (const ConstructionError& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + ".kind", "unknown manifold kind '" + m.kind + "'");
}

TimeGrid to_grid(const GridConfig& g) {
  if (!(g.N_t >= 2) || g.N_t % 2 != 0) throw ConfigError("grid.N_t", "must be a positive even integer");
  if (!(g.pad_factor >= 2.0)) throw ConfigError("grid.pad_factor", "must be at least 2");
  if (!(g.T > 0.0) || !std::isfinite(g.T)) throw ConfigError("grid.T", "must be positive");
  return TimeGrid::padded(g.T, g.pad_factor, g.N_t);
}

std::vector<double> to_values(const LogRange& r, double default_lo, double default_hi, int default_count,
                              const std::string& path) {
  const double lo = r.lo > 0.0 ? r.lo : default_lo;
  const double hi = r.hi > 0.0 ? r.hi : default_hi;
  const int n = r.count > 0 ? r.count : default_count;
  if (!(lo > 0.0 && hi >= lo) || n < 1) throw ConfigError(path, "needs 0 < lo <= hi and count >= 1");
  return log_spaced(lo, hi, n);
}

CoordinateBox to_box(const BoxConfig& b, const std::string& path) {
  if (b.lo.empty() || b.lo.size() != b.hi.size()) throw ConfigError(path, "needs lo and hi of equal length");
  for (std::size_t r = 0; r < b.lo.size(); ++r)
    if (!(b.lo[r] < b.hi[r])) throw ConfigError(path, "needs lo < hi in every dimension");
  return CoordinateBox{b.lo, b.hi};
}

void validate(const ExperimentConfig& c, const std::string& command) {
  const ManifoldModel model = to_model(c.manifold, "manifold");
  if (c.manifold2) {
    const ManifoldModel m2 = to_model(*c.manifold2, "manifold2");
    if (m2.dim() != model.dim()) throw ConfigError("manifold2.periods", "dimension differs from manifold");
  }
  if (c.spectral.K < 1) throw ConfigError("spectral.K", "must be at least 1");
  if (c.spectral.galerkin_N < 0) throw ConfigError("spectral.galerkin_N", "must be nonnegative");
  to_grid(c.grid);
  if (!(c.op.s > 0.0 && c.op.s < 1.0)) throw ConfigError("operator.s", "must lie in (0, 1)");
  static const std::set<std::string> ops{"Hs", "Hinv", "semigroup", "balakrishnan"};
  if (!ops.count(c.op.apply)) throw ConfigError("operator.apply", "must be one of Hs, Hinv, semigroup, balakrishnan");
  if (!(c.op.tau >= 0.0)) throw ConfigError("operator.tau", "must be nonnegative");
  if (command == "apply" && c.input_field.empty()) throw ConfigError("input.field", "apply needs an input field file");
  if (command == "invharness") {
    if (!c.manifold2) throw ConfigError("manifold2", "missing block");
    if (!c.harness) throw ConfigError("harness", "missing block");
  }
  if (command == "sts" && !c.harness && c.source.box.lo.empty() && c.source.file.empty())
    throw ConfigError("harness", "sts needs harness.patch or a source");
  if (c.harness) {
    const HarnessConfig& h = *c.harness;
    const std::size_t d = static_cast<std::size_t>(model.dim());
    for (const auto& [box, name] : {std::pair{&h.patch, "harness.patch"}, std::pair{&h.omega1, "harness.omega1"},
                                    std::pair{&h.omega2, "harness.omega2"}}) {
      if (command == "invharness" || !box->lo.empty()) {
        to_box(*box, name);
        if (box->lo.size() != d) throw ConfigError(name, "needs one interval per dimension");
      }
    }
    if (h.m_max < 0) throw ConfigError("harness.m_max", "must be nonnegative");
    if (!(h.distinguish > h.consistent && h.consistent > 0.0))
      throw ConfigError("harness.thresholds", "needs distinguish > consistent > 0");
    if (h.kernel_points < 1) throw ConfigError("harness.kernel_points", "must be positive");
    if (h.source_power < 1) throw ConfigError("harness.source_power", "must be positive");
  }
  if (!(c.source.t_lo < c.source.t_hi)) throw ConfigError("source.t_lo", "needs t_lo < t_hi");
  if (c.source.t_lo <= -c.grid.T || c.source.t_hi >= c.grid.T)
    throw ConfigError("source.t_lo", "source time support must lie in (-T, T)");
  for (const auto& f : c.output.formats)
    if (f != "csv" && f != "json") throw ConfigError("output.formats", "entries must be csv or json");
}

}  // namespace fracheat::io
