#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fracheat/eigensystem.hpp"
#include "fracheat/harness.hpp"
#include "fracheat/manifold.hpp"
#include "fracheat/time_grid.hpp"

namespace fracheat::io {

// Invalid configuration value. path() is the dotted key, e.g. "manifold.metric".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::invalid_argument(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct ManifoldConfig {
  std::string kind = "flat_torus";
  int dim = 0;  // 0: taken from periods
  std::vector<double> periods{6.283185307179586};
  std::vector<std::vector<double>> metric{{1.0}};
  std::vector<double> gamma;  // variable_circle Fourier coefficients
  std::vector<int> nodes;
  bool operator==(const ManifoldConfig&) const = default;
};

struct SpectralConfig {
  int K = 64;
  int galerkin_N = 0;
  bool operator==(const SpectralConfig&) const = default;
};

struct GridConfig {
  double T = 3.0;
  double pad_factor = 4.0;
  int N_t = 1024;
  bool operator==(const GridConfig&) const = default;
};

struct OperatorConfig {
  double s = 0.5;
  std::string apply = "Hs";  // Hs, Hinv, semigroup, balakrishnan
  double tau = 0.0;
  bool operator==(const OperatorConfig&) const = default;
};

// count log-spaced values on [lo, hi]; lo = 0 selects the command default.
struct LogRange {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  bool operator==(const LogRange&) const = default;
};

struct BoxConfig {
  std::vector<double> lo;
  std::vector<double> hi;
  bool operator==(const BoxConfig&) const = default;
};

struct ChartConfig {
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  bool operator==(const ChartConfig&) const = default;
};

struct HarnessConfig {
  BoxConfig patch;
  BoxConfig omega1;
  BoxConfig omega2;
  int m_max = 8;
  LogRange taus{0.05, 10.0, 40};
  LogRange eta{0.0, 0.0, 96};
  double distinguish = 1e-5;
  double consistent = 1e-8;
  int kernel_points = 160;
  int source_power = 9;
  std::optional<ChartConfig> chart;
  bool operator==(const HarnessConfig&) const = default;
};

// Source for solve and sts: a file, or a raised-cosine bump on box x (t_lo, t_hi).
// An empty box falls back to harness.omega1, then to the whole manifold.
struct SourceConfig {
  std::string file;
  BoxConfig box;
  double t_lo = -1.5;
  double t_hi = 1.5;
  int power = 9;
  bool operator==(const SourceConfig&) const = default;
};

struct KernelConfig {
  std::vector<int> x_nodes{0};
  LogRange taus{0.01, 10.0, 32};
  bool operator==(const KernelConfig&) const = default;
};

struct SampleConfig {
  std::uint64_t seed = 1;
  bool mean_zero = true;
  bool operator==(const SampleConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "fracheat_out";
  std::vector<std::string> formats{"csv", "json"};
  bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
  ManifoldConfig manifold;
  std::optional<ManifoldConfig> manifold2;
  SpectralConfig spectral;
  GridConfig grid;
  OperatorConfig op;
  std::optional<HarnessConfig> harness;
  SourceConfig source;
  KernelConfig kernel;
  SampleConfig sample;
  std::string input_field;
  OutputConfig output;
  bool operator==(const ExperimentConfig&) const = default;
};

// "a.b.c" -> YAML value text, applied before decoding.
using Override = std::pair<std::string, std::string>;

ExperimentConfig parse_config(const std::string& text, const std::vector<Override>& overrides = {});
ExperimentConfig load_config(const std::string& path, const std::vector<Override>& overrides = {});
std::string to_yaml(const ExperimentConfig& config);

// Splits "--a.b=value" style arguments ("a.b=value" without dashes also accepted).
Override parse_override(const std::string& arg);

// Checks the invariants shared by every command and the blocks `command` needs.
void validate(const ExperimentConfig& config, const std::string& command = "");

ManifoldModel to_model(const ManifoldConfig& m, const std::string& path = "manifold");
TimeGrid to_grid(const GridConfig& g);
std::vector<double> to_values(const LogRange& r, double default_lo, double default_hi, int default_count,
                              const std::string& path);
CoordinateBox to_box(const BoxConfig& b, const std::string& path);

}  // namespace fracheat::io
