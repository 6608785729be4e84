#include "fracheat/io/files.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace fracheat::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path.string(), "read failed");
  return ss.str();
}

void write_text(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError(path.parent_path().string(), "cannot create directory: " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << content;
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  row(header);
}

CsvWriter& CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  return row(cells);
}

CsvWriter& CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::invalid_argument("csv row has the wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
  return *this;
}

CsvTable read_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string(), "empty table");
  {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) t.header.push_back(cell);
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cell.size())
        throw IoError(path.string(), "line " + std::to_string(lineno) + ": not a number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != t.header.size())
      throw IoError(path.string(), "line " + std::to_string(lineno) + ": expected " +
                                       std::to_string(t.header.size()) + " cells");
    t.rows.push_back(std::move(row));
  }
  return t;
}

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".json");
  return p;
}

namespace {

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw IoError(path.string(), std::string("malformed JSON: ") + e.what());
  }
}

template <typename T>
T field_of(const json& j, const char* key, const fs::path& path) {
  if (!j.contains(key)) throw IoError(path.string(), std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw IoError(path.string(), std::string("bad value for '") + key + "'");
  }
}

json grid_json(const TimeGrid& g) {
  return {{"samples", g.size()}, {"half_width", g.half_width()}, {"horizon", g.horizon()}};
}

TimeGrid grid_from(const json& j, const fs::path& path) {
  const int n = field_of<int>(j, "samples", path);
  const double hw = field_of<double>(j, "half_width", path);
  const double T = field_of<double>(j, "horizon", path);
  try {
    return TimeGrid(hw, n, T);
  } catch (const std::exception& e) {
    throw IoError(path.string(), std::string("invalid grid: ") + e.what());
  }
}

void require_format(const json& j, const char* expected, const fs::path& path) {
  if (field_of<std::string>(j, "format", path) != expected)
    throw IoError(path.string(), std::string("expected format '") + expected + "'");
  if (field_of<int>(j, "version", path) != 1) throw IoError(path.string(), "unsupported version");
}

}  // namespace

std::vector<fs::path> write_field(const SpaceTimeField& u, const fs::path& csv) {
  const int K = u.modes(), N = u.samples();
  std::string text = "k,j,re,im\n";
  text.reserve(static_cast<std::size_t>(K) * static_cast<std::size_t>(N) * 48);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < N; ++j) {
      const cplx c = u(k, j);
      text += std::to_string(k) + ',' + std::to_string(j) + ',' + format_double(c.real()) + ',' +
              format_double(c.imag()) + '\n';
    }
  write_text(csv, text);
  json meta = grid_json(u.grid());
  meta["format"] = "fracheat-field";
  meta["version"] = 1;
  meta["modes"] = K;
  meta["real"] = u.is_real();
  const fs::path side = sidecar_path(csv);
  write_text(side, meta.dump(2) + "\n");
  return {csv, side};
}

FieldHeader read_field_header(const fs::path& csv) {
  const fs::path side = sidecar_path(csv);
  const json meta = read_json(side);
  require_format(meta, "fracheat-field", side);
  FieldHeader h;
  h.modes = field_of<int>(meta, "modes", side);
  h.samples = field_of<int>(meta, "samples", side);
  h.half_width = field_of<double>(meta, "half_width", side);
  h.horizon = field_of<double>(meta, "horizon", side);
  h.real = field_of<bool>(meta, "real", side);
  return h;
}

SpaceTimeField read_field(const fs::path& csv, const EigenSystem& sys) {
  const fs::path side = sidecar_path(csv);
  const json meta = read_json(side);
  require_format(meta, "fracheat-field", side);
  const int K = field_of<int>(meta, "modes", side);
  if (K != sys.size())
    throw IoError(side.string(), "field has " + std::to_string(K) + " modes, the model has " +
                                     std::to_string(sys.size()));
  const TimeGrid grid = grid_from(meta, side);
  const CsvTable t = read_csv(csv);
  if (t.header != std::vector<std::string>{"k", "j", "re", "im"})
    throw IoError(csv.string(), "expected header k,j,re,im");
  SpaceTimeField u(sys, grid, field_of<bool>(meta, "real", side));
  std::vector<char> seen(static_cast<std::size_t>(K) * static_cast<std::size_t>(grid.size()), 0);
  for (const auto& r : t.rows) {
    const int k = static_cast<int>(r[0]), j = static_cast<int>(r[1]);
    if (k != r[0] || j != r[1] || k < 0 || k >= K || j < 0 || j >= grid.size())
      throw IoError(csv.string(), "index out of range");
    seen[static_cast<std::size_t>(k) * static_cast<std::size_t>(grid.size()) + static_cast<std::size_t>(j)] = 1;
    u(k, j) = cplx(r[2], r[3]);
  }
  for (char s : seen)
    if (!s) throw IoError(csv.string(), "table does not cover every mode and time");
  return u;
}

std::vector<fs::path> write_source(const SourceFunction& f, const fs::path& csv) {
  const Cylinder& c = f.support();
  const std::vector<int> times = interior_indices(f.grid(), c.t_a, c.t_b);
  std::string text = "node,j,value\n";
  for (std::size_t r = 0; r < c.patch.size(); ++r)
    for (int j : times)
      text += std::to_string(c.patch[r]) + ',' + std::to_string(j) + ',' +
              format_double(f.samples()(static_cast<Eigen::Index>(r), j)) + '\n';
  write_text(csv, text);
  json meta = grid_json(f.grid());
  meta["format"] = "fracheat-source";
  meta["version"] = 1;
  meta["nodes"] = f.system().node_count();
  meta["patch"] = c.patch;
  meta["t_a"] = c.t_a;
  meta["t_b"] = c.t_b;
  const fs::path side = sidecar_path(csv);
  write_text(side, meta.dump(2) + "\n");
  return {csv, side};
}

SourceFunction read_source(const fs::path& csv, const EigenSystem& sys) {
  const fs::path side = sidecar_path(csv);
  const json meta = read_json(side);
  require_format(meta, "fracheat-source", side);
  if (field_of<int>(meta, "nodes", side) != sys.node_count())
    throw IoError(side.string(), "source quadrature differs from the model");
  const TimeGrid grid = grid_from(meta, side);
  Cylinder c{field_of<std::vector<int>>(meta, "patch", side), field_of<double>(meta, "t_a", side),
             field_of<double>(meta, "t_b", side)};
  std::unordered_map<int, Eigen::Index> row_of;
  for (std::size_t r = 0; r < c.patch.size(); ++r) {
    if (c.patch[r] < 0 || c.patch[r] >= sys.node_count()) throw IoError(side.string(), "patch node out of range");
    row_of.emplace(c.patch[r], static_cast<Eigen::Index>(r));
  }
  const CsvTable t = read_csv(csv);
  if (t.header != std::vector<std::string>{"node", "j", "value"})
    throw IoError(csv.string(), "expected header node,j,value");
  Eigen::MatrixXd samples = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c.patch.size()), grid.size());
  for (const auto& r : t.rows) {
    const auto it = row_of.find(static_cast<int>(r[0]));
    const int j = static_cast<int>(r[1]);
    if (it == row_of.end() || j < 0 || j >= grid.size()) throw IoError(csv.string(), "sample outside the support");
    samples(it->second, j) = r[2];
  }
  try {
    return SourceFunction(sys, grid, std::move(c), std::move(samples));
  } catch (const std::exception& e) {
    throw IoError(csv.string(), std::string("invalid source: ") + e.what());
  }
}

}  // namespace fracheat::io
