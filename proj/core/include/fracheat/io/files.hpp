#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracheat/field.hpp"
#include "fracheat/source.hpp"

namespace fracheat::io {

// Unreadable, unwritable or malformed file.
class IoError : public std::runtime_error {
 public:
  IoError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

std::string read_text(const std::filesystem::path& path);
// Creates missing parent directories.
void write_text(const std::filesystem::path& path, const std::string& content);

// 17 significant digits, "%.17g".
std::string format_double(double x);

// Tables are built row by row and written with a header line.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& row(const std::vector<double>& values);
  CsvWriter& row(const std::vector<std::string>& cells);
  const std::string& text() const { return text_; }
  std::size_t columns() const { return columns_; }

 private:
  std::string text_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

// Replaces the extension of a table path with ".json".
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

struct FieldHeader {
  int modes = 0;
  int samples = 0;
  double half_width = 0.0;
  double horizon = 0.0;
  bool real = true;
};

// Mode-time coefficients as `k,j,re,im` plus a JSON sidecar with the grid.
// Returns the two written paths, table first.
std::vector<std::filesystem::path> write_field(const SpaceTimeField& u, const std::filesystem::path& csv);
FieldHeader read_field_header(const std::filesystem::path& csv);
// The sidecar grid and mode count must match sys.
SpaceTimeField read_field(const std::filesystem::path& csv, const EigenSystem& sys);

// Nodal samples as `node,j,value` over the support times plus a sidecar with
// the support cylinder and grid.
std::vector<std::filesystem::path> write_source(const SourceFunction& f, const std::filesystem::path& csv);
SourceFunction read_source(const std::filesystem::path& csv, const EigenSystem& sys);

}  // namespace fracheat::io
