#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fracheat::io {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct OutputEntry {
  std::string file;  // relative to the run directory
  std::uintmax_t bytes = 0;
  std::string sha256;
};

// run.json in the output directory. Timestamps are ISO 8601 UTC.
struct RunRecord {
  std::string command;
  std::string version;
  std::string config_yaml;
  int threads = 1;
  std::string started;
  std::string finished;
  int exit_code = 0;
  std::vector<OutputEntry> outputs;
};

inline constexpr const char* kRunRecordName = "run.json";

std::string utc_timestamp();

// Digests each file (paths relative to dir) and writes dir/run.json.
void write_run_record(const std::filesystem::path& dir, RunRecord record, const std::vector<std::string>& files);
RunRecord read_run_record(const std::filesystem::path& dir);

struct ManifestCheck {
  bool ok = true;
  std::vector<std::string> problems;
};

ManifestCheck verify_run_record(const std::filesystem::path& dir);

}  // namespace fracheat::io
