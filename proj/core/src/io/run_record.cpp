#include "fracheat/io/run_record.hpp"

#include <chrono>
#include <ctime>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "fracheat/io/files.hpp"

namespace fracheat::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_run_record(const fs::path& dir, RunRecord record, const std::vector<std::string>& files) {
  record.outputs.clear();
  for (const auto& f : files) {
    const std::string bytes = read_text(dir / f);
    record.outputs.push_back({f, bytes.size(), sha256_hex(bytes)});
  }
  json outputs = json::array();
  for (const auto& o : record.outputs) outputs.push_back({{"file", o.file}, {"bytes", o.bytes}, {"sha256", o.sha256}});
  const json j = {{"format", "fracheat-run"},
                  {"version", 1},
                  {"command", record.command},
                  {"toolkit_version", record.version},
                  {"threads", record.threads},
                  {"started", record.started},
                  {"finished", record.finished},
                  {"exit_code", record.exit_code},
                  {"config", record.config_yaml},
                  {"outputs", outputs}};
  write_text(dir / kRunRecordName, j.dump(2) + "\n");
}

RunRecord read_run_record(const fs::path& dir) {
  const fs::path p = dir / kRunRecordName;
  json j;
  try {
    j = json::parse(read_text(p));
    RunRecord r;
    r.command = j.at("command").get<std::string>();
    r.version = j.at("toolkit_version").get<std::string>();
    r.threads = j.at("threads").get<int>();
    r.started = j.at("started").get<std::string>();
    r.finished = j.at("finished").get<std::string>();
    r.exit_code = j.at("exit_code").get<int>();
    r.config_yaml = j.at("config").get<std::string>();
    for (const auto& o : j.at("outputs"))
      r.outputs.push_back({o.at("file").get<std::string>(), o.at("bytes").get<std::uintmax_t>(),
                           o.at("sha256").get<std::string>()});
    return r;
  } catch (const json::exception& e) {
    throw IoError(p.string(), std::string("malformed run record: ") + e.what());
  }
}

ManifestCheck verify_run_record(const fs::path& dir) {
  ManifestCheck c;
  const RunRecord r = read_run_record(dir);
  for (const auto& o : r.outputs) {
    std::string bytes;
    try {
      bytes = read_text(dir / o.file);
    } catch (const IoError&) {
      c.problems.push_back(o.file + ": missing");
      continue;
    }
    if (bytes.size() != o.bytes) c.problems.push_back(o.file + ": size differs");
    else if (sha256_hex(bytes) != o.sha256) c.problems.push_back(o.file + ": digest differs");
  }
  c.ok = c.problems.empty();
  return c;
}

}  // namespace fracheat::io
