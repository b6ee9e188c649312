#pragma once

// Run artifacts: the manifest that ties outputs to a config hash, an RFC 4180
// CSV writer, a JSON-lines stream for snapshots, and the single funnel through
// which a run directory is written. Reruns of the same config are
// byte-identical unless timestamps are switched on.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace psos {

struct RunManifest {
  std::string config_hash;
  std::string command;           // subcommand that produced the run
  std::string artifact_version = "1";  // bump when output layout changes
  bool with_timestamps = false;
  std::string started;   // RFC 3339, only filled when with_timestamps
  std::string finished;

  struct SeedEntry {
    long long L = 0;
    std::uint64_t seed = 0;
    std::string status;  // done | censored | failed
  };
  std::vector<SeedEntry> seeds;
  std::vector<std::string> files;  // artifacts written for this run

  nlohmann::ordered_json to_json() const;
};

// RFC 4180: CRLF row endings, a mandatory header, quoting for fields that
// contain commas, quotes, or line breaks.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);
  static std::string escape(const std::string& field);

 private:
  void emit(const std::vector<std::string>& fields);
  std::ostream& os_;
  std::size_t columns_ = 0;
  bool header_written_ = false;
};

// Stable text for numeric CSV cells: shortest round-trip form, empty for NaN.
std::string csv_number(double v);
std::string csv_number(long long v);

// One compact JSON object per line.
class JsonLinesWriter {
 public:
  explicit JsonLinesWriter(std::ostream& os) : os_(os) {}
  void record(const nlohmann::ordered_json& j);

 private:
  std::ostream& os_;
};

// Creates the run directory and owns every write into it, collecting the file
// list for the manifest. Throws io_error on filesystem failures.
class RunWriter {
 public:
  explicit RunWriter(std::string dir);
  void write_text(const std::string& filename, const std::string& content);
  void write_json(const std::string& filename, const nlohmann::ordered_json& j);
  // Writes manifest.json with `files` filled from everything written so far.
  void write_manifest(RunManifest manifest);
  const std::string& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

std::string rfc3339_utc_now();

}  // namespace psos
