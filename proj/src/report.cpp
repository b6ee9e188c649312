#include "psos/report.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "psos/config.hpp"

namespace psos {

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash;
  j["command"] = command;
  j["artifact_version"] = artifact_version;
  if (with_timestamps) {
    j["started"] = started;
    j["finished"] = finished;
  }
  nlohmann::ordered_json seed_rows = nlohmann::ordered_json::array();
  for (const SeedEntry& s : seeds)
    seed_rows.push_back({{"L", s.L}, {"seed", s.seed}, {"status", s.status}});
  j["seeds"] = std::move(seed_rows);
  j["files"] = files;
  return j;
}

std::string CsvWriter::escape(const std::string& field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::emit(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os_ << ',';
    os_ << escape(fields[i]);
  }
  os_ << "\r\n";
}

void CsvWriter::header(const std::vector<std::string>& names) {
  if (header_written_) throw std::logic_error("CSV header written twice");
  if (names.empty()) throw std::logic_error("CSV header needs at least one column");
  columns_ = names.size();
  header_written_ = true;
  emit(names);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (!header_written_) throw std::logic_error("CSV row before header");
  if (fields.size() != columns_)
    throw std::logic_error("CSV row width does not match header");
  emit(fields);
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  return nlohmann::json(v).dump();
}

std::string csv_number(long long v) { return std::to_string(v); }

void JsonLinesWriter::record(const nlohmann::ordered_json& j) {
  os_ << j.dump() << '\n';
}

RunWriter::RunWriter(std::string dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw io_error("cannot create run directory " + dir_ + ": " + ec.message());
}

void RunWriter::write_text(const std::string& filename, const std::string& content) {
  std::string path = dir_ + "/" + filename;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw io_error("write failed for " + path);
  if (std::find(files_.begin(), files_.end(), filename) == files_.end())
    files_.push_back(filename);
}

void RunWriter::write_json(const std::string& filename,
                           const nlohmann::ordered_json& j) {
  write_text(filename, j.dump(2) + "\n");
}

void RunWriter::write_manifest(RunManifest manifest) {
  manifest.files = files_;
  manifest.files.push_back("manifest.json");
  std::sort(manifest.files.begin(), manifest.files.end());
  write_json("manifest.json", manifest.to_json());
}

std::string rfc3339_utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace psos
