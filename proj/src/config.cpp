#include "psos/config.hpp"

#include <cctype>
#include <climits>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "psos/sha256.hpp"

namespace psos {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Wraps one JSON object: typed reads with dotted-path errors, and a finish()
// pass that rejects unknown keys so typos do not silently fall back to
// defaults.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw config_error(path_, "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& require(const char* key) {
    if (!j_.contains(key))
      throw config_error(join_path(path_, key), "missing required field");
    seen_.insert(key);
    return j_.at(key);
  }

  void read_number(const char* key, double& out) {
    if (!mark(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw type_error(key, "a number");
    out = v.get<double>();
  }

  void read_int(const char* key, int& out) {
    long long wide = out;
    read_int64(key, wide);
    if (wide < INT_MIN || wide > INT_MAX)
      throw config_error(join_path(path_, key), "integer out of range");
    out = static_cast<int>(wide);
  }

  void read_int64(const char* key, long long& out) {
    if (!mark(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
      throw type_error(key, "an integer");
    out = v.get<long long>();
  }

  void read_uint64(const char* key, std::uint64_t& out) {
    if (!mark(key)) return;
    const json& v = j_.at(key);
    if (v.is_number_unsigned()) {
      out = v.get<std::uint64_t>();
    } else if (v.is_number_integer() && v.get<long long>() >= 0) {
      out = static_cast<std::uint64_t>(v.get<long long>());
    } else {
      throw type_error(key, "a non-negative integer");
    }
  }

  void read_bool(const char* key, bool& out) {
    if (!mark(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw type_error(key, "a boolean");
    out = v.get<bool>();
  }

  void read_string(const char* key, std::string& out) {
    if (!mark(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw type_error(key, "a string");
    out = v.get<std::string>();
  }

  template <typename T>
  void read_array(const char* key, std::vector<T>& out, const char* elem_kind) {
    if (!mark(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) throw type_error(key, "an array");
    std::vector<T> parsed;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const json& e = v[i];
      if constexpr (std::is_same_v<T, std::string>) {
        if (!e.is_string())
          throw config_error(join_path(path_, key) + "[" + std::to_string(i) + "]",
                             std::string("expected ") + elem_kind);
      } else {
        if (!e.is_number_integer() && !e.is_number_unsigned())
          throw config_error(join_path(path_, key) + "[" + std::to_string(i) + "]",
                             std::string("expected ") + elem_kind);
      }
      parsed.push_back(e.get<T>());
    }
    out = std::move(parsed);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key()))
        throw config_error(join_path(path_, it.key()), "unknown field");
    }
  }

  const std::string& path() const { return path_; }

 private:
  bool mark(const char* key) {
    if (!j_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }

  config_error type_error(const char* key, const char* kind) const {
    return config_error(join_path(path_, key), std::string("expected ") + kind);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw config_error(field, message);
}

const std::set<std::string> kExperimentNames = {
    "simulate",     "tail-rates",        "typical-height", "concentration",
    "hitting-time", "correlation-decay", "appendix-tail"};

ModelConfig parse_model(const json& j) {
  Section s(j, "model");
  ModelConfig m;
  const json& p_val = s.require("p");
  if (!p_val.is_number()) throw config_error("model.p", "expected a number");
  m.p = p_val.get<double>();
  const json& beta_val = s.require("beta");
  if (!beta_val.is_number()) throw config_error("model.beta", "expected a number");
  m.beta = beta_val.get<double>();
  s.read_string("mode", m.mode);
  s.read_int("n_plus", m.n_plus);
  s.read_int("boundary", m.boundary);
  s.read_bool("bond_double_count", m.bond_double_count);
  s.finish();

  check(m.p >= 1.0, "model.p", "must be >= 1");
  check(m.beta > 0.0, "model.beta", "must be > 0");
  check(m.mode == "free" || m.mode == "floor" || m.mode == "floor-ceiling",
        "model.mode", "must be one of free, floor, floor-ceiling");
  if (m.mode == "floor-ceiling") {
    check(m.n_plus >= 1, "model.n_plus", "must be >= 1 under a ceiling");
    check(m.boundary >= 0 && m.boundary <= m.n_plus, "model.boundary",
          "must lie in [0, n_plus] under a ceiling");
  } else if (m.mode == "floor") {
    check(m.boundary >= 0, "model.boundary", "must be >= 0 above a floor");
  }
  return m;
}

ExperimentSection parse_experiment(const json& j) {
  Section s(j, "experiment");
  ExperimentSection e;
  const json& name_val = s.require("name");
  if (!name_val.is_string())
    throw config_error("experiment.name", "expected a string");
  e.name = name_val.get<std::string>();
  s.read_number("a", e.a);
  s.read_int("K", e.K);
  s.read_string("start", e.start);
  s.read_string("target", e.target);
  s.read_number("half_fraction", e.half_fraction);
  s.read_number("nine_tenths_fraction", e.nine_tenths_fraction);
  s.read_int("proxy_side", e.proxy_side);
  s.read_array("L", e.L, "an integer");
  s.read_uint64("t_max_sweeps", e.t_max_sweeps);
  s.read_int("n_seeds", e.n_seeds);
  s.read_int64("n_samples", e.n_samples);
  s.read_int("h_max", e.h_max);
  s.read_int("burn_in_sweeps", e.burn_in_sweeps);
  s.read_int("thin_sweeps", e.thin_sweeps);
  s.read_array("separations", e.separations, "an integer");
  s.read_string("ci_policy", e.ci_policy);
  s.read_int("typical_height", e.typical_height);
  s.read_int("sweeps", e.sweeps);
  s.read_int("snapshot_every", e.snapshot_every);
  s.finish();

  check(kExperimentNames.count(e.name) > 0, "experiment.name",
        "unknown experiment '" + e.name + "'");
  check(e.a > 0.0 && e.a < 1.0, "experiment.a", "must lie in (0, 1)");
  check(e.K >= 0, "experiment.K", "must be >= 0");
  check(e.start == "all-zero" || e.start == "restricted-equilibrium",
        "experiment.start", "must be all-zero or restricted-equilibrium");
  check(e.target == "half" || e.target == "nine-tenths", "experiment.target",
        "must be half or nine-tenths");
  check(e.half_fraction > 0.0 && e.half_fraction <= 1.0,
        "experiment.half_fraction", "must lie in (0, 1]");
  check(e.nine_tenths_fraction > 0.0 && e.nine_tenths_fraction <= 1.0,
        "experiment.nine_tenths_fraction", "must lie in (0, 1]");
  check(e.proxy_side >= 0, "experiment.proxy_side", "must be >= 0");
  check(!e.L.empty(), "experiment.L", "must list at least one size");
  for (std::size_t i = 0; i < e.L.size(); ++i)
    check(e.L[i] >= 1, "experiment.L[" + std::to_string(i) + "]", "must be >= 1");
  check(e.t_max_sweeps >= 1, "experiment.t_max_sweeps", "must be >= 1");
  check(e.n_seeds >= 1, "experiment.n_seeds", "must be >= 1");
  check(e.n_samples >= 1, "experiment.n_samples", "must be >= 1");
  check(e.h_max >= 1, "experiment.h_max", "must be >= 1");
  check(e.burn_in_sweeps >= 0, "experiment.burn_in_sweeps", "must be >= 0");
  check(e.thin_sweeps >= 1, "experiment.thin_sweeps", "must be >= 1");
  for (std::size_t i = 0; i < e.separations.size(); ++i)
    check(e.separations[i] >= 0,
          "experiment.separations[" + std::to_string(i) + "]", "must be >= 0");
  check(e.ci_policy == "point" || e.ci_policy == "lower" || e.ci_policy == "upper",
        "experiment.ci_policy", "must be point, lower, or upper");
  check(e.typical_height >= -1, "experiment.typical_height",
        "must be >= 0, or -1 to estimate");
  check(e.sweeps >= 1, "experiment.sweeps", "must be >= 1");
  check(e.snapshot_every >= 1, "experiment.snapshot_every", "must be >= 1");
  return e;
}

RngConfig parse_rng(const json& j) {
  Section s(j, "rng");
  RngConfig r;
  s.read_uint64("master_seed", r.master_seed);
  s.read_string("streams", r.streams);
  s.finish();
  return r;
}

OutputConfig parse_output(const json& j) {
  Section s(j, "output");
  OutputConfig o;
  s.read_string("dir", o.dir);
  s.read_array("formats", o.formats, "a string");
  s.read_bool("timestamps", o.timestamps);
  s.finish();
  check(!o.dir.empty(), "output.dir", "must be non-empty");
  check(!o.formats.empty(), "output.formats", "must list at least one format");
  for (std::size_t i = 0; i < o.formats.size(); ++i)
    check(o.formats[i] == "json" || o.formats[i] == "csv",
          "output.formats[" + std::to_string(i) + "]", "must be json or csv");
  return o;
}

// --- TOML subset ---

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

bool bare_key_ok(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      return false;
  return true;
}

json parse_toml_scalar(const std::string& raw, const std::string& field, int line);

json parse_toml_value(const std::string& raw, const std::string& field, int line) {
  std::string v = trim(raw);
  if (v.empty())
    throw config_error(field, "line " + std::to_string(line) + ": missing value");
  if (v.front() == '[') {
    if (v.back() != ']')
      throw config_error(field,
                         "line " + std::to_string(line) + ": unterminated array");
    json arr = json::array();
    std::string inner = v.substr(1, v.size() - 2);
    // Split on top-level commas; strings and nested brackets stay intact.
    int depth = 0;
    bool in_string = false;
    std::string elem;
    auto flush = [&](bool last) {
      std::string t = trim(elem);
      if (t.empty()) {
        if (last && arr.empty()) return;  // allow []
        throw config_error(field,
                           "line " + std::to_string(line) + ": empty array element");
      }
      arr.push_back(parse_toml_value(t, field, line));
      elem.clear();
    };
    for (std::size_t i = 0; i < inner.size(); ++i) {
      char c = inner[i];
      if (in_string) {
        elem += c;
        if (c == '\\' && i + 1 < inner.size()) {
          elem += inner[++i];
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') in_string = true;
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == ',' && depth == 0) {
        flush(false);
      } else {
        elem += c;
      }
    }
    if (in_string || depth != 0)
      throw config_error(field,
                         "line " + std::to_string(line) + ": unterminated array");
    flush(true);
    return arr;
  }
  return parse_toml_scalar(v, field, line);
}

json parse_toml_scalar(const std::string& v, const std::string& field, int line) {
  auto err = [&](const std::string& m) {
    return config_error(field, "line " + std::to_string(line) + ": " + m);
  };
  if (v.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < v.size(); ++i) {
      char c = v[i];
      if (c == '"') break;
      if (c == '\\') {
        if (++i >= v.size()) throw err("bad escape in string");
        switch (v[i]) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: throw err("unsupported escape in string");
        }
      } else {
        out += c;
      }
    }
    if (i >= v.size()) throw err("unterminated string");
    if (i + 1 != v.size()) throw err("trailing characters after string");
    return json(out);
  }
  if (v == "true") return json(true);
  if (v == "false") return json(false);
  bool has_digit = false, is_float = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    char c = v[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      has_digit = true;
    } else if (c == '.' || c == 'e' || c == 'E') {
      is_float = true;
    } else if (c == '+' || c == '-') {
      // sign, either leading or in an exponent
    } else {
      throw err("cannot parse value '" + v + "'");
    }
  }
  if (!has_digit) throw err("cannot parse value '" + v + "'");
  errno = 0;
  char* end = nullptr;
  if (is_float) {
    double d = std::strtod(v.c_str(), &end);
    if (errno != 0 || end != v.c_str() + v.size())
      throw err("cannot parse number '" + v + "'");
    return json(d);
  }
  if (v[0] == '-') {
    long long n = std::strtoll(v.c_str(), &end, 10);
    if (errno != 0 || end != v.c_str() + v.size())
      throw err("cannot parse integer '" + v + "'");
    return json(n);
  }
  unsigned long long n = std::strtoull(v.c_str(), &end, 10);
  if (errno != 0 || end != v.c_str() + v.size())
    throw err("cannot parse integer '" + v + "'");
  return json(n);
}

}  // namespace

ConstraintMode ModelConfig::constraint_mode() const {
  if (mode == "free") return ConstraintMode::Free;
  if (mode == "floor") return ConstraintMode::Floor;
  return ConstraintMode::FloorCeiling;
}

ModelParams ModelConfig::to_params() const {
  ModelParams params;
  params.p = p;
  params.beta = beta;
  params.mode = constraint_mode();
  params.n_plus = params.mode == ConstraintMode::FloorCeiling ? n_plus : 1;
  params.bc = BoundaryCondition::constant(boundary);
  params.bond_double_count = bond_double_count;
  return params;
}

nlohmann::ordered_json ExperimentConfig::canonical_json() const {
  ordered_json j;
  j["model"] = {{"p", model.p},
                {"beta", model.beta},
                {"mode", model.mode},
                {"n_plus", model.n_plus},
                {"boundary", model.boundary},
                {"bond_double_count", model.bond_double_count}};
  j["experiment"] = {{"name", experiment.name},
                     {"a", experiment.a},
                     {"K", experiment.K},
                     {"start", experiment.start},
                     {"target", experiment.target},
                     {"half_fraction", experiment.half_fraction},
                     {"nine_tenths_fraction", experiment.nine_tenths_fraction},
                     {"proxy_side", experiment.proxy_side},
                     {"L", experiment.L},
                     {"t_max_sweeps", experiment.t_max_sweeps},
                     {"n_seeds", experiment.n_seeds},
                     {"n_samples", experiment.n_samples},
                     {"h_max", experiment.h_max},
                     {"burn_in_sweeps", experiment.burn_in_sweeps},
                     {"thin_sweeps", experiment.thin_sweeps},
                     {"separations", experiment.separations},
                     {"ci_policy", experiment.ci_policy},
                     {"typical_height", experiment.typical_height},
                     {"sweeps", experiment.sweeps},
                     {"snapshot_every", experiment.snapshot_every}};
  j["rng"] = {{"master_seed", rng.master_seed}, {"streams", rng.streams}};
  j["output"] = {{"dir", output.dir},
                 {"formats", output.formats},
                 {"timestamps", output.timestamps}};
  return j;
}

std::string ExperimentConfig::canonical_text() const {
  return canonical_json().dump();
}

std::string ExperimentConfig::config_hash() const {
  return sha256_hex(canonical_text());
}

std::string ExperimentConfig::run_dir_name() const {
  return config_hash().substr(0, 12);
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  Section top(j, "");
  ExperimentConfig cfg;
  cfg.model = parse_model(top.require("model"));
  cfg.experiment = parse_experiment(top.require("experiment"));
  if (top.has("rng")) cfg.rng = parse_rng(top.require("rng"));
  if (top.has("output")) cfg.output = parse_output(top.require("output"));
  top.finish();
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text, bool is_toml) {
  if (is_toml) return parse_config(toml_subset_to_json(text));
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error("<config>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw io_error("cannot read config file: " + path);
  bool is_toml = path.size() >= 5 && path.compare(path.size() - 5, 5, ".toml") == 0;
  return parse_config_text(buf.str(), is_toml);
}

nlohmann::json toml_subset_to_json(const std::string& text) {
  json root = json::object();
  json* table = &root;
  std::string table_path;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    auto err = [&](const std::string& field, const std::string& m) {
      return config_error(field, "line " + std::to_string(line_no) + ": " + m);
    };
    if (body.front() == '[') {
      if (body.back() != ']') throw err(table_path, "unterminated table header");
      std::string inner = trim(body.substr(1, body.size() - 2));
      table = &root;
      table_path.clear();
      std::size_t start = 0;
      while (true) {
        std::size_t dot = inner.find('.', start);
        std::string part = trim(inner.substr(
            start, dot == std::string::npos ? std::string::npos : dot - start));
        if (!bare_key_ok(part))
          throw err(table_path, "bad table name '" + inner + "'");
        table_path = join_path(table_path, part);
        json& slot = (*table)[part];
        if (slot.is_null()) slot = json::object();
        if (!slot.is_object())
          throw err(table_path, "table clashes with an existing value");
        table = &slot;
        if (dot == std::string::npos) break;
        start = dot + 1;
      }
      continue;
    }
    std::size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw err(table_path, "expected key = value or [table]");
    std::string key = trim(body.substr(0, eq));
    if (!bare_key_ok(key))
      throw err(table_path, "bad key '" + key + "'");
    std::string field = join_path(table_path, key);
    if (table->contains(key)) throw err(field, "duplicate key");
    (*table)[key] = parse_toml_value(body.substr(eq + 1), field, line_no);
  }
  return root;
}

}  // namespace psos
