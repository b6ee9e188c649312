#pragma once

// Run configuration: JSON (or a TOML subset converted to JSON), field-checked
// validation, canonical serialization, and the hash that names run directories
// and stamps every artifact. A config round-trips parse -> emit -> parse to
// the identical canonical form; unknown keys are rejected so typos surface as
// config errors instead of silently-defaulted fields.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "psos/gibbs.hpp"

namespace psos {

// CLI exit codes, shared with the tests that drive the binary.
constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

// Malformed config; `field` is the dotted path of the offending entry.
class config_error : public std::runtime_error {
 public:
  config_error(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  double p = 1.0;
  double beta = 1.0;
  std::string mode = "free";  // free | floor | floor-ceiling
  int n_plus = 1;
  int boundary = 0;  // constant boundary height
  bool bond_double_count = false;

  ConstraintMode constraint_mode() const;
  ModelParams to_params() const;
};

// One flat block of experiment knobs; each experiment reads the subset it
// understands and ignores the rest, so one schema serves all of them.
struct ExperimentSection {
  std::string name;  // simulate | tail-rates | typical-height | concentration |
                     // hitting-time | correlation-decay | appendix-tail
  double a = 0.5;
  int K = 0;
  std::string start = "all-zero";      // all-zero | restricted-equilibrium
  std::string target = "nine-tenths";  // half | nine-tenths
  double half_fraction = 0.5;
  double nine_tenths_fraction = 0.9;
  int proxy_side = 0;  // 0: default coverage rule
  std::vector<long long> L = {8};
  std::uint64_t t_max_sweeps = 100000;
  int n_seeds = 8;
  long long n_samples = 20000;
  int h_max = 3;
  int burn_in_sweeps = 400;
  int thin_sweeps = 2;
  std::vector<int> separations = {0, 1, 2};
  std::string ci_policy = "point";  // point | lower | upper
  int typical_height = -1;          // -1: estimate from tails
  int sweeps = 100;                 // simulate only
  int snapshot_every = 10;          // simulate only
};

struct RngConfig {
  std::uint64_t master_seed = 1;
  std::string streams = "per-L-seed-replica";  // documentation of the scheme
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<std::string> formats = {"json", "csv"};
  bool timestamps = false;  // keep reruns byte-identical by default
};

struct ExperimentConfig {
  ModelConfig model;
  ExperimentSection experiment;
  RngConfig rng;
  OutputConfig output;

  // Fixed key order with every default filled in.
  nlohmann::ordered_json canonical_json() const;
  std::string canonical_text() const;
  std::string config_hash() const;   // sha256 hex of canonical_text
  std::string run_dir_name() const;  // first 12 hash digits
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text, bool is_toml);

// Dispatches on a .toml extension, otherwise JSON. Throws io_error when the
// file cannot be read.
ExperimentConfig load_config_file(const std::string& path);

// The accepted TOML subset: [section] and [section.sub] tables, key = value
// with quoted strings, integers, reals, booleans and single-line flat arrays,
// # comments. Everything else is a config error.
nlohmann::json toml_subset_to_json(const std::string& text);

}  // namespace psos
