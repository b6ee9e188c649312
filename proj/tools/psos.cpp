// psos: command-line front end for the p-SOS interface sampler.
//
// Subcommands: simulate | verify | experiment | schema. Everything a run
// writes lands in one directory named by a 12-digit prefix of the config
// hash, with a manifest listing every file. Reruns of the same resolved
// config are byte-identical (timestamps are off by default), and worker
// count never changes results because all streams are derived from the
// master seed, never from scheduling.
//
// Exit codes: 0 ok, 1 verification violation, 2 bad config/usage, 3 I/O.

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "embedded_schemas.hpp"
#include "json.hpp"
#include "psos/config.hpp"
#include "psos/dynamics.hpp"
#include "psos/experiments.hpp"
#include "psos/gibbs.hpp"
#include "psos/oracle.hpp"
#include "psos/report.hpp"
#include "psos/rng.hpp"
#include "psos/sha256.hpp"
#include "psos/verify.hpp"

namespace {

using nlohmann::ordered_json;
using namespace psos;

constexpr std::uint64_t kStreamSimulate = 0x73696d75;  // "simu"
constexpr std::uint64_t kStreamCoupling = 0x76636f75;  // "vcou"

// Options shared by simulate and experiment.
struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  int workers = 1;
  bool dry_run = false;
  std::string ci_policy;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "config file (.json or .toml)");
  sub->add_option("--seed", args.seed, "override rng.master_seed");
  sub->add_option("--out", args.out_dir, "override output.dir (parent of the run directory)");
  sub->add_option("--workers", args.workers, "worker threads")
      ->envname("PSOS_WORKERS")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--dry-run", args.dry_run,
                "validate, print the resolved config and hash, write nothing");
  sub->add_option("--ci-policy", args.ci_policy,
                  "tail estimate used for thresholds: point | lower | upper");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = load_config_file(args.config_path);
  if (args.seed) cfg.rng.master_seed = *args.seed;
  if (args.out_dir) cfg.output.dir = *args.out_dir;
  if (!args.ci_policy.empty()) {
    if (args.ci_policy != "point" && args.ci_policy != "lower" &&
        args.ci_policy != "upper")
      throw config_error("experiment.ci_policy", "must be point, lower, or upper");
    cfg.experiment.ci_policy = args.ci_policy;
  }
  return cfg;
}

// Re-validates after command-line overrides so inline flags get the same
// field-path diagnostics as file input.
ExperimentConfig revalidate(const ExperimentConfig& cfg) {
  return parse_config(nlohmann::json::parse(cfg.canonical_text()));
}

int print_dry_run(const ExperimentConfig& cfg) {
  std::cout << cfg.canonical_json().dump(2) << "\n";
  std::cout << "config_hash: " << cfg.config_hash() << "\n";
  std::cout << "run_dir: " << cfg.output.dir << "/" << cfg.run_dir_name() << "\n";
  return kExitOk;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double n = double(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  return denom == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : (n * sxy - sx * sy) / denom;
}

CiPolicy ci_policy_of(const std::string& s) {
  if (s == "lower") return CiPolicy::Lower;
  if (s == "upper") return CiPolicy::Upper;
  return CiPolicy::Point;
}

// --- simulate ---

int run_simulate(const CommonArgs& args) {
  ExperimentConfig cfg = resolve_config(args);
  // A config written for an experiment should not be fed to simulate silently.
  if (!args.config_path.empty() && cfg.experiment.name != "simulate")
    throw config_error("experiment.name",
                       "config names experiment '" + cfg.experiment.name +
                           "'; use the experiment subcommand");
  cfg.experiment.name = "simulate";
  cfg = revalidate(cfg);
  if (args.dry_run) return print_dry_run(cfg);

  ModelParams base = cfg.model.to_params();
  RunWriter writer(cfg.output.dir + "/" + cfg.run_dir_name());
  writer.write_text("config.json", cfg.canonical_json().dump(2) + "\n");

  std::ostringstream snapshots;
  JsonLinesWriter jsonl(snapshots);
  std::ostringstream observables;
  CsvWriter csv(observables);
  csv.header({"L", "sweep", "energy", "mean_height", "max_height"});

  RunManifest manifest;
  manifest.config_hash = cfg.config_hash();
  manifest.command = "simulate";
  manifest.with_timestamps = cfg.output.timestamps;
  if (manifest.with_timestamps) manifest.started = rfc3339_utc_now();

  for (long long L : cfg.experiment.L) {
    BoxGeometry geom{int(L)};
    HeightField start(geom, 0);
    ChainState chain = make_chain(
        start, base,
        substream(cfg.rng.master_seed, {kStreamSimulate, std::uint64_t(L)}));
    auto observe = [&](int sweep) {
      double energy = total_energy(chain.field, base);
      long long sum = 0;
      int max_h = 0;
      for (int v : chain.field.data()) {
        sum += v;
        max_h = std::max(max_h, v);
      }
      double mean = double(sum) / geom.site_count();
      csv.row({csv_number(L), csv_number((long long)sweep), csv_number(energy),
               csv_number(mean), csv_number((long long)max_h)});
      if (sweep % cfg.experiment.snapshot_every == 0) {
        ordered_json snap;
        snap["L"] = L;
        snap["sweep"] = sweep;
        snap["heights"] = chain.field.data();
        jsonl.record(snap);
      }
    };
    observe(0);
    for (int s = 1; s <= cfg.experiment.sweeps; ++s) {
      glauber_sweep(chain);
      observe(s);
    }
    manifest.seeds.push_back({L, cfg.rng.master_seed, "done"});
  }

  writer.write_text("snapshots.jsonl", snapshots.str());
  writer.write_text("observables.csv", observables.str());
  if (manifest.with_timestamps) manifest.finished = rfc3339_utc_now();
  writer.write_manifest(manifest);
  std::cout << writer.dir() << "\n";
  return kExitOk;
}

// --- verify ---

const std::vector<std::string> kVerifySuites = {
    "peierls", "fkg", "sandwich", "detailed-balance", "coupling", "all"};

ModelParams verify_params(double p, double beta, ConstraintMode mode, int n_plus) {
  ModelParams mp;
  mp.p = p;
  mp.beta = beta;
  mp.mode = mode;
  mp.n_plus = n_plus;
  mp.bc = BoundaryCondition::constant(0);
  return mp;
}

struct VerifyArgs {
  std::string suite;
  std::optional<double> beta, p;
  std::optional<int> L, n_plus;
  int sweeps = 10000;
  std::uint64_t seed = 1;
  std::optional<std::string> out_dir;
  bool inject_bug = false;
};

std::vector<double> grid_or(const std::optional<double>& v,
                            std::vector<double> fallback) {
  if (v) return {*v};
  return fallback;
}

// Negative control: rebuilds a report with every retained inequality flipped
// (slack negated), so a healthy suite reports violations and the exit path
// can be exercised end to end.
CheckReport flip_inequalities(const CheckReport& in) {
  CheckReport out;
  out.name = in.name + " (inequality flipped)";
  out.inputs = in.inputs;
  out.tolerance = in.tolerance;
  for (const CheckItem& it : in.items)
    out.add(it.label, it.value, it.bound, -it.slack);
  return out;
}

std::vector<CheckReport> run_verify_suite(const std::string& suite,
                                          const VerifyArgs& args) {
  std::vector<CheckReport> reports;
  if (suite == "detailed-balance") {
    int L = args.L.value_or(2), n_plus = args.n_plus.value_or(2);
    BoxGeometry geom(L);
    for (double beta : grid_or(args.beta, {0.5, 2.0}))
      for (double p : grid_or(args.p, {1.0, 1.5, 2.0, 3.0}))
        reports.push_back(verify_detailed_balance(
            geom, verify_params(p, beta, ConstraintMode::FloorCeiling, n_plus)));
  } else if (suite == "fkg") {
    int L = args.L.value_or(2), n_plus = args.n_plus.value_or(2);
    BoxGeometry geom(L);
    for (double beta : grid_or(args.beta, {0.5, 2.0}))
      for (double p : grid_or(args.p, {1.0, 1.5, 2.0, 3.0})) {
        ModelParams mp = verify_params(p, beta, ConstraintMode::FloorCeiling, n_plus);
        ExactMeasure em = ExactMeasure::enumerate(geom, mp);
        std::vector<LabeledEvent> events;
        for (int y = 1; y <= L; ++y)
          for (int x = 1; x <= L; ++x)
            for (int level = 1; level <= n_plus; ++level)
              events.push_back(threshold_event(geom, Site{x, y}, level));
        reports.push_back(verify_fkg(em, events));
      }
  } else if (suite == "sandwich") {
    int L = args.L.value_or(2), n_plus = args.n_plus.value_or(1);
    BoxGeometry geom(L);
    for (double beta : grid_or(args.beta, {0.7, 1.0}))
      for (double p : grid_or(args.p, {1.0, 2.0})) {
        ModelParams mp = verify_params(p, beta, ConstraintMode::FloorCeiling, n_plus);
        ExactMeasure fc = ExactMeasure::enumerate(geom, mp);
        std::vector<LabeledEvent> events;
        for (std::uint64_t s = 0; s < fc.state_count(); ++s) {
          std::vector<int> target(std::size_t(geom.site_count()));
          fc.indexer().decode(s, target);
          events.push_back(LabeledEvent{
              "state " + std::to_string(s),
              [target](const HeightField& f) { return f.data() == target; },
              false});
        }
        reports.push_back(verify_sandwich(geom, mp, events));
      }
  } else if (suite == "peierls") {
    int L = args.L.value_or(3);
    BoxGeometry geom(L);
    for (double beta : grid_or(args.beta, {1.0, 2.0}))
      for (double p : grid_or(args.p, {1.0, 2.0, 3.0}))
        reports.push_back(verify_peierls(
            geom, verify_params(p, beta, ConstraintMode::Free, 1)));
  } else if (suite == "coupling") {
    int L = args.L.value_or(8), n_plus = args.n_plus.value_or(5);
    BoxGeometry geom(L);
    for (double p : grid_or(args.p, {1.0, 1.5, 2.0, 3.0})) {
      ModelParams mp = verify_params(p, args.beta.value_or(1.0),
                                     ConstraintMode::FloorCeiling, n_plus);
      reports.push_back(verify_coupling_order(
          geom, mp, args.sweeps,
          substream(args.seed, {kStreamCoupling, std::uint64_t(L),
                                std::uint64_t(p * 1000)})));
    }
  }
  return reports;
}

int run_verify(const VerifyArgs& args) {
  std::vector<std::string> suites;
  if (args.suite == "all") {
    suites = {"detailed-balance", "fkg", "sandwich", "peierls", "coupling"};
  } else if (std::find(kVerifySuites.begin(), kVerifySuites.end(), args.suite) !=
             kVerifySuites.end()) {
    suites = {args.suite};
  } else {
    std::ostringstream names;
    for (std::size_t i = 0; i < kVerifySuites.size(); ++i)
      names << (i ? ", " : "") << kVerifySuites[i];
    std::cerr << "unknown suite '" << args.suite << "'; valid suites: "
              << names.str() << "\n";
    return kExitConfig;
  }

  bool all_pass = true;
  ordered_json combined = ordered_json::array();
  std::vector<std::pair<std::string, ordered_json>> files;
  for (const std::string& suite : suites) {
    std::vector<CheckReport> reports = run_verify_suite(suite, args);
    if (args.inject_bug)
      for (CheckReport& r : reports) r = flip_inequalities(r);
    bool pass = true;
    ordered_json arr = ordered_json::array();
    for (const CheckReport& r : reports) {
      pass = pass && r.pass();
      arr.push_back(r.to_json());
    }
    all_pass = all_pass && pass;
    ordered_json wrapper;
    wrapper["suite"] = suite;
    wrapper["pass"] = pass;
    wrapper["reports"] = std::move(arr);
    std::cerr << "suite " << suite << ": " << (pass ? "pass" : "FAIL") << " ("
              << reports.size() << " reports)\n";
    files.emplace_back("verify_" + suite + ".json", wrapper);
    combined.push_back(std::move(wrapper));
  }

  if (args.out_dir) {
    RunWriter writer(*args.out_dir);
    for (auto& [name, wrapper] : files) writer.write_json(name, wrapper);
    RunManifest manifest;
    manifest.command = "verify";
    // verify has no config file; hash the report payload so the manifest
    // still pins exactly what was produced.
    manifest.config_hash = sha256_hex(combined.dump());
    writer.write_manifest(manifest);
  } else {
    std::cout << combined.dump(2) << "\n";
  }
  return all_pass ? kExitOk : kExitViolation;
}

// --- experiment ---

const std::vector<std::string> kExperimentNames = {
    "tail-rates",   "typical-height",    "concentration",
    "hitting-time", "correlation-decay", "appendix-tail"};

struct ExperimentArgs {
  CommonArgs common;
  std::string name;
  std::optional<double> p, beta, a;
  std::optional<std::string> L_csv;  // comma-separated sizes
  std::optional<std::string> mode, target, start;
  std::optional<int> n_plus, K, proxy_side, h_max, n_seeds, typical_height;
  std::optional<long long> n_samples;
  std::optional<std::uint64_t> t_max;
};

std::vector<long long> parse_L_list(const std::string& csv) {
  std::vector<long long> out;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      long long v = std::stoll(item, &used);
      if (used != item.size()) throw std::invalid_argument("trailing");
      out.push_back(v);
    } catch (const std::exception&) {
      throw config_error("experiment.L", "cannot parse size '" + item + "'");
    }
  }
  if (out.empty()) throw config_error("experiment.L", "empty size list");
  return out;
}

ExperimentConfig resolve_experiment_config(const ExperimentArgs& args) {
  ExperimentConfig cfg = resolve_config(args.common);
  cfg.experiment.name = args.name;
  if (args.p) cfg.model.p = *args.p;
  if (args.beta) cfg.model.beta = *args.beta;
  if (args.mode) cfg.model.mode = *args.mode;
  if (args.n_plus) cfg.model.n_plus = *args.n_plus;
  if (args.a) cfg.experiment.a = *args.a;
  if (args.K) cfg.experiment.K = *args.K;
  if (args.L_csv) cfg.experiment.L = parse_L_list(*args.L_csv);
  if (args.target) cfg.experiment.target = *args.target;
  if (args.start) cfg.experiment.start = *args.start;
  if (args.proxy_side) cfg.experiment.proxy_side = *args.proxy_side;
  if (args.h_max) cfg.experiment.h_max = *args.h_max;
  if (args.n_seeds) cfg.experiment.n_seeds = *args.n_seeds;
  if (args.typical_height) cfg.experiment.typical_height = *args.typical_height;
  if (args.n_samples) cfg.experiment.n_samples = *args.n_samples;
  if (args.t_max) cfg.experiment.t_max_sweeps = *args.t_max;
  return revalidate(cfg);
}

TailOptions tail_options(const ExperimentConfig& cfg, int workers) {
  TailOptions opt;
  opt.mode = cfg.model.constraint_mode();
  opt.n_plus = cfg.model.n_plus;
  opt.burn_in_sweeps = cfg.experiment.burn_in_sweeps;
  opt.thin_sweeps = cfg.experiment.thin_sweeps;
  opt.master_seed = cfg.rng.master_seed;
  opt.workers = workers;
  return opt;
}

int proxy_side_for(const ExperimentConfig& cfg, long long L) {
  return cfg.experiment.proxy_side > 0 ? cfg.experiment.proxy_side
                                       : default_proxy_side(L);
}

struct ExperimentOutput {
  ordered_json results;
  std::string series_csv;
  std::string plotdata_csv;
  std::vector<RunManifest::SeedEntry> seeds;
};

ExperimentOutput run_tail_rates(const ExperimentConfig& cfg, int workers) {
  const ExperimentSection& e = cfg.experiment;
  int M = proxy_side_for(cfg, e.L.front());
  std::vector<TailEstimate> tails = estimate_tail_profile(
      cfg.model.p, cfg.model.beta, e.h_max, M, e.n_samples,
      tail_options(cfg, workers));

  ExperimentOutput out;
  std::ostringstream series, plot;
  CsvWriter scsv(series), pcsv(plot);
  scsv.header({"h", "p_hat", "lower", "upper", "n_samples"});
  pcsv.header({"h", "minus_log_p_hat"});
  ordered_json rows = ordered_json::array();
  std::vector<double> xs, ys;
  for (const TailEstimate& t : tails) {
    rows.push_back({{"h", t.h},
                    {"p_hat", t.p_hat},
                    {"lower", t.lower},
                    {"upper", t.upper},
                    {"n_samples", t.n_samples}});
    scsv.row({csv_number((long long)t.h), csv_number(t.p_hat),
              csv_number(t.lower), csv_number(t.upper),
              csv_number(t.n_samples)});
    double mlog = t.p_hat > 0 ? -std::log(t.p_hat)
                              : std::numeric_limits<double>::quiet_NaN();
    pcsv.row({csv_number((long long)t.h), csv_number(mlog)});
    if (t.h >= 1 && t.p_hat > 0) {
      xs.push_back(t.h);
      ys.push_back(-std::log(t.p_hat));
    }
  }
  double slope = xs.size() >= 2 ? fit_slope(xs, ys)
                                : std::numeric_limits<double>::quiet_NaN();
  out.results["proxy_side"] = M;
  out.results["tails"] = std::move(rows);
  out.results["minus_log_slope"] = slope;
  out.results["slope_points"] = xs.size();
  out.series_csv = series.str();
  out.plotdata_csv = plot.str();
  out.seeds.push_back({M, cfg.rng.master_seed, "done"});
  return out;
}

ExperimentOutput run_typical_height(const ExperimentConfig& cfg, int workers) {
  ExperimentOutput out;
  std::ostringstream series, plot;
  CsvWriter scsv(series), pcsv(plot);
  scsv.header({"L", "h", "p_hat", "lower", "upper", "n_samples"});
  pcsv.header({"L", "H", "threshold"});
  ordered_json rows = ordered_json::array();
  for (long long L : cfg.experiment.L) {
    int M = proxy_side_for(cfg, L);
    std::vector<TailEstimate> consulted;
    auto estimator = [&](int h) {
      TailEstimate t = estimate_infinite_tail(cfg.model.p, cfg.model.beta, h, M,
                                              cfg.experiment.n_samples,
                                              tail_options(cfg, workers));
      consulted.push_back(t);
      return t;
    };
    int H = estimate_H(cfg.model.p, cfg.model.beta, L, estimator,
                       ci_policy_of(cfg.experiment.ci_policy));
    double threshold = 5.0 * cfg.model.beta / double(L);
    for (const TailEstimate& t : consulted)
      scsv.row({csv_number(L), csv_number((long long)t.h), csv_number(t.p_hat),
                csv_number(t.lower), csv_number(t.upper),
                csv_number(t.n_samples)});
    pcsv.row({csv_number(L), csv_number((long long)H), csv_number(threshold)});
    ordered_json tails = ordered_json::array();
    for (const TailEstimate& t : consulted)
      tails.push_back({{"h", t.h},
                       {"p_hat", t.p_hat},
                       {"lower", t.lower},
                       {"upper", t.upper}});
    rows.push_back({{"L", L},
                    {"H", H},
                    {"threshold", threshold},
                    {"ci_policy", cfg.experiment.ci_policy},
                    {"proxy_side", M},
                    {"tails", std::move(tails)}});
    out.seeds.push_back({L, cfg.rng.master_seed, "done"});
  }
  out.results["heights"] = std::move(rows);
  out.series_csv = series.str();
  out.plotdata_csv = plot.str();
  return out;
}

ExperimentOutput run_concentration(const ExperimentConfig& cfg, int workers) {
  const ExperimentSection& e = cfg.experiment;
  long long L = e.L.front();
  ConcentrationOptions opt;
  opt.burn_in_sweeps = std::max(e.burn_in_sweeps, 1);
  opt.thin_sweeps = e.thin_sweeps;
  opt.master_seed = cfg.rng.master_seed;
  if (e.typical_height >= 0) {
    opt.typical_height = e.typical_height;
  } else {
    int M = proxy_side_for(cfg, L);
    auto estimator = [&](int h) {
      return estimate_infinite_tail(cfg.model.p, cfg.model.beta, h, M,
                                    e.n_samples, tail_options(cfg, workers));
    };
    opt.typical_height = estimate_H(cfg.model.p, cfg.model.beta, L, estimator,
                                    ci_policy_of(e.ci_policy));
  }
  ConcentrationReport rep = concentration_experiment(
      cfg.model.p, cfg.model.beta, int(L), e.K, e.n_samples, opt);

  ExperimentOutput out;
  out.results = {{"L", L},
                 {"K", rep.K},
                 {"typical_height", rep.typical_height},
                 {"level", rep.level},
                 {"fraction", rep.fraction},
                 {"threshold", rep.threshold},
                 {"fraction_low_start", rep.fraction_low_start},
                 {"fraction_high_start", rep.fraction_high_start},
                 {"agreed", rep.agreed},
                 {"n_samples", rep.n_samples}};
  std::ostringstream series, plot;
  CsvWriter scsv(series), pcsv(plot);
  scsv.header({"start", "fraction"});
  scsv.row({"all-zero", csv_number(rep.fraction_low_start)});
  scsv.row({"all-high", csv_number(rep.fraction_high_start)});
  pcsv.header({"level", "fraction", "threshold"});
  pcsv.row({csv_number((long long)rep.level), csv_number(rep.fraction),
            csv_number(rep.threshold)});
  out.series_csv = series.str();
  out.plotdata_csv = plot.str();
  out.seeds.push_back({L, cfg.rng.master_seed, "done"});
  return out;
}

ExperimentOutput run_hitting_time(const ExperimentConfig& cfg, int workers) {
  const ExperimentSection& e = cfg.experiment;
  HittingOptions opt;
  opt.start = e.start == "restricted-equilibrium" ? HitStart::RestrictedEquilibrium
                                                  : HitStart::AllZero;
  opt.target = e.target == "half" ? HitTarget::HalfAbove
                                  : HitTarget::NineTenthsAbove;
  opt.half_fraction = e.half_fraction;
  opt.nine_tenths_fraction = e.nine_tenths_fraction;
  opt.bc = BoundaryCondition::constant(cfg.model.boundary);
  opt.master_seed = cfg.rng.master_seed;
  opt.workers = workers;
  if (e.typical_height >= 0)
    opt.typical_height = [h = e.typical_height](long long) { return h; };
  HittingReport rep = hitting_time_experiment(cfg.model.p, cfg.model.beta, e.L,
                                              e.a, e.n_seeds, e.t_max_sweeps, opt);
  rep.config_hash = cfg.config_hash();

  ExperimentOutput out;
  ordered_json levels = ordered_json::array();
  for (const HittingLevelSummary& s : rep.per_level)
    levels.push_back({{"L", s.L},
                      {"n_plus", s.n_plus},
                      {"typical_height", s.typical_height},
                      {"target_level", s.target_level},
                      {"fraction", s.fraction},
                      {"median_sweeps", s.median_sweeps},
                      {"q1_sweeps", s.q1_sweeps},
                      {"q3_sweeps", s.q3_sweeps},
                      {"censored", s.censored},
                      {"n_seeds", s.n_seeds}});
  out.results = {{"a", rep.a},
                 {"d", rep.d},
                 {"t_max_sweeps", rep.t_max_sweeps},
                 {"start", rep.start},
                 {"target", rep.target},
                 {"per_level", std::move(levels)},
                 {"growth_slope", rep.slope},
                 {"fit_valid", rep.fit_valid},
                 {"fit_points", rep.fit_points}};
  std::ostringstream series, plot;
  CsvWriter scsv(series), pcsv(plot);
  scsv.header({"L", "seed", "tau_sweeps", "censored"});
  for (const HittingSeedRecord& r : rep.records) {
    scsv.row({csv_number(r.L), csv_number((long long)r.seed),
              csv_number(r.tau_sweeps), r.censored ? "1" : "0"});
    out.seeds.push_back(
        {r.L, std::uint64_t(r.seed), r.censored ? "censored" : "done"});
  }
  pcsv.header({"L", "median_sweeps", "q1_sweeps", "q3_sweeps"});
  for (const HittingLevelSummary& s : rep.per_level)
    pcsv.row({csv_number(s.L), csv_number(s.median_sweeps),
              csv_number(s.q1_sweeps), csv_number(s.q3_sweeps)});
  out.series_csv = series.str();
  out.plotdata_csv = plot.str();
  return out;
}

ExperimentOutput run_correlation_decay(const ExperimentConfig& cfg) {
  const ExperimentSection& e = cfg.experiment;
  int M = proxy_side_for(cfg, e.L.front());
  CorrelationOptions opt;
  opt.method = ProbeMethod::MonteCarlo;
  opt.mode = cfg.model.constraint_mode();
  opt.n_plus = cfg.model.n_plus;
  opt.n_samples = e.n_samples;
  opt.burn_in_sweeps = e.burn_in_sweeps;
  opt.thin_sweeps = e.thin_sweeps;
  opt.master_seed = cfg.rng.master_seed;
  DecayCurve curve = correlation_decay_probe(cfg.model.p, cfg.model.beta, M,
                                             e.separations, opt);

  ExperimentOutput out;
  ordered_json pts = ordered_json::array();
  std::ostringstream series, plot;
  CsvWriter scsv(series), pcsv(plot);
  scsv.header({"r", "corr", "ci"});
  pcsv.header({"r", "log_corr"});
  for (const CorrelationPoint& pt : curve.points) {
    pts.push_back({{"r", pt.r}, {"corr", pt.corr}, {"ci", pt.ci}});
    scsv.row({csv_number((long long)pt.r), csv_number(pt.corr),
              csv_number(pt.ci)});
    double logc = pt.corr > 0 ? std::log(pt.corr)
                              : std::numeric_limits<double>::quiet_NaN();
    pcsv.row({csv_number((long long)pt.r), csv_number(logc)});
  }
  out.results = {{"proxy_side", M},
                 {"points", std::move(pts)},
                 {"rate", curve.rate},
                 {"rate_valid", curve.rate_valid}};
  out.series_csv = series.str();
  out.plotdata_csv = plot.str();
  out.seeds.push_back({M, cfg.rng.master_seed, "done"});
  return out;
}

ExperimentOutput run_appendix_tail(const ExperimentConfig& cfg) {
  AppendixTailOptions opt;
  opt.mode = cfg.model.constraint_mode();
  if (opt.mode == ConstraintMode::Free)
    throw config_error("model.mode",
                       "appendix-tail needs a floor; set mode to floor or "
                       "floor-ceiling");
  if (cfg.experiment.proxy_side > 0) opt.proxy_side = cfg.experiment.proxy_side;

  ExperimentOutput out;
  ordered_json rows = ordered_json::array();
  std::ostringstream series, plot;
  CsvWriter scsv(series), pcsv(plot);
  scsv.header({"L", "level", "estimate", "bound", "satisfied"});
  pcsv.header({"L", "minus_log_estimate", "minus_log_bound"});
  for (long long L : cfg.experiment.L) {
    AppendixTailReport rep = appendix_tail_check(cfg.model.p, cfg.model.beta,
                                                 int(L), cfg.model.n_plus, opt);
    rows.push_back({{"L", rep.L},
                    {"n_plus", rep.n_plus},
                    {"level", rep.level},
                    {"estimate", rep.estimate},
                    {"delta", rep.delta},
                    {"bound", rep.bound},
                    {"satisfied", rep.satisfied},
                    {"proxy_side", rep.proxy_side}});
    scsv.row({csv_number(L), csv_number((long long)rep.level),
              csv_number(rep.estimate), csv_number(rep.bound),
              rep.satisfied ? "1" : "0"});
    pcsv.row({csv_number(L),
              csv_number(rep.estimate > 0
                             ? -std::log(rep.estimate)
                             : std::numeric_limits<double>::quiet_NaN()),
              csv_number(-std::log(rep.bound))});
    out.seeds.push_back({L, cfg.rng.master_seed, "done"});
  }
  out.results["checks"] = std::move(rows);
  out.series_csv = series.str();
  out.plotdata_csv = plot.str();
  return out;
}

int run_experiment(const ExperimentArgs& args) {
  if (std::find(kExperimentNames.begin(), kExperimentNames.end(), args.name) ==
      kExperimentNames.end()) {
    std::ostringstream names;
    for (std::size_t i = 0; i < kExperimentNames.size(); ++i)
      names << (i ? ", " : "") << kExperimentNames[i];
    std::cerr << "unknown experiment '" << args.name
              << "'; valid names: " << names.str() << "\n";
    return kExitConfig;
  }
  ExperimentConfig cfg = resolve_experiment_config(args);
  if (args.common.dry_run) return print_dry_run(cfg);

  ExperimentOutput out;
  int workers = args.common.workers;
  if (args.name == "tail-rates") out = run_tail_rates(cfg, workers);
  else if (args.name == "typical-height") out = run_typical_height(cfg, workers);
  else if (args.name == "concentration") out = run_concentration(cfg, workers);
  else if (args.name == "hitting-time") out = run_hitting_time(cfg, workers);
  else if (args.name == "correlation-decay") out = run_correlation_decay(cfg);
  else out = run_appendix_tail(cfg);

  RunWriter writer(cfg.output.dir + "/" + cfg.run_dir_name());
  writer.write_text("config.json", cfg.canonical_json().dump(2) + "\n");
  ordered_json summary;
  summary["config_hash"] = cfg.config_hash();
  summary["experiment"] = args.name;
  summary["model"] = cfg.canonical_json()["model"];
  summary["results"] = std::move(out.results);
  writer.write_json("summary.json", summary);
  writer.write_text("series.csv", out.series_csv);
  writer.write_text("plotdata.csv", out.plotdata_csv);

  RunManifest manifest;
  manifest.config_hash = cfg.config_hash();
  manifest.command = "experiment " + args.name;
  manifest.with_timestamps = cfg.output.timestamps;
  if (manifest.with_timestamps) {
    manifest.started = rfc3339_utc_now();
    manifest.finished = rfc3339_utc_now();
  }
  manifest.seeds = out.seeds;
  writer.write_manifest(manifest);
  std::cout << writer.dir() << "\n";
  return kExitOk;
}

// --- schema ---

int run_schema(const std::string& which, const std::optional<std::string>& out_dir) {
  const std::vector<std::pair<std::string, const char*>> schemas = {
      {"config", embedded::kConfigSchema},
      {"summary", embedded::kSummarySchema},
      {"manifest", embedded::kManifestSchema},
      {"verify", embedded::kVerifySchema}};
  if (out_dir) {
    RunWriter writer(*out_dir);
    for (const auto& [name, text] : schemas)
      writer.write_text(name + ".schema.json", text);
    std::cout << writer.dir() << "\n";
    return kExitOk;
  }
  if (which.empty()) {
    for (const auto& [name, text] : schemas) std::cout << name << "\n";
    return kExitOk;
  }
  for (const auto& [name, text] : schemas) {
    if (name == which) {
      std::cout << text;
      return kExitOk;
    }
  }
  std::cerr << "unknown schema '" << which
            << "'; valid names: config, summary, manifest, verify\n";
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-SOS interface sampler: simulation, exact verification, experiments"};
  app.require_subcommand(1);

  CommonArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "run Glauber chains, write snapshots and observables");
  add_common(sim, sim_args);

  VerifyArgs ver_args;
  CLI::App* ver = app.add_subcommand("verify", "exact verification suites on built-in instances");
  ver->add_option("suite", ver_args.suite,
                  "peierls | fkg | sandwich | detailed-balance | coupling | all")
      ->required();
  ver->add_option("--beta", ver_args.beta, "restrict to one beta");
  ver->add_option("--p", ver_args.p, "restrict to one p");
  ver->add_option("--L", ver_args.L, "box side");
  ver->add_option("--n-plus", ver_args.n_plus, "ceiling height");
  ver->add_option("--sweeps", ver_args.sweeps, "coupling suite sweep count");
  ver->add_option("--seed", ver_args.seed, "coupling suite master seed");
  ver->add_option("--out", ver_args.out_dir, "write per-suite reports here instead of stdout");
  ver->add_flag("--inject-bug", ver_args.inject_bug,
                "negative control: flip every inequality before judging");

  ExperimentArgs exp_args;
  CLI::App* exp = app.add_subcommand("experiment", "run a named experiment, write summary/series/plotdata");
  exp->add_option("name", exp_args.name,
                  "tail-rates | typical-height | concentration | hitting-time | "
                  "correlation-decay | appendix-tail")
      ->required();
  add_common(exp, exp_args.common);
  exp->add_option("--p", exp_args.p, "exponent p");
  exp->add_option("--beta", exp_args.beta, "inverse temperature");
  exp->add_option("--mode", exp_args.mode, "free | floor | floor-ceiling");
  exp->add_option("--n-plus", exp_args.n_plus, "ceiling height");
  exp->add_option("--L", exp_args.L_csv, "box sides, comma separated (e.g. 4,6,8)");
  exp->add_option("--a", exp_args.a, "level fraction a in (0,1)");
  exp->add_option("--K", exp_args.K, "level offset below the typical height");
  exp->add_option("--target", exp_args.target, "half | nine-tenths");
  exp->add_option("--start", exp_args.start, "all-zero | restricted-equilibrium");
  exp->add_option("--proxy-side", exp_args.proxy_side, "proxy box side (0 = default rule)");
  exp->add_option("--h-max", exp_args.h_max, "largest tail level");
  exp->add_option("--n-seeds", exp_args.n_seeds, "independent chains per size");
  exp->add_option("--n-samples", exp_args.n_samples, "samples per estimate");
  exp->add_option("--t-max", exp_args.t_max, "censoring horizon in sweeps");
  exp->add_option("--typical-height", exp_args.typical_height,
                  "fix the typical height instead of estimating it");

  std::string schema_name;
  std::optional<std::string> schema_out;
  CLI::App* sch = app.add_subcommand("schema", "print or write the shipped artifact schemas");
  sch->add_option("name", schema_name, "config | summary | manifest | verify");
  sch->add_option("--out", schema_out, "write all schema files to this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_args);
    if (ver->parsed()) return run_verify(ver_args);
    if (exp->parsed()) return run_experiment(exp_args);
    if (sch->parsed()) return run_schema(schema_name, schema_out);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
