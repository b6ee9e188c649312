// Acceptance harness: the checks this artifact must satisfy before a release,
// one PASS/FAIL line per criterion. Exact-oracle equivalences and
// theorem-backed inequalities are checked at fixed tolerances pinned here;
// statistical criteria use fixed seeds and generous error margins so a pass
// is reproducible and a failure means a bug, not noise.
//
// Usage: acceptance [--criterion N]   (default: run all)
// Exit code 0 iff every criterion that ran passed.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "psos/config.hpp"
#include "psos/contour.hpp"
#include "psos/dynamics.hpp"
#include "psos/experiments.hpp"
#include "psos/gibbs.hpp"
#include "psos/oracle.hpp"
#include "psos/rng.hpp"
#include "psos/verify.hpp"

using namespace psos;
namespace fs = std::filesystem;

#ifndef PSOS_CLI_PATH
#error "PSOS_CLI_PATH must point at the psos binary"
#endif

namespace {

struct CriterionResult {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

ModelParams params_fc(double p, double beta, int n_plus) {
  ModelParams mp;
  mp.p = p;
  mp.beta = beta;
  mp.mode = ConstraintMode::FloorCeiling;
  mp.n_plus = n_plus;
  mp.bc = BoundaryCondition::constant(0);
  return mp;
}

const std::vector<double> kAllP = {1.0, 1.5, 2.0, 3.0};

// --- 1: heat-bath kernel is exactly reversible on the 2x2 ceiling box ------

CriterionResult c1_detailed_balance() {
  CriterionResult r;
  BoxGeometry geom(2);
  double worst = 0.0;
  r.pass = true;
  for (double beta : {0.5, 2.0})
    for (double p : kAllP) {
      CheckReport rep = verify_detailed_balance(geom, params_fc(p, beta, 2), 1e-12);
      double residual = rep.items.empty() ? 0.0 : rep.items[0].value;
      worst = std::max(worst, residual);
      if (!rep.pass()) {
        r.pass = false;
        r.details.push_back("p=" + fmt(p) + " beta=" + fmt(beta) +
                            " residual " + fmt(residual));
      }
    }
  r.summary = "2x2 n+=2, 8 (p,beta) combos, max |pi(x)P(x,y)-pi(y)P(y,x)| = " +
              fmt(worst) + " (tol 1e-12)";
  return r;
}

// --- 2: long-run occupation of the sampler matches the exact measure -------

CriterionResult c2_sampler_vs_oracle() {
  CriterionResult r;
  BoxGeometry geom(2);
  const int n_plus = 2;
  const std::uint64_t sweeps = 1000000;
  double worst = 0.0;
  r.pass = true;
  int combo = 0;
  for (double beta : {0.5, 2.0})
    for (double p : kAllP) {
      ModelParams mp = params_fc(p, beta, n_plus);
      ExactMeasure oracle = ExactMeasure::enumerate(geom, mp);
      for (int start_high = 0; start_high < 2; ++start_high) {
        HeightField start(geom, start_high ? n_plus : 0);
        ChainState chain = make_chain(
            start, mp,
            substream(1, {0x61636332, std::uint64_t(combo),
                          std::uint64_t(start_high)}));
        double tv = occupation_tv(chain, oracle, sweeps);
        worst = std::max(worst, tv);
        if (!(tv <= 0.01)) {
          r.pass = false;
          r.details.push_back("p=" + fmt(p) + " beta=" + fmt(beta) + " start=" +
                              (start_high ? "top" : "bottom") + " TV=" + fmt(tv));
        }
      }
      ++combo;
    }
  r.summary = "1e6-sweep occupation vs exact law, both extremal starts, "
              "worst TV = " + fmt(worst) + " (bound 0.01)";
  return r;
}

// --- 3: contour bound with certified free window, direct and nested --------

CriterionResult c3_peierls() {
  CriterionResult r;
  BoxGeometry geom(3);
  long long checked = 0, violations = 0;
  r.pass = true;
  for (double beta : {1.0, 2.0})
    for (double p : {1.0, 2.0, 3.0}) {
      ModelParams mp;
      mp.p = p;
      mp.beta = beta;
      mp.mode = ConstraintMode::Free;
      mp.n_plus = 1;
      mp.bc = BoundaryCondition::constant(0);
      CheckReport rep = verify_peierls(geom, mp);  // cap 8, h in {1,2}, nested
      checked += rep.checked;
      violations += rep.violations;
      if (!rep.pass()) {
        r.pass = false;
        r.details.push_back("p=" + fmt(p) + " beta=" + fmt(beta) + ": " +
                            std::to_string(rep.violations) + " violations");
      }
    }
  r.summary = "3x3 free window, |gamma|<=8, h in {1,2}, 6 (beta,p) combos: " +
              std::to_string(checked) + " bounds checked, " +
              std::to_string(violations) + " violations";
  return r;
}

// --- 4: lowering a droplet interior drops the energy by the perimeter ------

std::set<std::pair<int, int>> random_droplet(const BoxGeometry& g, RngStream& r,
                                             int n_cells) {
  const int L = g.side();
  std::set<std::pair<int, int>> cells;
  cells.insert({1 + int(r.next_below(std::uint64_t(L))),
                1 + int(r.next_below(std::uint64_t(L)))});
  while (int(cells.size()) < n_cells) {
    std::vector<std::pair<int, int>> frontier;
    for (auto [cx, cy] : cells)
      for (auto [nx, ny] :
           {std::pair{cx + 1, cy}, {cx - 1, cy}, {cx, cy + 1}, {cx, cy - 1}})
        if (nx >= 1 && nx <= L && ny >= 1 && ny <= L && !cells.count({nx, ny}))
          frontier.push_back({nx, ny});
    if (frontier.empty()) break;
    cells.insert(frontier[std::size_t(r.next_below(frontier.size()))]);
  }
  return cells;
}

std::set<std::pair<int, int>> filled_hull(const std::set<std::pair<int, int>>& cells,
                                          int L) {
  const int side = L + 4;
  std::vector<std::uint8_t> open(std::size_t(side * side), 1);
  for (auto [x, y] : cells) open[std::size_t((y + 1) * side + (x + 1))] = 0;
  std::vector<std::uint8_t> seen(std::size_t(side * side), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    int cur = stack.back();
    stack.pop_back();
    int x = cur % side, y = cur / side;
    for (auto [nx, ny] : {std::pair{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}}) {
      if (nx < 0 || nx >= side || ny < 0 || ny >= side) continue;
      int nid = ny * side + nx;
      if (!open[std::size_t(nid)] || seen[std::size_t(nid)]) continue;
      seen[std::size_t(nid)] = 1;
      stack.push_back(nid);
    }
  }
  std::set<std::pair<int, int>> hull;
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      if (!seen[std::size_t(y * side + x)]) hull.insert({x - 1, y - 1});
  return hull;
}

// Energy difference summed bond by bond. Unchanged bonds contribute an exact
// 0.0 (identical floats subtracted), so the all-steepness-1 equality case
// survives in doubles where total_energy(a) - total_energy(b) would lose it
// to cancellation against the unchanged background.
double bondwise_drop(const HeightField& a, const HeightField& b,
                     const BoundaryCondition& bc, const ModelParams& mp) {
  const int L = a.geometry().side();
  auto h_at = [&](const HeightField& f, int x, int y) {
    if (x >= 1 && x <= L && y >= 1 && y <= L) return f.at(Site{x, y});
    return bc.value_at(Site{x, y});
  };
  double drop = 0.0;
  auto bond = [&](int x, int y, int nx, int ny) {
    int da = h_at(a, x, y) - h_at(a, nx, ny);
    int db = h_at(b, x, y) - h_at(b, nx, ny);
    if (da != db) drop += grad_power(da, mp) - grad_power(db, mp);
  };
  for (int y = 1; y <= L; ++y)
    for (int x = 1; x <= L; ++x) {
      bond(x, y, x + 1, y);
      bond(x, y, x, y + 1);
    }
  for (int y = 1; y <= L; ++y) bond(0, y, 1, y);
  for (int x = 1; x <= L; ++x) bond(x, 0, x, 1);
  return drop;
}

CriterionResult c4_shift_energy_law() {
  CriterionResult r;
  const int trials = 10000;
  BoxGeometry g(8);
  BoundaryCondition bc = BoundaryCondition::constant(0);
  RngStream rng(1, 0x61636334);
  long long violations = 0;
  int generated = 0;
  for (int trial = 0; trial < trials; ++trial) {
    int h = 1 + int(rng.next_below(3));
    auto hull = filled_hull(random_droplet(g, rng, 1 + int(rng.next_below(12))),
                            g.side());
    HeightField f(g, 0);
    for (int i = 0; i < g.site_count(); ++i) {
      Site s = g.site_at(i);
      if (hull.count({s.x, s.y}))
        f.set(s, h + int(rng.next_below(3)));
      else
        f.set(s, std::max(0, h - 1 - int(rng.next_below(3))));
    }
    const Contour* gamma = nullptr;
    std::vector<Contour> cs = extract_h_contours(f, bc, h);
    for (const Contour& c : cs) {
      std::set<std::pair<int, int>> in;
      for (Site s : c.interior()) in.insert({s.x, s.y});
      if (in == hull) gamma = &c;
    }
    if (!gamma || !is_h_contour(*gamma, f, bc, h)) continue;  // droplet merged
    ++generated;
    HeightField shifted = shift_down(f, *gamma).field;
    for (double p : kAllP) {
      ModelParams mp;
      mp.p = p;
      mp.beta = 1.0;
      mp.mode = ConstraintMode::Free;
      mp.n_plus = 1;
      mp.bc = bc;
      double drop = bondwise_drop(f, shifted, bc, mp);
      if (generated <= 50) {
        // pin the bond enumeration to the library Hamiltonian
        double ref = total_energy(f, mp) - total_energy(shifted, mp);
        double tol = mp.integer_p() ? 0.0 : 1e-9;
        if (std::fabs(drop - ref) > tol) {
          r.pass = false;
          r.summary = "bond enumeration disagrees with total_energy (p=" +
                      fmt(p) + ": " + fmt(drop) + " vs " + fmt(ref) + ")";
          return r;
        }
      }
      // no tolerance: terms are exact for integer gradients and p in
      // {1, 2, 3}, exact 1.0 per steepness-1 crossing at p = 1.5, and any
      // steeper crossing carries margin >= 2^1.5 - 2 ~ 0.83
      if (!(drop >= double(gamma->perimeter()))) {
        ++violations;
        if (r.details.size() < 5)
          r.details.push_back("trial " + std::to_string(trial) + " p=" + fmt(p) +
                              " drop=" + fmt(drop) + " perimeter=" +
                              std::to_string(gamma->perimeter()));
      }
    }
  }
  r.pass = violations == 0 && generated >= trials * 9 / 10;
  r.summary = std::to_string(generated) + "/" + std::to_string(trials) +
              " random (field, contour, level) triples x 4 p values: " +
              std::to_string(violations) + " violations of "
              "energy(shifted) <= energy - perimeter";
  return r;
}

// --- 5: threshold events are positively associated -------------------------

CriterionResult c5_fkg() {
  CriterionResult r;
  BoxGeometry geom(2);
  const int n_plus = 2;
  double worst = std::numeric_limits<double>::infinity();
  long long checked = 0;
  r.pass = true;
  for (double beta : {0.5, 2.0})
    for (double p : kAllP) {
      ModelParams mp = params_fc(p, beta, n_plus);
      ExactMeasure em = ExactMeasure::enumerate(geom, mp);
      std::vector<LabeledEvent> events;
      for (int y = 1; y <= 2; ++y)
        for (int x = 1; x <= 2; ++x)
          for (int level = 1; level <= n_plus; ++level)
            events.push_back(threshold_event(geom, Site{x, y}, level));
      CheckReport rep = verify_fkg(em, events, 1e-12);
      checked += rep.checked;
      worst = std::min(worst, rep.worst_slack);
      if (!rep.pass()) {
        r.pass = false;
        r.details.push_back("p=" + fmt(p) + " beta=" + fmt(beta) + ": " +
                            std::to_string(rep.violations) + " violations");
      }
    }
  r.summary = "2x2 n+=2, all threshold-event pairs, 8 (p,beta) combos: " +
              std::to_string(checked) + " pairs, min slack " + fmt(worst) +
              " (tol -1e-12)";
  return r;
}

// --- 6: ceiling measure dominates the floor measure with a constant ratio --

CriterionResult c6_sandwich() {
  CriterionResult r;
  BoxGeometry geom(2);
  long long checked = 0, violations = 0;
  r.pass = true;
  for (double beta : {0.7, 1.5})
    for (double p : {1.0, 2.0}) {
      ModelParams mp = params_fc(p, beta, 1);
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
      CheckReport rep = verify_sandwich(geom, mp, events, 1e-12);
      checked += rep.checked;
      violations += rep.violations;
      if (!rep.pass()) {
        r.pass = false;
        r.details.push_back("p=" + fmt(p) + " beta=" + fmt(beta) + ": " +
                            std::to_string(rep.violations) + " violations");
      }
    }
  r.summary = "2x2 n+=1, every state event, 4 (p,beta) combos: " +
              std::to_string(checked) +
              " domination + ratio checks (ratio tol 1e-12), " +
              std::to_string(violations) + " violations";
  return r;
}

// --- 7: the grand coupling preserves replica order --------------------------

CriterionResult c7_coupling() {
  CriterionResult r;
  BoxGeometry geom(8);
  long long violations = 0;
  r.pass = true;
  for (double p : kAllP) {
    CheckReport rep = verify_coupling_order(
        geom, params_fc(p, 1.0, 5), 10000,
        substream(1, {0x61636337, std::uint64_t(p * 1000)}));
    violations += rep.violations;
    if (!rep.pass()) {
      r.pass = false;
      r.details.push_back("p=" + fmt(p) + ": " + std::to_string(rep.violations) +
                          " order violations");
    }
  }
  r.summary = "8x8 n+=5, ordered triple, 1e4 sweeps, all four p: " +
              std::to_string(violations) + " order violations";
  return r;
}

// --- 8 & 9: free-measure tail rates on the proxy box -----------------------

// One profile serves both criteria: the level-splitting estimator measures
// pi-hat(eta_0 >= h) for h = 0..3 on the 64x64 proxy box at p=1, beta=1.5.
const std::vector<TailEstimate>& table1_profile() {
  static const std::vector<TailEstimate> profile = [] {
    TailOptions opt;
    opt.mode = ConstraintMode::Free;
    opt.master_seed = 1;
    opt.workers = 4;
    return estimate_tail_profile(1.0, 1.5, 3, 64, 30000, opt);
  }();
  return profile;
}

CriterionResult c8_tail_rate() {
  CriterionResult r;
  const double beta = 1.5;
  const std::vector<TailEstimate>& tails = table1_profile();
  std::vector<double> xs, ys;
  for (const TailEstimate& t : tails) {
    r.details.push_back("h=" + std::to_string(t.h) + " p_hat=" + fmt(t.p_hat) +
                        " [" + fmt(t.lower) + ", " + fmt(t.upper) + "]");
    if (t.h >= 1) {
      if (t.p_hat <= 0) {
        r.pass = false;
        r.summary = "tail estimate vanished at h=" + std::to_string(t.h) +
                    "; slope undefined";
        return r;
      }
      xs.push_back(t.h);
      ys.push_back(-std::log(t.p_hat));
    }
  }
  double n = double(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double lo = 0.8 * 4 * beta, hi = 1.2 * 4 * beta;
  r.pass = slope >= lo && slope <= hi;
  r.summary = "p=1 beta=1.5 M=64, slope of -log p_hat over h in {1,2,3} = " +
              fmt(slope) + ", budget [" + fmt(lo) + ", " + fmt(hi) + "]";
  return r;
}

CriterionResult c9_typical_height() {
  CriterionResult r;
  const std::vector<TailEstimate>& tails = table1_profile();
  auto estimator = [&](int h) {
    if (h < int(tails.size())) return tails[std::size_t(h)];
    TailEstimate zero;  // beyond the profile: the scan has already seen
    zero.h = h;         // two misses by here, but stay well defined
    zero.p_hat = 0.0;
    return zero;
  };
  int H = estimate_H(1.0, 1.5, 1000, estimator, CiPolicy::Point);
  const int expected = 1;  // floor(log(1000) / (4 * 1.5))
  r.pass = std::abs(H - expected) <= 1;
  r.summary = "estimate_H(1, 1.5, 1000) = " + std::to_string(H) +
              ", expected " + std::to_string(expected) +
              " +/- 1 (threshold 5*beta/L = " + fmt(5.0 * 1.5 / 1000) + ")";
  for (const TailEstimate& t : tails)
    r.details.push_back("h=" + std::to_string(t.h) + " p_hat=" + fmt(t.p_hat));
  return r;
}

// --- 10: hitting-time growth trend ------------------------------------------

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        if (w < v[i]) ++less;
        if (w == v[i]) ++equal;
      }
      rank[i] = less + (equal + 1) / 2;  // mid-rank for ties
    }
    return rank;
  };
  std::vector<double> rx = ranks(xs), ry = ranks(ys);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= double(rx.size());
  my /= double(ry.size());
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0 || dy == 0) return std::numeric_limits<double>::quiet_NaN();
  return num / std::sqrt(dx * dy);
}

CriterionResult c10_hitting_trend() {
  CriterionResult r;
  HittingOptions opt;
  opt.bc = BoundaryCondition::constant(0);
  opt.master_seed = 1;
  opt.workers = 4;
  HittingReport rep =
      hitting_time_experiment(2.0, 2.0, {4, 6, 8}, 0.5, 32, 1000000, opt);

  std::vector<double> Ls, medians;
  for (const HittingLevelSummary& s : rep.per_level) {
    Ls.push_back(double(s.L));
    medians.push_back(s.median_sweeps);
    r.details.push_back(
        "L=" + std::to_string(s.L) + " H=" + std::to_string(s.typical_height) +
        " target_level=" + std::to_string(s.target_level) + " median tau = " +
        fmt(s.median_sweeps) + " sweeps (censored " + std::to_string(s.censored) +
        "/" + std::to_string(s.n_seeds) + ")");
  }
  bool strictly_increasing = true;
  for (std::size_t i = 1; i < medians.size(); ++i)
    strictly_increasing = strictly_increasing && medians[i] > medians[i - 1];
  double rho = spearman(Ls, medians);
  r.pass = strictly_increasing && rho == 1.0;
  r.summary = "p=2 beta=2 a=0.5, medians over L in {4,6,8}: (" + fmt(medians[0]) +
              ", " + fmt(medians[1]) + ", " + fmt(medians[2]) +
              "), strictly increasing = " + (strictly_increasing ? "yes" : "no") +
              ", spearman = " + fmt(rho);
  if (!r.pass) {
    // Why this fails at these sizes: the height threshold 5*beta/L exceeds 1
    // for every L <= 12 at beta = 2, so the measured typical height is 0, the
    // target level collapses to 0, and every trajectory hits at time zero.
    // The growth trend needs sizes where the repulsion height is positive,
    // which is out of reach for an exact-window desk-scale run.
    for (long long L : {4, 6, 8})
      r.details.push_back("threshold 5*beta/L = " + fmt(10.0 / double(L)) +
                          " > 1 at L=" + std::to_string(L) +
                          " forces typical height 0");
    r.details.push_back(
        "every seed hits the level-0 target at t=0; the asymptotic trend is "
        "not measurable at these sizes");
  }
  return r;
}

// --- 11: the level-scale exponent schedule ----------------------------------

CriterionResult c11_d_schedule() {
  CriterionResult r;
  const std::vector<std::pair<double, double>> table = {
      {1.2, 1.2}, {1.9, 1.9}, {2.0, 2.0}, {2.1, 2.0}, {5.0, 2.0}};
  r.pass = true;
  for (auto [p, want] : table) {
    double got = d_of_p(p);
    if (got != want) {
      r.pass = false;
      r.details.push_back("d(" + fmt(p) + ") = " + fmt(got) + ", expected " +
                          fmt(want));
    }
  }
  r.summary = "d(p) exact at p in {1.2, 1.9, 2, 2.1, 5} -> (1.2, 1.9, 2, 2, 2)";
  return r;
}

// --- 12: byte-identical reruns through the CLI -------------------------------

int run_command(const std::string& cmd) {
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) {
      std::ifstream in(e.path(), std::ios::binary);
      std::ostringstream buf;
      buf << in.rdbuf();
      out[fs::relative(e.path(), dir).string()] = buf.str();
    }
  return out;
}

CriterionResult c12_determinism() {
  CriterionResult r;
  fs::path base = fs::temp_directory_path() / "psos_acceptance_c12";
  fs::remove_all(base);
  fs::create_directories(base);
  const std::string cli = std::string("\"") + PSOS_CLI_PATH + "\"";

  std::string verify_cmd = cli + " verify all --out \"" + (base / "v").string() +
                           "\" > /dev/null 2>&1";
  std::string hit_cmd = cli +
                        " experiment hitting-time --p 2 --beta 1.2 --L 3,4 "
                        "--a 0.5 --typical-height 2 --n-seeds 4 --t-max 2000 "
                        "--seed 9 --out \"" + (base / "h").string() +
                        "\" > /dev/null 2>&1";

  r.pass = true;
  for (const auto& [label, cmd, dir] :
       {std::tuple{std::string("verify all"), verify_cmd, base / "v"},
        std::tuple{std::string("experiment hitting-time"), hit_cmd, base / "h"}}) {
    if (run_command(cmd) != 0) {
      r.pass = false;
      r.details.push_back(label + ": first run failed");
      continue;
    }
    auto first = dir_contents(dir);
    if (run_command(cmd) != 0) {
      r.pass = false;
      r.details.push_back(label + ": second run failed");
      continue;
    }
    auto second = dir_contents(dir);
    bool same = first == second && !first.empty();
    if (!same) {
      r.pass = false;
      r.details.push_back(label + ": reruns differ");
    } else {
      r.details.push_back(label + ": " + std::to_string(first.size()) +
                          " files byte-identical across reruns");
    }
  }
  r.summary = std::string("CLI reruns with fixed seeds are byte-identical: ") +
              (r.pass ? "yes" : "no");
  fs::remove_all(base);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  std::map<int, std::function<CriterionResult()>> criteria = {
      {1, c1_detailed_balance}, {2, c2_sampler_vs_oracle}, {3, c3_peierls},
      {4, c4_shift_energy_law}, {5, c5_fkg},               {6, c6_sandwich},
      {7, c7_coupling},         {8, c8_tail_rate},         {9, c9_typical_height},
      {10, c10_hitting_trend},  {11, c11_d_schedule},      {12, c12_determinism}};

  std::vector<int> to_run;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      int n = std::atoi(argv[++i]);
      if (!criteria.count(n)) {
        std::cerr << "unknown criterion " << n << " (valid: 1..12)\n";
        return 2;
      }
      to_run.push_back(n);
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }
  if (to_run.empty())
    for (const auto& [n, fn] : criteria) to_run.push_back(n);

  bool all_pass = true;
  for (int n : to_run) {
    CriterionResult res = criteria.at(n)();
    all_pass = all_pass && res.pass;
    std::cout << "criterion " << n << ": " << (res.pass ? "PASS" : "FAIL")
              << "  " << res.summary << "\n";
    for (const std::string& d : res.details) std::cout << "    " << d << "\n";
    std::cout.flush();
  }
  return all_pass ? 0 : 1;
}
