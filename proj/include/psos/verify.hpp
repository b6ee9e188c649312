#pragma once

// Exact finite-box verification of the model's structural inequalities:
// contour bounds, FKG positive association, the floor-vs-ceiling sandwich,
// reversibility of the heat-bath kernel, and order preservation of the grand
// coupling. The bounds are theorems, so a violation beyond the stated
// tolerance is an implementation bug, not statistical noise. The bound_scale
// knobs exist for negative controls in tests (tighten a bound until the check
// fails, proving the harness can fail).

#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "psos/contour.hpp"
#include "psos/freewindow.hpp"
#include "psos/oracle.hpp"
#include "psos/rng.hpp"

namespace psos {

struct CheckItem {
  std::string label;
  double value = 0.0;
  double bound = 0.0;
  double slack = 0.0;  // nonnegative when the comparison holds
  bool pass = true;
};

struct CheckReport {
  std::string name;
  nlohmann::ordered_json inputs;
  double tolerance = 0.0;  // numerical round-off allowance on slacks
  long long checked = 0;
  long long violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::vector<CheckItem> items;

  bool pass() const { return violations == 0; }
  // pass iff slack >= -tolerance; updates the counters and worst_slack
  void add(std::string label, double value, double bound, double slack);
  nlohmann::ordered_json to_json(
      std::size_t max_items = std::numeric_limits<std::size_t>::max()) const;
};

struct PeierlsOptions {
  int perimeter_cap = 8;
  std::vector<int> levels = {1, 2};
  bool nested = true;        // also P(C_{g,h} | C_{g',h'}) for interior(g) in interior(g'), h > h'
  double bound_scale = 1.0;  // scales the e^{-beta |gamma|} bound (negative controls)
  double certify_tol = 1e-10;
  // Round-off allowance: at p = 1 the conditional bound is an exact equality
  // for pairs with h = h' + 1 whose boundary constraints coincide (the shift
  // is then a weight-preserving bijection onto the conditioning event), so
  // computed slacks scatter around zero at the 1e-17 scale. Any genuine
  // violation would appear at the e^{-beta |gamma|} scale instead.
  double tol = 1e-12;
};

// Free-mode contour bound on certified windows: for every contour gamma that
// fits in the box (perimeter <= cap) and every level h,
//   P(heights >= h on the inner boundary, <= h-1 on the outer)
//     <= bound_scale * e^{-beta |gamma|},
// and the conditional form for nested pairs. Ring cells of the outer boundary
// are fixed by the BC; if the BC conflicts, the event is empty and passes with
// probability zero.
CheckReport verify_peierls(const BoxGeometry& geom, const ModelParams& params,
                           const PeierlsOptions& opt = {});

struct LabeledEvent {
  std::string label;
  StatePredicate pred;
  bool increasing_by_construction = false;  // skip the exhaustive increasing scan
};

// Threshold event {eta_site >= level} (increasing by construction).
LabeledEvent threshold_event(const BoxGeometry& geom, Site site, int level);

// All unordered pairs (E, F) from events, self-pairs included:
//   P(E and F) - bound_scale * P(E) P(F) >= -tol.
// Events without the by-construction certificate are first verified increasing
// by an exhaustive scan over comparable state pairs (resource_error above
// pair_scan_cap states; a non-increasing event is an invalid_argument).
CheckReport verify_fkg(const ExactMeasure& measure, const std::vector<LabeledEvent>& events,
                       double tol = 1e-12, double bound_scale = 1.0,
                       std::uint64_t pair_scan_cap = 4096);

// Floor vs floor+ceiling at the same (p, beta, bc): for every event A inside
// {0..n_plus}^Lambda, the floor measure is dominated, pi_bar(A) <= pi(A)
// as computed (no tolerance), and the ratio identity
//   pi(A) / pi_bar(A) = 1 / pi_bar(eta <= n_plus)
// holds within ratio_tol. params must be FloorCeiling mode; the floor measure
// is enumerated on a window grown until every reported value is stable below
// certify_tol. Zero-mass events check pi(A) = 0 instead of the ratio.
CheckReport verify_sandwich(const BoxGeometry& geom, const ModelParams& params,
                            const std::vector<LabeledEvent>& events, double ratio_tol = 1e-12,
                            double certify_tol = 1e-10);

// Exact one-step heat-bath kernel on the FloorCeiling state space:
//   max over state pairs |pi(x) P(x,y) - pi(y) P(y,x)| <= tol.
// One item (the max residual); checked counts the ordered pairs with flow.
CheckReport verify_detailed_balance(const BoxGeometry& geom, const ModelParams& params,
                                    double tol = 1e-12);

// Grand coupling order preservation: bottom (all 0) <= middle (uniform random)
// <= top (all n_plus) under shared draws for `sweeps` sweeps, FloorCeiling
// mode. Order is checked at the updated site after every step; the report
// counts violations (must be zero).
CheckReport verify_coupling_order(const BoxGeometry& geom, const ModelParams& params, int sweeps,
                                  RngStream rng);

}  // namespace psos
