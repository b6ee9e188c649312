#pragma once

// Measurement harness: tail rates on a proxy box, the typical-height criterion,
// height concentration, hitting times of raised-level target sets, correlation
// decay, and the ceiling-tail check. Everything here is a pure function of its
// inputs plus a master seed; per-(L, seed) work derives independent RNG streams
// so worker count never changes results.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "psos/gibbs.hpp"
#include "psos/lattice.hpp"
#include "psos/rng.hpp"

namespace psos {

// Droplet-cost exponent: p on (1, 2), 2 at and above 2.
double d_of_p(double p);

// Integer levels used by the hitting-time targets at height fraction a of the
// typical height H: the raised interface sits at level + 1 = ceil(a * H).
struct LevelSchedule {
  double p = 1.0;
  double a = 0.5;   // in (0, 1)
  double d_of_p = 2.0;
  int level = -1;   // ceil(a * H) - 1

  int target_level() const { return level + 1; }
};

LevelSchedule make_level_schedule(double p, double a, int typical_height);

// ---- one-point tails on a proxy box ----------------------------------------

struct TailOptions {
  ConstraintMode mode = ConstraintMode::Free;  // measure whose tail is probed
  int n_plus = 0;                              // only read in FloorCeiling mode
  int burn_in_sweeps = 400;
  int thin_sweeps = 2;
  std::uint64_t master_seed = 1;
  int workers = 1;
};

struct TailEstimate {
  int h = 0;
  double p_hat = 1.0;  // in [0, 1]
  double ci = 0.0;     // 95% confidence radius (Wilson, factors combined)
  double lower = 1.0;  // Wilson interval edges, clamped to [0, 1]
  double upper = 1.0;
  long long n_samples = 0;  // per level-splitting factor
  int box = 0;              // proxy box side
};

// One splitting factor P(eta_c >= k | eta_c >= k - 1) at the center site c of
// an M x M zero-BC box, sampled by a Glauber chain restricted to the
// conditioning event. k = 0 measures the unconditioned anchor P(eta_c >= 0)
// (identically 1 under a floor).
struct TailFactor {
  int k = 0;
  double f_hat = 1.0;
  double lower = 1.0;  // Wilson edges
  double upper = 1.0;
  long long n_samples = 0;
  long long successes = 0;
};

TailFactor estimate_tail_factor(double p, double beta, int k, int proxy_side,
                                long long n_samples, const TailOptions& opt = {});

// P(eta_c >= h) as the product of splitting factors. Factor streams depend
// only on (master seed, mode, box, k), so estimates for different h are
// consistent restrictions of one another.
TailEstimate estimate_infinite_tail(double p, double beta, int h, int proxy_side,
                                    long long n_samples, const TailOptions& opt = {});

// Tails for h = 0..h_max computing each factor once.
std::vector<TailEstimate> estimate_tail_profile(double p, double beta, int h_max,
                                                int proxy_side, long long n_samples,
                                                const TailOptions& opt = {});

// Default proxy box side for a target box of side L.
int default_proxy_side(long long L);

// ---- typical height ---------------------------------------------------------

enum class CiPolicy { Point, Lower, Upper };

// Largest h whose estimated tail meets 5 beta / L, scanning h upward until two
// consecutive misses; 0 when the threshold exceeds 1 (no estimator call) or
// when nothing qualifies. The estimator is consulted once per level.
int estimate_H(double p, double beta, long long L,
               const std::function<TailEstimate(int)>& tail_estimator,
               CiPolicy policy = CiPolicy::Point);

// ---- height concentration under the floor -----------------------------------

struct ConcentrationOptions {
  int typical_height = 0;     // H to offset from
  int upper_start_level = -1; // -1: typical_height + 4
  int burn_in_sweeps = 2000;
  int thin_sweeps = 4;
  double agreement_tol = 0.05;
  double epsilon = 0.1;       // report threshold = 1 - epsilon
  std::uint64_t master_seed = 1;
};

struct ConcentrationReport {
  int K = 0;
  double fraction = 0.0;   // mean share of sites with eta >= H - K, two starts pooled
  double threshold = 0.9;  // 1 - epsilon target
  int typical_height = 0;
  int level = 0;           // H - K
  double fraction_low_start = 0.0;
  double fraction_high_start = 0.0;
  bool agreed = false;     // extremal starts within agreement_tol; never report silently
  long long n_samples = 0;
};

// Floor-mode equilibrium fraction of sites at height >= H - K, sampled from
// all-zero and all-high starts; disagreement beyond tolerance flags the report
// as unmixed.
ConcentrationReport concentration_experiment(double p, double beta, int L, int K,
                                             long long n_samples,
                                             const ConcentrationOptions& opt = {});

// Share of sites of `field` with height >= level.
double fraction_at_least(const HeightField& field, int level);

// ---- hitting times of raised-level targets ----------------------------------

enum class HitStart { AllZero, RestrictedEquilibrium };
enum class HitTarget { HalfAbove, NineTenthsAbove };

struct HittingOptions {
  HitStart start = HitStart::AllZero;
  HitTarget target = HitTarget::NineTenthsAbove;
  double half_fraction = 0.5;         // target fractions, defaults per target set
  double nine_tenths_fraction = 0.9;
  int n_plus_override = -1;           // -1: max(1, ceil(log L))
  BoundaryCondition bc;               // zero unless configured
  // Typical height per L; null uses the 5 beta / L criterion with a seeded
  // default estimator on the default proxy box.
  std::function<int(long long)> typical_height;
  double area_constant = 0.25;        // restricted start forbids level-contours
                                      // with area > area_constant * L^(2 a^d)
  int restricted_burn_sweeps = 200;
  std::uint64_t master_seed = 1;
  int workers = 1;
};

struct HittingSeedRecord {
  long long L = 0;
  int seed = 0;
  std::uint64_t tau_steps = 0;
  double tau_sweeps = 0.0;
  bool censored = false;
};

struct HittingLevelSummary {
  long long L = 0;
  int n_plus = 0;
  int typical_height = 0;
  int target_level = 0;
  double fraction = 0.9;
  double median_sweeps = 0.0;  // censored records enter at T_max
  double q1_sweeps = 0.0;
  double q3_sweeps = 0.0;
  int censored = 0;
  int n_seeds = 0;
};

struct HittingReport {
  double p = 1.0, beta = 1.0, a = 0.5, d = 2.0;
  std::uint64_t t_max_sweeps = 0;
  std::string start, target;
  std::vector<HittingSeedRecord> records;     // (L, seed) order
  std::vector<HittingLevelSummary> per_level; // L ascending
  // log median_sweeps regressed on L^(a^d), over the ascending-L prefix with
  // an uncensored positive median; slope is NaN when fewer than 2 points.
  double slope = 0.0;
  bool fit_valid = false;
  int fit_points = 0;
  std::string config_hash;  // filled by the CLI layer
};

// Glauber hitting time of the configured target set on floor-ceiling boxes,
// fanned out over (L, seed) and folded deterministically.
HittingReport hitting_time_experiment(double p, double beta,
                                      const std::vector<long long>& L_list, double a,
                                      int n_seeds, std::uint64_t t_max_sweeps,
                                      const HittingOptions& opt = {});

// ---- correlation decay -------------------------------------------------------

enum class ProbeMethod { Exact, MonteCarlo };

struct CorrelationOptions {
  ProbeMethod method = ProbeMethod::MonteCarlo;
  ConstraintMode mode = ConstraintMode::Free;
  int n_plus = 0;
  long long n_samples = 20000;  // Monte Carlo only
  int burn_in_sweeps = 400;
  int thin_sweeps = 2;
  // Exact method only: 0 grows a certified window, which is exact but can
  // exhaust the frontier budget on wide boxes; a positive value fixes the
  // window to [-w, 1 + w] (floor modes clip at 0), adequate once the flushed
  // tail mass is far below the correlations of interest.
  int exact_halfwidth = 0;
  std::uint64_t master_seed = 1;
};

struct CorrelationPoint {
  int r = 0;
  double corr = 0.0;  // cov(1{eta_x >= 1}, 1{eta_{x+r e1} >= 1}), x the center
  double ci = 0.0;    // 95% radius; 0 for the exact method
};

struct DecayCurve {
  std::vector<CorrelationPoint> points;
  double rate = 0.0;  // -slope of log corr vs r over positive-corr points, r >= 1
  bool rate_valid = false;
};

// Truncated pair correlations of the level-1 indicator along a horizontal ray
// from the center of an M x M zero-BC box. Separations must stay in the bulk:
// r <= max(1, M / 4).
DecayCurve correlation_decay_probe(double p, double beta, int proxy_side,
                                   const std::vector<int>& separations,
                                   const CorrelationOptions& opt = {});

// ---- ceiling tail check -------------------------------------------------------

struct AppendixTailOptions {
  ConstraintMode mode = ConstraintMode::Floor;  // or FloorCeiling
  int ceiling = -1;    // FloorCeiling only; -1 uses n_plus
  int proxy_side = 0;  // 0: min(L, 5)
  double certify_tol = 1e-10;
};

struct AppendixTailReport {
  long long L = 0;
  int n_plus = 0;
  int level = 0;        // ceil(n_plus / 2)
  double estimate = 0.0;
  double delta = 0.0;   // certification drift of the estimate
  double bound = 0.0;   // L^-3
  bool satisfied = false;  // the observed comparison only, no asymptotic claim
  int proxy_side = 0;
};

// Certified center-site tail P(eta_c >= n_plus / 2) on a proxy box against the
// L^-3 reference. Requires n_plus >= ceil(log L).
AppendixTailReport appendix_tail_check(double p, double beta, long long L, int n_plus,
                                       const AppendixTailOptions& opt = {});

}  // namespace psos
