#pragma once

// Discrete-time Glauber heat-bath dynamics.
//
// One step: pick a site uniformly, resample its height from the single-site
// conditional given the four neighbors. All randomness in a step is captured
// by UpdateDraw(site, u); replicas driven by the same draws realize the grand
// monotone coupling (the new height is the conditional's u-quantile, and the
// conditional is stochastically monotone in the neighbor heights).

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "psos/gibbs.hpp"
#include "psos/rng.hpp"

namespace psos {

class ExactMeasure;  // oracle.hpp

struct UpdateDraw {
  int site_index = 0;  // row-major 0-based
  double u = 0.0;      // uniform in [0,1)
};

UpdateDraw draw_update(RngStream& rng, int site_count);

struct ChainState {
  HeightField field;
  ModelParams params;
  RngStream rng;
  std::uint64_t step = 0;

  int side() const { return field.geometry().side(); }
  int site_count() const { return field.geometry().site_count(); }
  double sweeps() const { return double(step) / double(site_count()); }
};

// Validates that `start` satisfies the mode constraint (throws constraint_error).
ChainState make_chain(HeightField start, const ModelParams& params, RngStream rng);

struct StepInfo {
  int site_index;
  int old_h;
  int new_h;
};

// Draw + apply one heat-bath update; advances the step counter.
StepInfo glauber_step(ChainState& chain);

// Apply a given draw (no RNG consumption, no step counter change). Used by the
// coupling and by tests that replay fixed draws.
StepInfo apply_update(HeightField& field, const UpdateDraw& d, const ModelParams& params,
                      std::vector<double>& scratch);

// L^2 steps = one sweep.
void glauber_sweep(ChainState& chain);

// One shared draw applied to every replica (same params, shared randomness).
// Preserves pointwise order of ordered replicas.
StepInfo grand_coupled_step(std::span<HeightField> replicas, const ModelParams& params,
                            const UpdateDraw& d, std::vector<double>& scratch);

// Occupation-fraction hitting target: satisfied when at least `fraction` of the
// sites have height >= level. Maintained incrementally across updates.
class FractionTarget {
 public:
  FractionTarget(int level, double fraction) : level_(level), fraction_(fraction) {}

  void reset(const HeightField& field);
  void on_update(int old_h, int new_h);
  bool satisfied() const { return count_ >= threshold_; }

  int level() const { return level_; }
  double fraction() const { return fraction_; }
  long long count() const { return count_; }
  long long threshold() const { return threshold_; }

 private:
  int level_;
  double fraction_;
  long long count_ = 0;
  long long threshold_ = 0;
};

struct HittingRecord {
  std::uint64_t tau_steps = 0;
  bool censored = false;
};

// Run until the target is satisfied (checked at t = 0 and after every step) or
// t_max_steps is reached; censored records carry tau = t_max_steps.
HittingRecord run_until(ChainState& chain, FractionTarget& target, std::uint64_t t_max_steps);
HittingRecord run_until(ChainState& chain, const std::function<bool(const HeightField&)>& pred,
                        std::uint64_t t_max_steps);

// Heat-bath proposal + rejection outside `member`. Reversible for the measure
// conditioned on the membership set; member(chain.field) must hold initially.
// Mixing degrades exponentially in the conditioning depth (the proposal must
// land inside the set by luck); use the clamped form below for single-site
// threshold restrictions.
StepInfo restricted_step(ChainState& chain,
                         const std::function<bool(const HeightField&)>& member);

// Exact heat bath for the measure conditioned on {eta_site >= min_h}: updates
// at `site` sample the local conditional clamped to [min_h, window top] (via
// CDF rescaling, so one uniform per step as everywhere else); other sites
// update unconditionally. The field must satisfy the restriction initially.
// Throws constraint_error if the clamped support is empty at update time.
StepInfo site_floor_restricted_step(ChainState& chain, Site site, int min_h);

struct TvEstimate {
  double tv = 0.0;
  double radius = 0.0;  // bootstrap half-width (1.96 sigma)
  int n_runs = 0;
};

// TV between the time-t law (empirical over n_runs independent chains) and the
// exact measure. The oracle must enumerate the same box/window the chain moves in.
TvEstimate tv_distance_to_equilibrium(const HeightField& start, const ModelParams& params,
                                      std::uint64_t t_steps, int n_runs,
                                      const ExactMeasure& oracle, RngStream seed_stream);

// TV between the single-trajectory occupation law over `sweeps` sweeps and the
// exact measure (every post-update state counted once).
double occupation_tv(ChainState& chain, const ExactMeasure& oracle, std::uint64_t sweeps);

}  // namespace psos
