#pragma once

// Exhaustive-enumeration oracle for small boxes.
//
// Enumerates every height field with per-site values in a window [lo, hi]
// (the window IS the state space: floor/ceiling modes use their natural
// windows, the free measure is approximated by a wide window certified
// separately). Log-weights are exact up to rounding; probabilities are
// computed as exp(logw - logZ) and summed in enumeration order.

#include <cstdint>
#include <functional>
#include <vector>

#include "psos/gibbs.hpp"

namespace psos {

struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnumWindow {
  int lo = 0;
  int hi = 0;
  int size() const { return hi - lo + 1; }
};

// Mixed-radix indexing of height fields: state index = sum_k (h_k - lo) * s^k
// over row-major site index k, radix s = window size.
class StateIndexer {
 public:
  StateIndexer(int n_sites, EnumWindow w);

  std::uint64_t count() const { return count_; }
  EnumWindow window() const { return window_; }
  int sites() const { return n_sites_; }

  std::uint64_t encode(const std::vector<int>& heights) const;
  void decode(std::uint64_t idx, std::vector<int>& heights) const;

  // Place value of site k (for incremental index updates: idx += (new-old)*place(k)).
  std::uint64_t place(int k) const { return places_[static_cast<std::size_t>(k)]; }

 private:
  int n_sites_;
  EnumWindow window_;
  std::uint64_t count_;
  std::vector<std::uint64_t> places_;
};

using StatePredicate = std::function<bool(const HeightField&)>;

class ExactMeasure {
 public:
  // Enumerates all window^sites states; refuses (resource_error) above `cap`.
  // The window must agree with the mode: FloorCeiling requires exactly
  // [0, n_plus]; Floor requires lo = 0; Free any window.
  static ExactMeasure enumerate(const BoxGeometry& geom, const ModelParams& params,
                                EnumWindow window, std::uint64_t cap = 100'000'000);

  // Mode-default window for FloorCeiling ([0, n_plus]).
  static ExactMeasure enumerate(const BoxGeometry& geom, const ModelParams& params,
                                std::uint64_t cap = 100'000'000);

  const BoxGeometry& geometry() const { return geom_; }
  const ModelParams& params() const { return params_; }
  const StateIndexer& indexer() const { return indexer_; }
  std::uint64_t state_count() const { return indexer_.count(); }
  double log_partition() const { return log_z_; }

  double log_weight(std::uint64_t idx) const { return log_w_[static_cast<std::size_t>(idx)]; }
  double probability_of_index(std::uint64_t idx) const;
  // 0 for states outside the window.
  double probability(const HeightField& state) const;

  double event_probability(const StatePredicate& pred) const;
  // P(A | B); zero-mass B is a usage error (invalid_argument).
  double conditional_probability(const StatePredicate& a, const StatePredicate& b) const;
  // Measure conditioned on an event (reweighted on the same state space).
  ExactMeasure conditional(const StatePredicate& pred) const;

  // pi(eta_site >= h): 1 when h <= window.lo, 0 when h > window.hi.
  double one_point_tail(Site site, int h) const;

  // Full probability vector (indexer order).
  std::vector<double> probabilities() const;

 private:
  ExactMeasure(BoxGeometry geom, ModelParams params, StateIndexer idx)
      : geom_(geom), params_(std::move(params)), indexer_(idx) {}

  BoxGeometry geom_;
  ModelParams params_;
  StateIndexer indexer_;
  double log_z_ = 0;
  std::vector<double> log_w_;
};

// Streaming form without storing weights: log of the unnormalized mass of an
// event (log-sum-exp of log-weights over states satisfying pred), enumerated
// depth-first in row-major order. P(A) = exp(log_event_mass(A) - log_event_mass(all)).
double log_event_mass(const BoxGeometry& geom, const ModelParams& params, EnumWindow window,
                      const StatePredicate& pred, std::uint64_t cap = 100'000'000);

}  // namespace psos
