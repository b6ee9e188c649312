#pragma once

// Exact window-truncated Gibbs computations for events that factor across
// sites as per-site height ranges, evaluated by sweeping the box row by row
// with a one-row frontier. The frontier stores span^side states instead of
// the span^(side^2) full configurations of the mixed-radix oracle, so wide
// windows (needed to certify free-measure probabilities) stay exact; the
// trade-off is that only product events are expressible.

#include <cstdint>
#include <limits>
#include <vector>

#include "psos/gibbs.hpp"
#include "psos/oracle.hpp"

namespace psos {

// Inclusive height range for one site; defaults place no constraint.
struct SiteRange {
  int lo = std::numeric_limits<int>::min();
  int hi = std::numeric_limits<int>::max();
};

class FrontierMeasure {
 public:
  // Window/mode consistency matches ExactMeasure::enumerate. The cap bounds
  // the frontier table (span^side entries), not the full state space.
  FrontierMeasure(const BoxGeometry& geometry, const ModelParams& params, EnumWindow window,
                  std::uint64_t frontier_cap = std::uint64_t(1) << 27);

  double log_partition() const { return log_z_; }

  // log of the unnormalized mass of the product event (ranges indexed like
  // sites, missing entries unconstrained); -infinity when the event is empty.
  double log_event_mass(const std::vector<SiteRange>& ranges) const;

  double event_probability(const std::vector<SiteRange>& ranges) const;
  double one_point_tail(Site site, int h) const;

  const EnumWindow& window() const { return window_; }
  const BoxGeometry& geometry() const { return geom_; }

 private:
  double sweep(const std::vector<SiteRange>& ranges) const;

  BoxGeometry geom_;
  ModelParams params_;
  EnumWindow window_;
  double log_z_ = 0;
};

struct CertifiedProbability {
  double value = 0;
  double delta = 0;   // |value(window grown by 1) - value(window)| at acceptance
  EnumWindow window;  // the window that produced `value`
};

// Probability of the product event under windows grown until two consecutive
// evaluations agree within tol (free mode grows both ends, floor mode the
// top; a floor-ceiling window is already the whole space and returns delta 0).
// Throws resource_error when agreement is not reached before the growth cap.
CertifiedProbability certified_event_probability(const BoxGeometry& geometry,
                                                 const ModelParams& params,
                                                 const std::vector<SiteRange>& ranges,
                                                 double tol = 1e-10);

// Certified P(A | B) where ranges_ab already encodes the intersection A cap B.
// Numerator and denominator are evaluated on one common window, grown until
// the ratio stabilizes below tol. Zero-mass B is a usage error.
CertifiedProbability certified_conditional_probability(const BoxGeometry& geometry,
                                                       const ModelParams& params,
                                                       const std::vector<SiteRange>& ranges_ab,
                                                       const std::vector<SiteRange>& ranges_cond,
                                                       double tol = 1e-10);

}  // namespace psos
