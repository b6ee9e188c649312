#pragma once

// Gradient Hamiltonian H(eta) = sum_bonds |grad eta|^p and the single-site
// heat-bath conditional it induces.
//
// Bond convention: each unordered nearest-neighbor bond with at least one
// endpoint in the box contributes once (bonds between two boundary sites do
// not exist). Setting bond_double_count doubles interior bonds (both endpoints
// in the box) while bonds to the boundary ring keep multiplicity 1, matching
// the sum-over-ordered-pairs form of the Hamiltonian. Rates quoted elsewhere
// in the project assume the single-count default.

#include <stdexcept>
#include <vector>

#include "psos/lattice.hpp"

namespace psos {

struct constraint_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ConstraintMode { Free, Floor, FloorCeiling };

struct ModelParams {
  double p = 1.0;
  double beta = 1.0;
  ConstraintMode mode = ConstraintMode::FloorCeiling;
  int n_plus = 1;  // ceiling height, FloorCeiling mode only
  BoundaryCondition bc;
  bool bond_double_count = false;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool integer_p() const;

  // Half-width of the truncated single-site support in Free/Floor mode:
  // W = ceil((35/beta)^(1/p)) + 1, so discarded mass is below e^{-35} per side.
  int free_window_halfwidth() const;
};

// True iff every height respects the mode constraint (floor and/or ceiling).
bool heights_satisfy(const HeightField& field, const ModelParams& params);

// |d|^p with an exact integer path for integer p.
double grad_power(int d, const ModelParams& params);

// Total energy; exact (integer-valued) when p is an integer. Throws
// constraint_error if the field violates the mode constraint.
double total_energy(const HeightField& field, const ModelParams& params);

// H(eta with eta_x := new_h) - H(eta); touches only the four incident bonds.
double energy_delta(const HeightField& field, Site x, int new_h, const ModelParams& params);

// exp(-beta H) and its log. The log form is the one to use in sums.
double log_gibbs_weight(const HeightField& field, const ModelParams& params);
double gibbs_weight(const HeightField& field, const ModelParams& params);

// Normalized single-site conditional on a contiguous support window.
struct LocalDistribution {
  int lo = 0;                  // support is lo .. lo + probs.size() - 1
  std::vector<double> probs;   // normalized

  int hi() const { return lo + static_cast<int>(probs.size()) - 1; }

  // P(height <= h); 0 below the window, 1 above.
  double cdf(int h) const;

  // Inverse CDF: smallest h with u < cdf(h). Drives the monotone coupling.
  int quantile(double u) const;
};

// Energy carried by the four bonds incident to x when x holds height h.
double incident_energy(const HeightField& field, Site x, int h, const ModelParams& params);

// Support window of the heat-bath conditional at x (by mode and neighbors).
// FloorCeiling: [0, n_plus]; Floor: [0, max(0, max neighbor) + W];
// Free: [min neighbor - W, max neighbor + W].
std::pair<int, int> local_support(const HeightField& field, Site x, const ModelParams& params);

// Heat-bath conditional at x given the current neighbor heights:
// P(h) proportional to exp(-beta sum_y m_y |h - xi_y|^p) over the support window.
// Normalized by log-sum-exp (weights more than 45 nats below the mode are
// flushed to zero; that is under the truncation certificate's budget);
// probabilities sum to 1 within 1e-12.
LocalDistribution heat_bath_distribution(const HeightField& field, Site x,
                                         const ModelParams& params);

// The u-quantile of heat_bath_distribution(field, x): one heat-bath resample.
// Same arithmetic as the LocalDistribution path; `scratch` avoids allocation.
int heat_bath_sample(const HeightField& field, Site x, double u, const ModelParams& params,
                     std::vector<double>& scratch);

}  // namespace psos
