#include "psos/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace psos {

namespace {

bool is_integer_exponent(double p) { return p == std::floor(p) && p >= 1.0 && p <= 64.0; }

std::int64_t ipow(std::int64_t base, int e) {
  std::int64_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

// Pairwise (tree) reduction to keep rounding error O(log n) for fractional p.
double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

}  // namespace

void ModelParams::validate() const {
  if (!(p >= 1.0)) throw std::invalid_argument("ModelParams.p: must be >= 1");
  if (!(beta > 0.0)) throw std::invalid_argument("ModelParams.beta: must be > 0");
  if (mode == ConstraintMode::FloorCeiling && n_plus < 1)
    throw std::invalid_argument("ModelParams.n_plus: must be >= 1 in floor_ceiling mode");
}

bool ModelParams::integer_p() const { return is_integer_exponent(p); }

int ModelParams::free_window_halfwidth() const {
  return static_cast<int>(std::ceil(std::pow(35.0 / beta, 1.0 / p))) + 1;
}

bool heights_satisfy(const HeightField& field, const ModelParams& params) {
  if (params.mode == ConstraintMode::Free) return true;
  for (int h : field.data()) {
    if (h < 0) return false;
    if (params.mode == ConstraintMode::FloorCeiling && h > params.n_plus) return false;
  }
  return true;
}

double grad_power(int d, const ModelParams& params) {
  std::int64_t a = d < 0 ? -std::int64_t(d) : std::int64_t(d);
  if (params.integer_p()) return double(ipow(a, int(params.p)));
  return std::pow(double(a), params.p);
}

// Shared bond walk: visit each bond with >= 1 endpoint in the box exactly once,
// as (value at u, value at v, multiplicity). East/south neighbors cover the
// interior bonds; boundary bonds are emitted from their in-box endpoint.
template <typename F>
static void for_each_bond(const HeightField& field, const ModelParams& params, F&& f) {
  const BoxGeometry& g = field.geometry();
  const int L = g.side();
  const double mult_in = params.bond_double_count ? 2.0 : 1.0;
  for (int y = 1; y <= L; ++y) {
    for (int x = 1; x <= L; ++x) {
      const int h = field.at({x, y});
      // interior bonds owned by this site: east, south
      if (x < L) f(h, field.at({x + 1, y}), mult_in);
      if (y < L) f(h, field.at({x, y + 1}), mult_in);
      // bonds to the boundary ring
      if (x == 1) f(h, params.bc.value_at({0, y}), 1.0);
      if (x == L) f(h, params.bc.value_at({L + 1, y}), 1.0);
      if (y == 1) f(h, params.bc.value_at({x, 0}), 1.0);
      if (y == L) f(h, params.bc.value_at({x, L + 1}), 1.0);
    }
  }
}

double total_energy(const HeightField& field, const ModelParams& params) {
  if (!heights_satisfy(field, params))
    throw constraint_error("total_energy: field violates the mode constraint");
  if (params.integer_p()) {
    const int pe = int(params.p);
    std::int64_t acc = 0;
    for_each_bond(field, params, [&](int a, int b, double m) {
      std::int64_t d = a > b ? a - b : b - a;
      acc += (m == 2.0 ? 2 : 1) * ipow(d, pe);  // m is exactly 1.0 or 2.0
    });
    return double(acc);
  }
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(2 * field.geometry().site_count() + 4 * field.geometry().side()));
  for_each_bond(field, params, [&](int a, int b, double m) {
    terms.push_back(m * std::pow(double(a > b ? a - b : b - a), params.p));
  });
  return pairwise_sum(terms, 0, terms.size());
}

double incident_energy(const HeightField& field, Site x, int h, const ModelParams& params) {
  const BoxGeometry& g = field.geometry();
  const double mult_in = params.bond_double_count ? 2.0 : 1.0;
  if (params.integer_p()) {
    const int pe = int(params.p);
    std::int64_t acc2 = 0;  // accumulated with single-count weights x2 for interior
    std::int64_t acc1 = 0;
    for (const Neighbor& nb : g.neighbors(x)) {
      int v = nb.kind == NeighborKind::Interior ? field.at(nb.site) : params.bc.value_at(nb.site);
      std::int64_t d = h > v ? h - v : v - h;
      (nb.kind == NeighborKind::Interior ? acc2 : acc1) += ipow(d, pe);
    }
    return double(acc1) + mult_in * double(acc2);
  }
  double s = 0;
  for (const Neighbor& nb : g.neighbors(x)) {
    int v = nb.kind == NeighborKind::Interior ? field.at(nb.site) : params.bc.value_at(nb.site);
    double m = nb.kind == NeighborKind::Interior ? mult_in : 1.0;
    s += m * std::pow(double(h > v ? h - v : v - h), params.p);
  }
  return s;
}

double energy_delta(const HeightField& field, Site x, int new_h, const ModelParams& params) {
  return incident_energy(field, x, new_h, params) - incident_energy(field, x, field.at(x), params);
}

double log_gibbs_weight(const HeightField& field, const ModelParams& params) {
  return -params.beta * total_energy(field, params);
}

double gibbs_weight(const HeightField& field, const ModelParams& params) {
  return std::exp(log_gibbs_weight(field, params));
}

double LocalDistribution::cdf(int h) const {
  if (h < lo) return 0.0;
  if (h >= hi()) return 1.0;
  double c = 0;
  for (int i = 0; i <= h - lo; ++i) c += probs[static_cast<std::size_t>(i)];
  return c;
}

int LocalDistribution::quantile(double u) const {
  double c = 0;
  const int n = static_cast<int>(probs.size());
  for (int i = 0; i < n; ++i) {
    c += probs[static_cast<std::size_t>(i)];
    if (u < c) return lo + i;
  }
  return lo + n - 1;  // u at (or rounding past) the top of the CDF
}

std::pair<int, int> local_support(const HeightField& field, Site x, const ModelParams& params) {
  if (params.mode == ConstraintMode::FloorCeiling) return {0, params.n_plus};
  const BoxGeometry& g = field.geometry();
  int lo = 0, hi = 0;
  bool first = true;
  for (const Neighbor& nb : g.neighbors(x)) {
    int v = nb.kind == NeighborKind::Interior ? field.at(nb.site) : params.bc.value_at(nb.site);
    lo = first ? v : std::min(lo, v);
    hi = first ? v : std::max(hi, v);
    first = false;
  }
  const int W = params.free_window_halfwidth();
  if (params.mode == ConstraintMode::Floor) return {0, std::max(0, hi) + W};
  return {lo - W, hi + W};
}

// Shared core: normalized conditional probabilities over the support window,
// written into `out`. Returns the window's low end.
static int local_probs(const HeightField& field, Site x, const ModelParams& params,
                       std::vector<double>& out) {
  auto [lo, hi] = local_support(field, x, params);
  out.resize(static_cast<std::size_t>(hi - lo + 1));

  // log-weights, then log-sum-exp; weights 45+ nats under the mode are flushed
  // to zero (bounded by the same budget as the support truncation itself).
  double max_lw = -1e300;
  for (int h = lo; h <= hi; ++h) {
    double lw = -params.beta * incident_energy(field, x, h, params);
    out[static_cast<std::size_t>(h - lo)] = lw;
    max_lw = std::max(max_lw, lw);
  }
  double z = 0;
  for (double& w : out) {
    w = w - max_lw < -45.0 ? 0.0 : std::exp(w - max_lw);
    z += w;
  }
  for (double& w : out) w /= z;
  return lo;
}

LocalDistribution heat_bath_distribution(const HeightField& field, Site x,
                                         const ModelParams& params) {
  LocalDistribution dist;
  dist.lo = local_probs(field, x, params, dist.probs);
  return dist;
}

int heat_bath_sample(const HeightField& field, Site x, double u, const ModelParams& params,
                     std::vector<double>& scratch) {
  int lo = local_probs(field, x, params, scratch);
  double c = 0;
  const int n = static_cast<int>(scratch.size());
  for (int i = 0; i < n; ++i) {
    c += scratch[static_cast<std::size_t>(i)];
    if (u < c) return lo + i;
  }
  return lo + n - 1;
}

}  // namespace psos
