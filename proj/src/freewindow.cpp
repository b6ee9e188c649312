#include "psos/freewindow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace psos {

namespace {

// exp(-beta * mult * d^p) for d = 0..max_d; values below exp(-700) flush to
// zero (their relative contribution is far under the certification tolerance).
std::vector<double> weight_table(double beta, double mult, double p, int max_d) {
  std::vector<double> t(std::size_t(max_d) + 1);
  for (int d = 0; d <= max_d; ++d) {
    double e = beta * mult * std::pow(double(d), p);
    t[std::size_t(d)] = e > 700.0 ? 0.0 : std::exp(-e);
  }
  return t;
}

// widen [amin, amax] to cover every finite constraint edge
void widen_anchors(const std::vector<SiteRange>& ranges, int& amin, int& amax) {
  for (const SiteRange& r : ranges) {
    if (r.lo != std::numeric_limits<int>::min()) {
      amin = std::min(amin, r.lo);
      amax = std::max(amax, r.lo);
    }
    if (r.hi != std::numeric_limits<int>::max()) {
      amin = std::min(amin, r.hi);
      amax = std::max(amax, r.hi);
    }
  }
}

void widen_anchors_bc(const BoxGeometry& geometry, const ModelParams& params, int& amin,
                      int& amax) {
  for (Site s : geometry.outer_boundary()) {
    amin = std::min(amin, params.bc.value_at(s));
    amax = std::max(amax, params.bc.value_at(s));
  }
}

// a block excursion k levels past the anchors costs at least 4*beta*k^p, so
// this halfwidth pushes the truncation error well under the tolerance
int excursion_halfwidth(const ModelParams& params) {
  return int(std::ceil(std::pow(45.0 / (4.0 * params.beta), 1.0 / params.p))) + 1;
}

}  // namespace

FrontierMeasure::FrontierMeasure(const BoxGeometry& geometry, const ModelParams& params,
                                 EnumWindow window, std::uint64_t frontier_cap)
    : geom_(geometry), params_(params), window_(window) {
  params_.validate();
  if (window.hi < window.lo) throw std::invalid_argument("FrontierMeasure: empty window");
  switch (params_.mode) {
    case ConstraintMode::FloorCeiling:
      if (window.lo != 0 || window.hi != params_.n_plus)
        throw std::invalid_argument(
            "FrontierMeasure: FloorCeiling mode enumerates exactly [0, n_plus]");
      break;
    case ConstraintMode::Floor:
      if (window.lo != 0)
        throw std::invalid_argument("FrontierMeasure: Floor mode requires window.lo = 0");
      break;
    case ConstraintMode::Free:
      break;
  }
  std::uint64_t states = 1;
  for (int i = 0; i < geom_.side(); ++i) {
    states *= std::uint64_t(window.size());
    if (states > frontier_cap)
      throw resource_error("FrontierMeasure: frontier needs " +
                           std::to_string(double(window.size())) + "^" +
                           std::to_string(geom_.side()) + " states, cap is " +
                           std::to_string(frontier_cap));
  }
  log_z_ = sweep({});
  if (!std::isfinite(log_z_))
    throw std::invalid_argument("FrontierMeasure: window carries no mass");
}

double FrontierMeasure::sweep(const std::vector<SiteRange>& ranges) const {
  const int L = geom_.side();
  const int S = window_.size();
  const int n = geom_.site_count();

  // per-site clamped offset ranges within the window
  std::vector<int> lo(std::size_t(n), 0), hi(std::size_t(n), S - 1);
  for (int j = 0; j < n; ++j) {
    if (j < int(ranges.size())) {
      const SiteRange& r = ranges[std::size_t(j)];
      if (r.lo > window_.lo) lo[std::size_t(j)] = r.lo - window_.lo;
      if (r.hi < window_.hi) hi[std::size_t(j)] = r.hi - window_.lo;
    }
    if (lo[std::size_t(j)] > hi[std::size_t(j)])
      return -std::numeric_limits<double>::infinity();
  }

  // bond weight tables; boundary bonds are never doubled
  int max_bc_d = 0;
  for (Site s : geom_.outer_boundary()) {
    int phi = params_.bc.value_at(s);
    max_bc_d = std::max({max_bc_d, std::abs(window_.lo - phi), std::abs(window_.hi - phi)});
  }
  const std::vector<double> w_int =
      weight_table(params_.beta, params_.bond_double_count ? 2.0 : 1.0, params_.p, S - 1);
  const std::vector<double> w_bc = weight_table(params_.beta, 1.0, params_.p, max_bc_d);

  std::uint64_t n_states = 1;
  for (int i = 0; i < L; ++i) n_states *= std::uint64_t(S);

  std::vector<double> dp(n_states, 0.0), next(n_states, 0.0);
  dp[0] = 1.0;
  double log_scale = 0.0;
  std::vector<double> site_bc(std::size_t(S), 1.0);  // ring-bond factor per value

  for (int j = 0; j < n; ++j) {
    const Site s = geom_.site_at(j);
    const int c = s.x - 1;  // column slot written by this site
    std::uint64_t place_c = 1;
    for (int k = 0; k < c; ++k) place_c *= std::uint64_t(S);
    const std::uint64_t place_w = c > 0 ? place_c / std::uint64_t(S) : 0;
    const bool has_west = s.x > 1;
    const bool has_south = s.y > 1;

    for (int v = lo[std::size_t(j)]; v <= hi[std::size_t(j)]; ++v) {
      double f = 1.0;
      int h = window_.lo + v;
      if (s.x == 1) f *= w_bc[std::size_t(std::abs(h - params_.bc.value_at({0, s.y})))];
      if (s.x == L) f *= w_bc[std::size_t(std::abs(h - params_.bc.value_at({L + 1, s.y})))];
      if (s.y == 1) f *= w_bc[std::size_t(std::abs(h - params_.bc.value_at({s.x, 0})))];
      if (s.y == L) f *= w_bc[std::size_t(std::abs(h - params_.bc.value_at({s.x, L + 1})))];
      site_bc[std::size_t(v)] = f;
    }

    std::fill(next.begin(), next.end(), 0.0);
    for (std::uint64_t st = 0; st < n_states; ++st) {
      double m = dp[st];
      if (m == 0.0) continue;
      const int old_c = int((st / place_c) % std::uint64_t(S));
      const std::uint64_t base = st - std::uint64_t(old_c) * place_c;
      const int west = has_west ? int((st / place_w) % std::uint64_t(S)) : 0;
      for (int v = lo[std::size_t(j)]; v <= hi[std::size_t(j)]; ++v) {
        double f = site_bc[std::size_t(v)];
        if (has_west) f *= w_int[std::size_t(std::abs(v - west))];
        if (has_south) f *= w_int[std::size_t(std::abs(v - old_c))];
        next[base + std::uint64_t(v) * place_c] += m * f;
      }
    }

    double peak = 0.0;
    for (double x : next) peak = std::max(peak, x);
    if (peak == 0.0) return -std::numeric_limits<double>::infinity();
    log_scale += std::log(peak);
    for (std::uint64_t st = 0; st < n_states; ++st) dp[st] = next[st] / peak;
  }

  double total = 0.0;
  for (double x : dp) total += x;
  return std::log(total) + log_scale;
}

double FrontierMeasure::log_event_mass(const std::vector<SiteRange>& ranges) const {
  return sweep(ranges);
}

double FrontierMeasure::event_probability(const std::vector<SiteRange>& ranges) const {
  double lm = log_event_mass(ranges);
  return std::isfinite(lm) ? std::exp(lm - log_z_) : 0.0;
}

double FrontierMeasure::one_point_tail(Site site, int h) const {
  if (h <= window_.lo) return 1.0;
  if (h > window_.hi) return 0.0;
  std::vector<SiteRange> ranges(std::size_t(geom_.site_count()));
  ranges[std::size_t(geom_.index_of(site))].lo = h;
  return event_probability(ranges);
}

CertifiedProbability certified_event_probability(const BoxGeometry& geometry,
                                                 const ModelParams& params,
                                                 const std::vector<SiteRange>& ranges,
                                                 double tol) {
  params.validate();
  if (params.mode == ConstraintMode::FloorCeiling) {
    FrontierMeasure fm(geometry, params, EnumWindow{0, params.n_plus});
    return CertifiedProbability{fm.event_probability(ranges), 0.0,
                                EnumWindow{0, params.n_plus}};
  }

  // anchors the window must cover: the constraint edges and boundary heights
  int amin = 0, amax = 0;
  widen_anchors(ranges, amin, amax);
  widen_anchors_bc(geometry, params, amin, amax);
  const int w0 = excursion_halfwidth(params);

  double prev = -1.0;
  for (int grow = 0; grow <= 6; ++grow) {
    EnumWindow w;
    w.hi = amax + w0 + grow;
    w.lo = params.mode == ConstraintMode::Floor ? 0 : amin - w0 - grow;
    FrontierMeasure fm(geometry, params, w);
    double value = fm.event_probability(ranges);
    if (grow > 0 && std::abs(value - prev) < tol)
      return CertifiedProbability{value, std::abs(value - prev), w};
    prev = value;
  }
  throw resource_error("certified_event_probability: window growth did not stabilize below " +
                       std::to_string(tol));
}

CertifiedProbability certified_conditional_probability(const BoxGeometry& geometry,
                                                       const ModelParams& params,
                                                       const std::vector<SiteRange>& ranges_ab,
                                                       const std::vector<SiteRange>& ranges_cond,
                                                       double tol) {
  params.validate();
  auto eval = [&](const FrontierMeasure& fm) {
    double den = fm.log_event_mass(ranges_cond);
    if (!std::isfinite(den))
      throw std::invalid_argument(
          "certified_conditional_probability: conditioning event has zero mass");
    double num = fm.log_event_mass(ranges_ab);
    return std::isfinite(num) ? std::exp(num - den) : 0.0;
  };

  if (params.mode == ConstraintMode::FloorCeiling) {
    EnumWindow w{0, params.n_plus};
    FrontierMeasure fm(geometry, params, w);
    return CertifiedProbability{eval(fm), 0.0, w};
  }

  int amin = 0, amax = 0;
  widen_anchors(ranges_ab, amin, amax);
  widen_anchors(ranges_cond, amin, amax);
  widen_anchors_bc(geometry, params, amin, amax);
  const int w0 = excursion_halfwidth(params);

  double prev = -1.0;
  for (int grow = 0; grow <= 6; ++grow) {
    EnumWindow w;
    w.hi = amax + w0 + grow;
    w.lo = params.mode == ConstraintMode::Floor ? 0 : amin - w0 - grow;
    FrontierMeasure fm(geometry, params, w);
    double value = eval(fm);
    if (grow > 0 && std::abs(value - prev) < tol)
      return CertifiedProbability{value, std::abs(value - prev), w};
    prev = value;
  }
  throw resource_error(
      "certified_conditional_probability: window growth did not stabilize below " +
      std::to_string(tol));
}

}  // namespace psos
