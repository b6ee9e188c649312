#include "psos/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "psos/contour.hpp"
#include "psos/dynamics.hpp"
#include "psos/freewindow.hpp"

namespace psos {

namespace {

// Stream-path tags; every experiment derives its randomness below one of these
// so adding an experiment never perturbs another's draws.
constexpr std::uint64_t kStreamTail = 0x7461696c;  // "tail"
constexpr std::uint64_t kStreamHitChain = 0x68697463;
constexpr std::uint64_t kStreamHitStart = 0x68697473;
constexpr std::uint64_t kStreamConc = 0x636f6e63;
constexpr std::uint64_t kStreamCorr = 0x636f7272;

constexpr double kZ95 = 1.959963984540054;

struct WilsonInterval {
  double lower = 0.0;
  double upper = 1.0;
};

WilsonInterval wilson95(long long successes, long long n) {
  double nn = double(n);
  double ph = double(successes) / nn;
  double z2 = kZ95 * kZ95;
  double denom = 1.0 + z2 / nn;
  double center = (ph + z2 / (2.0 * nn)) / denom;
  double rad = kZ95 * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - rad), std::min(1.0, center + rad)};
}

// Index-addressed task fan-out; results keyed by task index, so scheduling
// never affects the fold. The first worker exception is rethrown on the
// caller's thread.
void run_tasks(int workers, std::size_t n, const std::function<void(std::size_t)>& body) {
  workers = std::max(1, workers);
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto loop = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  std::size_t count = std::min<std::size_t>(std::size_t(workers), n);
  for (std::size_t t = 0; t < count; ++t) pool.emplace_back(loop);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

ModelParams proxy_params(double p, double beta, ConstraintMode mode, int n_plus) {
  ModelParams mp;
  mp.p = p;
  mp.beta = beta;
  mp.mode = mode;
  mp.n_plus = mode == ConstraintMode::FloorCeiling ? n_plus : 1;
  mp.validate();
  return mp;
}

Site center_site(const BoxGeometry& geom) {
  int c = (geom.side() + 1) / 2;
  return Site{c, c};
}

// Least-squares slope of y on x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

// Type-7 (linear interpolation) quantile of an ascending vector.
double quantile_sorted(const std::vector<double>& v, double f) {
  if (v.size() == 1) return v[0];
  double pos = f * double(v.size() - 1);
  std::size_t i = std::size_t(pos);
  if (i + 1 >= v.size()) return v.back();
  double frac = pos - double(i);
  return v[i] + frac * (v[i + 1] - v[i]);
}

}  // namespace

double d_of_p(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("d_of_p: p must be >= 1");
  return (p > 1.0 && p < 2.0) ? p : 2.0;
}

LevelSchedule make_level_schedule(double p, double a, int typical_height) {
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("level schedule: a must be in (0, 1)");
  if (typical_height < 0)
    throw std::invalid_argument("level schedule: typical height must be >= 0");
  LevelSchedule s;
  s.p = p;
  s.a = a;
  s.d_of_p = d_of_p(p);
  s.level = int(std::ceil(a * double(typical_height))) - 1;
  return s;
}

int default_proxy_side(long long L) {
  if (L < 1) throw std::invalid_argument("proxy side: L must be >= 1");
  return std::max(64, 8 * int(std::ceil(std::log(double(L)))));
}

TailFactor estimate_tail_factor(double p, double beta, int k, int proxy_side,
                                long long n_samples, const TailOptions& opt) {
  if (k < 0) throw std::invalid_argument("tail factor: k must be >= 0");
  if (n_samples < 1) throw std::invalid_argument("tail factor: need n_samples >= 1");
  if (proxy_side < 4 * int(std::ceil(std::log(double(proxy_side)))))
    throw std::invalid_argument("tail factor: proxy box too small for a bulk center");
  if (opt.mode == ConstraintMode::FloorCeiling && k > opt.n_plus)
    throw std::invalid_argument("tail factor: k exceeds the ceiling");

  // under a floor the anchor P(eta_c >= 0) is identically 1
  if (k == 0 && opt.mode != ConstraintMode::Free)
    return TailFactor{0, 1.0, 1.0, 1.0, n_samples, n_samples};

  BoxGeometry geom(proxy_side);
  ModelParams mp = proxy_params(p, beta, opt.mode, opt.n_plus);
  Site c = center_site(geom);

  HeightField start(geom);
  if (k >= 2) start.set(c, k - 1);  // inside the conditioning event
  // k >= 1 conditions on {eta_c >= k - 1}; the clamped step samples the
  // restricted conditional exactly (the rejection form starves for k >= 2:
  // its proposals almost never land back inside the set)
  auto step = [&](ChainState& ch) {
    if (k == 0)
      glauber_step(ch);
    else
      site_floor_restricted_step(ch, c, k - 1);
  };

  ChainState chain = make_chain(
      std::move(start), mp,
      substream(opt.master_seed, {kStreamTail, std::uint64_t(opt.mode),
                                  std::uint64_t(proxy_side), std::uint64_t(k)}));

  const long long sites = geom.site_count();
  for (long long t = 0; t < (long long)opt.burn_in_sweeps * sites; ++t) step(chain);

  long long successes = 0;
  for (long long s = 0; s < n_samples; ++s) {
    for (long long t = 0; t < (long long)opt.thin_sweeps * sites; ++t) step(chain);
    successes += chain.field.at(c) >= k;
  }

  TailFactor f;
  f.k = k;
  f.n_samples = n_samples;
  f.successes = successes;
  f.f_hat = double(successes) / double(n_samples);
  WilsonInterval w = wilson95(successes, n_samples);
  f.lower = w.lower;
  f.upper = w.upper;
  return f;
}

std::vector<TailEstimate> estimate_tail_profile(double p, double beta, int h_max,
                                                int proxy_side, long long n_samples,
                                                const TailOptions& opt) {
  if (h_max < 0) throw std::invalid_argument("tail profile: h_max must be >= 0");

  // factor 0 only carries information for the free measure
  int k_lo = opt.mode == ConstraintMode::Free ? 0 : 1;
  std::vector<TailFactor> factors(std::size_t(h_max + 1 - k_lo));
  run_tasks(opt.workers, factors.size(), [&](std::size_t i) {
    factors[i] = estimate_tail_factor(p, beta, k_lo + int(i), proxy_side, n_samples, opt);
  });

  std::vector<TailEstimate> out;
  double prod = 1.0, lo = 1.0, hi = 1.0;
  for (int h = 0; h <= h_max; ++h) {
    if (h >= k_lo) {
      const TailFactor& f = factors[std::size_t(h - k_lo)];
      prod *= f.f_hat;
      lo *= f.lower;
      hi *= f.upper;
    }
    TailEstimate e;
    e.h = h;
    e.p_hat = prod;
    e.lower = lo;
    e.upper = std::min(1.0, hi);
    e.ci = (e.upper - e.lower) / 2.0;
    e.n_samples = n_samples;
    e.box = proxy_side;
    out.push_back(e);
  }
  return out;
}

TailEstimate estimate_infinite_tail(double p, double beta, int h, int proxy_side,
                                    long long n_samples, const TailOptions& opt) {
  return estimate_tail_profile(p, beta, h, proxy_side, n_samples, opt).back();
}

int estimate_H(double /*p*/, double beta, long long L,
               const std::function<TailEstimate(int)>& tail_estimator, CiPolicy policy) {
  if (L < 1) throw std::invalid_argument("estimate_H: L must be >= 1");
  double threshold = 5.0 * beta / double(L);
  if (threshold > 1.0) return 0;  // no level can qualify

  int best = 0;
  int misses = 0;
  for (int h = 0; misses < 2 && h <= 200; ++h) {
    TailEstimate e = tail_estimator(h);
    double value = policy == CiPolicy::Point   ? e.p_hat
                   : policy == CiPolicy::Lower ? e.lower
                                               : e.upper;
    if (value >= threshold) {
      best = h;
      misses = 0;
    } else {
      ++misses;
    }
  }
  return best;
}

double fraction_at_least(const HeightField& field, int level) {
  long long count = 0;
  for (int h : field.data()) count += h >= level;
  return double(count) / double(field.data().size());
}

ConcentrationReport concentration_experiment(double p, double beta, int L, int K,
                                             long long n_samples,
                                             const ConcentrationOptions& opt) {
  if (n_samples < 1) throw std::invalid_argument("concentration: need n_samples >= 1");
  BoxGeometry geom(L);
  ModelParams mp = proxy_params(p, beta, ConstraintMode::Floor, 0);
  const int level = opt.typical_height - K;
  const int upper = opt.upper_start_level >= 0 ? opt.upper_start_level : opt.typical_height + 4;
  const long long sites = geom.site_count();

  double means[2] = {0.0, 0.0};
  for (int which = 0; which < 2; ++which) {
    HeightField start(geom);
    if (which == 1)
      for (int i = 0; i < geom.site_count(); ++i) start.set_index(i, upper);
    ChainState chain = make_chain(
        std::move(start), mp,
        substream(opt.master_seed, {kStreamConc, std::uint64_t(L), std::uint64_t(which)}));
    for (long long t = 0; t < (long long)opt.burn_in_sweeps * sites; ++t) glauber_step(chain);
    double acc = 0.0;
    for (long long s = 0; s < n_samples; ++s) {
      for (long long t = 0; t < (long long)opt.thin_sweeps * sites; ++t) glauber_step(chain);
      acc += fraction_at_least(chain.field, level);
    }
    means[which] = acc / double(n_samples);
  }

  ConcentrationReport rep;
  rep.K = K;
  rep.typical_height = opt.typical_height;
  rep.level = level;
  rep.fraction_low_start = means[0];
  rep.fraction_high_start = means[1];
  rep.agreed = std::abs(means[0] - means[1]) <= opt.agreement_tol;
  rep.fraction = (means[0] + means[1]) / 2.0;
  rep.threshold = 1.0 - opt.epsilon;
  rep.n_samples = n_samples;
  return rep;
}

HittingReport hitting_time_experiment(double p, double beta,
                                      const std::vector<long long>& L_list, double a,
                                      int n_seeds, std::uint64_t t_max_sweeps,
                                      const HittingOptions& opt) {
  if (L_list.empty()) throw std::invalid_argument("hitting time: empty L list");
  if (n_seeds < 1) throw std::invalid_argument("hitting time: need n_seeds >= 1");
  std::vector<long long> Ls = L_list;
  std::sort(Ls.begin(), Ls.end());
  if (std::adjacent_find(Ls.begin(), Ls.end()) != Ls.end())
    throw std::invalid_argument("hitting time: duplicate L");
  if (Ls.front() < 2) throw std::invalid_argument("hitting time: L must be >= 2");

  // typical heights resolved up front (the default estimator samples chains,
  // so keep it out of the fan-out)
  std::function<int(long long)> height_of = opt.typical_height;
  if (!height_of) {
    std::uint64_t tail_seed = mix64(opt.master_seed ^ kStreamTail);
    height_of = [p, beta, tail_seed](long long L) {
      TailOptions topt;
      topt.master_seed = tail_seed;
      int M = default_proxy_side(L);
      return estimate_H(p, beta, L, [&](int h) {
        return estimate_infinite_tail(p, beta, h, M, 20000, topt);
      });
    };
  }

  HittingReport rep;
  rep.p = p;
  rep.beta = beta;
  rep.a = a;
  rep.d = d_of_p(p);
  rep.t_max_sweeps = t_max_sweeps;
  rep.start = opt.start == HitStart::AllZero ? "all-zero" : "restricted-equilibrium";
  rep.target = opt.target == HitTarget::HalfAbove ? "half-above" : "nine-tenths-above";
  double fraction =
      opt.target == HitTarget::HalfAbove ? opt.half_fraction : opt.nine_tenths_fraction;

  struct PerL {
    long long L;
    int n_plus;
    int H;
    LevelSchedule schedule;
  };
  std::vector<PerL> per(Ls.size());
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    long long L = Ls[i];
    int H = height_of(L);
    per[i].L = L;
    per[i].n_plus =
        opt.n_plus_override > 0 ? opt.n_plus_override : std::max(1, int(std::ceil(std::log(double(L)))));
    per[i].H = H;
    per[i].schedule = make_level_schedule(p, a, H);
    if (opt.start == HitStart::RestrictedEquilibrium && per[i].schedule.level < 1)
      throw std::invalid_argument("hitting time: restricted start needs level >= 1");
  }

  rep.records.resize(Ls.size() * std::size_t(n_seeds));
  run_tasks(opt.workers, rep.records.size(), [&](std::size_t task) {
    const PerL& info = per[task / std::size_t(n_seeds)];
    const int seed = int(task % std::size_t(n_seeds));
    BoxGeometry geom(int(info.L));
    ModelParams mp;
    mp.p = p;
    mp.beta = beta;
    mp.mode = ConstraintMode::FloorCeiling;
    mp.n_plus = info.n_plus;
    mp.bc = opt.bc;
    mp.validate();

    HeightField start(geom);
    if (opt.start == HitStart::RestrictedEquilibrium) {
      // nu = equilibrium conditioned on no large level-contour, sampled by a
      // rejection chain from the (member) all-zero state
      long long area_cap = (long long)std::floor(
          opt.area_constant *
          std::pow(double(info.L), 2.0 * std::pow(a, info.schedule.d_of_p)));
      auto member = [&](const HeightField& f) {
        return atypical_membership(f, mp.bc, info.schedule.level, area_cap);
      };
      ChainState warm = make_chain(
          std::move(start), mp,
          substream(opt.master_seed,
                    {kStreamHitStart, std::uint64_t(info.L), std::uint64_t(seed)}));
      for (long long t = 0; t < (long long)opt.restricted_burn_sweeps * geom.site_count(); ++t)
        restricted_step(warm, member);
      start = std::move(warm.field);
    }

    ChainState chain = make_chain(
        std::move(start), mp,
        substream(opt.master_seed, {kStreamHitChain, std::uint64_t(info.L), std::uint64_t(seed)}));
    FractionTarget target(info.schedule.target_level(), fraction);
    std::uint64_t t_max_steps = t_max_sweeps * std::uint64_t(geom.site_count());
    HittingRecord hit = run_until(chain, target, t_max_steps);

    HittingSeedRecord& rec = rep.records[task];
    rec.L = info.L;
    rec.seed = seed;
    rec.tau_steps = hit.tau_steps;
    rec.tau_sweeps = double(hit.tau_steps) / double(geom.site_count());
    rec.censored = hit.censored;
  });

  for (std::size_t i = 0; i < Ls.size(); ++i) {
    std::vector<double> taus;
    int censored = 0;
    for (int s = 0; s < n_seeds; ++s) {
      const HittingSeedRecord& rec = rep.records[i * std::size_t(n_seeds) + std::size_t(s)];
      taus.push_back(rec.tau_sweeps);
      censored += rec.censored;
    }
    std::sort(taus.begin(), taus.end());
    HittingLevelSummary sum;
    sum.L = per[i].L;
    sum.n_plus = per[i].n_plus;
    sum.typical_height = per[i].H;
    sum.target_level = per[i].schedule.target_level();
    sum.fraction = fraction;
    sum.median_sweeps = quantile_sorted(taus, 0.5);
    sum.q1_sweeps = quantile_sorted(taus, 0.25);
    sum.q3_sweeps = quantile_sorted(taus, 0.75);
    sum.censored = censored;
    sum.n_seeds = n_seeds;
    rep.per_level.push_back(sum);
  }

  // growth fit over the ascending prefix whose medians are positive and
  // dominated by uncensored runs
  std::vector<double> xs, ys;
  for (const HittingLevelSummary& sum : rep.per_level) {
    if (sum.censored >= (sum.n_seeds + 1) / 2 || !(sum.median_sweeps > 0.0)) break;
    xs.push_back(std::pow(double(sum.L), std::pow(a, rep.d)));
    ys.push_back(std::log(sum.median_sweeps));
  }
  rep.fit_points = int(xs.size());
  if (xs.size() >= 2) {
    rep.slope = ls_slope(xs, ys);
    rep.fit_valid = true;
  } else {
    rep.slope = std::numeric_limits<double>::quiet_NaN();
    rep.fit_valid = false;
  }
  return rep;
}

DecayCurve correlation_decay_probe(double p, double beta, int proxy_side,
                                   const std::vector<int>& separations,
                                   const CorrelationOptions& opt) {
  BoxGeometry geom(proxy_side);
  Site c = center_site(geom);
  for (int r : separations) {
    if (r < 0) throw std::invalid_argument("correlation probe: separation must be >= 0");
    if (r > std::max(1, proxy_side / 4))
      throw std::invalid_argument("correlation probe: separation leaves the bulk");
  }
  ModelParams mp = proxy_params(p, beta, opt.mode, opt.n_plus);

  DecayCurve curve;
  if (opt.method == ProbeMethod::Exact) {
    std::vector<SiteRange> base(std::size_t(geom.site_count()), SiteRange{});
    auto tail_ranges = [&](Site s) {
      std::vector<SiteRange> rs = base;
      rs[std::size_t(geom.index_of(s))].lo = 1;
      return rs;
    };
    auto probability = [&](const std::vector<SiteRange>& rs) {
      if (opt.exact_halfwidth <= 0) return certified_event_probability(geom, mp, rs).value;
      int lo = opt.mode == ConstraintMode::Free ? -opt.exact_halfwidth : 0;
      int hi = opt.mode == ConstraintMode::FloorCeiling ? mp.n_plus : 1 + opt.exact_halfwidth;
      FrontierMeasure fm(geom, mp, EnumWindow{lo, hi});
      return fm.event_probability(rs);
    };
    double px = probability(tail_ranges(c));
    for (int r : separations) {
      Site y{c.x + r, c.y};
      CorrelationPoint pt;
      pt.r = r;
      if (r == 0) {
        pt.corr = px * (1.0 - px);
      } else {
        double py = probability(tail_ranges(y));
        std::vector<SiteRange> both = tail_ranges(c);
        both[std::size_t(geom.index_of(y))].lo = 1;
        double pxy = probability(both);
        pt.corr = pxy - px * py;
      }
      curve.points.push_back(pt);
    }
  } else {
    ChainState chain = make_chain(
        HeightField(geom), mp,
        substream(opt.master_seed, {kStreamCorr, std::uint64_t(proxy_side)}));
    const long long sites = geom.site_count();
    for (long long t = 0; t < (long long)opt.burn_in_sweeps * sites; ++t) glauber_step(chain);

    long long sx = 0;
    std::vector<long long> sy(separations.size(), 0), sxy(separations.size(), 0);
    for (long long s = 0; s < opt.n_samples; ++s) {
      for (long long t = 0; t < (long long)opt.thin_sweeps * sites; ++t) glauber_step(chain);
      int X = chain.field.at(c) >= 1;
      sx += X;
      for (std::size_t i = 0; i < separations.size(); ++i) {
        int Y = chain.field.at(Site{c.x + separations[i], c.y}) >= 1;
        sy[i] += Y;
        sxy[i] += X * Y;
      }
    }
    double n = double(opt.n_samples);
    double mx = double(sx) / n;
    for (std::size_t i = 0; i < separations.size(); ++i) {
      double my = double(sy[i]) / n;
      double mxy = double(sxy[i]) / n;
      CorrelationPoint pt;
      pt.r = separations[i];
      pt.corr = mxy - mx * my;
      // influence-function variance of the plug-in covariance: counts of the
      // four (X, Y) cells give E[g^2] for g = (X - mx)(Y - my)
      double n11 = double(sxy[i]);
      double n10 = double(sx - sxy[i]);
      double n01 = double(sy[i] - sxy[i]);
      double n00 = n - n11 - n10 - n01;
      auto g2 = [&](double gx, double gy) { return (gx - mx) * (gx - mx) * (gy - my) * (gy - my); };
      double eg2 = (n11 * g2(1, 1) + n10 * g2(1, 0) + n01 * g2(0, 1) + n00 * g2(0, 0)) / n;
      double var = std::max(0.0, eg2 - pt.corr * pt.corr);
      pt.ci = kZ95 * std::sqrt(var / n);
      curve.points.push_back(pt);
    }
  }

  std::vector<double> xs, ys;
  for (const CorrelationPoint& pt : curve.points)
    if (pt.r >= 1 && pt.corr > 0.0) {
      xs.push_back(double(pt.r));
      ys.push_back(std::log(pt.corr));
    }
  if (xs.size() >= 2) {
    curve.rate = -ls_slope(xs, ys);
    curve.rate_valid = true;
  }
  return curve;
}

AppendixTailReport appendix_tail_check(double p, double beta, long long L, int n_plus,
                                       const AppendixTailOptions& opt) {
  if (L < 2) throw std::invalid_argument("appendix tail: L must be >= 2");
  if (n_plus < int(std::ceil(std::log(double(L)))))
    throw std::invalid_argument("appendix tail: needs n_plus >= ceil(log L)");
  if (opt.mode == ConstraintMode::Free)
    throw std::invalid_argument("appendix tail: the claim is about floored measures");

  AppendixTailReport rep;
  rep.L = L;
  rep.n_plus = n_plus;
  rep.level = (n_plus + 1) / 2;
  rep.bound = std::pow(double(L), -3.0);
  rep.proxy_side = opt.proxy_side > 0 ? opt.proxy_side : int(std::min<long long>(L, 5));

  int ceiling = opt.ceiling >= 0 ? opt.ceiling : n_plus;
  if (opt.mode == ConstraintMode::FloorCeiling && rep.level > ceiling) {
    rep.estimate = 0.0;  // above the ceiling, exactly
    rep.delta = 0.0;
    rep.satisfied = true;
    return rep;
  }

  BoxGeometry geom(rep.proxy_side);
  ModelParams mp = proxy_params(p, beta, opt.mode, ceiling);
  std::vector<SiteRange> ranges(std::size_t(geom.site_count()), SiteRange{});
  ranges[std::size_t(geom.index_of(center_site(geom)))].lo = rep.level;
  CertifiedProbability cp = certified_event_probability(geom, mp, ranges, opt.certify_tol);
  rep.estimate = cp.value;
  rep.delta = cp.delta;
  rep.satisfied = rep.estimate <= rep.bound;
  return rep;
}

}  // namespace psos
