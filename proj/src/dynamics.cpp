#include "psos/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "psos/oracle.hpp"

namespace psos {

UpdateDraw draw_update(RngStream& rng, int site_count) {
  // Site first, then u, in a fixed order so coupled replicas share draws.
  int site = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(site_count)));
  double u = rng.next_unit();
  return UpdateDraw{site, u};
}

ChainState make_chain(HeightField start, const ModelParams& params, RngStream rng) {
  params.validate();
  if (!heights_satisfy(start, params))
    throw constraint_error("make_chain: start violates the mode constraint");
  return ChainState{std::move(start), params, rng, 0};
}

StepInfo apply_update(HeightField& field, const UpdateDraw& d, const ModelParams& params,
                      std::vector<double>& scratch) {
  Site x = field.geometry().site_at(d.site_index);
  int old_h = field.at(x);
  int new_h = heat_bath_sample(field, x, d.u, params, scratch);
  field.set(x, new_h);
  return StepInfo{d.site_index, old_h, new_h};
}

namespace {
thread_local std::vector<double> g_scratch;
}

StepInfo glauber_step(ChainState& chain) {
  UpdateDraw d = draw_update(chain.rng, chain.site_count());
  StepInfo info = apply_update(chain.field, d, chain.params, g_scratch);
  ++chain.step;
  return info;
}

void glauber_sweep(ChainState& chain) {
  const int n = chain.site_count();
  for (int i = 0; i < n; ++i) glauber_step(chain);
}

StepInfo grand_coupled_step(std::span<HeightField> replicas, const ModelParams& params,
                            const UpdateDraw& d, std::vector<double>& scratch) {
  StepInfo last{d.site_index, 0, 0};
  for (HeightField& f : replicas) last = apply_update(f, d, params, scratch);
  return last;
}

void FractionTarget::reset(const HeightField& field) {
  count_ = 0;
  for (int h : field.data()) count_ += h >= level_;
  double want = fraction_ * double(field.geometry().site_count());
  threshold_ = static_cast<long long>(std::ceil(want - 1e-12));
}

void FractionTarget::on_update(int old_h, int new_h) {
  count_ += (new_h >= level_) - (old_h >= level_);
}

HittingRecord run_until(ChainState& chain, FractionTarget& target, std::uint64_t t_max_steps) {
  target.reset(chain.field);
  if (target.satisfied()) return HittingRecord{0, false};
  for (std::uint64_t t = 1; t <= t_max_steps; ++t) {
    StepInfo info = glauber_step(chain);
    target.on_update(info.old_h, info.new_h);
    if (target.satisfied()) return HittingRecord{t, false};
  }
  return HittingRecord{t_max_steps, true};
}

HittingRecord run_until(ChainState& chain, const std::function<bool(const HeightField&)>& pred,
                        std::uint64_t t_max_steps) {
  if (pred(chain.field)) return HittingRecord{0, false};
  for (std::uint64_t t = 1; t <= t_max_steps; ++t) {
    glauber_step(chain);
    if (pred(chain.field)) return HittingRecord{t, false};
  }
  return HittingRecord{t_max_steps, true};
}

StepInfo restricted_step(ChainState& chain,
                         const std::function<bool(const HeightField&)>& member) {
  UpdateDraw d = draw_update(chain.rng, chain.site_count());
  Site x = chain.field.geometry().site_at(d.site_index);
  int old_h = chain.field.at(x);
  int new_h = heat_bath_sample(chain.field, x, d.u, chain.params, g_scratch);
  chain.field.set(x, new_h);
  if (new_h != old_h && !member(chain.field)) {
    chain.field.set(x, old_h);  // proposal left the set: keep the old state
    new_h = old_h;
  }
  ++chain.step;
  return StepInfo{d.site_index, old_h, new_h};
}

StepInfo site_floor_restricted_step(ChainState& chain, Site site, int min_h) {
  UpdateDraw d = draw_update(chain.rng, chain.site_count());
  Site x = chain.field.geometry().site_at(d.site_index);
  int old_h = chain.field.at(x);
  int new_h;
  if (x == site) {
    LocalDistribution dist = heat_bath_distribution(chain.field, x, chain.params);
    if (dist.hi() < min_h)
      throw constraint_error("site restriction sits above the local window");
    // cdf and quantile accumulate the same partial sums, so the rescaled
    // uniform can never select below min_h
    double below = dist.cdf(min_h - 1);
    new_h = dist.quantile(below + d.u * (1.0 - below));
  } else {
    new_h = heat_bath_sample(chain.field, x, d.u, chain.params, g_scratch);
  }
  chain.field.set(x, new_h);
  ++chain.step;
  return StepInfo{d.site_index, old_h, new_h};
}

namespace {

// Walker alias table over a probability vector (for the bootstrap resamples).
struct AliasTable {
  std::vector<double> prob;
  std::vector<int> alias;

  explicit AliasTable(const std::vector<double>& p) {
    const int n = static_cast<int>(p.size());
    prob.assign(static_cast<std::size_t>(n), 0.0);
    alias.assign(static_cast<std::size_t>(n), 0);
    std::vector<double> scaled(p);
    for (double& v : scaled) v *= n;
    std::vector<int> small, large;
    for (int i = 0; i < n; ++i) (scaled[std::size_t(i)] < 1.0 ? small : large).push_back(i);
    while (!small.empty() && !large.empty()) {
      int s = small.back(), l = large.back();
      small.pop_back();
      prob[std::size_t(s)] = scaled[std::size_t(s)];
      alias[std::size_t(s)] = l;
      scaled[std::size_t(l)] -= 1.0 - scaled[std::size_t(s)];
      if (scaled[std::size_t(l)] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (int i : large) prob[std::size_t(i)] = 1.0;
    for (int i : small) prob[std::size_t(i)] = 1.0;
  }

  int draw(RngStream& rng) const {
    const int n = static_cast<int>(prob.size());
    std::uint64_t k = rng.next_below(static_cast<std::uint64_t>(n));
    return rng.next_unit() < prob[std::size_t(k)] ? int(k) : alias[std::size_t(k)];
  }
};

double tv_of_counts(const std::vector<std::uint64_t>& counts, double n,
                    const std::vector<double>& pi) {
  double s = 0;
  for (std::size_t i = 0; i < pi.size(); ++i) s += std::abs(double(counts[i]) / n - pi[i]);
  return 0.5 * s;
}

}  // namespace

TvEstimate tv_distance_to_equilibrium(const HeightField& start, const ModelParams& params,
                                      std::uint64_t t_steps, int n_runs,
                                      const ExactMeasure& oracle, RngStream seed_stream) {
  if (!(start.geometry() == oracle.geometry()))
    throw std::invalid_argument("tv_distance_to_equilibrium: start/oracle geometry mismatch");
  const StateIndexer& ix = oracle.indexer();
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(ix.count()), 0);
  for (int r = 0; r < n_runs; ++r) {
    RngStream rng(seed_stream.master_seed(),
                  stream_path({seed_stream.stream_id(), 0x7476ull, std::uint64_t(r)}));
    ChainState chain = make_chain(start, params, rng);
    for (std::uint64_t t = 0; t < t_steps; ++t) glauber_step(chain);
    ++counts[static_cast<std::size_t>(ix.encode(chain.field.data()))];
  }
  std::vector<double> pi = oracle.probabilities();
  TvEstimate est;
  est.n_runs = n_runs;
  est.tv = tv_of_counts(counts, double(n_runs), pi);

  // Bootstrap radius: resample end states from the empirical law.
  std::vector<double> phat(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) phat[i] = double(counts[i]) / double(n_runs);
  AliasTable table(phat);
  RngStream boot(seed_stream.master_seed(),
                 stream_path({seed_stream.stream_id(), 0x626f6f74ull}));
  const int B = 200;
  double mean = 0, m2 = 0;
  std::vector<std::uint64_t> rc(counts.size());
  for (int b = 1; b <= B; ++b) {
    std::fill(rc.begin(), rc.end(), 0);
    for (int r = 0; r < n_runs; ++r) ++rc[std::size_t(table.draw(boot))];
    double tv = tv_of_counts(rc, double(n_runs), pi);
    double d = tv - mean;
    mean += d / b;
    m2 += d * (tv - mean);
  }
  est.radius = 1.96 * std::sqrt(m2 / (B - 1));
  return est;
}

double occupation_tv(ChainState& chain, const ExactMeasure& oracle, std::uint64_t sweeps) {
  if (!(chain.field.geometry() == oracle.geometry()))
    throw std::invalid_argument("occupation_tv: chain/oracle geometry mismatch");
  const StateIndexer& ix = oracle.indexer();
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(ix.count()), 0);
  std::uint64_t idx = ix.encode(chain.field.data());
  const std::uint64_t steps = sweeps * std::uint64_t(chain.site_count());
  for (std::uint64_t t = 0; t < steps; ++t) {
    StepInfo info = glauber_step(chain);
    idx = std::uint64_t(std::int64_t(idx) +
                        std::int64_t(info.new_h - info.old_h) *
                            std::int64_t(ix.place(info.site_index)));
    ++counts[static_cast<std::size_t>(idx)];
  }
  std::vector<double> pi = oracle.probabilities();
  return tv_of_counts(counts, double(steps), pi);
}

}  // namespace psos
