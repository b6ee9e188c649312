#include "psos/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace psos {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log-sum-exp accumulator (sequential, deterministic order).
struct LogSum {
  double max = kNegInf;
  double sum = 0;  // sum of exp(lw - max)

  void add(double lw) {
    if (lw == kNegInf) return;
    if (lw <= max) {
      sum += std::exp(lw - max);
    } else {
      sum = sum * std::exp(max - lw) + 1.0;
      max = lw;
    }
  }
  double value() const { return sum == 0 ? kNegInf : max + std::log(sum); }
};

std::int64_t ipow64(std::int64_t base, int e) {
  std::int64_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

// Depth-first enumeration over row-major sites with incremental energy.
// Visitor is called at each leaf with (state index, log weight); heights are
// maintained in `field` in place.
class Enumerator {
 public:
  Enumerator(const BoxGeometry& geom, const ModelParams& params, EnumWindow w,
             const StateIndexer& ix)
      : geom_(geom), params_(params), w_(w), ix_(ix), field_(geom, w.lo) {
    L_ = geom.side();
    n_ = geom.site_count();
    int_p_ = params.integer_p();
    pe_ = int_p_ ? int(params.p) : 0;
    mult_in_ = params.bond_double_count ? 2 : 1;
  }

  template <typename Visit>
  void run(Visit&& visit) {
    if (int_p_) {
      dfs_int(0, 0, 0, visit);
    } else {
      dfs_real(0, 0, 0.0, visit);
    }
  }

  HeightField& field() { return field_; }

 private:
  // Energy added by assigning height v at row-major site k (bonds to already
  // assigned west/north neighbors and to the boundary ring).
  template <typename E, typename Pow>
  E site_energy(int k, int v, Pow&& pw) const {
    const int x = k % L_ + 1, y = k / L_ + 1;
    E e{};
    if (x > 1)
      e += E(mult_in_) * pw(v - field_.at_index(k - 1));
    else
      e += pw(v - params_.bc.value_at({0, y}));
    if (y > 1)
      e += E(mult_in_) * pw(v - field_.at_index(k - L_));
    else
      e += pw(v - params_.bc.value_at({x, 0}));
    if (x == L_) e += pw(v - params_.bc.value_at({L_ + 1, y}));
    if (y == L_) e += pw(v - params_.bc.value_at({x, L_ + 1}));
    return e;
  }

  template <typename Visit>
  void dfs_int(int k, std::uint64_t idx, std::int64_t energy, Visit& visit) {
    if (k == n_) {
      visit(idx, -params_.beta * double(energy));
      return;
    }
    auto pw = [this](int d) { return ipow64(d < 0 ? -d : d, pe_); };
    for (int v = w_.lo; v <= w_.hi; ++v) {
      field_.set_index(k, v);
      dfs_int(k + 1, idx + std::uint64_t(v - w_.lo) * ix_.place(k),
              energy + site_energy<std::int64_t>(k, v, pw), visit);
    }
  }

  template <typename Visit>
  void dfs_real(int k, std::uint64_t idx, double energy, Visit& visit) {
    if (k == n_) {
      visit(idx, -params_.beta * energy);
      return;
    }
    auto pw = [this](int d) { return std::pow(double(d < 0 ? -d : d), params_.p); };
    for (int v = w_.lo; v <= w_.hi; ++v) {
      field_.set_index(k, v);
      dfs_real(k + 1, idx + std::uint64_t(v - w_.lo) * ix_.place(k),
               energy + site_energy<double>(k, v, pw), visit);
    }
  }

  BoxGeometry geom_;
  const ModelParams& params_;
  EnumWindow w_;
  const StateIndexer& ix_;
  HeightField field_;
  int L_, n_, pe_, mult_in_;
  bool int_p_;
};

void check_window(const ModelParams& params, EnumWindow w) {
  if (w.hi < w.lo) throw std::invalid_argument("EnumWindow: hi < lo");
  switch (params.mode) {
    case ConstraintMode::FloorCeiling:
      if (w.lo != 0 || w.hi != params.n_plus)
        throw std::invalid_argument(
            "EnumWindow: floor_ceiling mode enumerates exactly [0, n_plus]");
      break;
    case ConstraintMode::Floor:
      if (w.lo != 0) throw std::invalid_argument("EnumWindow: floor mode requires lo = 0");
      break;
    case ConstraintMode::Free:
      break;
  }
}

StateIndexer make_indexer_checked(const BoxGeometry& geom, const ModelParams& params,
                                  EnumWindow w, std::uint64_t cap) {
  params.validate();
  check_window(params, w);
  // overflow-safe count check
  std::uint64_t count = 1;
  for (int k = 0; k < geom.site_count(); ++k) {
    if (count > cap / std::uint64_t(w.size()) + 1) {
      count = cap + 1;
      break;
    }
    count *= std::uint64_t(w.size());
  }
  if (count > cap)
    throw resource_error("ExactMeasure: state space exceeds the enumeration cap");
  return StateIndexer(geom.site_count(), w);
}

}  // namespace

StateIndexer::StateIndexer(int n_sites, EnumWindow w) : n_sites_(n_sites), window_(w) {
  places_.resize(static_cast<std::size_t>(n_sites));
  std::uint64_t place = 1;
  for (int k = 0; k < n_sites; ++k) {
    places_[static_cast<std::size_t>(k)] = place;
    place *= std::uint64_t(w.size());
  }
  count_ = place;
}

std::uint64_t StateIndexer::encode(const std::vector<int>& heights) const {
  std::uint64_t idx = 0;
  for (int k = 0; k < n_sites_; ++k) {
    int h = heights[static_cast<std::size_t>(k)];
    if (h < window_.lo || h > window_.hi)
      throw std::domain_error("StateIndexer::encode: height outside the window");
    idx += std::uint64_t(h - window_.lo) * places_[static_cast<std::size_t>(k)];
  }
  return idx;
}

void StateIndexer::decode(std::uint64_t idx, std::vector<int>& heights) const {
  heights.resize(static_cast<std::size_t>(n_sites_));
  for (int k = 0; k < n_sites_; ++k) {
    heights[static_cast<std::size_t>(k)] =
        window_.lo + int(idx % std::uint64_t(window_.size()));
    idx /= std::uint64_t(window_.size());
  }
}

ExactMeasure ExactMeasure::enumerate(const BoxGeometry& geom, const ModelParams& params,
                                     EnumWindow window, std::uint64_t cap) {
  StateIndexer ix = make_indexer_checked(geom, params, window, cap);
  ExactMeasure m(geom, params, ix);
  m.log_w_.assign(static_cast<std::size_t>(ix.count()), 0.0);
  Enumerator en(geom, params, window, ix);
  LogSum z;
  // Two concerns at each leaf: store the log-weight, accumulate Z. The DFS leaf
  // order is not index order, so Z is accumulated in DFS order (deterministic).
  en.run([&](std::uint64_t idx, double lw) {
    m.log_w_[static_cast<std::size_t>(idx)] = lw;
    z.add(lw);
  });
  m.log_z_ = z.value();
  return m;
}

ExactMeasure ExactMeasure::enumerate(const BoxGeometry& geom, const ModelParams& params,
                                     std::uint64_t cap) {
  if (params.mode != ConstraintMode::FloorCeiling)
    throw std::invalid_argument(
        "ExactMeasure::enumerate: only floor_ceiling mode has a default window");
  return enumerate(geom, params, EnumWindow{0, params.n_plus}, cap);
}

double ExactMeasure::probability_of_index(std::uint64_t idx) const {
  return std::exp(log_w_[static_cast<std::size_t>(idx)] - log_z_);
}

double ExactMeasure::probability(const HeightField& state) const {
  if (!(state.geometry() == geom_))
    throw std::invalid_argument("ExactMeasure::probability: geometry mismatch");
  for (int h : state.data())
    if (h < indexer_.window().lo || h > indexer_.window().hi) return 0.0;
  return probability_of_index(indexer_.encode(state.data()));
}

double ExactMeasure::event_probability(const StatePredicate& pred) const {
  // Odometer walk in index order with Kahan compensation.
  HeightField state(geom_, indexer_.window().lo);
  double sum = 0, comp = 0;
  const std::uint64_t n = indexer_.count();
  for (std::uint64_t idx = 0;; ++idx) {
    if (pred(state)) {
      double y = probability_of_index(idx) - comp;
      double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    if (idx + 1 == n) break;
    // increment mixed-radix digits
    for (int k = 0;; ++k) {
      int h = state.at_index(k);
      if (h < indexer_.window().hi) {
        state.set_index(k, h + 1);
        break;
      }
      state.set_index(k, indexer_.window().lo);
    }
  }
  return sum;
}

double ExactMeasure::conditional_probability(const StatePredicate& a,
                                             const StatePredicate& b) const {
  double pb = event_probability(b);
  if (pb <= 0.0)
    throw std::invalid_argument("ExactMeasure::conditional_probability: conditioning event has zero mass");
  double pab = event_probability([&](const HeightField& s) { return a(s) && b(s); });
  return pab / pb;
}

ExactMeasure ExactMeasure::conditional(const StatePredicate& pred) const {
  ExactMeasure out(geom_, params_, indexer_);
  out.log_w_.assign(log_w_.size(), kNegInf);
  HeightField state(geom_, indexer_.window().lo);
  LogSum z;
  const std::uint64_t n = indexer_.count();
  for (std::uint64_t idx = 0;; ++idx) {
    if (pred(state)) {
      out.log_w_[static_cast<std::size_t>(idx)] = log_w_[static_cast<std::size_t>(idx)];
      z.add(log_w_[static_cast<std::size_t>(idx)]);
    }
    if (idx + 1 == n) break;
    for (int k = 0;; ++k) {
      int h = state.at_index(k);
      if (h < indexer_.window().hi) {
        state.set_index(k, h + 1);
        break;
      }
      state.set_index(k, indexer_.window().lo);
    }
  }
  if (z.value() == kNegInf)
    throw std::invalid_argument("ExactMeasure::conditional: event has zero mass");
  out.log_z_ = z.value();
  return out;
}

double ExactMeasure::one_point_tail(Site site, int h) const {
  if (h <= indexer_.window().lo) return 1.0;
  if (h > indexer_.window().hi) return 0.0;
  return event_probability([&](const HeightField& s) { return s.at(site) >= h; });
}

std::vector<double> ExactMeasure::probabilities() const {
  std::vector<double> out(log_w_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_w_[i] - log_z_);
  return out;
}

double log_event_mass(const BoxGeometry& geom, const ModelParams& params, EnumWindow window,
                      const StatePredicate& pred, std::uint64_t cap) {
  StateIndexer ix = make_indexer_checked(geom, params, window, cap);
  Enumerator en(geom, params, window, ix);
  LogSum mass;
  en.run([&](std::uint64_t, double lw) {
    if (pred(en.field())) mass.add(lw);
  });
  return mass.value();
}

}  // namespace psos
