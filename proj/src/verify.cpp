#include "psos/verify.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "psos/dynamics.hpp"

namespace psos {

void CheckReport::add(std::string label, double value, double bound, double slack) {
  bool ok = slack >= -tolerance;
  ++checked;
  if (!ok) ++violations;
  worst_slack = std::min(worst_slack, slack);
  items.push_back(CheckItem{std::move(label), value, bound, slack, ok});
}

nlohmann::ordered_json CheckReport::to_json(std::size_t max_items) const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["inputs"] = inputs;
  j["tolerance"] = tolerance;
  j["checked"] = checked;
  j["violations"] = violations;
  j["worst_slack"] = worst_slack;
  j["pass"] = pass();
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < items.size() && i < max_items; ++i) {
    const CheckItem& it = items[i];
    arr.push_back({{"label", it.label},
                   {"value", it.value},
                   {"bound", it.bound},
                   {"slack", it.slack},
                   {"pass", it.pass}});
  }
  j["items"] = std::move(arr);
  return j;
}

namespace {

const char* mode_name(ConstraintMode m) {
  switch (m) {
    case ConstraintMode::Free:
      return "free";
    case ConstraintMode::Floor:
      return "floor";
    default:
      return "floor_ceiling";
  }
}

nlohmann::ordered_json params_json(const BoxGeometry& geom, const ModelParams& params) {
  nlohmann::ordered_json j;
  j["L"] = geom.side();
  j["p"] = params.p;
  j["beta"] = params.beta;
  j["mode"] = mode_name(params.mode);
  if (params.mode == ConstraintMode::FloorCeiling) j["n_plus"] = params.n_plus;
  j["bond_double_count"] = params.bond_double_count;
  if (params.bc.is_constant()) {
    j["bc"] = params.bc.constant_value();
  } else {
    nlohmann::ordered_json ring = nlohmann::ordered_json::array();
    for (Site s : geom.outer_boundary()) ring.push_back(params.bc.value_at(s));
    j["bc"] = std::move(ring);
  }
  return j;
}

constexpr int kNoLo = std::numeric_limits<int>::min();
constexpr int kNoHi = std::numeric_limits<int>::max();

// Per-site ranges of the event {gamma is an h-contour}: heights >= h on the
// inner boundary, <= h-1 on the in-box outer boundary. Ring cells of the outer
// boundary are fixed by the BC; a conflicting ring cell empties the event.
std::optional<std::vector<SiteRange>> contour_event_ranges(const BoxGeometry& geom,
                                                           const BoundaryCondition& bc,
                                                           const Contour& gamma, int h) {
  std::vector<SiteRange> r(std::size_t(geom.site_count()));
  for (Site s : gamma.inner_boundary()) {
    SiteRange& q = r[std::size_t(geom.index_of(s))];
    q.lo = std::max(q.lo, h);
  }
  for (Site s : gamma.outer_boundary()) {
    if (geom.contains(s)) {
      SiteRange& q = r[std::size_t(geom.index_of(s))];
      q.hi = std::min(q.hi, h - 1);
    } else if (geom.on_outer_boundary(s)) {
      if (bc.value_at(s) > h - 1) return std::nullopt;
    }
  }
  return r;
}

// intersect b into a; per-site empty ranges are legal (zero-mass event)
void intersect_ranges(std::vector<SiteRange>& a, const std::vector<SiteRange>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i].lo = std::max(a[i].lo, b[i].lo);
    a[i].hi = std::min(a[i].hi, b[i].hi);
  }
}

struct BatchItem {
  std::vector<SiteRange> num;
  int den = -1;  // index into dens; -1 divides by the partition function
  bool empty = false;
};

struct BatchResult {
  std::vector<double> values;
  double max_delta = 0.0;
  EnumWindow window;
};

// Evaluate a batch of (conditional) event probabilities on one shared free
// window, grown until every value is stable below tol.
BatchResult certified_batch(const BoxGeometry& geom, const ModelParams& params,
                            const std::vector<std::vector<SiteRange>>& dens,
                            const std::vector<BatchItem>& items, double tol) {
  int amin = 0, amax = 0;
  auto widen = [&](const std::vector<SiteRange>& rs) {
    for (const SiteRange& q : rs) {
      if (q.lo != kNoLo) {
        amin = std::min(amin, q.lo);
        amax = std::max(amax, q.lo);
      }
      if (q.hi != kNoHi) {
        amin = std::min(amin, q.hi);
        amax = std::max(amax, q.hi);
      }
    }
  };
  for (const auto& d : dens) widen(d);
  for (const BatchItem& it : items)
    if (!it.empty) widen(it.num);
  for (Site s : geom.outer_boundary()) {
    amin = std::min(amin, params.bc.value_at(s));
    amax = std::max(amax, params.bc.value_at(s));
  }
  const int w0 = int(std::ceil(std::pow(45.0 / (4.0 * params.beta), 1.0 / params.p))) + 1;

  std::vector<double> prev;
  for (int grow = 0; grow <= 6; ++grow) {
    EnumWindow w{amin - w0 - grow, amax + w0 + grow};
    FrontierMeasure fm(geom, params, w);
    std::vector<double> den_mass(dens.size());
    for (std::size_t i = 0; i < dens.size(); ++i) {
      den_mass[i] = fm.log_event_mass(dens[i]);
      if (!std::isfinite(den_mass[i]))
        throw std::invalid_argument("certified_batch: conditioning event has zero mass");
    }
    std::vector<double> vals(items.size(), 0.0);
    for (std::size_t i = 0; i < items.size(); ++i) {
      const BatchItem& it = items[i];
      if (it.empty) continue;
      double num = fm.log_event_mass(it.num);
      double den = it.den < 0 ? fm.log_partition() : den_mass[std::size_t(it.den)];
      vals[i] = std::isfinite(num) ? std::exp(num - den) : 0.0;
    }
    if (grow > 0) {
      double md = 0.0;
      for (std::size_t i = 0; i < vals.size(); ++i)
        md = std::max(md, std::abs(vals[i] - prev[i]));
      if (md < tol) return BatchResult{std::move(vals), md, w};
    }
    prev = std::move(vals);
  }
  throw resource_error("certified_batch: window growth did not stabilize below " +
                       std::to_string(tol));
}

}  // namespace

CheckReport verify_peierls(const BoxGeometry& geom, const ModelParams& params,
                           const PeierlsOptions& opt) {
  params.validate();
  if (params.mode != ConstraintMode::Free)
    throw std::invalid_argument("verify_peierls: the contour bound is for the free measure");

  const std::vector<Contour> contours = enumerate_contours(geom, opt.perimeter_cap);
  const int n = int(contours.size());

  std::vector<std::vector<SiteRange>> dens;
  std::vector<BatchItem> batch;
  std::vector<std::string> labels;
  std::vector<double> bounds;

  auto gname = [&](int i) {
    return "g" + std::to_string(i) + " |g|=" + std::to_string(contours[std::size_t(i)].perimeter());
  };

  // unconditional events, per level then contour
  for (int h : opt.levels)
    for (int i = 0; i < n; ++i) {
      auto rs = contour_event_ranges(geom, params.bc, contours[std::size_t(i)], h);
      BatchItem it;
      if (rs)
        it.num = std::move(*rs);
      else
        it.empty = true;
      batch.push_back(std::move(it));
      labels.push_back("h=" + std::to_string(h) + " " + gname(i));
      bounds.push_back(opt.bound_scale *
                       std::exp(-params.beta * contours[std::size_t(i)].perimeter()));
    }

  // nested pairs: interior(gamma) inside interior(gamma'), outer level below
  long long nested_pairs = 0;
  if (opt.nested) {
    std::vector<int> den_index(std::size_t(n), -1);
    for (std::size_t a = 0; a < opt.levels.size(); ++a)
      for (std::size_t b = 0; b < opt.levels.size(); ++b) {
        int h = opt.levels[a], hp = opt.levels[b];
        if (hp >= h) continue;
        for (int j = 0; j < n; ++j) {
          auto outer_rs = contour_event_ranges(geom, params.bc, contours[std::size_t(j)], hp);
          if (!outer_rs) continue;  // cannot condition on an empty event
          den_index[std::size_t(j)] = -1;
          for (int i = 0; i < n; ++i) {
            const Contour& gi = contours[std::size_t(i)];
            const Contour& gj = contours[std::size_t(j)];
            bool contained = true;
            for (Site s : gi.interior())
              if (!gj.contains_site(s)) {
                contained = false;
                break;
              }
            if (!contained) continue;
            if (den_index[std::size_t(j)] < 0) {
              den_index[std::size_t(j)] = int(dens.size());
              dens.push_back(*outer_rs);
            }
            BatchItem it;
            it.den = den_index[std::size_t(j)];
            auto inner_rs = contour_event_ranges(geom, params.bc, gi, h);
            if (inner_rs) {
              it.num = std::move(*inner_rs);
              intersect_ranges(it.num, *outer_rs);
            } else {
              it.empty = true;
            }
            batch.push_back(std::move(it));
            labels.push_back("h=" + std::to_string(h) + " " + gname(i) +
                             " | h'=" + std::to_string(hp) + " " + gname(j));
            bounds.push_back(opt.bound_scale * std::exp(-params.beta * gi.perimeter()));
            ++nested_pairs;
          }
        }
      }
  }

  BatchResult res = certified_batch(geom, params, dens, batch, opt.certify_tol);

  CheckReport rep;
  rep.name = "peierls";
  rep.tolerance = opt.tol;
  rep.inputs = params_json(geom, params);
  rep.inputs["perimeter_cap"] = opt.perimeter_cap;
  rep.inputs["levels"] = opt.levels;
  rep.inputs["bound_scale"] = opt.bound_scale;
  rep.inputs["certify_tol"] = opt.certify_tol;
  rep.inputs["tol"] = opt.tol;
  rep.inputs["contours"] = n;
  rep.inputs["nested_pairs"] = nested_pairs;
  rep.inputs["window"] = {res.window.lo, res.window.hi};
  rep.inputs["certified_delta"] = res.max_delta;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    double value = res.values[i];
    double bound = bounds[i];
    rep.add(labels[i], value, bound, bound - value);
  }
  return rep;
}

LabeledEvent threshold_event(const BoxGeometry& geom, Site site, int level) {
  geom.index_of(site);  // validate
  std::string label =
      "eta[" + std::to_string(site.x) + "," + std::to_string(site.y) + "]>=" +
      std::to_string(level);
  return LabeledEvent{std::move(label),
                      [site, level](const HeightField& f) { return f.at(site) >= level; }, true};
}

namespace {

// exhaustive increasing check over all comparable state pairs
void require_increasing(const ExactMeasure& m, const LabeledEvent& ev, std::uint64_t cap) {
  const std::uint64_t nst = m.state_count();
  if (nst > cap)
    throw resource_error("verify_fkg: " + std::to_string(nst) +
                         " states exceed the exhaustive increasing-scan cap " +
                         std::to_string(cap));
  const int n_sites = m.geometry().site_count();
  const StateIndexer& ix = m.indexer();
  std::vector<std::vector<int>> dec(nst);
  std::vector<char> val(nst, 0);
  HeightField f(m.geometry());
  for (std::uint64_t s = 0; s < nst; ++s) {
    ix.decode(s, f.data());
    dec[std::size_t(s)] = f.data();
    val[std::size_t(s)] = ev.pred(f) ? 1 : 0;
  }
  for (std::uint64_t a = 0; a < nst; ++a) {
    if (!val[std::size_t(a)]) continue;
    for (std::uint64_t b = 0; b < nst; ++b) {
      if (val[std::size_t(b)]) continue;
      bool le = true;
      for (int k = 0; k < n_sites; ++k)
        if (dec[std::size_t(a)][std::size_t(k)] > dec[std::size_t(b)][std::size_t(k)]) {
          le = false;
          break;
        }
      if (le)
        throw std::invalid_argument("verify_fkg: event '" + ev.label + "' is not increasing");
    }
  }
}

}  // namespace

CheckReport verify_fkg(const ExactMeasure& measure, const std::vector<LabeledEvent>& events,
                       double tol, double bound_scale, std::uint64_t pair_scan_cap) {
  for (const LabeledEvent& ev : events)
    if (!ev.increasing_by_construction) require_increasing(measure, ev, pair_scan_cap);

  std::vector<double> single(events.size());
  for (std::size_t i = 0; i < events.size(); ++i)
    single[i] = measure.event_probability(events[i].pred);

  CheckReport rep;
  rep.name = "fkg";
  rep.tolerance = tol;
  rep.inputs = params_json(measure.geometry(), measure.params());
  rep.inputs["events"] = events.size();
  rep.inputs["tol"] = tol;
  rep.inputs["bound_scale"] = bound_scale;
  for (std::size_t i = 0; i < events.size(); ++i)
    for (std::size_t j = i; j < events.size(); ++j) {
      double joint = measure.event_probability([&](const HeightField& f) {
        return events[i].pred(f) && events[j].pred(f);
      });
      double prod = bound_scale * single[i] * single[j];
      // joint >= prod - tol
      rep.add(events[i].label + " & " + events[j].label, joint, prod, joint - prod);
    }
  return rep;
}

CheckReport verify_sandwich(const BoxGeometry& geom, const ModelParams& params,
                            const std::vector<LabeledEvent>& events, double ratio_tol,
                            double certify_tol) {
  params.validate();
  if (params.mode != ConstraintMode::FloorCeiling)
    throw std::invalid_argument("verify_sandwich: params must carry the ceiling (FloorCeiling)");

  ExactMeasure ceiling = ExactMeasure::enumerate(geom, params);

  ModelParams floor_params = params;
  floor_params.mode = ConstraintMode::Floor;
  auto under_ceiling = [&](const HeightField& f) {
    for (int h : f.data())
      if (h > params.n_plus) return false;
    return true;
  };

  // grow the floor window until every reported value is stable
  const int w0 = int(std::ceil(std::pow(45.0 / (4.0 * params.beta), 1.0 / params.p))) + 1;
  std::vector<double> prev, vals(events.size() + 1);
  int hi = 0;
  double drift = 0.0;
  std::optional<ExactMeasure> floor;
  for (int grow = 0; grow <= 6; ++grow) {
    hi = params.n_plus + w0 + grow;
    floor.emplace(ExactMeasure::enumerate(geom, floor_params, EnumWindow{0, hi}));
    for (std::size_t i = 0; i < events.size(); ++i)
      vals[i] = floor->event_probability(events[i].pred);
    vals[events.size()] = floor->event_probability(under_ceiling);
    if (grow > 0) {
      drift = 0.0;
      for (std::size_t i = 0; i < vals.size(); ++i)
        drift = std::max(drift, std::abs(vals[i] - prev[i]));
      if (drift < certify_tol) break;
      if (grow == 6)
        throw resource_error("verify_sandwich: floor window did not certify below " +
                             std::to_string(certify_tol));
    }
    prev = vals;
  }

  const double mass_under = vals[events.size()];
  const double expected_ratio = 1.0 / mass_under;

  CheckReport rep;
  rep.name = "sandwich";
  rep.inputs = params_json(geom, params);
  rep.inputs["events"] = events.size();
  rep.inputs["ratio_tol"] = ratio_tol;
  rep.inputs["floor_window_hi"] = hi;
  rep.inputs["certified_drift"] = drift;
  rep.inputs["floor_mass_under_ceiling"] = mass_under;
  for (std::size_t i = 0; i < events.size(); ++i) {
    double bar = vals[i];
    double ceil_p = ceiling.event_probability(events[i].pred);
    rep.add("left " + events[i].label, ceil_p - bar, 0.0, ceil_p - bar);
    if (bar > 0.0) {
      double ratio = ceil_p / bar;
      rep.add("ratio " + events[i].label, ratio, expected_ratio,
              ratio_tol - std::abs(ratio - expected_ratio));
    } else {
      rep.add("zero " + events[i].label, ceil_p, 0.0, ceil_p == 0.0 ? 0.0 : -1.0);
    }
  }
  return rep;
}

CheckReport verify_detailed_balance(const BoxGeometry& geom, const ModelParams& params,
                                    double tol) {
  params.validate();
  if (params.mode != ConstraintMode::FloorCeiling)
    throw std::invalid_argument(
        "verify_detailed_balance: exact kernel needs the finite FloorCeiling state space");

  ExactMeasure m = ExactMeasure::enumerate(geom, params);
  const std::uint64_t nst = m.state_count();
  if (nst > 1024)
    throw resource_error("verify_detailed_balance: " + std::to_string(nst) +
                         " states exceed the dense-kernel cap 1024");
  const int n_sites = geom.site_count();
  const StateIndexer& ix = m.indexer();

  // flow(x, y) = pi(x) P(x, y) over single-site moves (self-moves included)
  std::vector<double> flow(std::size_t(nst * nst), 0.0);
  HeightField f(geom);
  for (std::uint64_t s = 0; s < nst; ++s) {
    ix.decode(s, f.data());
    double pi_s = m.probability_of_index(s);
    for (int k = 0; k < n_sites; ++k) {
      Site site = geom.site_at(k);
      LocalDistribution d = heat_bath_distribution(f, site, params);
      int old_h = f.at_index(k);
      for (int h = d.lo; h <= d.hi(); ++h) {
        std::uint64_t t = s + (std::uint64_t(h) - std::uint64_t(old_h)) * ix.place(k);
        flow[std::size_t(s * nst + t)] +=
            pi_s * d.probs[std::size_t(h - d.lo)] / double(n_sites);
      }
    }
  }

  double residual = 0.0;
  long long pairs = 0;
  for (std::uint64_t s = 0; s < nst; ++s)
    for (std::uint64_t t = s + 1; t < nst; ++t) {
      double a = flow[std::size_t(s * nst + t)];
      double b = flow[std::size_t(t * nst + s)];
      if (a == 0.0 && b == 0.0) continue;
      ++pairs;
      residual = std::max(residual, std::abs(a - b));
    }

  CheckReport rep;
  rep.name = "detailed_balance";
  rep.inputs = params_json(geom, params);
  rep.inputs["tol"] = tol;
  rep.inputs["state_pairs_with_flow"] = pairs;
  rep.add("max residual", residual, tol, tol - residual);
  return rep;
}

CheckReport verify_coupling_order(const BoxGeometry& geom, const ModelParams& params, int sweeps,
                                  RngStream rng) {
  params.validate();
  if (params.mode != ConstraintMode::FloorCeiling)
    throw std::invalid_argument("verify_coupling_order: replicas need the FloorCeiling bounds");

  HeightField fields[3] = {HeightField(geom, 0), HeightField(geom, 0),
                           HeightField(geom, params.n_plus)};
  for (int k = 0; k < geom.site_count(); ++k)
    fields[1].set_index(k, int(rng.next_below(std::uint64_t(params.n_plus) + 1)));

  const std::uint64_t steps = std::uint64_t(sweeps) * std::uint64_t(geom.site_count());
  std::vector<double> scratch;
  long long violations = 0;
  std::string first;
  for (std::uint64_t t = 0; t < steps; ++t) {
    UpdateDraw d = draw_update(rng, geom.site_count());
    grand_coupled_step(std::span<HeightField>(fields, 3), params, d, scratch);
    int b = fields[0].at_index(d.site_index);
    int mdl = fields[1].at_index(d.site_index);
    int tp = fields[2].at_index(d.site_index);
    if (b > mdl || mdl > tp) {
      ++violations;
      if (first.empty())
        first = "step " + std::to_string(t) + " site " + std::to_string(d.site_index) + ": " +
                std::to_string(b) + "," + std::to_string(mdl) + "," + std::to_string(tp);
    }
  }
  bool final_ok = leq(fields[0], fields[1]) && leq(fields[1], fields[2]);

  CheckReport rep;
  rep.name = "coupling_order";
  rep.inputs = params_json(geom, params);
  rep.inputs["sweeps"] = sweeps;
  rep.inputs["steps"] = steps;
  rep.inputs["seed"] = rng.master_seed();
  rep.inputs["stream"] = rng.stream_id();
  if (!first.empty()) rep.inputs["first_violation"] = first;
  rep.add("updated-site order violations", double(violations), 0.0, -double(violations));
  rep.add("final fields ordered", final_ok ? 1.0 : 0.0, 1.0, final_ok ? 0.0 : -1.0);
  return rep;
}

}  // namespace psos
