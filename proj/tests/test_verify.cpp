#include "doctest.h"
#include "psos/verify.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

using namespace psos;

namespace {

ModelParams make_params(double p, double beta, ConstraintMode mode, int n_plus = 1) {
  ModelParams mp;
  mp.p = p;
  mp.beta = beta;
  mp.mode = mode;
  mp.n_plus = n_plus;
  return mp;
}

// bond set of a circuit, as (lower-left vertex, vertical) triples
using Bond = std::tuple<int, int, bool>;
std::set<Bond> circuit_bonds(const Contour& c) {
  std::set<Bond> out;
  const auto& v = c.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    DualVertex a = v[i], b = v[(i + 1) % v.size()];
    if (b.x < a.x || b.y < a.y) std::swap(a, b);
    out.insert({a.x, a.y, b.y > a.y});
  }
  return out;
}

bool has_crossing(const Contour& c) {
  std::set<std::pair<int, int>> seen;
  for (const DualVertex& v : c.vertices())
    if (!seen.insert({v.x, v.y}).second) return true;
  return false;
}

// event predicate for "gamma is an h-contour" under zero BC
StatePredicate contour_pred(const BoxGeometry& g, const Contour& gamma, int h) {
  return [&g, &gamma, h](const HeightField& f) {
    for (Site s : gamma.inner_boundary())
      if (f.at(s) < h) return false;
    for (Site s : gamma.outer_boundary())
      if (g.contains(s) && f.at(s) > h - 1) return false;
    return true;
  };
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("contour enumeration matches the shape census") {
  for (int L : {1, 2, 3}) {
    BoxGeometry g(L);
    auto cs = enumerate_contours(g, 8);
    long long unit = 0, dom = 0, straight3 = 0, bent3 = 0, square4 = 0, bowtie = 0;
    std::set<std::set<Bond>> bond_sets;
    for (const Contour& c : cs) {
      CHECK(c.perimeter() <= 8);
      for (Site s : c.interior()) CHECK(g.contains(s));
      CHECK(bond_sets.insert(circuit_bonds(c)).second);  // all distinct
      long long a = c.interior_area();
      if (c.perimeter() == 4) {
        ++unit;
        CHECK(a == 1);
      } else if (c.perimeter() == 6) {
        ++dom;
        CHECK(a == 2);
      } else if (has_crossing(c)) {
        ++bowtie;
        CHECK(a == 2);
      } else if (a == 4) {
        ++square4;
      } else {
        CHECK(a == 3);
        int minx = c.interior()[0].x, maxx = minx, miny = c.interior()[0].y, maxy = miny;
        for (Site s : c.interior()) {
          minx = std::min(minx, s.x);
          maxx = std::max(maxx, s.x);
          miny = std::min(miny, s.y);
          maxy = std::max(maxy, s.y);
        }
        if (maxx - minx == 2 || maxy - miny == 2)
          ++straight3;
        else
          ++bent3;
      }
    }
    CHECK(unit == L * L);
    CHECK(dom == 2 * L * (L - 1));
    CHECK(straight3 == 2 * L * std::max(0, L - 2));
    CHECK(bent3 == 4 * (L - 1) * (L - 1));
    CHECK(square4 == (L - 1) * (L - 1));
    CHECK(bowtie == 2 * (L - 1) * (L - 1));
    long long want = L * L + 2 * L * (L - 1) + 2 * L * std::max(0, L - 2) +
                     4 * (L - 1) * (L - 1) + (L - 1) * (L - 1) + 2 * (L - 1) * (L - 1);
    CHECK(static_cast<long long>(cs.size()) == want);
    if (L == 3) CHECK(cs.size() == 55);
  }
}

TEST_CASE("enumerated simple contours round-trip through extraction") {
  BoxGeometry g(3);
  for (const Contour& c : enumerate_contours(g, 8)) {
    if (has_crossing(c)) continue;  // crossing circuits split into components
    HeightField f(g, 0);
    for (Site s : c.interior()) f.set(s, 1);
    auto got = extract_h_contours(f, BoundaryCondition::constant(0), 1);
    REQUIRE(got.size() == 1);
    CHECK(circuit_bonds(got[0]) == circuit_bonds(c));
    CHECK(is_h_contour(c, f, BoundaryCondition::constant(0), 1));
  }
}

TEST_CASE("peierls bound holds on the 2x2 free measure") {
  BoxGeometry g(2);
  ModelParams mp = make_params(2.0, 1.5, ConstraintMode::Free);
  CheckReport rep = verify_peierls(g, mp);
  CHECK(rep.pass());
  CHECK(rep.violations == 0);

  auto cs = enumerate_contours(g, 8);
  CHECK(cs.size() == 15);
  // count nested pairs the same way the check defines them
  long long nested = 0;
  for (const Contour& outer : cs)
    for (const Contour& inner : cs) {
      bool contained = true;
      for (Site s : inner.interior())
        if (!outer.contains_site(s)) contained = false;
      nested += contained;
    }
  CHECK(rep.checked == 2 * 15 + nested);
  CHECK(rep.inputs["nested_pairs"].get<long long>() == nested);

  // cross-check certified values against a wide-window enumeration oracle;
  // unconditional items are ordered level-major, so item i < 15 is contour i at h=1
  ExactMeasure em = ExactMeasure::enumerate(g, mp, EnumWindow{-6, 7});
  for (std::size_t i = 0; i < cs.size(); ++i) {
    double oracle = em.event_probability(contour_pred(g, cs[i], 1));
    CHECK(std::abs(rep.items[i].value - oracle) < 1e-8);
    CHECK(rep.items[i].bound == doctest::Approx(std::exp(-mp.beta * cs[i].perimeter())));
  }

  // one nested item recomputed as an oracle conditional: first unit square
  // inside the first containing 2x2 square, h=2 given h'=1
  std::size_t uni = 0;
  while (cs[uni].perimeter() != 4) ++uni;
  std::size_t big = 0;
  while (cs[big].interior_area() != 4 || has_crossing(cs[big]) ||
         !cs[big].contains_site(cs[uni].interior()[0]))
    ++big;
  std::string want_label = "h=2 g" + std::to_string(uni) + " |g|=4 | h'=1 g" +
                           std::to_string(big) + " |g|=8";
  const CheckItem* item = nullptr;
  for (const CheckItem& it : rep.items)
    if (it.label == want_label) item = &it;
  REQUIRE(item != nullptr);
  double oracle = em.conditional_probability(
      [&](const HeightField& f) { return contour_pred(g, cs[uni], 2)(f); },
      [&](const HeightField& f) { return contour_pred(g, cs[big], 1)(f); });
  CHECK(std::abs(item->value - oracle) < 1e-8);
}

TEST_CASE("peierls nested self-pairs are exact ties at p=1") {
  // for p = 1 the level shift on the interior is a weight-preserving bijection
  // from C_{g,2} & C_{g,1} onto C_{g,1}, so the conditional equals the bound;
  // the check must tolerate round-off there but the values must sit on the
  // bound to near machine precision
  BoxGeometry g(2);
  ModelParams mp = make_params(1.0, 2.0, ConstraintMode::Free);
  CheckReport rep = verify_peierls(g, mp);
  CHECK(rep.pass());
  CHECK(rep.tolerance == 1e-12);

  int ties = 0;
  for (const CheckItem& it : rep.items) {
    auto bar = it.label.find(" | ");
    if (bar == std::string::npos) continue;
    std::string head = it.label.substr(0, bar);   // "h=2 gI |g|=P"
    std::string tail = it.label.substr(bar + 3);  // "h'=1 gJ |g|=P"
    if (head.substr(0, 3) != "h=2" || tail.substr(0, 4) != "h'=1") continue;
    if (head.substr(4) != tail.substr(5)) continue;  // same contour index and perimeter
    ++ties;
    CHECK(std::abs(it.value - it.bound) <= 1e-12 * it.bound);
  }
  CHECK(ties == 15);  // every contour paired with itself one level down
}

TEST_CASE("peierls negative control and mode guard") {
  BoxGeometry g(2);
  ModelParams mp = make_params(1.0, 1.0, ConstraintMode::Free);
  PeierlsOptions opt;
  opt.nested = false;
  opt.bound_scale = 1e-3;
  CheckReport rep = verify_peierls(g, mp, opt);
  CHECK(rep.violations > 0);
  CHECK_FALSE(rep.pass());
  CHECK_THROWS_AS(verify_peierls(g, make_params(1.0, 1.0, ConstraintMode::Floor)),
                  std::invalid_argument);
}

TEST_CASE("fkg threshold pairs are positively associated") {
  BoxGeometry g(2);
  ModelParams mp = make_params(1.5, 1.0, ConstraintMode::FloorCeiling, 2);
  ExactMeasure em = ExactMeasure::enumerate(g, mp);
  std::vector<LabeledEvent> events;
  for (int k = 0; k < g.site_count(); ++k)
    for (int a = 1; a <= 2; ++a) events.push_back(threshold_event(g, g.site_at(k), a));
  CheckReport rep = verify_fkg(em, events);
  CHECK(rep.pass());
  CHECK(rep.checked == 36);  // 8 events, unordered pairs with repeats

  // inflated product bound must fail on a self-pair with non-tiny probability
  CheckReport neg = verify_fkg(em, events, 1e-12, 100.0);
  CHECK(neg.violations > 0);

  // a decreasing event is rejected by the exhaustive scan
  std::vector<LabeledEvent> bad;
  bad.push_back(LabeledEvent{"eta[1,1]==0",
                             [](const HeightField& f) { return f.at({1, 1}) == 0; }, false});
  CHECK_THROWS_AS(verify_fkg(em, bad), std::invalid_argument);

  // corollary: an increasing event and a decreasing one are negatively correlated
  double pe = em.event_probability(events[0].pred);
  double pf = em.event_probability([&](const HeightField& f) { return !events[5].pred(f); });
  double joint =
      em.event_probability([&](const HeightField& f) { return events[0].pred(f) && !events[5].pred(f); });
  CHECK(joint <= pe * pf + 1e-12);
}

TEST_CASE("sandwich holds exhaustively on 2x2 with ceiling 1") {
  BoxGeometry g(2);
  ModelParams mp = make_params(1.0, 0.7, ConstraintMode::FloorCeiling, 1);
  ExactMeasure fc = ExactMeasure::enumerate(g, mp);
  std::vector<LabeledEvent> events;
  for (std::uint64_t s = 0; s < fc.state_count(); ++s) {
    std::vector<int> target(std::size_t(g.site_count()));
    fc.indexer().decode(s, target);
    events.push_back(LabeledEvent{
        "state " + std::to_string(s),
        [target](const HeightField& f) { return f.data() == target; }, false});
  }
  CheckReport rep = verify_sandwich(g, mp, events);
  CHECK(rep.pass());
  CHECK(rep.checked == 32);  // a left and a ratio item per singleton

  // the ceiling's bite shrinks as n_plus grows: floor mass under it rises to 1
  // (p = 1 at small beta keeps the excess mass above double rounding)
  double prev_mass = 0.0;
  for (int n : {1, 2, 3}) {
    ModelParams mq = make_params(1.0, 0.5, ConstraintMode::FloorCeiling, n);
    CheckReport r = verify_sandwich(g, mq, {});
    double mass = r.inputs["floor_mass_under_ceiling"].get<double>();
    CHECK(mass > prev_mass);
    CHECK(mass < 1.0);
    prev_mass = mass;
  }

  CHECK_THROWS_AS(verify_sandwich(g, make_params(1, 1, ConstraintMode::Floor), {}),
                  std::invalid_argument);
}

TEST_CASE("heat-bath kernel satisfies detailed balance exactly") {
  BoxGeometry g(2);
  for (double p : {1.0, 1.5, 2.0, 3.0})
    for (double beta : {0.5, 2.0}) {
      ModelParams mp = make_params(p, beta, ConstraintMode::FloorCeiling, 2);
      CheckReport rep = verify_detailed_balance(g, mp);
      CHECK(rep.pass());
      CHECK(rep.items[0].value <= 1e-12);
    }
  CHECK_THROWS_AS(verify_detailed_balance(g, make_params(1, 1, ConstraintMode::Free)),
                  std::invalid_argument);
}

TEST_CASE("grand coupling keeps replicas ordered") {
  BoxGeometry g(4);
  ModelParams mp = make_params(1.5, 0.8, ConstraintMode::FloorCeiling, 3);
  CheckReport rep = verify_coupling_order(g, mp, 300, RngStream(2026, 7));
  CHECK(rep.pass());
  CHECK(rep.items[0].value == 0.0);
  CHECK(rep.items[1].value == 1.0);
}

TEST_CASE("reports serialize deterministically") {
  BoxGeometry g(2);
  ModelParams mp = make_params(2.0, 1.0, ConstraintMode::FloorCeiling, 2);
  ExactMeasure em = ExactMeasure::enumerate(g, mp);
  std::vector<LabeledEvent> events{threshold_event(g, {1, 1}, 1), threshold_event(g, {2, 2}, 2)};
  std::string a = verify_fkg(em, events).to_json().dump(2);
  std::string b = verify_fkg(em, events).to_json().dump(2);
  CHECK(a == b);
  auto j = verify_fkg(em, events).to_json(1);
  CHECK(j["items"].size() == 1);  // truncation keeps counters
  CHECK(j["checked"].get<long long>() == 3);
  CHECK(j["name"] == "fkg");
}

}  // TEST_SUITE
