#include "doctest.h"
#include "psos/gibbs.hpp"
#include "psos/rng.hpp"

#include <cmath>
#include <vector>

using namespace psos;

namespace {

// Independent reference: loop over ordered pairs (x, y in box-or-ring), count
// each unordered bond from its lexicographically smaller endpoint. Written
// deliberately differently from the library walk.
double naive_energy(const HeightField& f, const ModelParams& mp) {
  const BoxGeometry& g = f.geometry();
  const int L = g.side();
  auto value = [&](Site s) { return g.contains(s) ? f.at(s) : mp.bc.value_at(s); };
  double total = 0;
  for (int y = 0; y <= L + 1; ++y) {
    for (int x = 0; x <= L + 1; ++x) {
      Site s{x, y};
      for (Site t : {Site{x + 1, y}, Site{x, y + 1}}) {
        bool s_in = g.contains(s), t_in = g.contains(t);
        if (!s_in && !t_in) continue;
        bool s_ok = s_in || g.on_outer_boundary(s);
        bool t_ok = t_in || g.on_outer_boundary(t);
        if (!s_ok || !t_ok) continue;
        double term = std::pow(std::abs(double(value(s) - value(t))), mp.p);
        total += (s_in && t_in && mp.bond_double_count) ? 2 * term : term;
      }
    }
  }
  return total;
}

HeightField random_field(const BoxGeometry& g, RngStream& r, int lo, int hi) {
  HeightField f(g);
  for (int i = 0; i < g.site_count(); ++i)
    f.set_index(i, lo + int(r.next_below(std::uint64_t(hi - lo + 1))));
  return f;
}

}  // namespace

TEST_SUITE("gibbs") {

TEST_CASE("flat field at the boundary height has zero energy") {
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    ModelParams mp;
    mp.p = p;
    mp.mode = ConstraintMode::Free;
    HeightField f(BoxGeometry(4), 0);
    CHECK(total_energy(f, mp) == 0.0);
  }
}

TEST_CASE("single spike on 3x3, p=2: energy 4") {
  ModelParams mp;
  mp.p = 2;
  mp.mode = ConstraintMode::Free;
  HeightField f(BoxGeometry(3), 0);
  f.set({2, 2}, 1);
  CHECK(total_energy(f, mp) == 4.0);
  // and exact delta back down
  CHECK(energy_delta(f, {2, 2}, 0, mp) == -4.0);
  CHECK(energy_delta(f, {2, 2}, 1, mp) == 0.0);
}

TEST_CASE("all-ones on 2x2, p=1.5: eight unit boundary gradients") {
  ModelParams mp;
  mp.p = 1.5;
  mp.mode = ConstraintMode::Free;
  HeightField f(BoxGeometry(2), 1);
  // interior bonds are flat; each of the four sites meets the ring twice
  CHECK(total_energy(f, mp) == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(naive_energy(f, mp) == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("total_energy matches the independent bond walk on random fields") {
  RngStream r(2024, 1);
  for (double p : {1.0, 1.5, 2.0, 2.7, 3.0}) {
    for (bool dc : {false, true}) {
      ModelParams mp;
      mp.p = p;
      mp.mode = ConstraintMode::Free;
      mp.bond_double_count = dc;
      mp.bc = BoundaryCondition::constant(1);
      for (int trial = 0; trial < 40; ++trial) {
        HeightField f = random_field(BoxGeometry(4), r, -3, 4);
        double e = total_energy(f, mp);
        CHECK(e == doctest::Approx(naive_energy(f, mp)).epsilon(1e-12));
        CHECK(e >= 0.0);
      }
    }
  }
}

TEST_CASE("integer p gives exactly integral energies") {
  RngStream r(5, 5);
  for (double p : {1.0, 2.0, 3.0}) {
    ModelParams mp;
    mp.p = p;
    mp.mode = ConstraintMode::Free;
    for (int trial = 0; trial < 20; ++trial) {
      HeightField f = random_field(BoxGeometry(3), r, -5, 5);
      double e = total_energy(f, mp);
      CHECK(e == std::floor(e));
    }
  }
}

TEST_CASE("energy_delta equals recomputation for random single-site moves") {
  RngStream r(99, 0);
  BoxGeometry g(4);
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    ModelParams mp;
    mp.p = p;
    mp.mode = ConstraintMode::Free;
    mp.bc = BoundaryCondition::constant(0);
    for (int trial = 0; trial < 2500; ++trial) {
      HeightField f = random_field(g, r, -3, 3);
      Site x = g.site_at(int(r.next_below(std::uint64_t(g.site_count()))));
      int new_h = -4 + int(r.next_below(9));
      double delta = energy_delta(f, x, new_h, mp);
      HeightField moved = f;
      moved.set(x, new_h);
      double full = total_energy(moved, mp) - total_energy(f, mp);
      CHECK(delta == doctest::Approx(full).epsilon(1e-10));
      if (mp.integer_p()) CHECK(delta == full);  // integer path is exact
    }
  }
}

TEST_CASE("energy_delta only sees the four incident bonds") {
  // moving far-apart sites produces additive deltas
  RngStream r(7, 7);
  BoxGeometry g(5);
  ModelParams mp;
  mp.p = 2;
  mp.mode = ConstraintMode::Free;
  for (int trial = 0; trial < 200; ++trial) {
    HeightField f = random_field(g, r, -2, 2);
    double d1 = energy_delta(f, {1, 1}, 3, mp);
    double d2 = energy_delta(f, {5, 5}, -3, mp);
    HeightField moved = f;
    moved.set({1, 1}, 3);
    moved.set({5, 5}, -3);
    CHECK(total_energy(moved, mp) - total_energy(f, mp) == doctest::Approx(d1 + d2).epsilon(1e-12));
  }
}

TEST_CASE("constraint checks") {
  ModelParams mp;
  mp.mode = ConstraintMode::FloorCeiling;
  mp.n_plus = 2;
  HeightField f(BoxGeometry(2), 0);
  CHECK(heights_satisfy(f, mp));
  f.set({1, 1}, 3);
  CHECK(!heights_satisfy(f, mp));
  CHECK_THROWS_AS(total_energy(f, mp), constraint_error);
  f.set({1, 1}, -1);
  CHECK(!heights_satisfy(f, mp));
  mp.mode = ConstraintMode::Free;
  CHECK(heights_satisfy(f, mp));
}

TEST_CASE("gibbs weight: flat is 1; log and linear forms agree") {
  ModelParams mp;
  mp.p = 2;
  mp.beta = 0.5;
  mp.mode = ConstraintMode::Free;
  HeightField f(BoxGeometry(2), 0);
  CHECK(gibbs_weight(f, mp) == 1.0);
  f.set({1, 1}, 1);
  double lw = log_gibbs_weight(f, mp);
  CHECK(std::log(gibbs_weight(f, mp)) == doctest::Approx(lw).epsilon(1e-12));
  CHECK(lw == doctest::Approx(-0.5 * 4.0).epsilon(1e-14));
}

TEST_CASE("heat bath on a single site: explicit three-point law") {
  // L=1, zero BC, p=1, beta=1, ceiling 2: energies 0, 4, 8
  ModelParams mp;
  mp.p = 1;
  mp.beta = 1;
  mp.mode = ConstraintMode::FloorCeiling;
  mp.n_plus = 2;
  HeightField f(BoxGeometry(1), 0);
  LocalDistribution d = heat_bath_distribution(f, {1, 1}, mp);
  CHECK(d.lo == 0);
  CHECK(d.probs.size() == 3);
  double z = 1 + std::exp(-4.0) + std::exp(-8.0);
  CHECK(d.probs[0] == doctest::Approx(1 / z).epsilon(1e-14));
  CHECK(d.probs[1] == doctest::Approx(std::exp(-4.0) / z).epsilon(1e-14));
  CHECK(d.probs[2] == doctest::Approx(std::exp(-8.0) / z).epsilon(1e-14));
}

TEST_CASE("heat bath distributions are normalized") {
  RngStream r(11, 3);
  BoxGeometry g(3);
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    for (auto mode : {ConstraintMode::Free, ConstraintMode::Floor, ConstraintMode::FloorCeiling}) {
      ModelParams mp;
      mp.p = p;
      mp.beta = 0.8;
      mp.mode = mode;
      mp.n_plus = 3;
      for (int trial = 0; trial < 30; ++trial) {
        HeightField f = mode == ConstraintMode::Free ? random_field(g, r, -2, 2)
                                                     : random_field(g, r, 0, 3);
        Site x = g.site_at(int(r.next_below(9)));
        LocalDistribution d = heat_bath_distribution(f, x, mp);
        double sum = 0;
        for (double w : d.probs) {
          CHECK(w >= 0.0);
          sum += w;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("free-mode support window and mode placement") {
  ModelParams mp;
  mp.p = 1;
  mp.beta = 35;  // W = ceil(1) + 1 = 2
  mp.mode = ConstraintMode::Free;
  CHECK(mp.free_window_halfwidth() == 2);
  mp.bc = BoundaryCondition::constant(5);
  HeightField f(BoxGeometry(1), 0);
  auto [lo, hi] = local_support(f, {1, 1}, mp);
  CHECK(lo == 3);
  CHECK(hi == 7);
  LocalDistribution d = heat_bath_distribution(f, {1, 1}, mp);
  // all four neighbors sit at 5: the conditional peaks there, symmetrically
  int mode_h = d.lo;
  for (std::size_t i = 0; i < d.probs.size(); ++i)
    if (d.probs[i] > d.probs[std::size_t(mode_h - d.lo)]) mode_h = d.lo + int(i);
  CHECK(mode_h == 5);
  CHECK(d.probs[std::size_t(4 - d.lo)] == doctest::Approx(d.probs[std::size_t(6 - d.lo)]).epsilon(1e-13));
}

TEST_CASE("floor-mode support is clipped at zero") {
  ModelParams mp;
  mp.p = 2;
  mp.beta = 2;
  mp.mode = ConstraintMode::Floor;
  HeightField f(BoxGeometry(2), 0);
  auto [lo, hi] = local_support(f, {1, 1}, mp);
  CHECK(lo == 0);
  CHECK(hi == mp.free_window_halfwidth());
}

TEST_CASE("symmetric neighbors give a symmetric conditional") {
  // 2x2 ceiling-2 box, p=2: site (1,1) sees neighbors {0,2} in box and {0,2} on
  // the ring => heights 0 and 2 are exchangeable.
  ModelParams mp;
  mp.p = 2;
  mp.beta = 1.3;
  mp.mode = ConstraintMode::FloorCeiling;
  mp.n_plus = 2;
  BoxGeometry g(2);
  std::vector<std::pair<Site, int>> ring;
  for (Site s : g.outer_boundary()) ring.push_back({s, 0});
  for (auto& [s, v] : ring)
    if (s == Site{1, 0}) v = 2;  // north neighbor of (1,1)
  mp.bc = BoundaryCondition::from_map(g, ring);
  HeightField f(g, 0);
  f.set({2, 1}, 2);
  LocalDistribution d = heat_bath_distribution(f, {1, 1}, mp);
  CHECK(d.probs[0] == doctest::Approx(d.probs[2]).epsilon(1e-13));
  CHECK(d.probs[1] > d.probs[0]);
}

TEST_CASE("quantile is the inverse CDF") {
  LocalDistribution d;
  d.lo = -1;
  d.probs = {0.25, 0.5, 0.25};
  CHECK(d.quantile(0.0) == -1);
  CHECK(d.quantile(0.2499) == -1);
  CHECK(d.quantile(0.25) == 0);
  CHECK(d.quantile(0.7499) == 0);
  CHECK(d.quantile(0.75) == 1);
  CHECK(d.quantile(0.999999) == 1);
  CHECK(d.cdf(-2) == 0.0);
  CHECK(d.cdf(-1) == doctest::Approx(0.25));
  CHECK(d.cdf(0) == doctest::Approx(0.75));
  CHECK(d.cdf(1) == 1.0);
}

TEST_CASE("sample path equals distribution + quantile path") {
  RngStream r(21, 8);
  BoxGeometry g(3);
  ModelParams mp;
  mp.p = 1.5;
  mp.beta = 1.1;
  mp.mode = ConstraintMode::Free;
  std::vector<double> scratch;
  for (int trial = 0; trial < 300; ++trial) {
    HeightField f = random_field(g, r, -2, 2);
    Site x = g.site_at(int(r.next_below(9)));
    double u = r.next_unit();
    CHECK(heat_bath_sample(f, x, u, mp, scratch) ==
          heat_bath_distribution(f, x, mp).quantile(u));
  }
}

TEST_CASE("stochastic monotonicity in the neighbor heights (exhaustive)") {
  // Site (1,1) on a 2x2 ceiling box: two in-box neighbors (a, b) and two ring
  // neighbors (c, d). For coordinatewise-ordered neighbor tuples, the CDFs must
  // be ordered: F_high(h) <= F_low(h) for every h.
  BoxGeometry g(2);
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    for (double beta : {0.7, 2.0}) {
      const int n_plus = 2;
      auto cdf_for = [&](int a, int b, int c, int d) {
        ModelParams mp;
        mp.p = p;
        mp.beta = beta;
        mp.mode = ConstraintMode::FloorCeiling;
        mp.n_plus = n_plus;
        std::vector<std::pair<Site, int>> ring;
        for (Site s : g.outer_boundary()) {
          int v = 0;
          if (s == Site{1, 0}) v = c;
          if (s == Site{0, 1}) v = d;
          ring.push_back({s, v});
        }
        mp.bc = BoundaryCondition::from_map(g, ring);
        HeightField f(g, 0);
        f.set({2, 1}, a);
        f.set({1, 2}, b);
        LocalDistribution dist = heat_bath_distribution(f, {1, 1}, mp);
        std::vector<double> cdf(std::size_t(n_plus) + 1);
        double cum = 0;
        for (int h = 0; h <= n_plus; ++h) {
          cum += dist.probs[std::size_t(h)];
          cdf[std::size_t(h)] = cum;
        }
        return cdf;
      };
      // enumerate tuples and their one-step raises; transitivity covers the rest
      for (int a = 0; a <= n_plus; ++a)
        for (int b = 0; b <= n_plus; ++b)
          for (int c = 0; c <= n_plus; ++c)
            for (int d = 0; d <= n_plus; ++d) {
              auto base = cdf_for(a, b, c, d);
              int raise[4][4] = {{a + 1, b, c, d}, {a, b + 1, c, d}, {a, b, c + 1, d},
                                 {a, b, c, d + 1}};
              for (auto& t : raise) {
                if (t[0] > n_plus || t[1] > n_plus || t[2] > n_plus || t[3] > n_plus) continue;
                auto up = cdf_for(t[0], t[1], t[2], t[3]);
                for (int h = 0; h <= n_plus; ++h)
                  CHECK(up[std::size_t(h)] <= base[std::size_t(h)] + 1e-12);
              }
            }
    }
  }
}

}  // TEST_SUITE
