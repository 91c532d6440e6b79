#include <doctest.h>

#include <cmath>
#include <random>

#include "stableweb/aged_path.hpp"
#include "stableweb/error.hpp"
#include "stableweb/json_io.hpp"

using namespace stableweb;

namespace {

// sigma = 0, gamma == g0 and a(s) = s on [0, horizon]
AgedPath simple(double g0, double horizon = 2.0) {
  return AgedPath(0.0, PiecewisePath::constant(0.0, horizon, g0),
                  PiecewisePath::linear(0.0, horizon, 0.0, 1.0));
}

// Random valid path: gamma steps at integer/8 times, age slope 1 with upward jumps at
// odd sixteenths so the two never jump together.
AgedPath random_valid(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double sigma = -1.5 + u(rng);
  const double eps0 = 1.0 / 32.0;
  const double lo = sigma + eps0, hi = 3.0;
  std::vector<Segment> g{{lo, u(rng) * 2 - 1, 0.0}};
  for (double s = std::ceil(lo * 8) / 8; s < hi; s += 0.125)
    if (s > lo && u(rng) < 0.5) g.push_back({s, g.back().value + (u(rng) - 0.5) * 0.8, 0.0});
  std::vector<Segment> a{{lo, eps0, 1.0}};
  for (double s = std::ceil(lo * 16) / 16 + 1.0 / 32; s < hi; s += 0.125) {
    if (s <= lo || u(rng) > 0.2) continue;
    const double left = a.back().value + (s - a.back().start);
    a.push_back({s, left + u(rng), 1.0});
  }
  return AgedPath(sigma, PiecewisePath(lo, hi, g), PiecewisePath(lo, hi, a));
}

}  // namespace

TEST_CASE("validate") {
  CHECK(validate(simple(0.0)).empty());

  const AgedPath down(0.0, PiecewisePath::constant(0.0, 1.0, 0.0),
                      PiecewisePath(0.0, 1.0, {{0.0, 0.0, 1.0}, {0.5, 0.2, 1.0}}));
  const auto v = validate(down);
  REQUIRE(v.size() == 1);
  CHECK(v[0].clause == "(ii)");
  CHECK(v[0].time == 0.5);

  const AgedPath both(0.0, PiecewisePath(0.0, 1.0, {{0.0, 0.0, 0.0}, {0.5, 1.0, 0.0}}),
                      PiecewisePath(0.0, 1.0, {{0.0, 0.0, 1.0}, {0.5, 2.0, 1.0}}));
  const auto w = validate(both);
  REQUIRE(w.size() == 1);
  CHECK(w[0].clause == "(iii)");
  CHECK(w[0].time == 0.5);

  const AgedPath slow(0.0, PiecewisePath::constant(0.0, 1.0, 0.0),
                      PiecewisePath::linear(0.0, 1.0, 0.0, 0.5));
  CHECK(validate(slow).at(0).clause == "(ii)");

  const AgedPath old(0.0, PiecewisePath::constant(0.1, 1.0, 0.0),
                     PiecewisePath::linear(0.1, 1.0, 0.7, 1.0));
  CHECK(validate(old).at(0).clause == "(i)");
  const AgedPath fine(0.0, PiecewisePath::constant(0.1, 1.0, 0.0),
                      PiecewisePath::linear(0.1, 1.0, 0.1, 1.0));
  CHECK(validate(fine).empty());
}

TEST_CASE("birth_window") {
  CHECK(*birth_window(simple(0.0), 1.0) == 0.5);
  CHECK_FALSE(birth_window(simple(5.0), 1.0).has_value());
  const AgedPath jumpy(0.0, PiecewisePath::constant(0.0, 2.0, 0.0),
                       PiecewisePath(0.0, 2.0, {{0.0, 0.0, 1.0}, {0.1, 3.0, 1.0}}));
  CHECK(*birth_window(jumpy, 1.0) == 0.1);
  CHECK_THROWS_AS(birth_window(simple(0.0), 0.5), ArgumentError);
  CHECK_THROWS_AS(birth_window(simple(0.0), 3.0), ArgumentError);
}

TEST_CASE("birth_window: entering the spatial window by a slope") {
  // gamma(s) = 3 - 2s reaches 1 at s = 1; age is already large
  const AgedPath p(-1.0, PiecewisePath::linear(-0.5, 2.0, 4.0, -2.0),
                   PiecewisePath::linear(-0.5, 2.0, 0.5, 1.0));
  CHECK(*birth_window(p, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("birth_window: inclusion at ties and the left edge -t") {
  // age hits 2^-1 exactly at a segment start
  const AgedPath tie(0.0, PiecewisePath::constant(0.0, 2.0, 0.0),
                     PiecewisePath(0.0, 2.0, {{0.0, 0.0, 1.0}, {0.25, 0.5, 1.0}}));
  CHECK(*birth_window(tie, 1.0) == 0.25);
  const AgedPath early(-5.0, PiecewisePath::constant(-4.0, 2.0, 0.0),
                       PiecewisePath::linear(-4.0, 2.0, 1.0, 1.0));
  CHECK(*birth_window(early, 1.0) == -1.0);
}

TEST_CASE("project") {
  const auto tp = project(simple(0.0), 1.0);
  REQUIRE(tp);
  CHECK(tp->b == 0.5);
  CHECK(tp->t == 1.0);
  CHECK(tp->gamma.lo() == 0.5);
  CHECK(tp->gamma.hi() == 1.0);
  CHECK(tp->gamma.eval(0.75) == 0.0);
  CHECK(tp->age.eval(0.75) == 0.75);
  CHECK_FALSE(project(simple(5.0), 1.0));

  const auto tp2 = project(simple(0.0), 2.0);
  REQUIRE(tp2);
  CHECK(tp2->age.eval(tp2->b) >= 0.25);
}

TEST_CASE("project_h") {
  const AgedPath p = simple(0.0);
  for (double t : {1.0, 1.5, 2.0}) {
    const auto a = project(p, t);
    const auto b = project_h(p, t, std::exp2(-t));
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->b == b->b);
  }
  CHECK(project_h(p, 1.0, 0.25)->b == 0.25);
  CHECK_FALSE(project_h(p, 1.0, 1.5));
  CHECK_THROWS_AS(project_h(p, 1.0, 0.0), ArgumentError);
}

TEST_CASE("canonical_extension") {
  const auto tp = project(simple(0.0), 1.0);
  REQUIRE(tp);
  const auto [g, a] = canonical_extension(*tp);
  CHECK(g.lo() == -2.0);
  CHECK(g.hi() == 2.0);
  for (double s : {-2.0, 0.0, 0.5, 1.0, 2.0}) CHECK(g.eval(s) == 0.0);
  CHECK(a.eval(-2.0) == -2.0);
  CHECK(a.eval(2.0) == 2.0);
  CHECK(a.segments().front().slope == 1.0);
}

TEST_CASE("canonical extension keeps the modulus of interior jumps") {
  // gamma jumps by 1 at 0.25, well inside [b, t] = [-0.5, 1]
  const AgedPath p(-2.0, PiecewisePath(-1.0, 2.0, {{-1.0, 0.0, 0.0}, {0.25, 1.0, 0.0}}),
                   PiecewisePath::linear(-1.0, 2.0, 1.0, 1.0));
  const auto tp = project(p, 1.0);
  REQUIRE(tp);
  const auto [g, a] = canonical_extension(*tp);
  for (int n = 1; n <= 6; ++n) {
    const double d = std::exp2(-n);
    const double ext = oscillation(g, d, {-2.0, 2.0});
    CHECK(std::isfinite(ext));
    CHECK(ext == oscillation(tp->gamma, std::min(d, 1.0), {tp->b, tp->t}));
  }
}

TEST_CASE("first_age_time") {
  const AgedPath p(1.0, PiecewisePath::constant(1.0, 3.0, 0.0),
                   PiecewisePath::linear(1.0, 3.0, 0.0, 1.0));
  CHECK(*first_age_time(p, 0.125) == 1.125);
  CHECK_FALSE(first_age_time(p, 5.0));
  CHECK_THROWS_AS(first_age_time(p, 0.0), ArgumentError);
}

TEST_CASE("random valid paths: validate, lambda gaps, monotone projections") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const AgedPath p = random_valid(rng);
    CHECK(validate(p).empty());
    for (int n = 1; n <= 6; ++n) {
      const auto lo = first_age_time(p, std::exp2(-n));
      const auto hi = first_age_time(p, std::exp2(-n + 1));
      if (lo && hi) CHECK(*hi - *lo <= std::exp2(-n) + 1e-12);
    }
    std::optional<double> prev;
    for (double t : {1.0, 1.25, 1.5, 2.0, 2.5, 3.0}) {
      const auto b = birth_window(p, t);
      if (prev) {
        REQUIRE(b);
        CHECK(*b <= *prev);
      }
      if (b) prev = b;
    }
    // where b does not move, the larger projection restricted back is the smaller one
    const auto p2 = project(p, 2.0), p3 = project(p, 3.0);
    if (p2 && p3 && p2->b == p3->b) {
      const PiecewisePath g = restrict_closed(p3->gamma, p2->b, 2.0);
      const PiecewisePath a = restrict_closed(p3->age, p2->b, 2.0);
      CHECK(g.same_as(p2->gamma, 0.0));
      CHECK(a.same_as(p2->age, 0.0));
    }
  }
}

TEST_CASE("aged path json") {
  const AgedPath p = simple(0.25);
  const AgedPath q = aged_path_from_json(json::parse(to_json(p).dump()));
  CHECK(q.sigma() == 0.0);
  CHECK(q.gamma().same_as(p.gamma(), 0.0));
  CHECK(q.age().same_as(p.age(), 0.0));
}
