#include "catch_amalgamated.hpp"

#include <cmath>
#include <sstream>

#include "skewprod/skew_engine.hpp"

using namespace skewprod;
using Catch::Approx;

namespace {

std::vector<double> values(const Orbit& o) {
  std::vector<double> v;
  for (const auto& s : o.samples) v.push_back(s.value);
  return v;
}

int sign(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

}  // namespace

TEST_CASE("forward orbit examples", "[engine]") {
  const auto walk = families::symmetric_walk();
  const auto w = word_of({2, 2, 1});

  const auto none = forward_orbit(walk, w.view(), 0.3, 0, Coordinate::plain);
  REQUIRE(none.samples.size() == 1);
  CHECK(none.samples[0].step == 0);
  CHECK(none.samples[0].value == 0.3);

  const auto o = forward_orbit(walk, w.view(), 0.0, 3, Coordinate::logit);
  CHECK(values(o) == std::vector<double>{0, 1, 2, 1});

  const auto kan = families::kan();
  const auto one = word_of({1});
  CHECK(forward_orbit(kan, one.view(), 0.5, 1, Coordinate::plain).samples.back().value == Approx(0.375));
  CHECK(forward_orbit(kan, one.view(), logit(0.5), 1, Coordinate::logit).samples.back().value ==
        Approx(logit(0.375)).epsilon(1e-14));

  CHECK_THROWS_AS(forward_orbit(kan, one.view(), 0.5, 2, Coordinate::plain), std::length_error);
}

TEST_CASE("stride sampling", "[engine]") {
  const auto kan = families::kan();
  const auto w = sample_word(0.5, 100, 3, 3);
  const auto full = forward_orbit(kan, w.view(), 0.4, 100, Coordinate::plain);
  const auto sparse = forward_orbit(kan, w.view(), 0.4, 100, Coordinate::plain, 7);
  for (const auto& s : sparse.samples) {
    CHECK(s.step % 7 == 0);
    CHECK(s.value == full.samples[s.step].value);
  }
  CHECK(sparse.samples.size() == 15);
}

TEST_CASE("pullback examples", "[engine]") {
  const auto walk = families::symmetric_walk();
  CHECK(pullback_point(walk, {}, 0.25, Coordinate::plain) == 0.25);

  const auto kan = families::kan();
  const auto past = word_of({2, 1});
  CHECK(pullback_point(kan, past.view(), 0.3, Coordinate::plain) ==
        forward_orbit(kan, past.view(), 0.3, 2, Coordinate::plain).samples.back().value);

  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = sample_word(0.5, 10, 8, s);
    const auto twos = std::count(p.symbols.begin(), p.symbols.end(), Symbol::two);
    CHECK(pullback_point(walk, p.view(), 0.75, Coordinate::logit) == 0.75 + static_cast<double>(2 * twos - 10));
  }
}

TEST_CASE("inverse orbit examples", "[engine]") {
  const auto walk = families::symmetric_walk();
  const auto kan = families::kan();
  CHECK(inverse_orbit(kan, {}, 0.6, Coordinate::plain).samples.front().value == 0.6);

  const auto past = sample_word(0.5, 40, 2, 2);
  const auto inv = inverse_orbit(walk, past.view(), 1.5, Coordinate::logit);
  REQUIRE(inv.samples.size() == 41);
  double expect = 1.5;
  for (std::size_t k = 1; k <= 40; ++k) {
    // undo the newest symbol first: symbol one (down map) is undone by +1
    expect += past[40 - k] == Symbol::one ? 1.0 : -1.0;
    CHECK(inv.samples[k].value == expect);
  }

  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto p = sample_word(0.5, 30, 12, s);
    const double y0 = 0.05 + 0.9 * CounterRng(12, 1000 + s).uniform(0);
    const double back = inverse_orbit(kan, p.view(), y0, Coordinate::plain).samples.back().value;
    if (back > 1e-12 && back < 1 - 1e-12) {
      CHECK(pullback_point(kan, p.view(), back, Coordinate::plain) == Approx(y0).margin(1e-10));
    }
    const double yl = logit(y0);
    const double back_logit = inverse_orbit(kan, p.view(), yl, Coordinate::logit).samples.back().value;
    CHECK(pullback_point(kan, p.view(), back_logit, Coordinate::logit) == Approx(yl).margin(1e-9));
  }
}

TEST_CASE("cocycle law", "[engine][property]") {
  for (const auto& fam : {families::kan(), families::inverse_kan(), families::onoff(), families::symmetric_walk()}) {
    for (std::uint64_t s = 0; s < 30; ++s) {
      CounterRng rng(99, s);
      const auto m = static_cast<std::uint64_t>(rng.uniform(0) * 100);
      const auto n = static_cast<std::uint64_t>(rng.uniform(1) * 100);
      const double x = 0.05 + 0.9 * rng.uniform(2);
      const auto w = sample_word(0.5, m + n, 99, 1000 + s);

      const double direct = forward_orbit(fam, w.view(), x, m + n, Coordinate::plain).samples.back().value;
      const double mid = forward_orbit(fam, w.view(), x, m, Coordinate::plain).samples.back().value;
      const auto tail = shift(w, m);
      const double split = forward_orbit(fam, tail.view(), mid, n, Coordinate::plain).samples.back().value;
      CHECK(std::fabs(direct - split) <= 1e-10);

      const double dl = forward_orbit(fam, w.view(), logit(x), m + n, Coordinate::logit).samples.back().value;
      const double ml = forward_orbit(fam, w.view(), logit(x), m, Coordinate::logit).samples.back().value;
      const double sl = forward_orbit(fam, tail.view(), ml, n, Coordinate::logit).samples.back().value;
      CHECK(std::fabs(dl - sl) <= 1e-9);
    }
  }
}

TEST_CASE("monotone duality", "[engine][property]") {
  const auto fam = families::kan();
  int checked = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    CounterRng rng(5, s);
    const auto n = 1 + static_cast<std::uint64_t>(rng.uniform(0) * 30);
    const double x = rng.uniform(1), y = rng.uniform(2);
    const auto past = sample_word(0.5, n, 6, s);
    const double inv = inverse_orbit(fam, past.view(), logit(y), Coordinate::logit).samples.back().value;
    const double lhs = logistic(inv) - x;
    const double rhs = pullback_point(fam, past.view(), x, Coordinate::plain) - y;
    if (std::fabs(lhs) > 1e-9 && std::fabs(rhs) > 1e-9) {
      CHECK(sign(lhs) == -sign(rhs));
      ++checked;
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("fiber monotonicity", "[engine][property]") {
  const auto fam = families::onoff();
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto w = sample_word(0.5, 200, 7, s);
    const auto a = forward_orbit(fam, w.view(), logit(0.3), 200, Coordinate::logit, 10);
    const auto b = forward_orbit(fam, w.view(), logit(0.30001), 200, Coordinate::logit, 10);
    for (std::size_t k = 0; k < a.samples.size(); ++k) CHECK(a.samples[k].value < b.samples[k].value);
  }
}

TEST_CASE("plain and logit orbits agree", "[engine][property]") {
  for (const auto& fam : {families::kan(), families::inverse_kan(), families::onoff()}) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto w = sample_word(0.5, 500, 31, s);
      const auto plain = forward_orbit(fam, w.view(), 0.37, 500, Coordinate::plain);
      const auto lg = forward_orbit(fam, w.view(), logit(0.37), 500, Coordinate::logit);
      for (std::size_t k = 0; k < plain.samples.size(); ++k) {
        const double v = plain.samples[k].value;
        if (v < 1e-12 || v > 1 - 1e-12) break;
        CHECK(std::fabs(logistic(lg.samples[k].value) - v) <= 1e-8);
      }
    }
  }
}

TEST_CASE("log coordinate orbit", "[engine]") {
  const auto walk = families::symmetric_walk();
  const auto w = word_of({1, 1, 1, 1});
  const auto o = forward_orbit(walk, w.view(), std::log(0.5), 4, Coordinate::log);
  for (const auto& s : o.samples) CHECK(s.value <= 0.0);
  CHECK(o.samples.back().value == Approx(log_from_logit(-4.0)).epsilon(1e-14));
}

TEST_CASE("orbit csv", "[engine]") {
  const auto o = forward_orbit(families::symmetric_walk(), word_of({2}).view(), 0.0, 1, Coordinate::logit);
  std::ostringstream os;
  write_orbit_csv(os, o);
  CHECK(os.str() == "step,value,coordinate\n0,0,logit\n1,1,logit\n");
}
