#include "catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "skewprod/experiments.hpp"
#include "skewprod/measure.hpp"

using namespace skewprod;
using Catch::Approx;

namespace {

// Random interior measure with density proportional to u_k (k+1)^-gamma.
BinnedMeasure random_measure(std::size_t B, std::uint64_t seed, double gamma = 0.0, double atoms = 0.0) {
  CounterRng rng(4242, seed);
  std::vector<double> bins(B);
  double s = 0.0;
  for (std::size_t k = 0; k < B; ++k) {
    bins[k] = (0.05 + rng.uniform(k)) * std::pow(static_cast<double>(k + 1), -gamma);
    s += bins[k];
  }
  const double a0 = atoms * rng.uniform(B), a1 = atoms * rng.uniform(B + 1);
  for (auto& b : bins) b *= (1 - a0 - a1) / s;
  return BinnedMeasure(a0, std::move(bins), a1);
}

// distribution function written out from the representation
double cdf(const BinnedMeasure& m, double x) {
  if (x <= 0) return 0;
  double c = m.atom0();
  const auto b = m.bins();
  const double B = static_cast<double>(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    const double lo = static_cast<double>(k) / B, hi = static_cast<double>(k + 1) / B;
    if (x >= hi) {
      c += b[k];
    } else {
      if (x > lo) c += b[k] * (x - lo) * B;
      break;
    }
  }
  if (x >= 1) c += m.atom1();
  return c;
}

double max_abs_diff(const BinnedMeasure& a, const BinnedMeasure& b) {
  double d = std::max(std::fabs(a.atom0() - b.atom0()), std::fabs(a.atom1() - b.atom1()));
  for (std::size_t k = 0; k < a.bin_count(); ++k) d = std::max(d, std::fabs(a.bins()[k] - b.bins()[k]));
  return d;
}

}  // namespace

TEST_CASE("measure construction", "[measure]") {
  CHECK(BinnedMeasure::dirac0(8).atom0() == 1.0);
  CHECK(BinnedMeasure::dirac1(8).atom1() == 1.0);
  CHECK(BinnedMeasure::lebesgue(8).total_mass() == Approx(1.0).margin(1e-15));
  CHECK(BinnedMeasure::lebesgue(8).mass_below(0.25) == Approx(0.25));
  const auto mix = BinnedMeasure::boundary_mixture(0.3, 4);
  CHECK(mix.atom0() == 0.3);
  CHECK(mix.atom1() == Approx(0.7));
  CHECK(mix.mass_below(1e-9) == 0.3);
  CHECK(mix.mass_above(1e-9) == Approx(0.7));
}

TEST_CASE("pushforward examples", "[measure]") {
  const auto walk = families::symmetric_walk();
  const auto d0 = pushforward(BinnedMeasure::dirac0(16), walk.f_up);
  CHECK(d0.atom0() == 1.0);
  CHECK(d0.interior_mass() == 0.0);

  const auto leb = pushforward(BinnedMeasure::lebesgue(4), walk.f_up);
  const double e = std::exp(1.0);
  CHECK(leb.bins()[0] == Approx(static_cast<double>(oracle::moebius_inverse(std::exp(1.0L), 0.25L))).epsilon(1e-14));
  CHECK(leb.bins()[0] == Approx(1 / (1 + 3 * e)).epsilon(1e-14));
  CHECK(leb.bins()[0] == Approx(0.10924).margin(1e-5));
  CHECK(leb.total_mass() == Approx(1.0).margin(1e-12));

  // the distribution function at every edge is exact
  const auto kan = families::kan();
  const auto m = random_measure(64, 1);
  const auto out = pushforward(m, kan.f_down);
  for (std::size_t k = 1; k < 64; ++k) {
    const double x = k / 64.0;
    CHECK(cdf(out, x) == Approx(cdf(m, static_cast<double>(oracle::logistic_inverse(0.5L, -1, x)))).margin(1e-12));
  }
}

TEST_CASE("transfer examples", "[measure]") {
  for (const auto& fam : {families::kan(), families::inverse_kan(), families::onoff()}) {
    const auto d0 = transfer(BinnedMeasure::dirac0(32), fam);
    CHECK(d0.atom0() == 1.0);
    for (double s : {0.0, 0.3, 1.0}) {
      const auto mix = BinnedMeasure::boundary_mixture(s, 32);
      CHECK(max_abs_diff(transfer(mix, fam), mix) == 0.0);
    }
  }
  const auto m = random_measure(128, 3);
  CHECK(max_abs_diff(TransferOperator(families::kan(), 128)(m), transfer(m, families::kan())) <= 1e-16);
}

TEST_CASE("mass conservation", "[measure][property]") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto m = random_measure(200, s, 0.3, 0.2);
    for (const auto& fam : {families::kan(), families::inverse_kan(), families::onoff(), families::symmetric_walk()}) {
      CHECK(transfer(m, fam).total_mass() == Approx(1.0).margin(1e-12));
      CHECK(noisy_transfer(m, fam, 0.01).total_mass() == Approx(1.0).margin(1e-12));
      CHECK(pushforward(m, fam.f_down).total_mass() == Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("transfer is affine", "[measure][property]") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto a = random_measure(100, s, 0.2, 0.3);
    const auto b = random_measure(100, 100 + s, 0.6, 0.1);
    for (double t : {0.25, 0.5, 0.9}) {
      const auto mix = BinnedMeasure::mix(t, a, b);
      for (const auto& fam : {families::kan(), families::onoff()}) {
        CHECK(max_abs_diff(transfer(mix, fam), BinnedMeasure::mix(t, transfer(a, fam), transfer(b, fam))) <= 1e-12);
        CHECK(max_abs_diff(noisy_transfer(mix, fam, 0.05, 8),
                           BinnedMeasure::mix(t, noisy_transfer(a, fam, 0.05, 8), noisy_transfer(b, fam, 0.05, 8))) <=
              1e-12);
      }
    }
  }
}

TEST_CASE("distances", "[measure]") {
  const auto d0 = BinnedMeasure::dirac0(16), d1 = BinnedMeasure::dirac1(16), leb = BinnedMeasure::lebesgue(16);
  CHECK(distance(d0, d1, Metric::total_variation) == 1.0);
  CHECK(distance(d0, leb, Metric::total_variation) == Approx(1.0));
  CHECK(distance(d0, d1, Metric::bounded_lipschitz) == Approx(1.0));
  CHECK(distance(d0, leb, Metric::bounded_lipschitz) == Approx(0.5));
  std::vector<double> half(16, 0.0);
  for (int k = 0; k < 8; ++k) half[k] = 1.0 / 8;
  CHECK(distance(BinnedMeasure(0, half, 0), leb, Metric::bounded_lipschitz) == Approx(0.25));
  CHECK_THROWS_AS(distance(d0, BinnedMeasure::dirac0(8), Metric::total_variation), std::invalid_argument);
}

TEST_CASE("wasserstein distance against quadrature", "[measure][property]") {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const auto a = random_measure(40, s, 0.5, 0.3);
    const auto b = random_measure(40, 50 + s, 0.0, 0.3);
    const auto integrand = [&](oracle::ld x) {
      const double t = std::clamp(static_cast<double>(x), 1e-300, std::nextafter(1.0, 0.0));
      return static_cast<oracle::ld>(std::fabs(cdf(a, t) - cdf(b, t)));
    };
    // piecewise linear with kinks inside bins: integrate bin by bin
    oracle::ld w = 0;
    for (int k = 0; k < 40; ++k) w += oracle::simpson(integrand, k / 40.0L, (k + 1) / 40.0L, 400);
    CHECK(distance(a, b, Metric::bounded_lipschitz) == Approx(static_cast<double>(w)).margin(1e-8));
  }
}

TEST_CASE("Krylov-Bogolyubov averages", "[measure]") {
  SECTION("stationary start") {
    const auto kb = krylov_bogolyubov(BinnedMeasure::boundary_mixture(0.4, 64), families::kan(), 50);
    for (double r : kb.residuals) CHECK(r == 0.0);
  }
  SECTION("inverse Kan has an interior stationary measure") {
    const auto kb = krylov_bogolyubov(BinnedMeasure::lebesgue(2048), families::inverse_kan(), 10000);
    CHECK(kb.residuals.back() < 1e-3);
    CHECK(kb.average.interior_mass() >= 0.99);
    CHECK(kb.average.total_mass() == Approx(1.0).margin(1e-12));
    CHECK(lyapunov_vs_measure(families::inverse_kan(), kb.average) < 0.0);
  }
  SECTION("on-off family drifts towards zero") {
    // Mass below the first bin edge is spread back over that bin at every step,
    // which caps the concentration at a level set by B; it grows with n and B.
    const auto kb100 = krylov_bogolyubov(BinnedMeasure::lebesgue(512), families::onoff(), 100);
    const auto kb2000 = krylov_bogolyubov(BinnedMeasure::lebesgue(512), families::onoff(), 2000);
    CHECK(kb2000.average.mass_below(1.0 / 512) > kb100.average.mass_below(1.0 / 512));
    CHECK(kb2000.average.mass_above(0.5) < kb100.average.mass_above(0.5));
    const auto fine = krylov_bogolyubov(BinnedMeasure::lebesgue(8192), families::onoff(), 2000);
    CHECK(fine.average.mass_below(1.0 / 64) > kb2000.average.mass_below(1.0 / 64));
    CHECK(fine.average.mass_above(0.5) < kb2000.average.mass_above(0.5));
    CHECK(fine.average.atom1() == 0.0);
  }
  CHECK_THROWS_AS(krylov_bogolyubov(BinnedMeasure::lebesgue(8), families::kan(), 0), std::invalid_argument);
}

TEST_CASE("cone examples", "[measure]") {
  const ConeParams cone{std::pow(0.1, -0.5) * 1.5, 0.5, 0.1};
  REQUIRE(cone.valid());
  CHECK(cone_check(BinnedMeasure::lebesgue(256), cone).inside);

  const auto d0 = cone_check(BinnedMeasure::dirac0(256), cone);
  CHECK_FALSE(d0.inside);
  REQUIRE(d0.first_violation);
  CHECK(*d0.first_violation <= 1.0 / 256);

  // bounded density d: m([0,x)) <= d x <= c x^alpha for x <= q when c >= d q^(1 - alpha)
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto m = random_measure(256, s);
    double d = 0;
    for (double b : m.bins()) d = std::max(d, b * 256);
    const ConeParams tight{std::max(d * std::pow(0.05, 0.5), 1.01 * std::pow(0.05, -0.5)), 0.5, 0.05};
    CHECK(cone_check(m, tight).inside);
  }
  CHECK_THROWS_AS(cone_check(BinnedMeasure::lebesgue(4), ConeParams{1.0, 0.5, 0.1}), std::invalid_argument);
}

TEST_CASE("cone search", "[measure]") {
  const auto found = find_cone(families::inverse_kan(), 512);
  REQUIRE(found);
  CHECK(found->cone.valid());
  CHECK(found->contraction_zero < 1.0);
  CHECK(found->contraction_one < 1.0);
  CHECK_FALSE(find_cone(families::kan(), 512));
  CHECK_FALSE(find_cone(families::onoff(), 512));
}

TEST_CASE("cone invariance under transfer", "[measure][property]") {
  const std::size_t B = 512;
  const auto fam = families::inverse_kan();
  const auto found = find_cone(fam, B);
  REQUIRE(found);
  const TransferOperator T(fam, B);
  int members = 0;
  for (std::uint64_t s = 0; members < 100 && s < 1000; ++s) {
    const double gamma = 0.6 * CounterRng(7, s).uniform(0);
    auto m = random_measure(B, s, gamma);
    // heavier mass near 1 for half of the samples
    if (s % 2) m = BinnedMeasure::mix(0.5, m, pushforward(m, fam.inverted().f_up));
    if (!cone_check(m, found->cone).inside) continue;
    ++members;
    const auto c = cone_check(T(m), found->cone);
    CHECK(c.inside);
  }
  CHECK(members == 100);
}

TEST_CASE("noisy transfer", "[measure]") {
  const std::size_t B = 512;
  for (const auto& fam : {families::kan(), families::inverse_kan(), families::onoff()}) {
    const auto m = random_measure(B, 9, 0.2);
    CHECK(distance(noisy_transfer(m, fam, 1e-8), transfer(m, fam), Metric::total_variation) <= 1e-6);
  }
  const auto d0 = noisy_transfer(BinnedMeasure::dirac0(100), families::kan(), 0.1);
  CHECK(d0.atom0() == 0.0);
  CHECK(d0.atom1() == 0.0);
  CHECK(d0.mass_below(0.1) == Approx(1.0).margin(1e-12));
  // node j sends 0 to (j + 1/2) / 32 * eps
  for (int k = 0; k < 10; ++k) {
    int nodes = 0;
    for (int j = 0; j < 32; ++j) nodes += static_cast<int>((j + 0.5) / 32 * 10) == k;
    CHECK(d0.bins()[k] == Approx(nodes / 32.0).margin(1e-12));
  }

  CHECK_THROWS_AS(noisy_transfer(d0, families::kan(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(noisy_transfer(d0, families::kan(), 0.1, 1), std::invalid_argument);
}

TEST_CASE("fiber exponent of a measure", "[measure]") {
  for (const auto& fam : {families::kan(), families::onoff(), families::logistic_pair(0.2, 0.5)}) {
    const double L0 = boundary_exponent(fam, Endpoint::zero), L1 = boundary_exponent(fam, Endpoint::one);
    CHECK(lyapunov_vs_measure(fam, BinnedMeasure::dirac0(16)) == Approx(L0).margin(1e-15));
    CHECK(lyapunov_vs_measure(fam, BinnedMeasure::boundary_mixture(0.5, 16)) == Approx(0.5 * (L0 + L1)).margin(1e-15));
  }
  // midpoint rule for Lebesgue against Simpson in long double
  const auto kan = families::kan();
  const auto f = [](oracle::ld x) {
    return 0.5L * std::log(oracle::logistic_d1(0.5L, -1, x)) + 0.5L * std::log(oracle::logistic_d1(0.5L, 1, x));
  };
  CHECK(lyapunov_vs_measure(kan, BinnedMeasure::lebesgue(4096)) ==
        Approx(static_cast<double>(oracle::simpson(f, 0, 1, 2000))).margin(1e-7));
}

TEST_CASE("relative entropy", "[measure]") {
  const auto leb = BinnedMeasure::lebesgue(64);
  CHECK(relative_entropy(leb, leb) == 0.0);
  CHECK(std::isinf(relative_entropy(BinnedMeasure::dirac0(64), leb)));
  std::vector<double> half(64, 0.0);
  for (int k = 0; k < 32; ++k) half[k] = 1.0 / 32;
  CHECK(relative_entropy(BinnedMeasure(0, half, 0), leb) == Approx(std::log(2.0)).epsilon(1e-14));
  for (std::uint64_t s = 0; s < 10; ++s) {
    CHECK(relative_entropy(random_measure(64, s), random_measure(64, s + 30)) > 0.0);
  }
}

TEST_CASE("pullback push-forward", "[measure]") {
  const auto leb = BinnedMeasure::lebesgue(256);
  CHECK(max_abs_diff(pullback_pushforward(leb, families::kan(), {}), leb) <= 1e-15);

  SECTION("distribution function at the edges") {
    const auto past = sample_word(0.5, 12, 3, 3);
    const auto m = pullback_pushforward(leb, families::kan(), past.view());
    for (std::size_t k = 1; k < 256; ++k) {
      oracle::ld x = k / 256.0L;
      for (auto it = past.symbols.rbegin(); it != past.symbols.rend(); ++it) {
        x = oracle::logistic_inverse(0.5L, *it == Symbol::one ? -1 : 1, x);
      }
      CHECK(cdf(m, k / 256.0) == Approx(static_cast<double>(x)).margin(1e-12));
    }
  }

  SECTION("inverse Kan collapses onto the graph of the Kan maps") {
    // pullback of the inverse maps over a past is the inverse of the forward Kan
    // composition over the reversed past with symbols exchanged
    const std::size_t B = 2048, n = 200;
    const auto inv = families::inverse_kan();
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto past = sample_word(0.5, n, 21, s);
      std::vector<Symbol> rev(past.symbols.rbegin(), past.symbols.rend());
      for (auto& v : rev) v = v == Symbol::one ? Symbol::two : Symbol::one;
      const double xi = invariant_graph_estimate(families::kan(), rev, 1e-12, n);
      const auto m = pullback_pushforward(BinnedMeasure::lebesgue(B), inv, past.view());
      const double w = 1.0 / B;
      const double near = m.mass_below(std::min(1.0, xi + 2 * w)) - m.mass_below(std::max(0.0, xi - 2 * w));
      CHECK(near >= 0.99);
    }
  }

  SECTION("on-off pullbacks go to zero") {
    const std::size_t B = 128;
    std::vector<double> at_zero[3];
    const std::uint64_t ns[3] = {10, 300, 2000};
    for (std::uint64_t s = 0; s < 9; ++s) {
      const auto past = sample_word(0.5, ns[2], 5, s);
      for (int j = 0; j < 3; ++j) {
        const auto m = pullback_pushforward(BinnedMeasure::lebesgue(B), families::onoff(), past.view().last(ns[j]));
        at_zero[j].push_back(m.mass_below(1.0 / B));
      }
    }
    CHECK(median(at_zero[0]) < median(at_zero[1]));
    CHECK(median(at_zero[1]) <= median(at_zero[2]));
    CHECK(median(at_zero[2]) > 0.99);
  }
}

TEST_CASE("continuity in the probabilities", "[measure][property]") {
  const auto m = random_measure(512, 77, 0.3, 0.1);
  for (const auto& fam : {families::kan(), families::onoff()}) {
    auto moved = fam;
    moved.p1 += 1e-4;
    moved.p2 -= 1e-4;
    CHECK(distance(transfer(m, fam), transfer(m, moved), Metric::total_variation) <= 1e-3);
  }
}

TEST_CASE("push-forward preserves stochastic order", "[measure][property]") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto m1 = random_measure(128, s, 0.4, 0.2);
    const auto m2 = pushforward(m1, families::symmetric_walk().f_up);  // moved right: m1 below m2
    for (std::size_t k = 1; k < 128; ++k) REQUIRE(cdf(m1, k / 128.0) >= cdf(m2, k / 128.0) - 1e-15);
    for (const auto& f : {families::kan().f_down, families::onoff().f_up, families::inverse_kan().f_up}) {
      const auto a = pushforward(m1, f), b = pushforward(m2, f);
      for (std::size_t k = 1; k < 128; ++k) CHECK(cdf(a, k / 128.0) >= cdf(b, k / 128.0) - 1e-12);
    }
  }
}

TEST_CASE("measure csv", "[measure]") {
  std::ostringstream os;
  write_measure_csv(os, BinnedMeasure::boundary_mixture(0.25, 2));
  CHECK(os.str() == "cell_kind,left,right,mass\natom0,0,0,0.25\nbin_0,0,0.5,0\nbin_1,0.5,1,0\natom1,1,1,0.75\n");
}
