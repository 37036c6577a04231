#include <cmath>
#include <numbers>

#include <doctest.h>

#include "oracles.hpp"
#include "vacsep/continuum.hpp"
#include "vacsep/errors.hpp"

using namespace vacsep;
using namespace vacsep::continuum;

namespace {

oracle::Triangle as_oracle(const TriangularProfile& p, double shift = 0.0) {
  return {p.tip, p.length, shift, p.side == Side::B};
}

}  // namespace

TEST_CASE("profile shape") {
  const TriangularProfile a{0.75, 4.0, Side::A};
  CHECK(a.height() == doctest::Approx(std::sqrt(0.75)));
  const auto k = a.knots();
  CHECK(k[0] == -4.0);
  CHECK(k[1] == doctest::Approx(-1.0));
  CHECK(k[2] == 0.0);
  CHECK(a.value(-1.0) == doctest::Approx(a.height()));
  CHECK(a.value(-4.5) == 0.0);
  CHECK(a.value(0.5) == 0.0);

  const TriangularProfile b{0.75, 4.0, Side::B};
  for (double x : {0.3, 1.0, 2.2, 3.9}) {
    CHECK(b.value(x) == doctest::Approx(a.value(-x)).epsilon(1e-15));
    CHECK(b.slope(x) == doctest::Approx(-a.slope(-x)).epsilon(1e-15));
  }
  double jump_sum = 0.0;
  for (double j : a.slope_jumps()) jump_sum += j;
  CHECK(std::abs(jump_sum) < 1e-14);

  CHECK(TriangularProfile{1.0, 1.0}.violations().front() == "tip position s must lie in (0,1)");
  CHECK(TriangularProfile{0.5, -1.0}.violations().front() == "support length L must be positive");
  CHECK_THROWS_AS(TriangularProfile({0.0, 1.0}).validate(), InputError);
}

TEST_CASE("fourier transform examples") {
  const TriangularProfile p{0.75, 4.0, Side::A};
  CHECK(profile_fourier(p, 0.0).real() ==
        doctest::Approx(std::sqrt(12.0) / (2.0 * std::sqrt(2.0 * std::numbers::pi))).epsilon(1e-14));
  CHECK(std::abs(profile_fourier(p, 0.0).imag()) < 1e-15);
  CHECK(std::abs(profile_fourier(p, 1e-9) - profile_fourier(p, 0.0)) < 1e-8);

  for (double k : {2.0, 1e-3, 0.37, 11.0, 250.0}) {
    for (Side side : {Side::A, Side::B}) {
      const TriangularProfile q{0.75, 4.0, side};
      const auto got = profile_fourier(q, k);
      const auto want = oracle::fourier(as_oracle(q), k);
      INFO("k = " << k);
      CHECK(std::abs(got - want) < 1e-10);
    }
  }
}

TEST_CASE("property: transform decay bound") {
  for (double s : {0.1, 0.5, 0.84, 0.999}) {
    for (double L : {0.05, 1.0, 30.0}) {
      const TriangularProfile p{s, L};
      const double c = fourier_decay_constant(p);
      for (double k = 0.1; k < 1e5; k *= 1.37) {
        CHECK(std::abs(profile_fourier(p, k)) <= c / (k * k) * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("orthonormality") {
  for (double s : {0.2, 0.5, 0.9}) {
    CHECK(self_overlap({s, 2.5, Side::A}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(self_overlap({s, 2.5, Side::B}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(orthonormality_check({s, 2.5, 0.0}) == 0.0);
    CHECK(orthonormality_check({s, 2.5, 1.0}) == 0.0);
  }
  CHECK_THROWS_AS(orthonormality_check({0.5, 1.0, -0.2}), InputError);
}

TEST_CASE("config validation") {
  CHECK(ContinuumConfig{0.5, 1.0, -1.0}.violations() == std::vector<std::string>{"supports overlap"});
  CHECK_FALSE(ContinuumConfig{0.5, 1.0, 0.0, 0.0}.violations().empty());
  CHECK_THROWS_AS(correlations({0.5, 1.0, -1.0}), InputError);
  CHECK_THROWS_AS(correlations({1.5, 1.0, 1.0}), InputError);
}

TEST_CASE("property: momentum integrals match the position-space oracle") {
  struct Case {
    double s, L, D;
  };
  for (const Case c : {Case{0.75, 4, 2}, Case{0.5, 1, 0.5}, Case{0.9, 0.5, 0.1}, Case{0.84, 3, 0.2},
                       Case{0.6, 2, 0}}) {
    const ContinuumConfig cfg{c.s, c.L, c.D, 1.0};
    const auto a = as_oracle(cfg.profile_a());
    const auto b = as_oracle(cfg.profile_b(), c.D);
    const auto self = oracle::position_space(a, a, 1.0);
    const auto cross = oracle::position_space(a, b, 1.0);
    const auto v = correlations(cfg);
    INFO("s = " << c.s << ", L = " << c.L << ", D = " << c.D);
    CHECK(std::abs(v.qq_a - self.qq) < 1e-6);
    CHECK(std::abs(v.pp_a - self.pp) < 1e-6);
    CHECK(std::abs(v.qq_ab - cross.qq) < 1e-6);
    CHECK(std::abs(v.pp_ab - cross.pp) < 1e-6);
  }
}

TEST_CASE("property: diagnostics, uncertainty and physicality") {
  for (double s : {0.5, 0.7, 0.95}) {
    for (double L : {0.2, 1.0, 5.0}) {
      for (double D : {0.0, 0.1, 1.0}) {
        const auto r = correlation_report({s, L, D, 1.0}, {}, true);
        CHECK(r.imag_max <= 1e-12);
        CHECK(r.symmetry_mismatch <= 1e-12);
        CHECK(r.variance.qq_a * r.variance.pp_a > 0.25);
        CHECK(check_physical(r.variance));
        CHECK(r.error_estimate < 1e-9);
      }
    }
  }
}

TEST_CASE("property: large-separation behaviour") {
  const ContinuumConfig base{0.8, 1.0, 1.0, 1.0};
  const auto ref = correlations(base);
  double prev_q = INFINITY, prev_p = INFINITY;
  for (double D = 1.0; D <= 10.0; D += 1.0) {
    ContinuumConfig c = base;
    c.gap = D;
    const auto v = correlations(c);
    INFO("D = " << D);
    CHECK(std::abs(v.qq_ab) < prev_q);
    CHECK(std::abs(v.pp_ab) < prev_p);
    prev_q = std::abs(v.qq_ab);
    prev_p = std::abs(v.pp_ab);
    CHECK(v.qq_a == doctest::Approx(ref.qq_a).epsilon(1e-12));
    CHECK(v.pp_a == doctest::Approx(ref.pp_a).epsilon(1e-12));
    CHECK(epsilon_value(c) < 0.0);
    CHECK_FALSE(epsilon_continuum(c).entangled);
  }
}

TEST_CASE("property: mass scaling") {
  for (double m : {0.5, 2.0, 7.0}) {
    const double s = 0.85, L = 0.6, D = 0.05;
    const double scaled = epsilon_value({s, L, D, m});
    const double unit = epsilon_value({s, m * L, m * D, 1.0});
    CHECK(scaled == doctest::Approx(unit).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("s = 0.5 gives identical A and B roles") {
  const auto v = correlations({0.5, 1.3, 0.2, 1.0});
  CHECK(v.qq_a == v.qq_b);
  CHECK(v.pp_a == v.pp_b);
  const TriangularProfile a{0.5, 1.3, Side::A}, b{0.5, 1.3, Side::B};
  for (double x : {0.1, 0.4, 0.65, 1.0}) CHECK(a.value(-x) == doctest::Approx(b.value(x)));
  for (double k : {0.3, 2.0, 9.0}) {
    CHECK(std::abs(std::abs(profile_fourier(a, k)) - std::abs(profile_fourier(b, k))) < 1e-14);
  }
}

TEST_CASE("property: tolerance halving leaves epsilon stable") {
  for (const ContinuumConfig c : {ContinuumConfig{0.84, 4.5, 0.2}, ContinuumConfig{0.99, 0.01, 0.0},
                                  ContinuumConfig{0.6, 2.0, 1.0}}) {
    QuadratureSettings q, half;
    half.abs_tol = q.abs_tol / 2;
    half.rel_tol = q.rel_tol / 2;
    CHECK(std::abs(epsilon_value(c, q) - epsilon_value(c, half)) < 0.1 * kDefaultTolerances.eps_tol);
  }
}

TEST_CASE("entangled and separable examples") {
  const auto near = epsilon_continuum({0.84, 4.5, 0.2});
  CHECK(near.entangled);
  CHECK(near.negativity > 0.0);
  const auto far = epsilon_continuum({0.84, 4.5, 2.0});
  CHECK_FALSE(far.entangled);
  CHECK(far.negativity == 0.0);
}

TEST_CASE("quadrature failure is reported") {
  QuadratureSettings q;
  q.max_intervals = 3;
  CHECK_THROWS_AS(correlations({0.75, 4.0, 2.0}, q), QuadratureError);
}
