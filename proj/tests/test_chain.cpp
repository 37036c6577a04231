#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "vacsep/chain.hpp"
#include "vacsep/chain_optimizer.hpp"
#include "vacsep/errors.hpp"

using namespace vacsep;
using namespace vacsep::chain;

TEST_CASE("alpha_from_physical") {
  CHECK(alpha_from_physical(1.0, std::sqrt(2.0), 2) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(alpha_from_physical(1.0, std::sqrt(2.0), 88) ==
        doctest::Approx(1.0 / (1.0 + 1.0 / 7744.0)).epsilon(1e-15));
  double prev = 0.0;
  for (std::size_t n = 1; n < 5000; n *= 2) {
    const double a = alpha_from_physical(1.0, 1.0, n);
    CHECK(a > prev);
    CHECK(a < 1.0);
    prev = a;
  }
  CHECK_THROWS_AS(alpha_from_physical(0.0, 1.0, 2), InputError);
  CHECK_THROWS_AS(alpha_from_physical(1.0, -1.0, 2), InputError);
  CHECK_THROWS_AS(alpha_from_physical(1.0, 1.0, 0), InputError);
}

TEST_CASE("separation_D") {
  CHECK(separation_D(3, 5, 1.0) == doctest::Approx(0.6));
  CHECK(separation_D(0, 10, 2.0) == 0.0);
  CHECK(separation_D(16, 88, std::sqrt(2.0)) == doctest::Approx(0.2571).epsilon(1e-3));
}

TEST_CASE("ChainParams validation") {
  auto p = ChainParams::from_physical(1.0, std::sqrt(2.0), 2, 1);
  CHECK(p.sites == 50);
  CHECK(p.violations().empty());
  CHECK(p.separation() == doctest::Approx(std::sqrt(2.0) / 2));
  p.alpha = 1.2;
  REQUIRE_FALSE(p.violations().empty());
  CHECK(p.violations().front() == "alpha must lie in (0,1)");
  CHECK_THROWS_AS(p.validate(), InputError);
  p.alpha = 0.5;
  p.sites = 4;
  CHECK_FALSE(p.violations().empty());
}

TEST_CASE("ground_state examples") {
  SUBCASE("uncoupled chain") {
    ChainGroundState g(9, 0.0);
    for (std::size_t j = 0; j < 9; ++j)
      for (std::size_t l = 0; l < 9; ++l) {
        CHECK(g.qq(j, l) == doctest::Approx(j == l ? 0.5 : 0.0).epsilon(1e-15).scale(1.0));
        CHECK(g.pp(j, l) == doctest::Approx(j == l ? 0.5 : 0.0).epsilon(1e-15).scale(1.0));
      }
  }
  SUBCASE("N = 4 against the dense square root") {
    const auto [q, p] = oracle::chain_dense(4, 0.8);
    ChainGroundState g(4, 0.8);
    CHECK(std::abs(g.qq(0, 0) - q(0, 0)) <= 1e-12);
    CHECK(std::abs(g.pp(0, 0) - p(0, 0)) <= 1e-12);
  }
  SUBCASE("N = 2 normal modes") {
    ChainGroundState g(2, 0.8);
    const double expect = 0.25 * (1 / std::sqrt(0.2) + 1 / std::sqrt(1.8));
    CHECK(g.qq(0, 0) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(g.qq(0, 0) == doctest::Approx(0.74535599249993).epsilon(1e-12));
  }
  CHECK_THROWS_AS(ChainGroundState(10, 1.0), DivergenceError);
  CHECK_THROWS_AS(ChainGroundState(10, -0.1), InputError);
  CHECK_THROWS_AS(ChainGroundState(0, 0.5), InputError);
}

TEST_CASE("property: circulant correlations match the dense oracle for N <= 8") {
  for (int n = 1; n <= 8; ++n) {
    for (double alpha : {0.1, 0.5, 0.9}) {
      const auto [q, p] = oracle::chain_dense(n, alpha);
      ChainGroundState g(static_cast<std::size_t>(n), alpha);
      const double dq = (g.dense_q() - q).cwiseAbs().maxCoeff();
      const double dp = (g.dense_p() - p).cwiseAbs().maxCoeff();
      CHECK(dq <= 1e-12);
      CHECK(dp <= 1e-12);
    }
  }
}

TEST_CASE("property: diagonal closed forms and circulant structure") {
  const std::size_t n = 37;
  const double alpha = 0.93;
  ChainGroundState g(n, alpha);
  double sq = 0.0, sp = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 1.0 - alpha * std::cos(2.0 * std::numbers::pi * k / n);
    sq += 1.0 / std::sqrt(w);
    sp += std::sqrt(w);
  }
  CHECK(g.qq(5, 5) == doctest::Approx(sq / (2.0 * n)).epsilon(1e-13));
  CHECK(g.pp(5, 5) == doctest::Approx(sp / (2.0 * n)).epsilon(1e-13));
  for (std::size_t j = 0; j < n; ++j) {
    CHECK(g.qq(j, (j + 3) % n) == g.qq(0, 3));
    CHECK(g.qq(j, (j + 3) % n) == g.qq((j + 3) % n, j));
  }
}

TEST_CASE("collective_variance examples") {
  ChainGroundState g(20, 0.7);
  SUBCASE("single sites reduce to raw correlations") {
    const DiscreteProfile a{{1.0}, 3}, b{{1.0}, 8};
    const auto v = collective_variance(g, a, b);
    CHECK(v.qq_a == g.qq(3, 3));
    CHECK(v.qq_ab == doctest::Approx(g.qq(3, 8)).epsilon(1e-15));
    CHECK(v.pp_ab == doctest::Approx(g.pp(3, 8)).epsilon(1e-15));
  }
  SUBCASE("mirrored profiles have equal local variances") {
    const DiscreteProfile a = DiscreteProfile{{0.1, -0.4, 0.9, 0.3}, 0}.normalized();
    const auto b = a.mirrored(6);
    const auto v = collective_variance(g, a, b);
    CHECK(v.qq_a == doctest::Approx(v.qq_b).epsilon(1e-15));
    CHECK(v.pp_a == doctest::Approx(v.pp_b).epsilon(1e-15));
    CHECK(is_symmetric(v));
  }
  SUBCASE("overlapping blocks are rejected") {
    CHECK_THROWS_AS(collective_variance(g, DiscreteProfile::uniform(4, 0), DiscreteProfile::uniform(4, 3)),
                    InputError);
    CHECK_THROWS_AS(collective_variance(g, DiscreteProfile::uniform(4, 10), DiscreteProfile::uniform(4, 7)),
                    InputError);
    CHECK_NOTHROW(collective_variance(g, DiscreteProfile::uniform(4, 18), DiscreteProfile::uniform(4, 2)));
  }
  SUBCASE("table configuration at d = 1 is entangled") {
    const auto params = ChainParams::from_physical(1.0, std::sqrt(2.0), 2, 1, 110);
    const auto res = optimize_profile(params, true);
    CHECK(res.epsilon_max > 0.0);
    CHECK(res.entangled);
  }
}

TEST_CASE("property: uncertainty bound for arbitrary profiles") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal;
  for (double alpha : {0.0, 0.3, 0.9, 0.999}) {
    ChainGroundState g(64, alpha);
    for (int trial = 0; trial < 50; ++trial) {
      DiscreteProfile f;
      f.offset = 5;
      for (int j = 0; j < 7; ++j) f.weights.push_back(normal(rng));
      f = f.normalized();
      const auto v = collective_variance(g, f, DiscreteProfile::uniform(3, 20));
      const double prod = v.qq_a * v.pp_a;
      if (alpha == 0.0) {
        CHECK(prod == doctest::Approx(0.25).epsilon(1e-14));
      } else {
        CHECK(prod > 0.25);
      }
      CHECK(check_physical(v));
    }
  }
}

TEST_CASE("property: translation invariance and exchange symmetry") {
  ChainGroundState g(40, 0.95);
  const DiscreteProfile a = DiscreteProfile{{0.2, 0.5, -0.3, 0.8, 0.1}, 0}.normalized();
  const auto b = a.mirrored(8);
  const auto v = collective_variance(g, a, b);
  for (std::size_t shift : {1u, 13u, 35u}) {
    DiscreteProfile a2 = a, b2 = b;
    a2.offset = (a.offset + shift) % 40;
    b2.offset = (b.offset + shift) % 40;
    const auto w = collective_variance(g, a2, b2);
    CHECK(w.qq_a == doctest::Approx(v.qq_a).epsilon(1e-13));
    CHECK(w.qq_ab == doctest::Approx(v.qq_ab).epsilon(1e-12));
    CHECK(w.pp_ab == doctest::Approx(v.pp_ab).epsilon(1e-12));
  }
  const auto s = collective_variance(g, b, a);
  CHECK(s.qq_a == doctest::Approx(v.qq_b).epsilon(1e-14));
  CHECK(s.pp_b == doctest::Approx(v.pp_a).epsilon(1e-14));
  CHECK(s.qq_ab == doctest::Approx(v.qq_ab).epsilon(1e-13));
  CHECK(epsilon_symmetric(s).epsilon == doctest::Approx(epsilon_symmetric(v).epsilon).epsilon(1e-12));
}

TEST_CASE("property: finite-size convergence beyond 10 (2n + d)") {
  struct Case {
    std::size_t n, d;
  };
  for (const Case c : {Case{2, 1}, Case{8, 2}, Case{14, 3}}) {
    auto p1 = ChainParams::from_physical(1.0, std::sqrt(2.0), c.n, c.d);
    auto p2 = ChainParams::from_physical(1.0, std::sqrt(2.0), c.n, c.d, 2 * p1.sites);
    const auto r1 = optimize_profile(p1, true);
    ChainGroundState big = ground_state(p2);
    const double eps2 = mirrored_epsilon(big, p2, r1.profile.weights);
    CHECK(std::abs(eps2 - r1.epsilon_max) < 1e-6);
  }
}

TEST_CASE("property: every chain variance matrix is physical") {
  for (std::size_t n : {1u, 3u, 9u}) {
    for (std::size_t d : {0u, 1u, 4u}) {
      const auto params = ChainParams::from_physical(1.0, 2.0, n, d);
      const auto g = ground_state(params);
      const auto v = collective_variance(g, DiscreteProfile::uniform(n, 0),
                                         DiscreteProfile::uniform(n, block_b_offset(params)));
      CHECK(check_physical(v));
    }
  }
}

TEST_CASE("cached ground states are shared") {
  auto a = cached_ground_state(30, 0.5);
  auto b = cached_ground_state(30, 0.5);
  CHECK(a.get() == b.get());
  CHECK(a->qq(0, 1) == ChainGroundState(30, 0.5).qq(0, 1));
}

TEST_CASE("profiles") {
  CHECK_THROWS_AS((DiscreteProfile{{0.0, 0.0}, 0}.normalized()), InputError);
  const auto u = DiscreteProfile::uniform(4, 2);
  CHECK(u.norm_squared() == doctest::Approx(1.0).epsilon(1e-15));
  const auto m = DiscreteProfile{{1, 2, 3}, 0}.mirrored(7);
  CHECK(m.weights == std::vector<double>{3, 2, 1});
  CHECK(m.offset == 7);
}
