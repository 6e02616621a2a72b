#include <catch2/catch.hpp>

#include "refloc/detail/rng.hpp"
#include "refloc/norms.hpp"

using namespace refloc;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

Vec random_vec(detail::Xoshiro256pp& rng, int d, double lo = -5, double hi = 5) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

std::vector<NormSpec> sample_specs() {
  std::vector<Vec> octagon;
  for (int k = 0; k < 8; ++k) {
    const double th = 2.0 * M_PI * k / 8.0;
    octagon.push_back(v2(std::cos(th), std::sin(th)));
  }
  return {NormSpec::lp(2, 1),       NormSpec::lp(3, 1),   NormSpec::lp(3, 2, 0.7),
          NormSpec::lp(5, 3),       NormSpec::l1(),       NormSpec::l1(2.0),
          NormSpec::linf(),         NormSpec::linf(0.25), NormSpec::polyhedral(octagon, 1.3)};
}

}  // namespace

TEST_CASE("norm evaluation on known values") {
  CHECK(NormSpec::lp(2, 1).eval(v2(3, 4)) == Approx(5.0).margin(1e-14));
  CHECK(NormSpec::l1().eval(v2(1, -1)) == Approx(2.0).margin(1e-14));
  // Hyperplane-leg difference vector of the quarter-linf worked example.
  CHECK(NormSpec::linf(0.25).eval(v2(1.283230, 1.924845)) == Approx(0.4812115).margin(5e-7));
  CHECK(NormSpec::lp(3, 1).eval(Vec::Zero(3)) == 0.0);
}

TEST_CASE("rational exponents are normalized and validated") {
  const NormSpec n = NormSpec::lp(6, 4);  // = 3/2
  CHECK(n.r() == 3);
  CHECK(n.s() == 2);
  CHECK(n.p() == Approx(1.5));
  CHECK_THROWS_AS(NormSpec::lp(2, 2), std::invalid_argument);
  CHECK_THROWS_AS(NormSpec::lp(1, 2), std::invalid_argument);
  CHECK_THROWS_AS(NormSpec::lp(-3, 1), std::invalid_argument);
  CHECK_THROWS_AS(NormSpec::l1(0.0), std::invalid_argument);
  CHECK_THROWS_AS(NormSpec::l1(-1.0), std::invalid_argument);
}

TEST_CASE("polyhedral construction checks its generators") {
  CHECK_THROWS_AS(NormSpec::polyhedral({}), std::invalid_argument);
  CHECK_THROWS_AS(NormSpec::polyhedral({v2(1, 0)}), std::invalid_argument);  // not symmetric
  CHECK_THROWS_AS(NormSpec::polyhedral({v2(0, 0), v2(0, 0)}), std::invalid_argument);
  const NormSpec n = NormSpec::polyhedral({v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)});
  CHECK(n.eval(v2(0.5, -2)) == Approx(2.0));
  Vec w3(3);
  w3 << 1, 2, 3;
  CHECK_THROWS_AS(n.eval(w3), std::invalid_argument);
}

TEST_CASE("dual exponents") {
  CHECK(NormSpec::lp(3, 1).dual_exponent() == Approx(1.5));
  CHECK(NormSpec::lp(2, 1).dual_exponent() == Approx(2.0));
  CHECK(std::isinf(NormSpec::l1().dual_exponent()));
  CHECK(NormSpec::linf().dual_exponent() == Approx(1.0));
  CHECK_THROWS_AS(NormSpec::polyhedral({v2(1, 0), v2(-1, 0)}).dual_exponent(),
                  std::invalid_argument);
}

TEST_CASE("subgradients at known points") {
  const auto g2 = NormSpec::lp(2, 1).subgradient(v2(3, 4));
  REQUIRE(g2.form() == SubdiffSet::Form::Singleton);
  CHECK(g2.point()[0] == Approx(0.6).margin(1e-12));
  CHECK(g2.point()[1] == Approx(0.8).margin(1e-12));

  const auto b1 = NormSpec::l1().subgradient(v2(2, 0));
  REQUIRE(b1.form() == SubdiffSet::Form::Box);
  CHECK(b1.contains(v2(1.0, 0.3), 1e-12));
  CHECK(b1.contains(v2(1.0, -1.0), 1e-12));
  CHECK_FALSE(b1.contains(v2(1.0, 1.5), 1e-9));
  CHECK_FALSE(b1.contains(v2(0.5, 0.0), 1e-9));

  // Componentwise (|v_j| / |v|_3)^2 at (1,1): 2^(-2/3), cross-checked by
  // central differences below.
  const auto g3 = NormSpec::lp(3, 1).subgradient(v2(1, 1));
  REQUIRE(g3.form() == SubdiffSet::Form::Singleton);
  const double expected = std::pow(2.0, -2.0 / 3.0);
  CHECK(g3.point()[0] == Approx(expected).margin(1e-12));
  const NormSpec n3 = NormSpec::lp(3, 1);
  const double h = 1e-6;
  const double fd = (n3.eval(v2(1 + h, 1)) - n3.eval(v2(1 - h, 1))) / (2 * h);
  CHECK(g3.point()[0] == Approx(fd).margin(1e-6));

  // At the origin the descriptor is the scaled dual ball.
  const auto ball = NormSpec::lp(3, 2, 2.0).subgradient(Vec::Zero(2));
  REQUIRE(ball.form() == SubdiffSet::Form::Ball);
  CHECK(ball.contains(v2(0, 0), 1e-12));
  CHECK(ball.contains(v2(2, 0), 1e-9));
  CHECK_FALSE(ball.contains(v2(2.5, 0), 1e-9));
}

TEST_CASE("homogeneity and triangle inequality on random data") {
  detail::Xoshiro256pp rng(42);
  for (const auto& spec : sample_specs()) {
    for (int it = 0; it < 60; ++it) {
      const Vec v = random_vec(rng, 2);
      const Vec w = random_vec(rng, 2);
      const double t = rng.uniform(-3, 3);
      const double lhs = spec.eval(t * v);
      const double rhs = std::abs(t) * spec.eval(v);
      CHECK(lhs == Approx(rhs).epsilon(1e-12).margin(1e-12));
      CHECK(spec.eval(v + w) <= spec.eval(v) + spec.eval(w) + 1e-12 * (1 + spec.eval(v)));
    }
  }
}

TEST_CASE("smooth subgradients match central finite differences") {
  detail::Xoshiro256pp rng(7);
  const double h = 1e-6;
  for (const auto& spec :
       {NormSpec::lp(2, 1), NormSpec::lp(3, 1, 0.5), NormSpec::lp(3, 2), NormSpec::lp(7, 4)}) {
    for (int it = 0; it < 40; ++it) {
      Vec v = random_vec(rng, 3);
      if (spec.eval(v) / spec.scale() < 0.1) continue;
      const auto g = spec.subgradient(v);
      REQUIRE(g.form() == SubdiffSet::Form::Singleton);
      for (int j = 0; j < 3; ++j) {
        Vec vp = v, vm = v;
        vp[j] += h;
        vm[j] -= h;
        const double fd = (spec.eval(vp) - spec.eval(vm)) / (2 * h);
        CHECK(g.point()[j] == Approx(fd).margin(1e-6));
      }
    }
  }
}

TEST_CASE("duality pairing for smooth norms") {
  detail::Xoshiro256pp rng(11);
  for (const auto& spec : {NormSpec::lp(2, 1), NormSpec::lp(3, 1), NormSpec::lp(5, 3, 1.7)}) {
    const double q = spec.dual_exponent();
    for (int it = 0; it < 50; ++it) {
      const Vec v = random_vec(rng, 3);
      if (v.norm() < 0.1) continue;
      const Vec g = spec.subgradient(v).point();
      CHECK(g.dot(v) == Approx(spec.eval(v)).epsilon(1e-9));
      double gq = 0.0;
      for (int j = 0; j < 3; ++j) gq += std::pow(std::abs(g[j]) / spec.scale(), q);
      CHECK(std::pow(gq, 1.0 / q) * spec.scale() == Approx(spec.scale()).epsilon(1e-9));
    }
  }
}

TEST_CASE("generator views reproduce the analytic l1 and linf values") {
  detail::Xoshiro256pp rng(3);
  for (int d : {2, 3}) {
    const auto e1 = NormSpec::l1().dual_extreme_points(d);
    const auto einf = NormSpec::linf().dual_extreme_points(d);
    CHECK(e1.size() == std::size_t(1) << d);
    CHECK(einf.size() == std::size_t(2 * d));
    const NormSpec p1 = NormSpec::polyhedral(e1);
    const NormSpec pinf = NormSpec::polyhedral(einf);
    for (int it = 0; it < 100; ++it) {
      const Vec v = random_vec(rng, d);
      CHECK(p1.eval(v) == Approx(NormSpec::l1().eval(v)).epsilon(1e-12).margin(1e-12));
      CHECK(pinf.eval(v) == Approx(NormSpec::linf().eval(v)).epsilon(1e-12).margin(1e-12));
    }
  }
  CHECK_THROWS_AS(NormSpec::l1().dual_extreme_points(17), std::invalid_argument);
  CHECK_THROWS_AS(NormSpec::lp(2, 1).dual_extreme_points(2), std::invalid_argument);
}

TEST_CASE("norm token parsing and formatting") {
  CHECK(NormSpec::parse("lp:3/2") == NormSpec::lp(3, 2));
  CHECK(NormSpec::parse("lp:3/2:0.5") == NormSpec::lp(3, 2, 0.5));
  CHECK(NormSpec::parse("l1") == NormSpec::l1());
  CHECK(NormSpec::parse("linf:0.25") == NormSpec::linf(0.25));
  CHECK(NormSpec::parse("lp:3") == NormSpec::lp(3, 1));
  CHECK(NormSpec::lp(3, 2, 0.5).to_string() == "lp:3/2:0.5");
  CHECK(NormSpec::linf().to_string() == "linf");
  for (const char* tok : {"", "lq:2", "lp:abc", "lp:1/2", "l1:xyz", "lp:2/1:0:0"})
    CHECK_THROWS_AS(NormSpec::parse(tok), ParseError);
  CHECK_THROWS_AS(NormSpec::parse("poly:/nonexistent/file"), MissingDataError);
  CHECK_THROWS_AS(NormSpec::polyhedral({v2(1, 0), v2(-1, 0)}).to_string(), std::invalid_argument);
}
