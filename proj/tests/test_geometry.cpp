#include <catch2/catch.hpp>

#include "refloc/detail/rng.hpp"
#include "refloc/geometry.hpp"

using namespace refloc;

namespace {
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
}

TEST_CASE("sidedness against the y = 1.5x split") {
  const Hyperplane h = Hyperplane::parse("y=1.5x");
  CHECK(side_of(h, v2(1, 2)) == Side::A);
  CHECK(side_of(h, v2(9, 1)) == Side::B);
  CHECK(side_of(h, v2(2, 3)) == Side::On);
}

TEST_CASE("hyperplane parsing forms") {
  const Hyperplane h1 = Hyperplane::parse("y=1.5x");
  CHECK(h1.alpha[0] == Approx(1.5));
  CHECK(h1.alpha[1] == Approx(-1.0));
  CHECK(h1.beta == 0.0);
  const Hyperplane h2 = Hyperplane::parse("y=x");
  CHECK(h2.alpha[0] == Approx(1.0));
  const Hyperplane h3 = Hyperplane::parse("alpha=0,0,1;beta=0.5");
  CHECK(h3.dim() == 3);
  CHECK(h3.beta == Approx(0.5));
  const Hyperplane h4 = Hyperplane::parse(h3.to_string());
  CHECK(h4.alpha == h3.alpha);
  CHECK(h4.beta == h3.beta);
  CHECK_THROWS_AS(Hyperplane::parse("z=2x"), ParseError);
  CHECK_THROWS_AS(Hyperplane::parse("alpha=0,0;beta=1"), ParseError);
  CHECK_THROWS_AS(Hyperplane::parse("alpha=1,q;beta=1"), ParseError);
}

TEST_CASE("tangent basis spans the hyperplane") {
  detail::Xoshiro256pp rng(5);
  for (int d : {2, 3, 5}) {
    Vec alpha(d);
    for (int i = 0; i < d; ++i) alpha[i] = rng.uniform(-2, 2);
    if (alpha.lpNorm<Eigen::Infinity>() < 0.1) alpha[0] = 1.0;
    const Hyperplane h(alpha, rng.uniform(-1, 1));
    const Mat T = h.tangent_basis();
    REQUIRE(T.cols() == d - 1);
    CHECK((T.transpose() * T - Mat::Identity(d - 1, d - 1)).norm() < 1e-12);
    CHECK((T.transpose() * alpha).norm() < 1e-12 * alpha.norm());
    CHECK(std::abs(h.signed_eval(h.base_point())) < 1e-12 * (1 + std::abs(h.beta)));
  }
}

TEST_CASE("projection onto the diagonal under the l1 norm") {
  const Hyperplane h = Hyperplane::parse("y=x");
  const Vec a = v2(4, 5);
  const Vec y = project_lp(h, a, NormSpec::l1());
  // Whole face of minimizers; the canonical representative splits the tie.
  CHECK(y[0] == Approx(4.5).margin(1e-12));
  CHECK(y[1] == Approx(4.5).margin(1e-12));
  CHECK(NormSpec::l1().eval(a - y) == Approx(1.0).margin(1e-12));
  const auto face = project_lp_face(h, a, NormSpec::l1());
  REQUIRE(face.size() == 2);
  CHECK(((face[0] - v2(5, 5)).norm() < 1e-12 || (face[0] - v2(4, 4)).norm() < 1e-12));

  const Vec y2 = project_lp(h, v2(12, 11), NormSpec::l1());
  CHECK(y2[0] == Approx(11.5).margin(1e-12));
  CHECK(NormSpec::l1().eval(v2(12, 11) - y2) == Approx(1.0).margin(1e-12));
}

TEST_CASE("Euclidean projection is the orthogonal foot") {
  Vec alpha = v2(0, 1);
  const Hyperplane h(alpha, 0.0);
  const Vec y = project_lp(h, v2(3, -2), NormSpec::lp(2, 1));
  CHECK(y[0] == Approx(3.0).margin(1e-12));
  CHECK(y[1] == Approx(0.0).margin(1e-12));

  detail::Xoshiro256pp rng(17);
  for (int it = 0; it < 30; ++it) {
    Vec a3(3), al(3);
    for (int i = 0; i < 3; ++i) {
      a3[i] = rng.uniform(-4, 4);
      al[i] = rng.uniform(-2, 2);
    }
    if (al.lpNorm<Eigen::Infinity>() < 0.1) al[2] = 1.0;
    const Hyperplane hr(al, rng.uniform(-1, 1));
    const Vec p = project_lp(hr, a3, NormSpec::lp(2, 1));
    const Vec closed = a3 - (hr.signed_eval(a3) / al.squaredNorm()) * al;
    CHECK((p - closed).lpNorm<Eigen::Infinity>() < 1e-12 * (1 + a3.norm()));
  }
}

TEST_CASE("projections are on the hyperplane and beat sampled points") {
  detail::Xoshiro256pp rng(23);
  std::vector<Vec> octagon;
  for (int k = 0; k < 8; ++k)
    octagon.push_back(v2(std::cos(2 * M_PI * k / 8), std::sin(2 * M_PI * k / 8)));
  const std::vector<NormSpec> specs = {NormSpec::lp(2, 1), NormSpec::lp(3, 2), NormSpec::l1(),
                                       NormSpec::linf(0.5), NormSpec::polyhedral(octagon)};
  for (const auto& spec : specs) {
    for (int rep = 0; rep < 5; ++rep) {
      Vec alpha = v2(rng.uniform(-2, 2), rng.uniform(-2, 2));
      if (alpha.lpNorm<Eigen::Infinity>() < 0.2) alpha[0] = 1.0;
      const Hyperplane h(alpha, rng.uniform(-1, 1));
      const Vec a = v2(rng.uniform(-5, 5), rng.uniform(-5, 5));
      const Vec y = project_lp(h, a, spec);
      REQUIRE(std::abs(h.signed_eval(y)) < 1e-10 * (1 + std::abs(h.beta) + alpha.norm()));
      const double dy = spec.eval(a - y);
      const Mat T = h.tangent_basis();
      const Vec x0 = h.base_point();
      for (int s = 0; s < 1000; ++s) {
        const Vec z = x0 + T.col(0) * rng.uniform(-20, 20);
        CHECK(dy <= spec.eval(a - z) + 1e-9 * (1 + dy));
      }
    }
  }
}

TEST_CASE("generalized sine values") {
  const Hyperplane hx2(v2(0, 1), 0.0);
  const auto normal = generalized_sine(hx2, v2(0, -4), v2(0, 0), NormSpec::lp(2, 1));
  CHECK(normal.total == Approx(1.0).margin(1e-12));
  const auto oblique = generalized_sine(hx2, v2(3, -4), v2(0, 0), NormSpec::lp(2, 1));
  CHECK(oblique.total == Approx(0.8).margin(1e-12));

  // Diagonal line, l1 side norm, gate at a face endpoint.
  const Hyperplane hd = Hyperplane::parse("y=x");
  const auto diag = generalized_sine(hd, v2(4, 5), v2(5, 5), NormSpec::l1());
  CHECK(diag.total == Approx(1.0).margin(1e-12));
  CHECK(diag.total <= diag.components.sum() + 1e-12);

  CHECK_THROWS_AS(generalized_sine(hd, v2(5, 5), v2(5, 5), NormSpec::l1()),
                  std::invalid_argument);
  CHECK_THROWS_AS(generalized_sine(hd, v2(4, 5), v2(6, 5), NormSpec::l1()),
                  std::invalid_argument);
}

TEST_CASE("generalized sine stays within its dual bound") {
  detail::Xoshiro256pp rng(31);
  const Hyperplane h(v2(0.6, -0.8), 0.3);  // unit Euclidean normal
  for (int it = 0; it < 50; ++it) {
    const Vec a = v2(rng.uniform(-5, 5), rng.uniform(-5, 5));
    const Vec x = project_lp(h, v2(rng.uniform(-5, 5), rng.uniform(-5, 5)), NormSpec::lp(2, 1));
    if ((a - x).norm() < 1e-6) continue;
    const auto gs = generalized_sine(h, a, x, NormSpec::lp(2, 1));
    CHECK(gs.total > 0.0);
    CHECK(gs.total <= 1.0 + 1e-12);
  }
}
