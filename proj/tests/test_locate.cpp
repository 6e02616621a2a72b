#include <catch2/catch.hpp>

#include <algorithm>
#include <fstream>

#include "oracles.hpp"
#include "refloc/instances.hpp"
#include "refloc/locate.hpp"

using namespace refloc;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

LocationInstance example1_instance() { return materialize(embedded_parlar18()); }

LocationInstance example2_instance() {
  InstanceFile f = embedded_parlar18();
  f.norm_h = NormSpec::linf(0.25);
  return materialize(f);
}

}  // namespace

TEST_CASE("objective evaluation at the reference facilities") {
  const auto inst = example1_instance();
  const auto ev = objective_eval(inst, v2(9.23792, 6.435661), false);
  CHECK(ev.value == Approx(103.934734).margin(1e-4));
  CHECK(ev.all_converged);

  const auto inst2 = example2_instance();
  const auto ev2 = objective_eval(inst2, v2(9.133220, 6.897760), true);
  CHECK(ev2.value == Approx(100.442353).margin(1e-4));

  LocationInstance single;
  single.h = Hyperplane::parse("y=x");
  single.norm_a = NormSpec::lp(2, 1);
  single.norm_b = NormSpec::lp(3, 1);
  single.points_a.emplace_back(v2(1, 4), 2.0);
  CHECK(objective_eval(single, v2(1, 4), false).value == 0.0);
}

TEST_CASE("transit path decomposition at the reference facility") {
  PathQuery q;
  q.h = Hyperplane::parse("y=1.5x");
  q.norm_a = NormSpec::lp(2, 1);
  q.norm_b = NormSpec::lp(3, 1);
  q.norm_h = NormSpec::linf(0.25);
  q.a = DemandPoint(v2(2, 8), 1.0);
  q.b = DemandPoint(v2(9.133220, 6.897760), 1.0);
  const auto r = gate_transit(q);
  REQUIRE(r.gates.size() == 2);
  // Reference gates/legs carry ~1e-4 print accuracy (the published path is
  // 6e-5 above the optimum at its own facility), hence the margins.
  CHECK((r.gates[0] - v2(4.635013, 6.952519)).lpNorm<Eigen::Infinity>() < 5e-4);
  CHECK((r.gates[1] - v2(5.918243, 8.877364)).lpNorm<Eigen::Infinity>() < 5e-4);
  CHECK(r.leg_lengths[0] == Approx(2.835578).margin(1e-3));
  CHECK(r.leg_lengths[1] == Approx(0.4812115).margin(1e-3));
  CHECK(r.leg_lengths[2] == Approx(3.447879).margin(1e-3));
  CHECK(r.total == Approx(6.7646685).margin(1e-4));
  CHECK(r.snell_residual <= 1e-7);
}

TEST_CASE("side solves bracket the optimum") {
  const auto inst = example1_instance();
  const auto rb = solve_side(inst, Side::B, false);
  CHECK(rb.f == Approx(103.934734).margin(1e-4));
  CHECK(rb.diag.converged);
  CHECK(rb.diag.kkt_residual <= 1e-7 * (1 + rb.f));
  const auto ra = solve_side(inst, Side::A, false);
  CHECK(ra.f >= rb.f - 1e-9);

  LocationInstance single;
  single.h = Hyperplane::parse("y=x");
  single.norm_a = NormSpec::lp(2, 1);
  single.norm_b = NormSpec::lp(3, 1);
  single.points_a.emplace_back(v2(1, 4), 2.0);
  const auto rs = solve_side(single, Side::A, false);
  CHECK((rs.x - v2(1, 4)).lpNorm<Eigen::Infinity>() < 1e-7);
  CHECK(rs.f == Approx(0.0).margin(1e-12));
}

TEST_CASE("four-point comparison row (external dataset, skipped when absent)") {
  const char* dir = std::getenv("REFLOC_DATA_DIR");
  const std::string path = std::string(dir ? dir : "data") + "/parlar4.loc";
  std::ifstream probe(path);
  if (!probe) {
    WARN("parlar4.loc not supplied; row skipped (external dataset)");
    return;
  }
  InstanceFile f = load_instance_file(path);
  f.h = Hyperplane::parse("y=x");
  f.norm_a = NormSpec::l1();
  f.norm_b = NormSpec::lp(2, 1);
  for (auto& p : f.points) p.set = 'u';
  const auto res = solve(materialize(f), false);
  CHECK(res.f_star == Approx(26.951942).margin(1e-3));
  CHECK((res.x_star - v2(3.333333, 1.666666)).lpNorm<Eigen::Infinity>() < 2e-3);
}

TEST_CASE("full solve reproduces the mixed l2/l3 benchmark") {
  const auto inst = example1_instance();
  CHECK(inst.standing_assumption_violated());  // p_A = 2 < p_B = 3
  const auto res = solve(inst, false);
  CHECK(res.f_star == Approx(103.934734).margin(1e-4));
  CHECK(res.side == Side::B);
  CHECK(res.f_star == std::min(res.f_side_a, res.f_side_b));
  // Independently verified optimizer (grid + pattern search on the exact
  // objective); the published point (9.23792, 6.435661) evaluates 2e-6 higher.
  CHECK((res.x_star - v2(9.2363918, 6.4359459)).lpNorm<Eigen::Infinity>() < 1e-4);
  const auto recheck = objective_eval(inst, res.x_star, false);
  CHECK(recheck.value == Approx(res.f_star).epsilon(1e-8));
}

TEST_CASE("full transit solve and the saving against the single-gate model") {
  const auto res_p = solve(example1_instance(), false);
  const auto res_t = solve(example2_instance(), true);
  CHECK(res_t.f_star == Approx(100.442353).margin(1e-4));
  CHECK(res_p.f_star - res_t.f_star == Approx(3.492381).margin(1e-3));
  CHECK(res_t.f_star <= res_p.f_star + 1e-8);
}

TEST_CASE("coincident demand points pin the facility") {
  LocationInstance inst;
  inst.h = Hyperplane::parse("y=x");
  inst.norm_a = NormSpec::lp(2, 1);
  inst.norm_b = NormSpec::lp(2, 1);
  for (int i = 0; i < 3; ++i) inst.points_a.emplace_back(v2(1, 5), 1.0 + i);
  const auto res = solve(inst, false);
  CHECK((res.x_star - v2(1, 5)).lpNorm<Eigen::Infinity>() < 1e-7);
  CHECK(res.f_star == Approx(0.0).margin(1e-10));
}

TEST_CASE("uniqueness report") {
  const auto rep = uniqueness_report(example1_instance());
  CHECK(rep.count_a == 4);
  CHECK(rep.count_b == 14);
  CHECK(rep.size_ok);
  CHECK(rep.a_non_collinear);
  CHECK(rep.b_non_collinear);
  CHECK(rep.p_strict_single);
  CHECK(rep.unique_single());

  LocationInstance col;
  col.h = Hyperplane::parse("y=x");
  col.norm_a = NormSpec::lp(2, 1);
  col.norm_b = NormSpec::lp(2, 1);
  for (int i = 0; i < 3; ++i) col.points_a.emplace_back(v2(i, 2.0 * i + 5), 1.0);
  col.points_b = {DemandPoint(v2(3, -3), 1.0), DemandPoint(v2(5, -1), 1.0),
                  DemandPoint(v2(4, -4), 1.0)};
  auto rep2 = uniqueness_report(col);
  CHECK_FALSE(rep2.a_non_collinear);
  CHECK(rep2.b_non_collinear);
  col.points_b = {DemandPoint(v2(4, -2), 1.0), DemandPoint(v2(5, -1), 1.0),
                  DemandPoint(v2(6, 0), 1.0)};
  rep2 = uniqueness_report(col);
  CHECK_FALSE(rep2.b_non_collinear);
  CHECK_FALSE(rep2.unique_single());

  LocationInstance pb1 = example1_instance();
  pb1.norm_b = NormSpec::l1();
  CHECK_FALSE(uniqueness_report(pb1).p_strict_single);
  CHECK(uniqueness_report(pb1).p_strict_transit);
}

TEST_CASE("side objectives are convex along random segments") {
  refloc::detail::Xoshiro256pp rng(5);
  const auto inst = oracles::random_smooth_instance(rng, 6);
  for (int it = 0; it < 100; ++it) {
    Vec u = v2(rng.uniform(0, 10), rng.uniform(0, 10));
    Vec w = v2(rng.uniform(0, 10), rng.uniform(0, 10));
    const double lam = rng.uniform(0, 1);
    // Probe within one side so the objective keeps a single formula.
    if (side_of(inst.h, u) != side_of(inst.h, w)) continue;
    if (side_of(inst.h, u) == Side::On) continue;
    const Vec mid = lam * u + (1 - lam) * w;
    if (side_of(inst.h, mid) != side_of(inst.h, u)) continue;
    const double fu = objective_eval(inst, u, false).value;
    const double fw = objective_eval(inst, w, false).value;
    const double fm = objective_eval(inst, mid, false).value;
    CHECK(fm <= lam * fu + (1 - lam) * fw + 1e-9 * (1 + fu + fw));
  }
}

TEST_CASE("transit dominance and the p-ordered reduction") {
  refloc::detail::Xoshiro256pp rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    auto inst = oracles::random_smooth_instance(rng, 6);
    inst.norm_a = NormSpec::lp(3, 1);
    inst.norm_b = NormSpec::lp(2, 1);
    inst.norm_h = NormSpec::lp(3, 2);  // p_A >= p_B >= p_H
    const auto rp = solve(inst, false);
    const auto rt = solve(inst, true);
    CHECK(rt.f_star <= rp.f_star + 1e-8);
    CHECK(std::abs(rt.f_star - rp.f_star) <= 1e-6 * (1 + rp.f_star));
  }
}

TEST_CASE("permutation and translation equivariance") {
  refloc::detail::Xoshiro256pp rng(8);
  auto inst = oracles::random_smooth_instance(rng, 7);
  const auto base = solve(inst, false);

  auto shuffled = inst;
  std::reverse(shuffled.points_a.begin(), shuffled.points_a.end());
  std::rotate(shuffled.points_b.begin(), shuffled.points_b.begin() + 1, shuffled.points_b.end());
  const auto perm = solve(shuffled, false);
  CHECK(perm.f_star == Approx(base.f_star).margin(1e-9 * (1 + base.f_star)));
  CHECK((perm.x_star - base.x_star).lpNorm<Eigen::Infinity>() < 1e-7);

  const Vec t = v2(3.25, -1.5);
  auto moved = inst;
  moved.h.beta += moved.h.alpha.dot(t);
  for (auto& p : moved.points_a) p.coords += t;
  for (auto& p : moved.points_b) p.coords += t;
  const auto trans = solve(moved, false);
  CHECK(trans.f_star == Approx(base.f_star).margin(1e-8 * (1 + base.f_star)));
  CHECK((trans.x_star - (base.x_star + t)).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("solve matches the planar grid + polish oracle") {
  refloc::detail::Xoshiro256pp rng(64);
  for (int rep = 0; rep < 2; ++rep) {
    const auto inst = oracles::random_smooth_instance(rng, 6);
    const auto res = solve(inst, false);
    Vec xo(2);
    const double fo = oracles::grid_pattern_locate(inst, false, &xo, 150);
    CHECK(res.f_star <= fo + 1e-7 * (1 + fo));
    CHECK(res.f_star == Approx(fo).epsilon(1e-5));
  }
}

TEST_CASE("facility value is a lower bound over random probes") {
  refloc::detail::Xoshiro256pp rng(111);
  const auto inst = oracles::random_smooth_instance(rng, 6);
  const auto res = solve(inst, false);
  for (int it = 0; it < 100; ++it) {
    const Vec probe = v2(rng.uniform(-2, 12), rng.uniform(-2, 12));
    CHECK(res.f_star <= objective_eval(inst, probe, false).value + 1e-9 * (1 + res.f_star));
  }
}

TEST_CASE("demand points on the hyperplane keep their declared set") {
  LocationInstance inst;
  inst.h = Hyperplane::parse("y=x");
  inst.norm_a = NormSpec::lp(2, 1);
  inst.norm_b = NormSpec::lp(3, 1);
  inst.points_a.emplace_back(v2(0, 4), 1.0);
  inst.points_b.emplace_back(v2(3, 3), 1.0);  // on H, declared side B
  inst.points_b.emplace_back(v2(6, 2), 1.0);
  const auto ev = objective_eval(inst, v2(1, 3), false);
  // The on-H point contributes a plain facility-side leg with itself as gate.
  REQUIRE(ev.gates[1].size() == 1);
  CHECK((ev.gates[1][0] - v2(3, 3)).lpNorm<Eigen::Infinity>() == 0.0);
  const auto res = solve(inst, false);
  CHECK(res.f_star <= objective_eval(inst, v2(1, 3), false).value);
}

TEST_CASE("nonsmooth norm mixes solve to first-order optimality") {
  refloc::detail::Xoshiro256pp rng(909);
  const std::vector<NormSpec> menu = {NormSpec::l1(), NormSpec::linf(), NormSpec::l1(1.5),
                                      NormSpec::linf(0.5), NormSpec::lp(3, 2)};
  for (int rep = 0; rep < 4; ++rep) {
    LocationInstance inst = oracles::random_smooth_instance(rng, 6);
    inst.norm_a = menu[rng.next() % menu.size()];
    inst.norm_b = menu[rng.next() % menu.size()];
    inst.norm_h = menu[rng.next() % menu.size()];
    const auto rp = solve(inst, false);
    const auto rt = solve(inst, true);
    CHECK(rt.f_star <= rp.f_star + 1e-8);
    CHECK(std::min(rp.diag_a.kkt_residual, rp.diag_b.kkt_residual) <=
          1e-7 * (1 + rp.f_star));
    // No probe near the solution may beat the claimed optimum.
    for (int it = 0; it < 200; ++it) {
      Vec probe = rp.x_star;
      probe[0] += rng.uniform(-0.3, 0.3);
      probe[1] += rng.uniform(-0.3, 0.3);
      CHECK(rp.f_star <= objective_eval(inst, probe, false).value + 1e-9 * (1 + rp.f_star));
    }
  }
}

TEST_CASE("five-dimensional transit instance solves cleanly") {
  InstanceFile f = generate_random(200, 5, 11);
  f.norm_a = NormSpec::lp(3, 1);
  f.norm_b = NormSpec::lp(3, 2);
  f.norm_h = NormSpec::lp(5, 1);
  const LocationInstance inst = materialize(f);
  const auto res = solve(inst, true);
  CHECK((res.diag_a.converged || res.diag_b.converged));
  const auto recheck = objective_eval(inst, res.x_star, true);
  CHECK(recheck.value == Approx(res.f_star).epsilon(1e-8));
  for (const auto& gates : res.per_point_gates)
    for (const auto& g : gates) CHECK(std::abs(inst.h.signed_eval(g)) <= inst.h.on_tol());
}

TEST_CASE("an exhausted iteration budget surfaces as a solve error") {
  auto inst = example1_instance();
  LocateOptions opts;
  opts.control.max_iter = 0;
  CHECK_THROWS_AS(solve(inst, false, opts), SolveError);
}
