#include <catch2/catch.hpp>

#include <cmath>
#include <map>
#include <sstream>

#include "oracles.hpp"
#include "refloc/instances.hpp"
#include "refloc/socp.hpp"

using namespace refloc;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

// Assignment checker: plugs values into every row / power / cone and reports
// the worst violation.
struct Assignment {
  const ConicModel& m;
  std::vector<double> val;
  explicit Assignment(const ConicModel& model)
      : m(model), val(model.vars.size(), std::numeric_limits<double>::quiet_NaN()) {}
  void set(const std::string& name, double v) {
    const int idx = m.find_var(name);
    REQUIRE(idx >= 0);
    val[idx] = v;
  }
  double objective() const {
    double f = 0.0;
    for (const auto& t : m.objective) f += t.coef * val[t.var];
    return f;
  }
  double worst_violation() const {
    double worst = 0.0;
    for (const auto& r : m.rows) {
      double lhs = 0.0;
      for (const auto& t : r.terms) lhs += t.coef * val[t.var];
      if (r.sense == 'G') worst = std::max(worst, r.rhs - lhs);
      if (r.sense == 'L') worst = std::max(worst, lhs - r.rhs);
      if (r.sense == 'E') worst = std::max(worst, std::abs(lhs - r.rhs));
    }
    for (const auto& p : m.powers) {
      const double lhs = std::pow(val[p.t], double(p.r));
      const double rhs = std::pow(val[p.xi], double(p.s)) * std::pow(val[p.z], double(p.r - p.s));
      worst = std::max(worst, lhs - rhs);
    }
    for (const auto& v : m.vars)
      if (v.nonneg && !std::isnan(val[m.find_var(v.name)]))
        worst = std::max(worst, -val[m.find_var(v.name)]);
    return worst;
  }
};

}  // namespace

TEST_CASE("halfspace model row counts match the closed formula") {
  const auto inst = materialize(embedded_parlar18());
  const auto model = build_side_model(inst, Side::A, false);
  // |A|(2d+1) + |B|(4d+3) + 1 with |A| = 4, |B| = 14, d = 2.
  CHECK(model.rows.size() == 175);
  CHECK(model.powers.size() == std::size_t(2 * (4 + 2 * 14)));
  const auto audit = count_audit(model);
  CHECK(audit.lin_expected == 175);
  CHECK(audit.lin_match);

  const auto model_b = build_side_model(inst, Side::B, false);
  CHECK(model_b.rows.size() == std::size_t(14 * 5 + 4 * 11 + 1));
  CHECK(count_audit(model_b).lin_match);

  CHECK(models_equal(build_pa(inst), model));
  CHECK(models_equal(build_pb(inst), model_b));
  auto with_h = inst;
  with_h.norm_h = NormSpec::linf(0.25);
  CHECK(models_equal(build_pta(with_h), build_side_model(with_h, Side::A, true)));
  CHECK(models_equal(build_ptb(with_h), build_side_model(with_h, Side::B, true)));
}

TEST_CASE("single-point template emits exactly the documented rows") {
  LocationInstance inst;
  inst.h = Hyperplane::parse("y=1.5x");
  inst.norm_a = NormSpec::lp(2, 1);
  inst.norm_b = NormSpec::lp(3, 1);
  inst.points_a.emplace_back(v2(1, 2), 1.0);
  const auto m = build_side_model(inst, Side::A, false);
  REQUIRE(m.rows.size() == 6);  // 4 absolute-value rows + 1 sum row + halfspace
  int abs_rows = 0, sum_rows = 0, hs_rows = 0;
  for (const auto& r : m.rows) {
    if (r.tag.find(".abs") != std::string::npos) ++abs_rows;
    if (r.tag.find(".sum") != std::string::npos) ++sum_rows;
    if (r.tag == "halfspace") ++hs_rows;
  }
  CHECK(abs_rows == 4);
  CHECK(sum_rows == 1);
  CHECK(hs_rows == 1);
  REQUIRE(m.powers.size() == 2);
  for (const auto& p : m.powers) {
    CHECK(p.r == 2);
    CHECK(p.s == 1);
  }
  CHECK(m.binaries.empty());
}

TEST_CASE("mixed-binary model carries the indicator and activation rows") {
  const auto inst = materialize(embedded_parlar18());
  const auto m = build_minlp(inst, false);
  REQUIRE(m.binaries.size() == 1);
  CHECK(m.vars[m.binaries[0]].name == "gamma");
  int act_same = 0, act_cross = 0, side_rows = 0;
  for (const auto& r : m.rows) {
    if (r.tag.rfind("act_same_", 0) == 0) ++act_same;
    if (r.tag.rfind("act_cross_", 0) == 0) ++act_cross;
    if (r.tag == "side_upper" || r.tag == "side_lower") ++side_rows;
  }
  CHECK(act_same == 18);
  CHECK(act_cross == 18);
  CHECK(side_rows == 2);
  CHECK(m.find_var("Z_a0") >= 0);
  CHECK(m.find_var("y_b13_2") >= 0);
  // Transit flavor doubles the gates and adds the hyperplane legs.
  const auto inst2 = [&] {
    auto f = embedded_parlar18();
    f.norm_h = NormSpec::linf(0.25);
    return materialize(f);
  }();
  const auto mt = build_minlp(inst2, true);
  CHECK(mt.find_var("y1_a0_1") >= 0);
  CHECK(mt.find_var("y2_a0_1") >= 0);
  CHECK(mt.find_var("t_a0") >= 0);
}

TEST_CASE("power expansion sizes") {
  ConicModel m;
  const int t = m.add_var("t", true), xi = m.add_var("xi", true), z = m.add_var("z", true);

  auto count_for = [&](long r, long s) {
    ConicModel mm = m;
    mm.powers.push_back({"p", t, xi, z, r, s});
    const auto ex = expand_powers(mm);
    CHECK(ex.powers.empty());
    return static_cast<long>(ex.rsocs.size());
  };
  CHECK(count_for(2, 1) == 1);  // already a rotated cone
  CHECK(count_for(3, 1) == 2);  // t^3 <= xi z^2 collapses to two cones
  auto lg = [](long r) {
    long L = 0;
    while ((1L << L) < r) ++L;
    return L;
  };
  for (const auto& [r, s] : std::vector<std::pair<long, long>>{
           {3, 2}, {3, 1}, {5, 3}, {7, 4}, {5, 2}, {9, 5}, {7, 2}})
    CHECK(count_for(r, s) <= 2 * lg(r));
}

TEST_CASE("expanded towers accept exactly the power-feasible triples") {
  refloc::detail::Xoshiro256pp rng(2718);
  for (const auto& [r, s] : std::vector<std::pair<long, long>>{{3, 2}, {3, 1}, {5, 3}, {7, 4}}) {
    int agree = 0, total = 0;
    for (int it = 0; it < 10000; ++it) {
      const double t = rng.uniform(0.0, 2.0);
      const double xi = rng.uniform(0.0, 2.0);
      const double z = rng.uniform(0.0, 2.0);
      const double lhs = std::pow(t, double(r));
      const double rhs = std::pow(xi, double(s)) * std::pow(z, double(r - s));
      if (std::abs(lhs - rhs) <= 1e-9) continue;  // skip the knife edge
      ++total;
      const bool truth = lhs <= rhs;
      const bool tower = power_tower_feasible(r, s, t, xi, z, 1e-9);
      agree += (truth == tower);
    }
    CHECK(agree == total);
  }
}

TEST_CASE("norm-block value function reproduces the norm via bisection") {
  // Minimal z admitted by { q_k >= |x_k - y_k|, q_k^r <= R_k^s z^(r-s),
  // sum R <= z } equals |x - y|_p: bisect z with the tightest R choice.
  refloc::detail::Xoshiro256pp rng(512);
  for (const auto& [r, s] : std::vector<std::pair<long, long>>{{2, 1}, {3, 1}, {3, 2}, {5, 3}}) {
    const NormSpec n = NormSpec::lp(r, s);
    for (int it = 0; it < 25; ++it) {
      Vec q(3);
      for (int k = 0; k < 3; ++k) q[k] = std::abs(rng.uniform(-3, 3));
      auto feasible = [&](double z) {
        double sum = 0.0;
        for (int k = 0; k < 3; ++k)
          sum += std::pow(std::pow(q[k], double(r)) / std::pow(z, double(r - s)), 1.0 / s);
        return sum <= z;
      };
      double lo = 1e-9, hi = 10.0 * (q.sum() + 1.0);
      for (int b = 0; b < 200; ++b) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
      }
      CHECK(hi == Approx(n.eval(q)).epsilon(1e-7));
    }
  }
}

TEST_CASE("solver optimum certifies the exported model") {
  refloc::detail::Xoshiro256pp rng(77);
  const auto inst = oracles::random_smooth_instance(rng, 4);
  const auto side = Side::A;
  const auto sol = solve_side(inst, side, false);
  const auto m = build_side_model(inst, side, false);

  Assignment asg(m);
  for (int k = 0; k < 2; ++k) asg.set("x_" + std::to_string(k + 1), sol.x[k]);
  const auto& own = inst.points_a;
  const auto& cross = inst.points_b;
  for (std::size_t i = 0; i < own.size(); ++i) {
    const std::string si = "a" + std::to_string(i);
    const Vec diff = sol.x - own[i].coords;
    const double z = inst.norm_a.eval(diff);
    asg.set("z_" + si, z);
    for (int k = 0; k < 2; ++k) {
      const double q = inst.norm_a.scale() * std::abs(diff[k]);
      asg.set("t_" + si + "_" + std::to_string(k + 1), q);
      const double rr = z > 0 ? std::pow(q, inst.norm_a.p()) * std::pow(z, 1.0 - inst.norm_a.p())
                              : 0.0;
      asg.set("xi_" + si + "_" + std::to_string(k + 1), rr);
    }
  }
  for (std::size_t j = 0; j < cross.size(); ++j) {
    const std::string sj = "b" + std::to_string(j);
    const Vec gate = sol.gates[own.size() + j].front();
    for (int k = 0; k < 2; ++k) asg.set("y_" + sj + "_" + std::to_string(k + 1), gate[k]);
    const Vec d1 = sol.x - gate;
    const double w = inst.norm_a.eval(d1);
    asg.set("w_" + sj, w);
    const Vec d2 = gate - cross[j].coords;
    const double u = inst.norm_b.eval(d2);
    asg.set("u_" + sj, u);
    for (int k = 0; k < 2; ++k) {
      const double qv = inst.norm_a.scale() * std::abs(d1[k]);
      asg.set("v_" + sj + "_" + std::to_string(k + 1), qv);
      asg.set("rho_" + sj + "_" + std::to_string(k + 1),
              w > 0 ? std::pow(qv, inst.norm_a.p()) * std::pow(w, 1.0 - inst.norm_a.p()) : 0.0);
      const double qg = inst.norm_b.scale() * std::abs(d2[k]);
      asg.set("g_" + sj + "_" + std::to_string(k + 1), qg);
      asg.set("psi_" + sj + "_" + std::to_string(k + 1),
              u > 0 ? std::pow(qg, inst.norm_b.p()) * std::pow(u, 1.0 - inst.norm_b.p()) : 0.0);
    }
  }
  CHECK(asg.worst_violation() < 1e-9);
  // The model objective at the certificate equals the weighted leg sum of the
  // solver, which is the side optimum.
  CHECK(asg.objective() == Approx(sol.f).epsilon(1e-7));
}

TEST_CASE("polyhedral legs become generator rows and l1 blowup is refused") {
  LocationInstance inst;
  inst.h = Hyperplane::parse("y=x");
  inst.norm_a = NormSpec::l1();
  inst.norm_b = NormSpec::lp(2, 1);
  inst.points_a.emplace_back(v2(0, 3), 1.0);
  inst.points_b.emplace_back(v2(4, 1), 1.0);
  const auto m = build_side_model(inst, Side::A, false);
  int gen_rows = 0;
  for (const auto& r : m.rows)
    if (r.tag.find(".gen") != std::string::npos) ++gen_rows;
  CHECK(gen_rows == 4 + 4);  // z-block (l1, 2^2) + w-block (l1, 2^2); u-block is smooth
  CHECK_FALSE(m.meta.pure_lp);

  LocationInstance big;
  Vec alpha = Vec::Zero(17);
  alpha[16] = 1.0;
  big.h = Hyperplane(alpha, 0.5);
  big.norm_a = NormSpec::l1();
  big.norm_b = NormSpec::lp(2, 1);
  Vec pa = Vec::Zero(17), pb = Vec::Ones(17);
  big.points_a.emplace_back(pa, 1.0);
  big.points_b.emplace_back(pb, 1.0);
  CHECK_THROWS_AS(build_side_model(big, Side::A, false), std::invalid_argument);
}

TEST_CASE("transit side model has two gates per cross point") {
  auto f = embedded_parlar18();
  f.norm_h = NormSpec::linf(0.25);
  const auto inst = materialize(f);
  const auto m = build_side_model(inst, Side::B, true);
  CHECK(m.find_var("y1_a0_1") >= 0);
  CHECK(m.find_var("y2_a0_2") >= 0);
  CHECK(m.find_var("t_a0") >= 0);
  int on_h = 0;
  for (const auto& r : m.rows)
    if (r.tag.rfind("on_h", 0) == 0) ++on_h;
  CHECK(on_h == 2 * 4);  // two gate rows per cross (side-A) point
}

TEST_CASE("model serialization round-trips bit for bit") {
  const auto inst = materialize(embedded_parlar18());
  for (const auto* kind : {"pa", "minlp", "expand"}) {
    ConicModel m = std::string(kind) == "minlp" ? build_minlp(inst, false)
                                                : build_side_model(inst, Side::A, false);
    if (std::string(kind) == "expand") m = expand_powers(m);
    std::ostringstream os;
    write_model(m, os);
    std::istringstream is(os.str());
    const ConicModel back = read_model(is);
    CHECK(models_equal(m, back));
    std::ostringstream os2;
    write_model(back, os2);
    CHECK(os.str() == os2.str());
  }
}

TEST_CASE("count audit is loud when the formula breaks") {
  const auto inst = materialize(embedded_parlar18());
  auto m = build_side_model(inst, Side::A, false);
  m.rows.pop_back();
  CHECK_THROWS_AS(count_audit(m), std::runtime_error);
}
