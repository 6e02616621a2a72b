#pragma once

// Solver-agnostic conic exports of the location problems: the two halfspace
// programs (single-gate and transit variants) and the big-M mixed-binary
// formulation. Rational-power inequalities t^r <= xi^s z^(r-s) are emitted as
// such and can be expanded into rotated-second-order-cone rows X^2 <= Y Z by
// binary exponentiation; polyhedral / l1 / linf norms become one linear row
// per dual-ball extreme point.
//
// File format (ASCII, line oriented, '#' comments, 17 significant digits):
//   sections META / VARS / OBJ / LIN / POW / RSOC / BIN / END, documented in
//   the README; re-parsing a written model reproduces it bit for bit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "refloc/locate.hpp"

namespace refloc {

struct ConicVar {
  std::string name;
  bool nonneg = false;
  bool aux = false;  // created by the power-tower expansion
};

struct LinTerm {
  int var = -1;
  double coef = 0.0;
};

struct LinRow {
  std::string tag;
  char sense = 'G';  // 'G' >=, 'L' <=, 'E' =
  double rhs = 0.0;
  std::vector<LinTerm> terms;
};

// t^r <= xi^s z^(r-s) with t, xi, z >= 0 and r > s >= 1, gcd(r, s) = 1.
struct PowerCon {
  std::string tag;
  int t = -1, xi = -1, z = -1;
  long r = 2, s = 1;
};

// x^2 <= y z with y, z >= 0.
struct RsocCon {
  std::string tag;
  int x = -1, y = -1, z = -1;
};

struct ModelMeta {
  char side = 'A';
  bool transit = false;
  bool minlp = false;
  int dim = 0;
  int n_a = 0, n_b = 0;
  long r_a = 0, s_a = 0, r_b = 0, s_b = 0;  // zero when that norm is not rational-lp
  bool pure_lp = false;                      // both side norms rational-lp (counting applies)
};

class ConicModel {
 public:
  ModelMeta meta;
  std::vector<ConicVar> vars;
  std::vector<LinRow> rows;
  std::vector<PowerCon> powers;
  std::vector<RsocCon> rsocs;
  std::vector<int> binaries;
  std::vector<LinTerm> objective;  // minimized

  int add_var(std::string name, bool nonneg, bool aux = false) {
    vars.push_back({std::move(name), nonneg, aux});
    return static_cast<int>(vars.size()) - 1;
  }
  int find_var(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (vars[i].name == name) return static_cast<int>(i);
    return -1;
  }
};

namespace detail {

// Affine coordinate expression: per coordinate either a variable or a number.
struct AffinePoint {
  std::vector<int> var;     // -1 when constant
  std::vector<double> cst;  // added always

  static AffinePoint constant(const Vec& v) {
    AffinePoint p;
    p.var.assign(v.size(), -1);
    p.cst.assign(v.data(), v.data() + v.size());
    return p;
  }
  static AffinePoint variables(const std::vector<int>& idx) {
    AffinePoint p;
    p.var = idx;
    p.cst.assign(idx.size(), 0.0);
    return p;
  }
  int dim() const { return static_cast<int>(var.size()); }
};

// Append  z >= scale * || X - Y ||  for the given norm.
//   rational lp: 2d absolute-value rows on q, d power triples, one sum row;
//   l1 / linf / polyhedral: one row per dual-ball extreme point.
// q_prefix / r_prefix name the block's auxiliary variables.
inline void emit_norm_block(ConicModel& M, int zvar, const AffinePoint& X, const AffinePoint& Y,
                            const NormSpec& n, const std::string& tag, const std::string& q_prefix,
                            const std::string& r_prefix) {
  const int d = X.dim();
  const double c = n.scale();
  if (n.kind() == NormKind::LpRational) {
    std::vector<int> q(d), rv(d);
    for (int k = 0; k < d; ++k) {
      q[k] = M.add_var(q_prefix + "_" + std::to_string(k + 1), true);
      rv[k] = M.add_var(r_prefix + "_" + std::to_string(k + 1), true);
    }
    for (int k = 0; k < d; ++k) {
      for (double sgn : {+1.0, -1.0}) {
        LinRow row;
        row.tag = tag + (sgn > 0 ? ".abs+" : ".abs-");
        row.sense = 'G';
        row.terms.push_back({q[k], 1.0});
        double rhs = 0.0;
        if (X.var[k] >= 0) row.terms.push_back({X.var[k], -sgn * c});
        rhs += sgn * c * X.cst[k];
        if (Y.var[k] >= 0) row.terms.push_back({Y.var[k], sgn * c});
        rhs -= sgn * c * Y.cst[k];
        row.rhs = rhs;
        M.rows.push_back(std::move(row));
      }
    }
    for (int k = 0; k < d; ++k)
      M.powers.push_back({tag + ".pow" + std::to_string(k + 1), q[k], rv[k], zvar, n.r(), n.s()});
    LinRow sum;
    sum.tag = tag + ".sum";
    sum.sense = 'L';
    sum.rhs = 0.0;
    for (int k = 0; k < d; ++k) sum.terms.push_back({rv[k], 1.0});
    sum.terms.push_back({zvar, -1.0});
    M.rows.push_back(std::move(sum));
    return;
  }
  // Generator representation: z >= scale * e.(X - Y) for every extreme point.
  const auto gens = n.dual_extreme_points(d);
  int gi = 0;
  for (const auto& e : gens) {
    LinRow row;
    row.tag = tag + ".gen" + std::to_string(++gi);
    row.sense = 'G';
    row.terms.push_back({zvar, 1.0});
    double rhs = 0.0;
    for (int k = 0; k < d; ++k) {
      if (e[k] == 0.0) continue;
      if (X.var[k] >= 0) row.terms.push_back({X.var[k], -c * e[k]});
      rhs += c * e[k] * X.cst[k];
      if (Y.var[k] >= 0) row.terms.push_back({Y.var[k], c * e[k]});
      rhs -= c * e[k] * Y.cst[k];
    }
    row.rhs = rhs;
    M.rows.push_back(std::move(row));
  }
}

inline void set_meta_norms(ModelMeta& meta, const NormSpec& na, const NormSpec& nb) {
  if (na.kind() == NormKind::LpRational) {
    meta.r_a = na.r();
    meta.s_a = na.s();
  }
  if (nb.kind() == NormKind::LpRational) {
    meta.r_b = nb.r();
    meta.s_b = nb.s();
  }
  meta.pure_lp = na.kind() == NormKind::LpRational && nb.kind() == NormKind::LpRational;
}

}  // namespace detail

// Halfspace program for the given side: gates for every cross-side demand
// point, facility constrained to the closed halfspace.
inline ConicModel build_side_model(const LocationInstance& inst, Side side, bool transit) {
  if (side == Side::On) throw std::invalid_argument("build_side_model: side must be A or B");
  if (transit && !inst.norm_h)
    throw std::invalid_argument("build_side_model: transit export needs a hyperplane norm");
  const int d = inst.dim();
  ConicModel M;
  M.meta.side = side == Side::A ? 'A' : 'B';
  M.meta.transit = transit;
  M.meta.dim = d;
  M.meta.n_a = static_cast<int>(inst.points_a.size());
  M.meta.n_b = static_cast<int>(inst.points_b.size());
  detail::set_meta_norms(M.meta, inst.norm_a, inst.norm_b);

  const NormSpec& side_norm = side == Side::A ? inst.norm_a : inst.norm_b;
  const NormSpec& other_norm = side == Side::A ? inst.norm_b : inst.norm_a;
  const auto& own = side == Side::A ? inst.points_a : inst.points_b;
  const auto& cross = side == Side::A ? inst.points_b : inst.points_a;
  const char own_c = side == Side::A ? 'a' : 'b';
  const char cross_c = side == Side::A ? 'b' : 'a';

  std::vector<int> xvars(d);
  for (int k = 0; k < d; ++k) xvars[k] = M.add_var("x_" + std::to_string(k + 1), false);
  const auto xpt = detail::AffinePoint::variables(xvars);

  // Own-side points: z_i >= |x - p_i|_side.
  for (std::size_t i = 0; i < own.size(); ++i) {
    const std::string si = std::string(1, own_c) + std::to_string(i);
    const int z = M.add_var("z_" + si, true);
    M.objective.push_back({z, own[i].weight});
    detail::emit_norm_block(M, z, xpt, detail::AffinePoint::constant(own[i].coords), side_norm,
                            "z_" + si, "t_" + si, "xi_" + si);
  }

  // Cross-side points: gate(s) on H plus the leg lengths.
  for (std::size_t j = 0; j < cross.size(); ++j) {
    const std::string sj = std::string(1, cross_c) + std::to_string(j);
    std::vector<int> y1(d);
    const int gate_count = transit ? 2 : 1;
    for (int k = 0; k < d; ++k)
      y1[k] = M.add_var((transit ? "y1_" : "y_") + sj + "_" + std::to_string(k + 1), false);
    std::vector<int> y2 = y1;
    if (transit) {
      for (int k = 0; k < d; ++k)
        y2[k] = M.add_var("y2_" + sj + "_" + std::to_string(k + 1), false);
    }
    const int w = M.add_var("w_" + sj, true);
    const int u = M.add_var("u_" + sj, true);
    M.objective.push_back({w, cross[j].weight});
    M.objective.push_back({u, cross[j].weight});
    const auto gate1 = detail::AffinePoint::variables(y1);
    const auto gate2 = detail::AffinePoint::variables(y2);
    detail::emit_norm_block(M, w, xpt, gate1, side_norm, "w_" + sj, "v_" + sj, "rho_" + sj);
    if (transit) {
      const int t = M.add_var("t_" + sj, true);
      M.objective.push_back({t, cross[j].weight});
      detail::emit_norm_block(M, t, gate1, gate2, *inst.norm_h, "t_" + sj, "q_" + sj,
                              "r_" + sj);
    }
    detail::emit_norm_block(M, u, gate2, detail::AffinePoint::constant(cross[j].coords),
                            other_norm, "u_" + sj, "g_" + sj, "psi_" + sj);
    for (int g = 0; g < gate_count; ++g) {
      LinRow on_h;
      on_h.tag = (g == 0 ? "on_h1_" : "on_h2_") + sj;
      on_h.sense = 'E';
      on_h.rhs = inst.h.beta;
      const auto& yv = g == 0 ? y1 : y2;
      for (int k = 0; k < d; ++k)
        if (inst.h.alpha[k] != 0.0) on_h.terms.push_back({yv[k], inst.h.alpha[k]});
      M.rows.push_back(std::move(on_h));
    }
  }

  // Halfspace restriction on the facility.
  LinRow hs;
  hs.tag = "halfspace";
  hs.sense = side == Side::A ? 'L' : 'G';
  hs.rhs = inst.h.beta;
  for (int k = 0; k < d; ++k)
    if (inst.h.alpha[k] != 0.0) hs.terms.push_back({xvars[k], inst.h.alpha[k]});
  M.rows.push_back(std::move(hs));
  return M;
}

inline ConicModel build_pa(const LocationInstance& inst) { return build_side_model(inst, Side::A, false); }
inline ConicModel build_pb(const LocationInstance& inst) { return build_side_model(inst, Side::B, false); }
inline ConicModel build_pta(const LocationInstance& inst) { return build_side_model(inst, Side::A, true); }
inline ConicModel build_ptb(const LocationInstance& inst) { return build_side_model(inst, Side::B, true); }

// Mixed-binary big-M formulation with the side indicator gamma (1 when the
// facility is in H_A). Every demand point carries both its same-side and its
// cross-side length variables; the big-M rows activate the applicable set.
inline ConicModel build_minlp(const LocationInstance& inst, bool transit) {
  if (transit && !inst.norm_h)
    throw std::invalid_argument("build_minlp: transit export needs a hyperplane norm");
  const int d = inst.dim();
  ConicModel M;
  M.meta.side = 'M';
  M.meta.transit = transit;
  M.meta.minlp = true;
  M.meta.dim = d;
  M.meta.n_a = static_cast<int>(inst.points_a.size());
  M.meta.n_b = static_cast<int>(inst.points_b.size());
  detail::set_meta_norms(M.meta, inst.norm_a, inst.norm_b);

  // Data-derived big-M constants: R is the largest pairwise Euclidean
  // distance; any candidate facility of interest stays within the demand
  // hull, so every leg length is at most a norm-equivalence multiple of R.
  double R = 1.0;
  std::vector<const DemandPoint*> all;
  for (const auto& p : inst.points_a) all.push_back(&p);
  for (const auto& p : inst.points_b) all.push_back(&p);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      R = std::max(R, (all[i]->coords - all[j]->coords).norm());
  auto norm_cap = [&](const NormSpec& n) {
    if (n.kind() == NormKind::Polyhedral) {
      double g = 0.0;
      for (const auto& e : n.generators()) g = std::max(g, e.norm());
      return n.scale() * g * R;
    }
    return n.scale() * std::sqrt(static_cast<double>(d)) * R;
  };
  double cap = norm_cap(inst.norm_a) + norm_cap(inst.norm_b);
  if (transit) cap += norm_cap(*inst.norm_h);
  const double m_point = 3.0 * cap;
  double m_side = inst.h.alpha.norm() * 2.0 * R;
  for (const auto* p : all) m_side = std::max(m_side, 2.0 * std::abs(inst.h.signed_eval(p->coords)));

  std::vector<int> xvars(d);
  for (int k = 0; k < d; ++k) xvars[k] = M.add_var("x_" + std::to_string(k + 1), false);
  const auto xpt = detail::AffinePoint::variables(xvars);
  const int gamma = M.add_var("gamma", true);
  M.binaries.push_back(gamma);

  auto emit_point = [&](const DemandPoint& p, char set_c, std::size_t i) {
    const std::string si = std::string(1, set_c) + std::to_string(i);
    const bool in_a = set_c == 'a';
    const NormSpec& same_n = in_a ? inst.norm_a : inst.norm_b;
    const NormSpec& first_leg = in_a ? inst.norm_b : inst.norm_a;  // facility on the far side
    const int Z = M.add_var("Z_" + si, true);
    const int z = M.add_var("z_" + si, true);
    const int w = M.add_var("w_" + si, true);
    const int u = M.add_var("u_" + si, true);
    int t = -1;
    M.objective.push_back({Z, p.weight});

    std::vector<int> y1(d), y2(d);
    for (int k = 0; k < d; ++k)
      y1[k] = M.add_var((transit ? "y1_" : "y_") + si + "_" + std::to_string(k + 1), false);
    if (transit)
      for (int k = 0; k < d; ++k)
        y2[k] = M.add_var("y2_" + si + "_" + std::to_string(k + 1), false);
    else
      y2 = y1;

    // Activation rows: the same-side bound binds when the facility shares the
    // point's side, the gate path otherwise.
    LinRow r1;  // z - Z <= M (1 - act) with act = gamma for set A
    r1.tag = "act_same_" + si;
    r1.sense = 'L';
    r1.terms = {{z, 1.0}, {Z, -1.0}, {gamma, in_a ? m_point : -m_point}};
    r1.rhs = in_a ? m_point : 0.0;
    M.rows.push_back(std::move(r1));
    LinRow r2;  // w + u [+ t] - Z <= M act
    r2.tag = "act_cross_" + si;
    r2.sense = 'L';
    r2.terms = {{w, 1.0}, {u, 1.0}, {Z, -1.0}, {gamma, in_a ? -m_point : m_point}};
    r2.rhs = in_a ? 0.0 : m_point;
    if (transit) {
      t = M.add_var("t_" + si, true);
      r2.terms.insert(r2.terms.begin() + 2, {t, 1.0});
    }
    M.rows.push_back(std::move(r2));

    detail::emit_norm_block(M, z, xpt, detail::AffinePoint::constant(p.coords), same_n, "z_" + si,
                            "tz_" + si, "xiz_" + si);
    const auto gate1 = detail::AffinePoint::variables(y1);
    const auto gate2 = detail::AffinePoint::variables(y2);
    detail::emit_norm_block(M, w, xpt, gate1, first_leg, "w_" + si, "vw_" + si, "rhow_" + si);
    if (transit)
      detail::emit_norm_block(M, t, gate1, gate2, *inst.norm_h, "t_" + si, "qt_" + si, "rt_" + si);
    detail::emit_norm_block(M, u, gate2, detail::AffinePoint::constant(p.coords), same_n,
                            "u_" + si, "gu_" + si, "psiu_" + si);
    for (int g = 0; g < (transit ? 2 : 1); ++g) {
      LinRow on_h;
      on_h.tag = (g == 0 ? "on_h1_" : "on_h2_") + si;
      on_h.sense = 'E';
      on_h.rhs = inst.h.beta;
      const auto& yv = g == 0 ? y1 : y2;
      for (int k = 0; k < d; ++k)
        if (inst.h.alpha[k] != 0.0) on_h.terms.push_back({yv[k], inst.h.alpha[k]});
      M.rows.push_back(std::move(on_h));
    }
  };
  for (std::size_t i = 0; i < inst.points_a.size(); ++i) emit_point(inst.points_a[i], 'a', i);
  for (std::size_t i = 0; i < inst.points_b.size(); ++i) emit_point(inst.points_b[i], 'b', i);

  // Side indicator consistency: alpha.x - beta <= M (1 - gamma) and >= -M gamma.
  LinRow c6;
  c6.tag = "side_upper";
  c6.sense = 'L';
  c6.rhs = inst.h.beta + m_side;
  for (int k = 0; k < d; ++k)
    if (inst.h.alpha[k] != 0.0) c6.terms.push_back({xvars[k], inst.h.alpha[k]});
  c6.terms.push_back({gamma, m_side});
  M.rows.push_back(std::move(c6));
  LinRow c7;
  c7.tag = "side_lower";
  c7.sense = 'G';
  c7.rhs = inst.h.beta;
  for (int k = 0; k < d; ++k)
    if (inst.h.alpha[k] != 0.0) c7.terms.push_back({xvars[k], inst.h.alpha[k]});
  c7.terms.push_back({gamma, m_side});
  M.rows.push_back(std::move(c7));
  return M;
}

// ---------------------------------------------------------------------------
// Power-tower expansion.

namespace detail {

// Binary tree over 2^L leaves with equal-child collapsing; children are
// emitted before their parents so a single forward sweep can evaluate the
// tower with maximal auxiliary values.
inline int tower_node(ConicModel& M, std::vector<int>& leaves, int lo, int hi,
                      const std::string& tag, int& aux_count, bool is_root, int tvar) {
  if (hi - lo == 1) return leaves[lo];
  const int mid = (lo + hi) / 2;
  const int left = tower_node(M, leaves, lo, mid, tag, aux_count, false, tvar);
  const int right = tower_node(M, leaves, mid, hi, tag, aux_count, false, tvar);
  if (is_root) {
    M.rsocs.push_back({tag + ".rsoc" + std::to_string(++aux_count), tvar, left, right});
    return tvar;
  }
  if (left == right) return left;  // h^2 <= a a collapses to h = a
  const int h = M.add_var(tag + "_h" + std::to_string(aux_count + 1), true, true);
  M.rsocs.push_back({tag + ".rsoc" + std::to_string(++aux_count), h, left, right});
  return h;
}

}  // namespace detail

// Replace every rational-power constraint with its rotated-cone tower:
// t^r <= xi^s z^(r-s) becomes t^(2^L) <= xi^s z^(r-s) t^(2^L - r) with
// L = ceil(log2 r), realized by a collapsed binary geometric-mean tree of at
// most 2 ceil(log2 r) rows X^2 <= Y Z.
inline ConicModel expand_powers(const ConicModel& in) {
  ConicModel M = in;
  M.powers.clear();
  for (const auto& pc : in.powers) {
    if (pc.r == 2 && pc.s == 1) {
      M.rsocs.push_back({pc.tag + ".rsoc", pc.t, pc.xi, pc.z});
      continue;
    }
    int L = 0;
    while ((1L << L) < pc.r) ++L;
    // Leaf multiset: xi^s z^(r-s) t^(2^L - r), blocks ordered by descending
    // multiplicity so equal siblings collapse as much as possible.
    std::array<std::pair<long, int>, 3> blocks = {
        std::pair<long, int>{pc.s, pc.xi},
        std::pair<long, int>{pc.r - pc.s, pc.z},
        std::pair<long, int>{(1L << L) - pc.r, pc.t}};
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<int> leaves;
    leaves.reserve(std::size_t{1} << L);
    for (const auto& [count, var] : blocks)
      for (long i = 0; i < count; ++i) leaves.push_back(var);
    int aux = 0;
    detail::tower_node(M, leaves, 0, static_cast<int>(leaves.size()), pc.tag, aux, true, pc.t);
  }
  return M;
}

// Feasibility of a scalar triple for the expanded tower of one power
// constraint, assigning every auxiliary its maximal value bottom-up.
inline bool power_tower_feasible(long r, long s, double tval, double xival, double zval,
                                 double slack) {
  ConicModel tiny;
  const int t = tiny.add_var("t", true), xi = tiny.add_var("xi", true),
            z = tiny.add_var("z", true);
  tiny.powers.push_back({"p", t, xi, z, r, s});
  const ConicModel ex = expand_powers(tiny);
  std::vector<double> val(ex.vars.size(), std::numeric_limits<double>::quiet_NaN());
  val[t] = tval;
  val[xi] = xival;
  val[z] = zval;
  for (const auto& rc : ex.rsocs) {
    const double yz = val[rc.y] * val[rc.z];
    if (ex.vars[rc.x].aux && std::isnan(val[rc.x])) {
      val[rc.x] = std::sqrt(std::max(yz, 0.0));
    } else {
      if (val[rc.x] * val[rc.x] > yz + slack) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Constraint-count audit.

struct CountAudit {
  int lin_actual = 0;
  int lin_expected = -1;  // -1 when the closed formula does not apply
  bool lin_match = true;
  int power_count = 0;
  long rsoc_actual = 0;
  long rsoc_bound = -1;
  bool rsoc_within = true;
};

// Row counts against the closed-form bounds; throws when a bound is exceeded.
// The published cone bound does not state the log base; the audit uses
// ceil(log2 r) (the binary-exponentiation tower) and reports both numbers.
inline CountAudit count_audit(const ConicModel& m) {
  CountAudit a;
  a.lin_actual = static_cast<int>(m.rows.size());
  a.power_count = static_cast<int>(m.powers.size());
  a.rsoc_actual = static_cast<long>(m.rsocs.size());
  const auto& meta = m.meta;
  const int d = meta.dim;
  if (meta.pure_lp && !meta.minlp && !meta.transit) {
    const int n_own = meta.side == 'A' ? meta.n_a : meta.n_b;
    const int n_cross = meta.side == 'A' ? meta.n_b : meta.n_a;
    a.lin_expected = n_own * (2 * d + 1) + n_cross * (4 * d + 3) + 1;
    a.lin_match = a.lin_actual == a.lin_expected;
    auto lg = [](long r) {
      long L = 0;
      while ((1L << L) < r) ++L;
      return L;
    };
    const long r_own = meta.side == 'A' ? meta.r_a : meta.r_b;
    const long r_cross = meta.side == 'A' ? meta.r_b : meta.r_a;
    a.rsoc_bound = 4L * d * (n_own * lg(r_own) + n_cross * lg(r_own) + n_cross * lg(r_cross));
    if (a.rsoc_actual > 0) a.rsoc_within = a.rsoc_actual <= a.rsoc_bound;
    if (!a.lin_match)
      throw std::runtime_error("count audit: emitted " + std::to_string(a.lin_actual) +
                               " linear rows, formula gives " + std::to_string(a.lin_expected));
    if (!a.rsoc_within)
      throw std::runtime_error("count audit: " + std::to_string(a.rsoc_actual) +
                               " rotated-cone rows exceed the bound " +
                               std::to_string(a.rsoc_bound));
  }
  return a;
}

// ---------------------------------------------------------------------------
// Deterministic text serialization.

inline void write_model(const ConicModel& m, std::ostream& os, bool emit_sdp_note = false) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "# refloc conic model 1\n";
  if (emit_sdp_note) {
    os << "# each RSOC row x^2 <= y z is equivalent to the 3x3 semidefinite block\n";
    os << "#   [ y+z   0    2x ]\n";
    os << "#   [  0   y+z  y-z ]  >= 0,  y+z >= 0\n";
    os << "#   [ 2x   y-z  y+z ]\n";
  }
  os << "META side " << m.meta.side << " transit " << (m.meta.transit ? 1 : 0) << " minlp "
     << (m.meta.minlp ? 1 : 0) << " dim " << m.meta.dim << " nA " << m.meta.n_a << " nB "
     << m.meta.n_b << " rA " << m.meta.r_a << " sA " << m.meta.s_a << " rB " << m.meta.r_b
     << " sB " << m.meta.s_b << " pure_lp " << (m.meta.pure_lp ? 1 : 0) << "\n";
  os << "VARS " << m.vars.size() << "\n";
  for (const auto& v : m.vars)
    os << v.name << (v.nonneg ? " nonneg" : " free") << (v.aux ? " aux" : "") << "\n";
  os << "OBJ " << m.objective.size() << "\n";
  for (const auto& t : m.objective) os << t.var << " " << num(t.coef) << "\n";
  os << "LIN " << m.rows.size() << "\n";
  for (const auto& r : m.rows) {
    os << r.tag << " " << r.sense << " " << num(r.rhs) << " " << r.terms.size();
    for (const auto& t : r.terms) os << " " << t.var << " " << num(t.coef);
    os << "\n";
  }
  os << "POW " << m.powers.size() << "\n";
  for (const auto& p : m.powers)
    os << p.tag << " " << p.t << " " << p.xi << " " << p.z << " " << p.r << " " << p.s << "\n";
  os << "RSOC " << m.rsocs.size() << "\n";
  for (const auto& r : m.rsocs) os << r.tag << " " << r.x << " " << r.y << " " << r.z << "\n";
  os << "BIN " << m.binaries.size() << "\n";
  for (int b : m.binaries) os << b << "\n";
  os << "END\n";
}

inline void write_model_file(const ConicModel& m, const std::string& path,
                             bool emit_sdp_note = false) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_model(m, os, emit_sdp_note);
}

inline ConicModel read_model(std::istream& is) {
  ConicModel m;
  std::string line;
  auto next_data_line = [&]() -> std::string {
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      return line;
    }
    throw ParseError("conic model: unexpected end of file");
  };
  std::string l = next_data_line();
  {
    std::istringstream ls(l);
    std::string kw, key;
    ls >> kw;
    if (kw != "META") throw ParseError("conic model: expected META, got '" + l + "'");
    while (ls >> key) {
      if (key == "side") {
        std::string v;
        ls >> v;
        m.meta.side = v[0];
      } else {
        long v = 0;
        ls >> v;
        if (key == "transit") m.meta.transit = v;
        else if (key == "minlp") m.meta.minlp = v;
        else if (key == "dim") m.meta.dim = static_cast<int>(v);
        else if (key == "nA") m.meta.n_a = static_cast<int>(v);
        else if (key == "nB") m.meta.n_b = static_cast<int>(v);
        else if (key == "rA") m.meta.r_a = v;
        else if (key == "sA") m.meta.s_a = v;
        else if (key == "rB") m.meta.r_b = v;
        else if (key == "sB") m.meta.s_b = v;
        else if (key == "pure_lp") m.meta.pure_lp = v;
        else throw ParseError("conic model: unknown META key '" + key + "'");
      }
    }
  }
  auto section = [&](const char* name) -> std::size_t {
    std::istringstream ls(next_data_line());
    std::string kw;
    std::size_t n = 0;
    ls >> kw >> n;
    if (kw != name) throw ParseError("conic model: expected section " + std::string(name));
    return n;
  };
  const std::size_t nv = section("VARS");
  for (std::size_t i = 0; i < nv; ++i) {
    std::istringstream ls(next_data_line());
    ConicVar v;
    std::string bound, aux;
    ls >> v.name >> bound;
    v.nonneg = bound == "nonneg";
    if (ls >> aux) v.aux = aux == "aux";
    m.vars.push_back(std::move(v));
  }
  const std::size_t no = section("OBJ");
  for (std::size_t i = 0; i < no; ++i) {
    std::istringstream ls(next_data_line());
    LinTerm t;
    ls >> t.var >> t.coef;
    m.objective.push_back(t);
  }
  const std::size_t nr = section("LIN");
  for (std::size_t i = 0; i < nr; ++i) {
    std::istringstream ls(next_data_line());
    LinRow r;
    std::size_t k = 0;
    ls >> r.tag >> r.sense >> r.rhs >> k;
    r.terms.resize(k);
    for (auto& t : r.terms) ls >> t.var >> t.coef;
    m.rows.push_back(std::move(r));
  }
  const std::size_t np = section("POW");
  for (std::size_t i = 0; i < np; ++i) {
    std::istringstream ls(next_data_line());
    PowerCon p;
    ls >> p.tag >> p.t >> p.xi >> p.z >> p.r >> p.s;
    m.powers.push_back(std::move(p));
  }
  const std::size_t nc = section("RSOC");
  for (std::size_t i = 0; i < nc; ++i) {
    std::istringstream ls(next_data_line());
    RsocCon r;
    ls >> r.tag >> r.x >> r.y >> r.z;
    m.rsocs.push_back(std::move(r));
  }
  const std::size_t nb = section("BIN");
  for (std::size_t i = 0; i < nb; ++i) {
    std::istringstream ls(next_data_line());
    int b;
    ls >> b;
    m.binaries.push_back(b);
  }
  if (next_data_line() != "END") throw ParseError("conic model: missing END");
  return m;
}

inline bool models_equal(const ConicModel& a, const ConicModel& b) {
  std::ostringstream sa, sb;
  write_model(a, sa);
  write_model(b, sb);
  return sa.str() == sb.str();
}

}  // namespace refloc
