#pragma once

// Single-facility location under a hyperplane-split mixed norm. The problem
// is solved by halfspace decomposition: the facility and all gate points of
// one closed halfspace are optimized jointly (the objective restricted to a
// side is convex in the facility and the gates together), and the better of
// the two side solutions wins, ties going to side A.
//
// Each side solve minimizes
//     sum_same  w_i |x - p_i|_side
//   + sum_cross w_m ( |x - y_m|_side [+ |y_m - y'_m|_H] + |last gate - p_m|_other )
// over x in the halfspace and gates on H. The gate blocks couple only to x,
// so the Newton step is formed by eliminating them with a Schur complement,
// which keeps each iteration linear in the number of demand points. The
// halfspace constraint is handled exactly: if the unconstrained minimizer
// lands outside, the side optimum lies on H and the solve is repeated in the
// tangent parametrization.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "refloc/detail/parallel.hpp"
#include "refloc/refraction.hpp"

namespace refloc {

struct LocationInstance {
  Hyperplane h;
  NormSpec norm_a = NormSpec::lp(2, 1);
  NormSpec norm_b = NormSpec::lp(2, 1);
  std::optional<NormSpec> norm_h;
  std::vector<DemandPoint> points_a, points_b;

  int dim() const { return h.dim(); }
  std::size_t total_points() const { return points_a.size() + points_b.size(); }

  // The halfspace-split model assumes movement is at least as fast on side A
  // (p_A >= p_B); violations are legal but worth surfacing.
  bool standing_assumption_violated() const {
    if (!norm_a.is_lp_kind() || !norm_b.is_lp_kind()) return false;
    return norm_a.p() < norm_b.p();
  }
};

struct LocateOptions {
  detail::SolveControl control;
  double mu_final = 1e-10;
  int threads = 1;
};

struct ObjectiveEval {
  double value = 0.0;
  // Aligned to [points_a..., points_b...]; empty for same-side points, the
  // point itself for points on H, one or two gates for cross-side points.
  std::vector<std::vector<Vec>> gates;
  bool all_converged = true;
};

struct SideDiagnostics {
  int iterations = 0;
  bool converged = false;
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();
  bool on_boundary = false;  // halfspace constraint active
};

struct SideSolve {
  Vec x;
  double f = std::numeric_limits<double>::infinity();
  std::vector<std::vector<Vec>> gates;
  SideDiagnostics diag;
};

struct LocateResult {
  Vec x_star;
  double f_star = 0.0;
  Side side = Side::A;
  double f_side_a = 0.0, f_side_b = 0.0;
  std::vector<std::vector<Vec>> per_point_gates;
  SideDiagnostics diag_a, diag_b;
};

struct UniquenessReport {
  std::size_t count_a = 0, count_b = 0;
  bool size_ok = false;
  bool a_non_collinear = false, b_non_collinear = false;
  bool p_flags_known = true;
  bool p_strict_single = false;   // p_A < inf and p_B > 1
  bool p_strict_transit = false;  // p_B > 1 or p_A < inf
  bool unique_single() const {
    return size_ok && (a_non_collinear || b_non_collinear) && p_strict_single;
  }
  bool unique_transit() const {
    return size_ok && (a_non_collinear || b_non_collinear) && p_strict_transit;
  }
};

namespace detail {

struct CrossLeg {
  Vec point;
  double weight = 1.0;
};

// One side's joint problem over (x, gates).
struct SideProblem {
  const LocationInstance* inst = nullptr;
  Side side = Side::A;
  bool transit = false;
  NormSpec side_norm = NormSpec::lp(2, 1);
  NormSpec other_norm = NormSpec::lp(2, 1);
  NormSpec h_norm = NormSpec::lp(2, 1);
  std::vector<CrossLeg> same, cross;
  std::vector<int> cross_index;  // positions in [A..., B...]
  std::vector<int> on_h_index;   // on-H points folded into `same`
  Mat T;
  Vec x0;
  int d = 0, k = 0, kb = 0;
  double extent = 1.0;

  SideProblem(const LocationInstance& in, Side s, bool tr) : inst(&in), side(s), transit(tr) {
    side_norm = (s == Side::A) ? in.norm_a : in.norm_b;
    other_norm = (s == Side::A) ? in.norm_b : in.norm_a;
    if (transit) {
      if (!in.norm_h) throw std::invalid_argument("transit solve: instance has no hyperplane norm");
      h_norm = *in.norm_h;
    }
    d = in.dim();
    T = in.h.tangent_basis();
    x0 = in.h.base_point();
    k = d - 1;
    kb = transit ? 2 * k : k;
    const double tol = in.h.on_tol();
    Vec lo = Vec::Constant(d, std::numeric_limits<double>::infinity());
    Vec hi = -lo;
    int idx = 0;
    auto add = [&](const DemandPoint& p, bool own_side) {
      lo = lo.cwiseMin(p.coords);
      hi = hi.cwiseMax(p.coords);
      const bool on_h = std::abs(in.h.signed_eval(p.coords)) <= tol;
      if (own_side || on_h) {
        same.push_back({p.coords, p.weight});
        if (on_h) on_h_index.push_back(idx);
      } else {
        cross.push_back({p.coords, p.weight});
        cross_index.push_back(idx);
      }
      ++idx;
    };
    for (const auto& p : in.points_a) add(p, s == Side::A);
    for (const auto& p : in.points_b) add(p, s == Side::B);
    if (!same.empty() || !cross.empty()) extent = 1.0 + (hi - lo).lpNorm<Eigen::Infinity>();
  }

  bool any_nonsmooth() const {
    bool r = has_hessian_walls(side_norm) || has_hessian_walls(other_norm);
    if (transit) r = r || has_hessian_walls(h_norm);
    return r;
  }
};

// Evaluate the side objective (value only) at facility x and tangent gates.
inline double side_value(const SideProblem& pr, const Vec& x, const std::vector<Vec>& gates,
                         double mu) {
  LocalModel lm;
  double f = 0.0;
  for (const auto& p : pr.same) {
    smooth_norm_model(pr.side_norm, x - p.point, mu, 0, lm);
    f += p.weight * lm.val;
  }
  for (std::size_t m = 0; m < pr.cross.size(); ++m) {
    const Vec ga = pr.x0 + pr.T * gates[m].head(pr.k);
    smooth_norm_model(pr.side_norm, x - ga, mu, 0, lm);
    f += pr.cross[m].weight * lm.val;
    if (pr.transit) {
      const Vec gb = pr.x0 + pr.T * gates[m].tail(pr.k);
      smooth_norm_model(pr.h_norm, ga - gb, mu, 0, lm);
      f += pr.cross[m].weight * lm.val;
      smooth_norm_model(pr.other_norm, gb - pr.cross[m].point, mu, 0, lm);
      f += pr.cross[m].weight * lm.val;
    } else {
      smooth_norm_model(pr.other_norm, ga - pr.cross[m].point, mu, 0, lm);
      f += pr.cross[m].weight * lm.val;
    }
  }
  return f;
}

struct JointReport {
  int iterations = 0;
  bool converged = false;
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  double decrement = std::numeric_limits<double>::quiet_NaN();
  double f = std::numeric_limits<double>::quiet_NaN();
};

// Damped Newton on (x, gates) with per-point Schur elimination. `on_h` pins
// the facility to the hyperplane (x = x0 + T w).
inline JointReport side_newton(const SideProblem& pr, bool on_h, double mu,
                               const SolveControl& ctl, Vec& x, std::vector<Vec>& gates) {
  const int m = static_cast<int>(pr.cross.size());
  const int dimx = on_h ? pr.k : pr.d;
  const Mat X = on_h ? pr.T : Mat::Identity(pr.d, pr.d);
  auto facility = [&](const Vec& z) -> Vec { return on_h ? Vec(pr.x0 + pr.T * z) : z; };

  Vec zx = on_h ? Vec(pr.T.transpose() * (x - pr.x0)) : x;

  std::vector<Vec> gm(m, Vec(pr.kb));
  std::vector<Mat> Dm(m, Mat(pr.kb, pr.kb)), Cm(m, Mat(dimx, pr.kb));
  std::vector<Mat> Wm(m);
  std::vector<Vec> ym(m), dgm(m, Vec(pr.kb));
  Vec gx(dimx), rhs(dimx), dx(dimx);
  Mat Hxx(dimx, dimx), S(dimx, dimx);
  LocalModel lm;
  lm.grad.resize(pr.d);
  lm.hess.resize(pr.d, pr.d);

  JointReport rep;
  double f = 0.0;

  auto assemble = [&]() {
    f = 0.0;
    gx.setZero();
    Hxx.setZero();
    const Vec xf = facility(zx);
    for (const auto& p : pr.same) {
      smooth_norm_model(pr.side_norm, xf - p.point, mu, 2, lm);
      f += p.weight * lm.val;
      gx.noalias() += p.weight * (X.transpose() * lm.grad);
      Hxx.noalias() += p.weight * (X.transpose() * lm.hess * X);
    }
    for (int i = 0; i < m; ++i) {
      gm[i].setZero();
      Dm[i].setZero();
      const Vec ga = pr.x0 + pr.T * gates[i].head(pr.k);
      const double w = pr.cross[i].weight;
      smooth_norm_model(pr.side_norm, xf - ga, mu, 2, lm);
      f += w * lm.val;
      gx.noalias() += w * (X.transpose() * lm.grad);
      Hxx.noalias() += w * (X.transpose() * lm.hess * X);
      gm[i].head(pr.k).noalias() -= w * (pr.T.transpose() * lm.grad);
      const Mat ht = w * (lm.hess * pr.T);
      Dm[i].topLeftCorner(pr.k, pr.k).noalias() = pr.T.transpose() * ht;
      Cm[i].leftCols(pr.k).noalias() = -(X.transpose() * ht);
      if (pr.transit) Cm[i].rightCols(pr.k).setZero();
      if (pr.transit) {
        const Vec gb = pr.x0 + pr.T * gates[i].tail(pr.k);
        smooth_norm_model(pr.h_norm, ga - gb, mu, 2, lm);
        f += w * lm.val;
        const Vec th = pr.T.transpose() * (w * lm.grad);
        gm[i].head(pr.k) += th;
        gm[i].tail(pr.k) -= th;
        const Mat hh = pr.T.transpose() * (w * lm.hess) * pr.T;
        Dm[i].topLeftCorner(pr.k, pr.k) += hh;
        Dm[i].bottomRightCorner(pr.k, pr.k) = hh;
        Dm[i].topRightCorner(pr.k, pr.k) = -hh;
        Dm[i].bottomLeftCorner(pr.k, pr.k) = -hh;
        smooth_norm_model(pr.other_norm, gb - pr.cross[i].point, mu, 2, lm);
        f += w * lm.val;
        gm[i].tail(pr.k).noalias() += w * (pr.T.transpose() * lm.grad);
        Dm[i].bottomRightCorner(pr.k, pr.k).noalias() += w * (pr.T.transpose() * lm.hess * pr.T);
      } else {
        smooth_norm_model(pr.other_norm, ga - pr.cross[i].point, mu, 2, lm);
        f += w * lm.val;
        gm[i].head(pr.k).noalias() += w * (pr.T.transpose() * lm.grad);
        Dm[i].topLeftCorner(pr.k, pr.k).noalias() += w * (pr.T.transpose() * lm.hess * pr.T);
      }
    }
  };

  assemble();
  for (int it = 0; it < ctl.max_iter; ++it) {
    rep.iterations = it;
    rep.f = f;
    double gsq = gx.squaredNorm();
    for (int i = 0; i < m; ++i) gsq += gm[i].squaredNorm();
    rep.grad_norm = std::sqrt(gsq);
    if (rep.grad_norm <= ctl.polish_tol * (1.0 + std::abs(f))) break;

    double hscale = std::max(Hxx.diagonal().cwiseAbs().maxCoeff(), 1e-30);
    double ridge = 0.0;
    double slope = 0.0;
    bool have_dir = false;
    for (int attempt = 0; attempt < 12 && !have_dir; ++attempt) {
      S = Hxx;
      if (ridge > 0.0) S.diagonal().array() += ridge;
      rhs = -gx;
      bool blocks_ok = true;
      for (int i = 0; i < m; ++i) {
        Mat dreg = Dm[i];
        const double dsc = std::max(dreg.diagonal().cwiseAbs().maxCoeff(), 1e-30);
        dreg.diagonal().array() += std::max(ridge, 1e-13 * dsc);
        Eigen::LDLT<Mat> ldlt(dreg);
        if (ldlt.info() != Eigen::Success) {
          blocks_ok = false;
          break;
        }
        Wm[i] = ldlt.solve(Cm[i].transpose());
        ym[i] = ldlt.solve(gm[i]);
        S.noalias() -= Cm[i] * Wm[i];
        rhs.noalias() += Cm[i] * ym[i];
      }
      if (blocks_ok) {
        Eigen::LDLT<Mat> sldlt(S);
        if (sldlt.info() == Eigen::Success) {
          dx = sldlt.solve(rhs);
          if (dx.allFinite()) {
            slope = gx.dot(dx);
            for (int i = 0; i < m; ++i) {
              dgm[i] = -(ym[i] + Wm[i] * dx);
              slope += gm[i].dot(dgm[i]);
            }
            have_dir = slope < 0.0;
          }
        }
      }
      if (!have_dir) ridge = (ridge == 0.0) ? 1e-10 * hscale : ridge * 100.0;
    }
    if (!have_dir) {
      dx = -gx / hscale;
      slope = -gx.squaredNorm() / hscale;
      for (int i = 0; i < m; ++i) {
        dgm[i] = -gm[i] / hscale;
        slope += -gm[i].squaredNorm() / hscale;
      }
    }
    rep.decrement = -slope;
    if (converged_test(rep.grad_norm, rep.decrement, f, ctl.polish_tol)) break;

    const double cap = 1e3 * pr.extent;
    double dmax = dx.lpNorm<Eigen::Infinity>();
    for (int i = 0; i < m; ++i) dmax = std::max(dmax, dgm[i].lpNorm<Eigen::Infinity>());
    if (dmax > cap) {
      const double sc = cap / dmax;
      dx *= sc;
      for (int i = 0; i < m; ++i) dgm[i] *= sc;
      slope *= sc;
    }

    double step = 1.0;
    bool accepted = false;
    Vec zx_new;
    std::vector<Vec> gates_new(m);
    for (int ls = 0; ls < 60; ++ls) {
      zx_new = zx + step * dx;
      for (int i = 0; i < m; ++i) gates_new[i] = gates[i] + step * dgm[i];
      const double f_new = side_value(pr, facility(zx_new), gates_new, mu);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
      if (step < 1e-14) break;
    }
    if (!accepted) break;
    double move = (zx_new - zx).lpNorm<Eigen::Infinity>();
    for (int i = 0; i < m; ++i)
      move = std::max(move, (gates_new[i] - gates[i]).lpNorm<Eigen::Infinity>());
    zx.swap(zx_new);
    gates.swap(gates_new);
    assemble();
    rep.f = f;
    if (move <= 1e-15 * pr.extent) {
      ++rep.iterations;
      break;
    }
  }
  double g2 = gx.squaredNorm();
  for (int i = 0; i < m; ++i) g2 += gm[i].squaredNorm();
  rep.grad_norm = std::sqrt(g2);
  rep.f = f;
  rep.converged = converged_test(rep.grad_norm, rep.decrement, rep.f, ctl.grad_tol);
  x = facility(zx);
  return rep;
}

// Exact side objective at the facility x: plain legs for the side's own (and
// on-H) points, freshly solved gate paths for the cross points, warm-started
// from and written back into `gates_by_index` (gate lists ordered from the
// side-A endpoint). Mirrors the side problem's own structure, which matters
// when x sits on the hyperplane.
inline double side_refresh(const SideProblem& pr, const Vec& x,
                           std::vector<std::vector<Vec>>& gates_by_index, int threads,
                           double mu_final) {
  std::vector<double> contrib(pr.cross.size());
  parallel_for(static_cast<int>(pr.cross.size()), threads, [&](int i) {
    PathQuery q;
    q.h = pr.inst->h;
    q.norm_a = pr.inst->norm_a;
    q.norm_b = pr.inst->norm_b;
    const DemandPoint facility(x, pr.cross[i].weight);
    const DemandPoint demand(pr.cross[i].point, pr.cross[i].weight);
    q.a = (pr.side == Side::A) ? facility : demand;
    q.b = (pr.side == Side::A) ? demand : facility;
    if (pr.transit) {
      q.norm_h = pr.h_norm;
      q.weight_h = pr.cross[i].weight;
    }
    GateOptions gopt;
    gopt.mu_final = mu_final;
    auto& stored = gates_by_index[pr.cross_index[i]];
    if (!stored.empty()) {
      const Vec& gfac = (pr.side == Side::A) ? stored.front() : stored.back();
      const Vec& gdem = (pr.side == Side::A) ? stored.back() : stored.front();
      // Warm starts follow the query orientation (gate next to q.a first).
      gopt.warm_gate_a = pr.T.transpose() * ((pr.side == Side::A ? gfac : gdem) - pr.x0);
      if (pr.transit)
        gopt.warm_gate_b = pr.T.transpose() * ((pr.side == Side::A ? gdem : gfac) - pr.x0);
    }
    const PathResult r = pr.transit ? gate_transit(q, gopt) : gate_single(q, gopt);
    stored = r.gates;
    contrib[i] = r.total;
  });
  double f = 0.0;
  for (const auto& p : pr.same) f += p.weight * pr.side_norm.eval(x - p.point);
  for (double v : contrib) f += v;
  return f;
}

// Exact stationarity residual at (x, gates) for one side, scored through the
// true subdifferentials (with kink snapping): the facility block must contain
// zero (or meet the boundary multiplier when the halfspace is active), each
// gate block must satisfy its refraction inclusion.
inline double side_kkt(const SideProblem& pr, bool on_boundary, const Vec& x,
                       const std::vector<std::vector<Vec>>& gates_by_index) {
  // A phase-1 solve may converge onto H from the feasible side; the halfspace
  // multiplier applies whenever the facility actually sits on the boundary.
  on_boundary = on_boundary || std::abs(pr.inst->h.signed_eval(x)) <= pr.inst->h.on_tol();
  double res = 0.0;
  Vec gsum = Vec::Zero(pr.d);
  std::vector<SubdiffSet> rough;
  auto add_term = [&](const NormSpec& n, const Vec& v, double w) {
    const double snap = snap_tol(v);
    SubdiffSet s = n.subgradient(v, snap);
    if (s.form() == SubdiffSet::Form::Singleton)
      gsum += w * s.point();
    else
      rough.push_back(s.scaled(w));
  };
  for (const auto& p : pr.same) add_term(pr.side_norm, x - p.point, p.weight);
  for (std::size_t i = 0; i < pr.cross.size(); ++i) {
    // Gate lists run from the side-A endpoint, so the facility-adjacent gate
    // is the first for a side-A facility and the last otherwise. When the
    // path chain collapses onto the facility (gates equal to an on-H x), the
    // term reduces to the first surviving leg's norm, and that is the
    // gradient the facility block must balance; the zero-displacement ball
    // would accept almost anything here.
    const auto& g = gates_by_index[pr.cross_index[i]];
    const double w = pr.cross[i].weight;
    const Vec& gfac = pr.side == Side::A ? g.front() : g.back();
    const Vec v1 = x - gfac;
    if (v1.lpNorm<Eigen::Infinity>() > snap_tol(v1)) {
      add_term(pr.side_norm, v1, w);
    } else if (pr.transit) {
      const Vec& gdem = pr.side == Side::A ? g.back() : g.front();
      const Vec vh = x - gdem;
      if (vh.lpNorm<Eigen::Infinity>() > snap_tol(vh))
        add_term(pr.h_norm, vh, w);
      else
        add_term(pr.other_norm, x - pr.cross[i].point, w);
    } else {
      add_term(pr.other_norm, x - pr.cross[i].point, w);
    }
  }
  if (rough.empty()) {
    res = on_boundary ? inclusion_residual(pr.inst->h.alpha, {SubdiffSet::singleton(gsum)})
                      : gsum.norm();
  } else {
    rough.push_back(SubdiffSet::singleton(gsum));
    if (on_boundary) {
      res = inclusion_residual(pr.inst->h.alpha, rough);
    } else {
      // dist(0, sum of sets) via the same engine with a pinned multiplier.
      res = inclusion_residual(Vec::Zero(pr.d), rough);
    }
  }
  // Gate blocks: the per-point refraction conditions, with the gate list
  // ordered from the side-A endpoint as everywhere else.
  for (std::size_t i = 0; i < pr.cross.size(); ++i) {
    PathQuery q;
    q.h = pr.inst->h;
    q.norm_a = pr.inst->norm_a;
    q.norm_b = pr.inst->norm_b;
    const DemandPoint facility(x, pr.cross[i].weight);
    const DemandPoint demand(pr.cross[i].point, pr.cross[i].weight);
    q.a = (pr.side == Side::A) ? facility : demand;
    q.b = (pr.side == Side::A) ? demand : facility;
    if (pr.transit) {
      q.norm_h = pr.h_norm;
      q.weight_h = pr.cross[i].weight;
    }
    const auto& g = gates_by_index[pr.cross_index[i]];
    res = std::max(res, snell_residual(q, g));
  }
  return res;
}

}  // namespace detail

// Exact objective value at x: same-side points (and points on H) contribute
// plain norms of the facility's side, cross-side points contribute freshly
// solved gate paths. Returned gates can seed later evaluations.
inline ObjectiveEval objective_eval(const LocationInstance& inst, const Vec& x, bool transit,
                                    const LocateOptions& opts = {},
                                    const std::vector<std::vector<Vec>>* warm = nullptr) {
  if (!x.allFinite()) throw std::invalid_argument("objective_eval: non-finite facility");
  if (transit && !inst.norm_h)
    throw std::invalid_argument("objective_eval: transit requested but the instance has no hyperplane norm");
  const double tol = inst.h.on_tol();
  Side fs = side_of(inst.h, x, tol);
  if (fs == Side::On) fs = Side::A;  // boundary facilities count as side A
  const NormSpec& fnorm = fs == Side::A ? inst.norm_a : inst.norm_b;
  const Mat T = inst.h.tangent_basis();
  const Vec x0 = inst.h.base_point();

  const int n = static_cast<int>(inst.total_points());
  ObjectiveEval out;
  out.gates.resize(n);
  std::vector<double> contrib(n, 0.0);
  std::vector<char> ok(n, 1);

  auto point_at = [&](int i) -> const DemandPoint& {
    return i < static_cast<int>(inst.points_a.size())
               ? inst.points_a[i]
               : inst.points_b[i - inst.points_a.size()];
  };
  auto set_of = [&](int i) { return i < static_cast<int>(inst.points_a.size()) ? Side::A : Side::B; };

  detail::parallel_for(n, opts.threads, [&](int i) {
    const DemandPoint& p = point_at(i);
    const bool on_h = std::abs(inst.h.signed_eval(p.coords)) <= tol;
    if (on_h) {
      contrib[i] = p.weight * fnorm.eval(x - p.coords);
      out.gates[i] = {p.coords};
      return;
    }
    if (set_of(i) == fs) {
      contrib[i] = p.weight * fnorm.eval(x - p.coords);
      return;
    }
    PathQuery q;
    q.h = inst.h;
    q.norm_a = inst.norm_a;
    q.norm_b = inst.norm_b;
    if (transit) {
      q.norm_h = *inst.norm_h;
      q.weight_h = p.weight;
    }
    if (fs == Side::A) {
      q.a = DemandPoint(x, p.weight);
      q.b = DemandPoint(p.coords, p.weight);
    } else {
      q.a = DemandPoint(p.coords, p.weight);
      q.b = DemandPoint(x, p.weight);
    }
    GateOptions gopt;
    gopt.mu_final = opts.mu_final;
    if (warm && i < static_cast<int>(warm->size()) && !(*warm)[i].empty()) {
      const auto& wg = (*warm)[i];
      gopt.warm_gate_a = T.transpose() * (wg.front() - x0);
      if (wg.size() > 1) gopt.warm_gate_b = T.transpose() * (wg.back() - x0);
    }
    const PathResult r = transit ? gate_transit(q, gopt) : gate_single(q, gopt);
    contrib[i] = r.total;
    out.gates[i] = r.gates;
    ok[i] = r.converged ? 1 : 0;
  });

  for (int i = 0; i < n; ++i) {
    out.value += contrib[i];
    out.all_converged = out.all_converged && ok[i];
  }
  return out;
}

namespace detail {

inline const Vec& point_coords(const LocationInstance& inst, int idx) {
  return idx < static_cast<int>(inst.points_a.size())
             ? inst.points_a[idx].coords
             : inst.points_b[idx - inst.points_a.size()].coords;
}

}  // namespace detail

// Minimize the side-restricted objective jointly over the facility and all
// gates. The reported f is the exact objective at the returned point.
inline SideSolve solve_side(const LocationInstance& inst, Side side, bool transit,
                            const LocateOptions& opts = {},
                            const std::optional<Vec>& start = std::nullopt) {
  if (side == Side::On) throw std::invalid_argument("solve_side: side must be A or B");
  if (inst.total_points() == 0) throw std::invalid_argument("solve_side: no demand points");
  detail::SideProblem pr(inst, side, transit);
  const int m = static_cast<int>(pr.cross.size());

  // Start list: the weighted centroid of everything, then of the side's own
  // points; a later start is only tried when the previous one fails.
  std::vector<Vec> starts;
  if (start) starts.push_back(*start);
  Vec c1 = Vec::Zero(pr.d);
  double wsum = 0.0;
  for (const auto& p : pr.same) {
    c1 += p.weight * p.point;
    wsum += p.weight;
  }
  for (const auto& p : pr.cross) {
    c1 += p.weight * p.point;
    wsum += p.weight;
  }
  starts.push_back(wsum > 0 ? Vec(c1 / wsum) : pr.x0);
  if (!pr.same.empty()) {
    Vec c2 = Vec::Zero(pr.d);
    double w2 = 0.0;
    for (const auto& p : pr.same) {
      c2 += p.weight * p.point;
      w2 += p.weight;
    }
    starts.push_back(c2 / w2);
  } else {
    starts.push_back(pr.x0);
  }

  const auto schedule = detail::mu_schedule(pr.any_nonsmooth(), pr.extent, opts.mu_final);
  SideSolve best;
  for (const Vec& s0 : starts) {
    Vec x = s0;
    std::vector<Vec> gates(m, Vec::Zero(pr.kb));
    for (int i = 0; i < m; ++i) {
      Vec u = detail::initial_gate(inst.h, s0, pr.cross[i].point, pr.T, pr.x0);
      gates[i].head(pr.k) = u;
      if (pr.transit) gates[i].tail(pr.k) = u;
    }
    detail::JointReport rep;
    int iters = 0;
    bool on_h = false;
    for (double mu : schedule) {
      // Intermediate smoothing stages only need to hand the next stage a warm
      // start; the full budget is reserved for the final one.
      detail::SolveControl ctl = opts.control;
      if (mu != schedule.back()) {
        ctl.max_iter = std::min(ctl.max_iter, 60);
        ctl.polish_tol = 1e-6;
      }
      rep = detail::side_newton(pr, on_h, mu, ctl, x, gates);
      iters += rep.iterations;
      if (!on_h) {
        const double viol = (side == Side::A) ? inst.h.signed_eval(x) : -inst.h.signed_eval(x);
        if (viol > inst.h.on_tol()) {
          // Side optimum sits on H: restart this stage in the tangent chart.
          on_h = true;
          x -= (inst.h.signed_eval(x) / inst.h.alpha.squaredNorm()) * inst.h.alpha;
          rep = detail::side_newton(pr, on_h, mu, ctl, x, gates);
          iters += rep.iterations;
        }
      }
    }

    SideSolve sol;
    sol.x = x;
    sol.diag.iterations = iters;
    sol.diag.on_boundary = on_h;
    auto collect_gates = [&]() {
      sol.gates.assign(inst.total_points(), {});
      for (int i = 0; i < m; ++i) {
        // The joint head block is the facility-adjacent gate; gate lists are
        // ordered from the side-A endpoint.
        const Vec gx = pr.x0 + pr.T * gates[i].head(pr.k);
        if (pr.transit) {
          const Vec gp = pr.x0 + pr.T * gates[i].tail(pr.k);
          if (side == Side::A)
            sol.gates[pr.cross_index[i]] = {gx, gp};
          else
            sol.gates[pr.cross_index[i]] = {gp, gx};
        } else {
          sol.gates[pr.cross_index[i]] = {gx};
        }
      }
      for (int idx : pr.on_h_index) sol.gates[idx] = {detail::point_coords(inst, idx)};
    };
    auto refresh = [&]() {
      sol.f = detail::side_refresh(pr, sol.x, sol.gates, opts.threads, opts.mu_final);
      sol.diag.kkt_residual = detail::side_kkt(pr, on_h, sol.x, sol.gates);
    };
    collect_gates();
    refresh();
    if (!(sol.diag.kkt_residual <= 1e-7 * (1.0 + std::abs(sol.f))) && rep.converged) {
      // Gates moved during the refresh: one warm joint polish at the final mu.
      for (int i = 0; i < m; ++i) {
        const auto& g = sol.gates[pr.cross_index[i]];
        const Vec& gfac = (side == Side::A) ? g.front() : g.back();
        const Vec& gdem = (side == Side::A) ? g.back() : g.front();
        gates[i].head(pr.k) = pr.T.transpose() * (gfac - pr.x0);
        if (pr.transit) gates[i].tail(pr.k) = pr.T.transpose() * (gdem - pr.x0);
      }
      Vec xp = sol.x;
      const auto rep2 = detail::side_newton(pr, on_h, schedule.back(), opts.control, xp, gates);
      iters += rep2.iterations;
      sol.diag.iterations = iters;
      sol.x = xp;
      collect_gates();
      refresh();
      rep = rep2;
    }
    sol.diag.converged =
        rep.converged || sol.diag.kkt_residual <= 1e-7 * (1.0 + std::abs(sol.f));

    if (sol.f < best.f) best = std::move(sol);
    if (best.diag.converged) break;
  }
  return best;
}

// Solve both side restrictions and keep the better facility; ties within
// 1e-9 * (1 + |f_A|) resolve to side A.
inline LocateResult solve(const LocationInstance& inst, bool transit,
                          const LocateOptions& opts = {}) {
  if (inst.total_points() < 1) throw std::invalid_argument("solve: need at least one demand point");
  SideSolve ra = solve_side(inst, Side::A, transit, opts);
  SideSolve rb = solve_side(inst, Side::B, transit, opts);
  if (!ra.diag.converged && !rb.diag.converged) {
    std::ostringstream msg;
    msg << "location solve failed on both sides (KKT residuals " << ra.diag.kkt_residual << ", "
        << rb.diag.kkt_residual << ")";
    throw SolveError(msg.str());
  }
  LocateResult out;
  out.f_side_a = ra.f;
  out.f_side_b = rb.f;
  out.diag_a = ra.diag;
  out.diag_b = rb.diag;
  const double tie_tol = 1e-9 * (1.0 + std::abs(ra.f));
  const bool pick_a = ra.f <= rb.f + tie_tol;
  const SideSolve& win = pick_a ? ra : rb;
  out.side = pick_a ? Side::A : Side::B;
  out.x_star = win.x;
  out.f_star = std::min(ra.f, rb.f);
  out.per_point_gates = win.gates;
  return out;
}

// Sufficient-condition report for uniqueness of the optimum.
inline UniquenessReport uniqueness_report(const LocationInstance& inst) {
  UniquenessReport rep;
  rep.count_a = inst.points_a.size();
  rep.count_b = inst.points_b.size();
  rep.size_ok = std::min(rep.count_a, rep.count_b) > 2;
  auto non_collinear = [&](const std::vector<DemandPoint>& pts) {
    if (pts.size() < 3) return false;
    Vec mean = Vec::Zero(inst.dim());
    for (const auto& p : pts) mean += p.coords;
    mean /= static_cast<double>(pts.size());
    Mat M(pts.size(), inst.dim());
    for (std::size_t i = 0; i < pts.size(); ++i) M.row(i) = (pts[i].coords - mean).transpose();
    Eigen::JacobiSVD<Mat> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() < 2) return false;
    return sv[1] > 1e-9 * std::max(1.0, sv[0]);
  };
  rep.a_non_collinear = non_collinear(inst.points_a);
  rep.b_non_collinear = non_collinear(inst.points_b);
  if (inst.norm_a.is_lp_kind() && inst.norm_b.is_lp_kind()) {
    const bool pa_finite = inst.norm_a.kind() != NormKind::LInf;
    const bool pb_strict = inst.norm_b.kind() != NormKind::L1;
    rep.p_strict_single = pa_finite && pb_strict;
    rep.p_strict_transit = pa_finite || pb_strict;
  } else {
    rep.p_flags_known = false;
  }
  return rep;
}

}  // namespace refloc
