#pragma once

// Gate-point solvers for shortest weighted paths across the separating
// hyperplane: the single-gate problem (one norm per side), the two-gate
// transit problem (a third norm along the hyperplane), stationarity
// residuals of the refraction conditions, the rapid-transit (RETM) sampled
// falsifier, and the norm-triple reduction classification.
//
// The solvers parametrize the hyperplane by an orthonormal tangent basis and
// minimize the resulting unconstrained convex objective with damped Newton;
// nonsmooth legs (l1 / linf / polyhedral) are driven through a Huber-type
// smoothing continuation. Reported gate positions, leg lengths and totals are
// always evaluated with the exact norms at the converged gates.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "refloc/detail/inclusion.hpp"
#include "refloc/detail/newton.hpp"
#include "refloc/detail/rng.hpp"
#include "refloc/detail/smooth.hpp"
#include "refloc/geometry.hpp"
#include "refloc/norms.hpp"

namespace refloc {

struct PathQuery {
  DemandPoint a;  // side A (or on H)
  DemandPoint b;  // side B (or on H)
  Hyperplane h;
  NormSpec norm_a = NormSpec::lp(2, 1);
  NormSpec norm_b = NormSpec::lp(2, 1);
  std::optional<NormSpec> norm_h;  // present => transit model
  double weight_h = 1.0;
};

struct PathResult {
  std::vector<Vec> gates;        // on H; [gate next to a] or [gate_a, gate_b]
  std::vector<double> leg_lengths;  // weighted; a-leg [, h-leg], b-leg
  double total = 0.0;
  double snell_residual = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
};

struct GateOptions {
  detail::SolveControl control;
  double mu_final = 1e-10;
  double residual_tol = 1e-7;
  std::optional<Vec> warm_gate_a;  // tangent-space warm starts
  std::optional<Vec> warm_gate_b;
};

double snell_residual(const PathQuery& q, const std::vector<Vec>& gates);

namespace detail {

inline void validate_query(const PathQuery& q) {
  if (!q.a.coords.allFinite() || !q.b.coords.allFinite())
    throw std::invalid_argument("gate query: non-finite coordinates");
  if ((q.a.coords - q.b.coords).lpNorm<Eigen::Infinity>() == 0.0)
    throw std::invalid_argument("gate query: identical endpoints");
  const Side sa = side_of(q.h, q.a.coords);
  const Side sb = side_of(q.h, q.b.coords);
  if (sa == Side::B || sb == Side::A) {
    if (sa == sb)
      throw std::invalid_argument("gate query: both points on the same side");
    throw std::invalid_argument("gate query: endpoint a must lie in H_A and b in H_B");
  }
  if (sa != Side::On && sa == sb)
    throw std::invalid_argument("gate query: both points on the same side");
}

// Tangent coordinates of a reasonable initial gate: the chord crossing when
// the segment [a, b] meets H transversally, otherwise the midpoint foot.
inline Vec initial_gate(const Hyperplane& h, const Vec& a, const Vec& b, const Mat& T,
                        const Vec& x0) {
  const double da = h.signed_eval(a);
  const double db = h.signed_eval(b);
  Vec c;
  if (std::abs(db - da) > 1e-14 * (1.0 + std::abs(da) + std::abs(db))) {
    const double t = da / (da - db);
    c = a + t * (b - a);
  } else {
    c = 0.5 * (a + b);
  }
  return T.transpose() * (c - x0);
}

}  // namespace detail

// Shortest weighted path from a to b crossing H at one gate point.
inline PathResult gate_single(const PathQuery& q, const GateOptions& opts = {}) {
  detail::validate_query(q);
  const Mat T = q.h.tangent_basis();
  const Vec x0 = q.h.base_point();
  const double wa = q.a.weight, wb = q.b.weight;

  Vec u = opts.warm_gate_a ? *opts.warm_gate_a
                           : detail::initial_gate(q.h, q.a.coords, q.b.coords, T, x0);
  const bool rough = detail::needs_continuation(q.norm_a) || detail::needs_continuation(q.norm_b);
  const double extent = (q.a.coords - q.b.coords).lpNorm<Eigen::Infinity>();
  // A warm start is assumed near-optimal: a short continuation tail replaces
  // the full schedule.
  std::vector<double> schedule;
  if (!rough)
    schedule = {opts.mu_final};
  else if (opts.warm_gate_a)
    schedule = {opts.mu_final * 100.0, opts.mu_final};
  else
    schedule = detail::mu_schedule(true, extent, opts.mu_final);

  PathResult res;
  detail::IterReport last;
  for (double mu : schedule) {
    auto fgh = [&](const Vec& z, int order, double& f, Vec& g, Mat& hess) {
      const Vec y = x0 + T * z;
      detail::LocalModel la, lb;
      detail::smooth_norm_model(q.norm_a, y - q.a.coords, mu, order, la);
      detail::smooth_norm_model(q.norm_b, y - q.b.coords, mu, order, lb);
      f = wa * la.val + wb * lb.val;
      if (order >= 1) g = T.transpose() * (wa * la.grad + wb * lb.grad);
      if (order >= 2) hess = T.transpose() * (wa * la.hess + wb * lb.hess) * T;
    };
    last = detail::newton_minimize(fgh, u, opts.control);
    res.iterations += last.iterations;
  }

  const Vec gate = x0 + T * u;
  res.gates = {gate};
  res.leg_lengths = {wa * q.norm_a.eval(gate - q.a.coords), wb * q.norm_b.eval(gate - q.b.coords)};
  res.total = res.leg_lengths[0] + res.leg_lengths[1];
  PathQuery qs = q;
  qs.norm_h.reset();
  res.snell_residual = snell_residual(qs, res.gates);
  res.converged = last.converged && res.snell_residual <= opts.residual_tol;
  return res;
}

// Shortest weighted path from a to b when travel along H under norm_h is
// allowed: two gates, an entry and an exit. Never worse than the single-gate
// path; when the transit leg cannot help the single-gate solution is
// returned with coincident gates.
inline PathResult gate_transit(const PathQuery& q, const GateOptions& opts = {}) {
  if (!q.norm_h) throw std::invalid_argument("gate_transit: query has no hyperplane norm");
  detail::validate_query(q);
  if (!(q.weight_h >= 0.0)) throw std::invalid_argument("gate_transit: negative hyperplane weight");
  const Mat T = q.h.tangent_basis();
  const Vec x0 = q.h.base_point();
  const int k = static_cast<int>(T.cols());
  const double wa = q.a.weight, wb = q.b.weight, wh = q.weight_h;

  PathQuery qs = q;
  qs.norm_h.reset();
  GateOptions sopts = opts;
  sopts.warm_gate_b.reset();
  PathResult single = gate_single(qs, sopts);

  // Cold solves try two starts: the coincident single-gate point and the
  // split pair of per-endpoint projections (the limit of a free hyperplane).
  // Starting only at coincidence can stall against the smoothing wall of the
  // hyperplane leg when splitting would pay off.
  std::vector<Vec> starts;
  if (opts.warm_gate_a) {
    Vec z0(2 * k);
    z0.head(k) = *opts.warm_gate_a;
    z0.tail(k) = opts.warm_gate_b ? *opts.warm_gate_b : *opts.warm_gate_a;
    starts.push_back(std::move(z0));
  } else {
    Vec z0(2 * k);
    z0.head(k) = T.transpose() * (single.gates[0] - x0);
    z0.tail(k) = z0.head(k);
    starts.push_back(z0);
    auto foot = [&](const Vec& p, const NormSpec& n) {
      const Vec pr = n.is_lp_kind() ? project_lp(q.h, p, n)
                                    : Vec(p - (q.h.signed_eval(p) / q.h.alpha.squaredNorm()) *
                                                  q.h.alpha);
      return Vec(T.transpose() * (pr - x0));
    };
    Vec z1(2 * k);
    z1.head(k) = foot(q.a.coords, q.norm_a);
    z1.tail(k) = foot(q.b.coords, q.norm_b);
    if ((z1 - z0).lpNorm<Eigen::Infinity>() > 1e-12) starts.push_back(std::move(z1));
  }

  const bool rough = detail::needs_continuation(q.norm_a) || detail::needs_continuation(q.norm_b) ||
                     detail::needs_continuation(*q.norm_h);
  const double extent = (q.a.coords - q.b.coords).lpNorm<Eigen::Infinity>();
  std::vector<double> schedule;
  if (!rough)
    schedule = {opts.mu_final};
  else if (opts.warm_gate_a)
    schedule = {opts.mu_final * 100.0, opts.mu_final};
  else
    schedule = detail::mu_schedule(true, extent, opts.mu_final);

  auto fgh_for = [&](double mu) {
    return [&, mu](const Vec& zz, int order, double& f, Vec& g, Mat& hess) {
      const Vec u = zz.head(k), v = zz.tail(k);
      const Vec ga = x0 + T * u, gb = x0 + T * v;
      detail::LocalModel la, lh, lb;
      detail::smooth_norm_model(q.norm_a, ga - q.a.coords, mu, order, la);
      detail::smooth_norm_model(*q.norm_h, ga - gb, mu, order, lh);
      detail::smooth_norm_model(q.norm_b, gb - q.b.coords, mu, order, lb);
      f = wa * la.val + wh * lh.val + wb * lb.val;
      if (order >= 1) {
        g.resize(2 * k);
        g.head(k) = T.transpose() * (wa * la.grad + wh * lh.grad);
        g.tail(k) = T.transpose() * (wb * lb.grad - wh * lh.grad);
      }
      if (order >= 2) {
        hess.resize(2 * k, 2 * k);
        const Mat ha = T.transpose() * (wa * la.hess) * T;
        const Mat hh = T.transpose() * (wh * lh.hess) * T;
        const Mat hb = T.transpose() * (wb * lb.hess) * T;
        hess.topLeftCorner(k, k) = ha + hh;
        hess.bottomRightCorner(k, k) = hb + hh;
        hess.topRightCorner(k, k) = -hh;
        hess.bottomLeftCorner(k, k) = -hh;
      }
    };
  };

  PathResult res;
  res.iterations = single.iterations;
  detail::IterReport last;
  double total = std::numeric_limits<double>::infinity();
  Vec ga, gb;
  for (Vec& z0 : starts) {
    detail::IterReport attempt_last;
    for (double mu : schedule) {
      attempt_last = detail::newton_minimize(fgh_for(mu), z0, opts.control);
      res.iterations += attempt_last.iterations;
    }
    const Vec ga0 = x0 + T * z0.head(k), gb0 = x0 + T * z0.tail(k);
    const double t0 = wa * q.norm_a.eval(ga0 - q.a.coords) + wh * q.norm_h->eval(ga0 - gb0) +
                      wb * q.norm_b.eval(gb0 - q.b.coords);
    if (t0 < total) {
      total = t0;
      ga = ga0;
      gb = gb0;
      last = attempt_last;
    }
  }
  const double leg_a = wa * q.norm_a.eval(ga - q.a.coords);
  const double leg_h = wh * q.norm_h->eval(ga - gb);
  const double leg_b = wb * q.norm_b.eval(gb - q.b.coords);

  if (single.total <= total) {
    res.gates = {single.gates[0], single.gates[0]};
    res.leg_lengths = {single.leg_lengths[0], 0.0, single.leg_lengths[1]};
    res.total = single.total;
  } else {
    res.gates = {ga, gb};
    res.leg_lengths = {leg_a, leg_h, leg_b};
    res.total = total;
  }
  res.snell_residual = snell_residual(q, res.gates);
  res.converged = last.converged && res.snell_residual <= opts.residual_tol;
  return res;
}

namespace detail {

// Residual of one stationarity system  sum_i w_i grad N_i(v_i) + lambda alpha = 0,
// evaluated the exact way when every subdifferential is a singleton (the
// per-pair conditions over alpha_i alpha_j != 0 plus the alpha_j = 0
// equations) and through the inclusion distance otherwise.
inline double stationarity_residual(const Vec& alpha,
                                    const std::vector<std::pair<double, SubdiffSet>>& terms) {
  bool all_singleton = true;
  for (const auto& [w, s] : terms)
    if (s.form() != SubdiffSet::Form::Singleton) all_singleton = false;
  const Eigen::Index d = alpha.size();
  if (all_singleton) {
    Vec g = Vec::Zero(d);
    for (const auto& [w, s] : terms) g += w * s.point();
    const double amax = alpha.lpNorm<Eigen::Infinity>();
    double res = 0.0;
    double tmin = std::numeric_limits<double>::infinity();
    double tmax = -std::numeric_limits<double>::infinity();
    bool any_ratio = false;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (std::abs(alpha[j]) <= 1e-15 * amax) {
        res = std::max(res, std::abs(g[j]));
      } else {
        const double t = g[j] / alpha[j];
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
        any_ratio = true;
      }
    }
    // Pairwise spread of the ratio terms; at a true optimum every ratio
    // equals -lambda, so the spread vanishes.
    if (any_ratio) res = std::max(res, tmax - tmin);
    return res;
  }
  std::vector<SubdiffSet> sets;
  sets.reserve(terms.size());
  for (const auto& [w, s] : terms) sets.push_back(s.scaled(w));
  return inclusion_residual(alpha, sets);
}

inline double snap_tol(const Vec& v) { return 1e-6 * (1.0 + v.lpNorm<Eigen::Infinity>()); }

}  // namespace detail

// Maximum violation of the refraction stationarity conditions at the given
// gate(s). Zero at a true optimum; nonsmooth situations (a kink of the norm
// at the gate, coincident gates, a gate at an endpoint) are scored by the
// subdifferential inclusion distance instead of the gradient equations.
inline double snell_residual(const PathQuery& q, const std::vector<Vec>& gates) {
  const double tol = 10.0 * q.h.on_tol();
  for (const auto& g : gates)
    if (std::abs(q.h.signed_eval(g)) > tol)
      throw std::invalid_argument("snell_residual: gate is not on the hyperplane");
  const double wa = q.a.weight, wb = q.b.weight;
  if (gates.size() == 1 || !q.norm_h) {
    const Vec va = gates[0] - q.a.coords;
    const Vec vb = gates.back() - q.b.coords;
    return detail::stationarity_residual(
        q.h.alpha, {{wa, q.norm_a.subgradient(va, detail::snap_tol(va))},
                    {wb, q.norm_b.subgradient(vb, detail::snap_tol(vb))}});
  }
  if (gates.size() != 2) throw std::invalid_argument("snell_residual: expected 1 or 2 gates");
  const double wh = q.weight_h;
  const Vec va = gates[0] - q.a.coords;
  const Vec vh = gates[0] - gates[1];
  const Vec vb = gates[1] - q.b.coords;
  const double snap_h = detail::snap_tol(vh);
  const double r1 = detail::stationarity_residual(
      q.h.alpha, {{wa, q.norm_a.subgradient(va, detail::snap_tol(va))},
                  {wh, q.norm_h->subgradient(vh, snap_h)}});
  const double r2 = detail::stationarity_residual(
      q.h.alpha, {{wb, q.norm_b.subgradient(vb, detail::snap_tol(vb))},
                  {wh, q.norm_h->subgradient(-vh, snap_h)}});
  return std::max(r1, r2);
}

// ---------------------------------------------------------------------------
// Rapid transit media condition (sampled falsifier).

struct RetmResult {
  bool holds = true;
  int violated_condition = 0;  // 1 or 2 when holds == false
  Vec witness;                  // the sampled hyperplane point that fails
};

namespace detail {

// min over the projection face of ||x - y||_N; the face is a hull of few
// vertices (golden section on segments, projected gradient above that).
inline double min_face_distance(const std::vector<Vec>& face, const Vec& x, const NormSpec& n) {
  if (face.size() == 1) return n.eval(x - face[0]);
  if (face.size() == 2) {
    const Vec d = face[1] - face[0];
    double lo = 0.0, hi = 1.0;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - phi * (hi - lo), e = lo + phi * (hi - lo);
    double fc = n.eval(x - face[0] - c * d), fe = n.eval(x - face[0] - e * d);
    for (int it = 0; it < 90; ++it) {
      if (fc <= fe) {
        hi = e;
        e = c;
        fe = fc;
        c = hi - phi * (hi - lo);
        fc = n.eval(x - face[0] - c * d);
      } else {
        lo = c;
        c = e;
        fc = fe;
        e = lo + phi * (hi - lo);
        fe = n.eval(x - face[0] - e * d);
      }
    }
    return std::min(fc, fe);
  }
  // Projected gradient on the simplex with a mildly smoothed norm.
  const int kv = static_cast<int>(face.size());
  Mat V(x.size(), kv);
  for (int i = 0; i < kv; ++i) V.col(i) = face[i];
  Vec th = Vec::Constant(kv, 1.0 / kv);
  double step = 1.0;
  for (int it = 0; it < 2000; ++it) {
    const Vec y = V * th;
    LocalModel lm;
    smooth_norm_model(n, x - y, 1e-9, 1, lm);
    Vec grad = -V.transpose() * lm.grad;
    Vec next = project_simplex(th - step * grad);
    if ((next - th).lpNorm<Eigen::Infinity>() < 1e-14) break;
    th = next;
  }
  return n.eval(x - V * th);
}

}  // namespace detail

// Checks both rapid-transit inequalities on `samples` Halton points of H
// inside a box covering the two projections plus a margin. A violation
// yields the witness; a clean pass is evidence, not a proof.
inline RetmResult retm_check(const DemandPoint& a, const DemandPoint& b, const Hyperplane& h,
                             const NormSpec& norm_a, const NormSpec& norm_b,
                             const NormSpec& norm_h, int samples) {
  if (samples < 1) throw std::invalid_argument("retm_check: samples must be >= 1");
  const Mat T = h.tangent_basis();
  const Vec x0 = h.base_point();
  const int k = static_cast<int>(T.cols());

  const std::vector<Vec> face_a = project_lp_face(h, a.coords, norm_a);
  const std::vector<Vec> face_b = project_lp_face(h, b.coords, norm_b);
  const double da = norm_a.eval(a.coords - face_a[0]);
  const double db = norm_b.eval(b.coords - face_b[0]);

  Vec lo = Vec::Constant(k, std::numeric_limits<double>::infinity());
  Vec hi = -lo;
  auto absorb = [&](const Vec& p) {
    const Vec u = T.transpose() * (p - x0);
    lo = lo.cwiseMin(u);
    hi = hi.cwiseMax(u);
  };
  for (const auto& v : face_a) absorb(v);
  for (const auto& v : face_b) absorb(v);
  const double margin = 1.0 + (a.coords - b.coords).norm();
  lo.array() -= margin;
  hi.array() += margin;

  RetmResult out;
  for (int i = 0; i < samples; ++i) {
    Vec u(k);
    for (int j = 0; j < k; ++j)
      u[j] = lo[j] + (hi[j] - lo[j]) * detail::halton(static_cast<std::uint64_t>(i),
                                                      detail::nth_prime(j));
    const Vec x = x0 + T * u;
    const double rhs1 = norm_a.eval(x - a.coords);
    const double lhs1 = da + detail::min_face_distance(face_a, x, norm_h);
    if (lhs1 > rhs1 + 1e-9 * (1.0 + rhs1)) {
      out.holds = false;
      out.violated_condition = 1;
      out.witness = x;
      return out;
    }
    const double rhs2 = norm_b.eval(x - b.coords);
    const double lhs2 = db + detail::min_face_distance(face_b, x, norm_h);
    if (lhs2 > rhs2 + 1e-9 * (1.0 + rhs2)) {
      out.holds = false;
      out.violated_condition = 2;
      out.witness = x;
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Norm-triple classification.

enum class ReductionClass {
  SingleGate,      // every shortest transit path crosses H at one point
  MayUseSegment,   // the path may contain a nondegenerate segment on H
  PtEqualsP,       // the transit problem reduces to the single-gate problem
  Unknown,         // polyhedral kinds or conflicting scales: no claim
};

inline const char* to_string(ReductionClass c) {
  switch (c) {
    case ReductionClass::SingleGate: return "single_gate";
    case ReductionClass::MayUseSegment: return "may_use_segment";
    case ReductionClass::PtEqualsP: return "pt_equals_p";
    case ReductionClass::Unknown: return "unknown";
  }
  return "unknown";
}

// The exponent comparisons hold for unit scales; with scales, N1 is never
// more costly than N2 on any vector iff p1 >= p2 and scale1 <= scale2 (the
// axis directions make both conditions necessary). Single crossing needs only
// one side to dominate the hyperplane norm: merging the hyperplane leg into
// the A-side leg uses the triangle inequality on side A, and the mirrored
// merge at the exit gate covers the B-side case of the max{} condition.
inline ReductionClass reduction_applies(const NormSpec& na, const NormSpec& nb,
                                        const NormSpec& nh) {
  if (!na.is_lp_kind() || !nb.is_lp_kind() || !nh.is_lp_kind()) return ReductionClass::Unknown;
  const double pa = na.p(), pb = nb.p(), ph = nh.p();
  auto cheaper_eq = [](const NormSpec& n1, const NormSpec& n2) {
    return n1.p() >= n2.p() && n1.scale() <= n2.scale();
  };
  if (pa >= pb && cheaper_eq(na, nh) && cheaper_eq(nb, nh)) return ReductionClass::PtEqualsP;
  if (cheaper_eq(na, nh) || cheaper_eq(nb, nh)) return ReductionClass::SingleGate;
  if (ph >= std::max(pa, pb) && nh.scale() <= std::min(na.scale(), nb.scale()))
    return ReductionClass::MayUseSegment;
  return ReductionClass::Unknown;
}

}  // namespace refloc
