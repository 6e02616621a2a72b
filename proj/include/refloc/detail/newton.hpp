#pragma once

// Damped Newton with Armijo backtracking for small dense convex problems.
// The Hessian is regularized adaptively until the computed direction is a
// descent direction; convergence is declared on the gradient norm relative
// to 1 + |f|, with a step-size stall as the secondary stop.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>

#include "refloc/norms.hpp"

namespace refloc::detail {

struct SolveControl {
  int max_iter = 500;
  double grad_tol = 1e-9;    // converged when ||g|| <= grad_tol * (1 + |f|)
  double step_tol = 1e-12;   // declared-stalled step size (relative)
  double polish_tol = 1e-13; // keep iterating toward this when cheap
};

struct IterReport {
  int iterations = 0;
  bool converged = false;
  double f = std::numeric_limits<double>::quiet_NaN();
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  double decrement = std::numeric_limits<double>::quiet_NaN();  // g' H^-1 g
};

// Convergence near a kink pinned by the smoothing (a leg collapsing to a
// point) is limited by gradient granularity ~ ulp(x)/mu, so the raw gradient
// test is paired with the Newton decrement, which measures the remaining
// objective gap under the local model.
inline bool converged_test(double grad_norm, double decrement, double f, double grad_tol) {
  const double gtol = grad_tol * (1.0 + std::abs(f));
  return grad_norm <= gtol || (std::isfinite(decrement) && decrement <= gtol * gtol);
}

// fgh(z, order, f, g, h): fills f always, g for order >= 1, h for order >= 2.
template <class FGH>
IterReport newton_minimize(FGH&& fgh, Vec& z, const SolveControl& ctl) {
  IterReport rep;
  const Eigen::Index n = z.size();
  if (n == 0) {
    double f;
    Vec g;
    Mat h;
    fgh(z, 0, f, g, h);
    rep.f = f;
    rep.converged = true;
    rep.grad_norm = 0.0;
    return rep;
  }
  double f;
  Vec g(n);
  Mat h(n, n);
  fgh(z, 2, f, g, h);
  for (int it = 0; it < ctl.max_iter; ++it) {
    rep.iterations = it;
    rep.f = f;
    rep.grad_norm = g.norm();
    if (rep.grad_norm <= ctl.polish_tol * (1.0 + std::abs(f))) break;

    // Direction: (H + ridge I) dz = -g, ridge grown until descent.
    double ridge = 0.0;
    Vec dz;
    const double hscale = std::max(h.diagonal().cwiseAbs().maxCoeff(), 1e-30);
    for (int attempt = 0; attempt < 12; ++attempt) {
      Mat hr = h;
      if (ridge > 0.0) hr.diagonal().array() += ridge;
      Eigen::LDLT<Mat> ldlt(hr);
      bool ok = ldlt.info() == Eigen::Success;
      if (ok) {
        dz = ldlt.solve(-g);
        ok = dz.allFinite() && g.dot(dz) < 0.0;
      }
      if (ok) break;
      ridge = (ridge == 0.0) ? 1e-12 * hscale : ridge * 100.0;
      if (attempt == 11) dz = -g / hscale;  // steepest-descent fallback
    }

    // Keep steps bounded in the nearly-linear regions of smoothed norms.
    const double cap = 1e3 * (1.0 + z.lpNorm<Eigen::Infinity>());
    const double dmax = dz.lpNorm<Eigen::Infinity>();
    if (dmax > cap) dz *= cap / dmax;

    const double slope = g.dot(dz);
    rep.decrement = -slope;
    if (converged_test(rep.grad_norm, rep.decrement, f, ctl.polish_tol)) break;
    double step = 1.0;
    double f_new;
    Vec z_new;
    Vec g_unused;
    Mat h_unused;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      z_new = z + step * dz;
      fgh(z_new, 0, f_new, g_unused, h_unused);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
      if (step < 1e-14) break;
    }
    if (!accepted) break;
    const double move = (z_new - z).norm();
    z = z_new;
    fgh(z, 2, f, g, h);
    rep.f = f;
    rep.grad_norm = g.norm();
    if (move <= 1e-15 * (1.0 + z.norm())) {
      ++rep.iterations;
      break;
    }
  }
  rep.converged = converged_test(rep.grad_norm, rep.decrement, rep.f, ctl.grad_tol);
  return rep;
}

}  // namespace refloc::detail
