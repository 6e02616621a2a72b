#pragma once

// C^2 surrogates of scale * ||v|| used inside the Newton solvers. The lp and
// l1 kinds get the componentwise pseudo-Huber m_j = sqrt(v_j^2 + mu^2); linf
// and polyhedral norms get a log-sum-exp over their dual generators. All
// surrogates are convex, approach the exact norm as mu -> 0, and keep their
// derivative formulas bounded near kinks (leg norms are clamped below through
// mu, never evaluated at exact zero).

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <vector>

#include "refloc/norms.hpp"

namespace refloc::detail {

struct LocalModel {
  double val = 0.0;
  Vec grad;
  Mat hess;
};

constexpr double kMuFloor = 1e-14;

// order: 0 value only, 1 adds gradient, 2 adds Hessian.
inline void smooth_norm_model(const NormSpec& spec, const Vec& v, double mu, int order,
                              LocalModel& out) {
  const Eigen::Index d = v.size();
  const double c = spec.scale();
  if (order >= 1 && out.grad.size() != d) out.grad.resize(d);
  if (order >= 2 && (out.hess.rows() != d || out.hess.cols() != d)) out.hess.resize(d, d);

  switch (spec.kind()) {
    case NormKind::L1: {
      const double m = std::max(mu, kMuFloor);
      double val = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double mj = std::sqrt(v[j] * v[j] + m * m);
        val += mj - m;
        if (order >= 1) out.grad[j] = c * v[j] / mj;
        if (order >= 2) {
          out.hess.col(j).setZero();
          out.hess(j, j) = c * m * m / (mj * mj * mj);
        }
      }
      out.val = c * val;
      return;
    }
    case NormKind::LpRational: {
      const double p = spec.p();
      const double m = std::max(mu, kMuFloor);
      // Normalized by the largest component so powers stay bounded.
      Vec mj(d);
      double big = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        mj[j] = std::sqrt(v[j] * v[j] + m * m);
        big = std::max(big, mj[j]);
      }
      Vec t = mj / big;
      double sigma = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) sigma += std::pow(t[j], p);
      out.val = c * big * std::pow(sigma, 1.0 / p);
      if (order == 0) return;
      const double s1 = std::pow(sigma, 1.0 / p - 1.0);
      Vec tp2(d);  // t_j^(p-2)
      for (Eigen::Index j = 0; j < d; ++j) tp2[j] = std::pow(t[j], p - 2.0);
      for (Eigen::Index j = 0; j < d; ++j) out.grad[j] = c * s1 * tp2[j] * (v[j] / big);
      if (order < 2) return;
      const double s2 = std::pow(sigma, 1.0 / p - 2.0);
      Vec u(d);  // t_j^(p-2) v_j / big, bounded by t^(p-1)
      for (Eigen::Index j = 0; j < d; ++j) u[j] = tp2[j] * (v[j] / big);
      out.hess.noalias() = ((1.0 - p) * s2 / big) * (u * u.transpose());
      for (Eigen::Index j = 0; j < d; ++j) {
        const double ratio = v[j] / mj[j];
        out.hess(j, j) += s1 * tp2[j] * ((p - 2.0) * ratio * ratio + 1.0) / big;
      }
      out.hess *= c;
      return;
    }
    case NormKind::LInf: {
      // log-sum-exp over { +v_j, -v_j }.
      const double vmax = v.lpNorm<Eigen::Infinity>();
      const double m = std::max(mu, kMuFloor * (1.0 + vmax));
      double z = 0.0;
      Vec wp(d), wn(d);
      for (Eigen::Index j = 0; j < d; ++j) {
        wp[j] = std::exp((v[j] - vmax) / m);
        wn[j] = std::exp((-v[j] - vmax) / m);
        z += wp[j] + wn[j];
      }
      out.val = c * (vmax + m * std::log(z));
      if (order == 0) return;
      wp /= z;
      wn /= z;
      Vec g = wp - wn;
      out.grad = c * g;
      if (order < 2) return;
      out.hess.noalias() = (-c / m) * (g * g.transpose());
      for (Eigen::Index j = 0; j < d; ++j) out.hess(j, j) += (c / m) * (wp[j] + wn[j]);
      return;
    }
    case NormKind::Polyhedral: {
      const auto& gens = spec.generators();
      double vmax = -std::numeric_limits<double>::infinity();
      std::vector<double> dots(gens.size());
      for (std::size_t k = 0; k < gens.size(); ++k) {
        dots[k] = gens[k].dot(v);
        vmax = std::max(vmax, dots[k]);
      }
      const double m = std::max(mu, kMuFloor * (1.0 + std::abs(vmax)));
      double z = 0.0;
      std::vector<double> w(gens.size());
      for (std::size_t k = 0; k < gens.size(); ++k) {
        w[k] = std::exp((dots[k] - vmax) / m);
        z += w[k];
      }
      out.val = c * (vmax + m * std::log(z));
      if (order == 0) return;
      Vec g = Vec::Zero(d);
      for (std::size_t k = 0; k < gens.size(); ++k) g += (w[k] / z) * gens[k];
      out.grad = c * g;
      if (order < 2) return;
      out.hess.noalias() = (-c / m) * (g * g.transpose());
      for (std::size_t k = 0; k < gens.size(); ++k)
        out.hess.noalias() += (c / m) * (w[k] / z) * (gens[k] * gens[k].transpose());
      return;
    }
  }
}

inline bool needs_continuation(const NormSpec& n) { return !n.is_smooth(); }

// p in (1,2) has Hessian walls |v_j|^(p-2) wherever a component vanishes;
// large joint solves benefit from smoothing them first even though the norm
// itself is differentiable.
inline bool has_hessian_walls(const NormSpec& n) { return !n.is_smooth() || n.p() < 2.0; }

// Geometric continuation schedule mu_start -> mu_final (factor 10 per stage).
inline std::vector<double> mu_schedule(bool any_nonsmooth, double extent, double mu_final) {
  std::vector<double> stages;
  if (any_nonsmooth) {
    double mu = 0.1 * (1.0 + extent);
    while (mu > mu_final * 10.0) {
      stages.push_back(mu);
      mu *= 0.1;
    }
  }
  stages.push_back(mu_final);
  return stages;
}

}  // namespace refloc::detail
