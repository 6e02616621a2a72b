#pragma once

// Hyperplane arithmetic: sidedness, tangent parametrizations, minimum-norm
// projections, and the generalized sine quantities used by the refraction
// stationarity checks.

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "refloc/detail/newton.hpp"
#include "refloc/detail/smooth.hpp"
#include "refloc/errors.hpp"
#include "refloc/norms.hpp"

namespace refloc {

// H = { x : alpha . x = beta }, alpha != 0. Splits space into the closed side
// A (alpha . x <= beta) and the open side B (alpha . x > beta).
struct Hyperplane {
  Vec alpha;
  double beta = 0.0;

  Hyperplane() = default;
  Hyperplane(Vec a, double b) : alpha(std::move(a)), beta(b) {
    if (alpha.size() == 0 || alpha.lpNorm<Eigen::Infinity>() == 0.0)
      throw std::invalid_argument("hyperplane: alpha must be nonzero");
  }

  int dim() const { return static_cast<int>(alpha.size()); }
  double signed_eval(const Vec& x) const { return alpha.dot(x) - beta; }

  // Scale-aware default tolerance for "on the hyperplane".
  double on_tol() const { return 1e-9 * (1.0 + std::abs(beta) + alpha.norm()); }

  // Some point of H (the Euclidean foot of the origin).
  Vec base_point() const { return (beta / alpha.squaredNorm()) * alpha; }

  // d x (d-1) matrix with orthonormal columns spanning alpha-perp, so that
  // u -> base_point() + T u parametrizes H.
  Mat tangent_basis() const {
    const int d = dim();
    Eigen::HouseholderQR<Mat> qr(alpha);
    Mat q = qr.householderQ();
    return q.rightCols(d - 1);
  }

  // Accepts "alpha=a1,...,ad;beta=b" and, in the plane, the shorthand
  // "y=<lambda>x" meaning alpha = (lambda, -1), beta = 0.
  static Hyperplane parse(const std::string& text) {
    std::string t;
    for (char c : text)
      if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    if (t.rfind("y=", 0) == 0 && !t.empty() && t.back() == 'x') {
      const std::string lam = t.substr(2, t.size() - 3);
      double l = 1.0;
      if (!lam.empty()) {
        try {
          std::size_t pos = 0;
          l = std::stod(lam, &pos);
          if (pos != lam.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
          throw ParseError("bad slope in hyperplane '" + text + "'");
        }
      }
      Vec a(2);
      a << l, -1.0;
      return Hyperplane(a, 0.0);
    }
    const auto semi = t.find(';');
    if (t.rfind("alpha=", 0) != 0 || semi == std::string::npos || t.find("beta=", semi) == std::string::npos)
      throw ParseError("hyperplane must be 'alpha=a1,...,ad;beta=b' or 'y=<slope>x', got '" + text + "'");
    std::string coeffs = t.substr(6, semi - 6);
    std::string btext = t.substr(t.find("beta=", semi) + 5);
    std::vector<double> av;
    std::istringstream cs(coeffs);
    std::string item;
    while (std::getline(cs, item, ',')) {
      try {
        std::size_t pos = 0;
        av.push_back(std::stod(item, &pos));
        if (pos != item.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError("bad coefficient '" + item + "' in hyperplane '" + text + "'");
      }
    }
    double b = 0.0;
    try {
      std::size_t pos = 0;
      b = std::stod(btext, &pos);
      if (pos != btext.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ParseError("bad beta '" + btext + "' in hyperplane '" + text + "'");
    }
    if (av.empty()) throw ParseError("empty alpha in hyperplane '" + text + "'");
    Vec a = Eigen::Map<Vec>(av.data(), static_cast<Eigen::Index>(av.size()));
    if (a.lpNorm<Eigen::Infinity>() == 0.0) throw ParseError("alpha must be nonzero in '" + text + "'");
    return Hyperplane(std::move(a), b);
  }

  std::string to_string() const {
    std::string out = "alpha=";
    char buf[32];
    for (int i = 0; i < dim(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", alpha[i]);
      if (i) out += ',';
      out += buf;
    }
    std::snprintf(buf, sizeof buf, ";beta=%.17g", beta);
    out += buf;
    return out;
  }
};

enum class Side { A, B, On };

inline char side_char(Side s) { return s == Side::A ? 'A' : (s == Side::B ? 'B' : 'H'); }

inline Side side_of(const Hyperplane& h, const Vec& x, double tol) {
  const double v = h.signed_eval(x);
  if (std::abs(v) <= tol) return Side::On;
  return v < 0 ? Side::A : Side::B;
}

inline Side side_of(const Hyperplane& h, const Vec& x) { return side_of(h, x, h.on_tol()); }

struct DemandPoint {
  Vec coords;
  double weight = 1.0;

  DemandPoint() = default;
  DemandPoint(Vec c, double w) : coords(std::move(c)), weight(w) {
    if (!(weight > 0.0)) throw std::invalid_argument("demand point weight must be positive");
  }
};

namespace detail {

// Unit-dual-norm direction maximizing alpha . delta over ||delta||_p = 1, for
// the lp kinds. Ties (l1 with several max-|alpha_j| axes, linf with zero
// components) are broken toward the minimum Euclidean displacement, which is
// the unique symmetric choice.
inline Vec max_alignment_direction(const NormSpec& spec, const Vec& alpha) {
  const Eigen::Index d = alpha.size();
  const double amax = alpha.lpNorm<Eigen::Infinity>();
  Vec delta = Vec::Zero(d);
  switch (spec.kind()) {
    case NormKind::L1: {
      int ties = 0;
      for (Eigen::Index j = 0; j < d; ++j)
        if (std::abs(alpha[j]) >= amax * (1.0 - 1e-12)) ++ties;
      for (Eigen::Index j = 0; j < d; ++j)
        if (std::abs(alpha[j]) >= amax * (1.0 - 1e-12))
          delta[j] = (alpha[j] > 0 ? 1.0 : -1.0) / ties;
      return delta;
    }
    case NormKind::LInf: {
      for (Eigen::Index j = 0; j < d; ++j)
        delta[j] = (alpha[j] > 0) ? 1.0 : (alpha[j] < 0 ? -1.0 : 0.0);
      return delta;
    }
    case NormKind::LpRational: {
      const double q = spec.dual_exponent();
      for (Eigen::Index j = 0; j < d; ++j) {
        const double t = std::abs(alpha[j]) / amax;
        delta[j] = ((alpha[j] > 0) - (alpha[j] < 0)) * std::pow(t, q - 1.0);
      }
      // Normalize to unit p-norm.
      return delta / NormSpec::lp(spec.r(), spec.s()).eval(delta);
    }
    case NormKind::Polyhedral:
      throw std::invalid_argument("max_alignment_direction: polyhedral norms handled separately");
  }
  return delta;
}

}  // namespace detail

// Point of H minimizing the given norm distance to a. For the lp kinds this
// is a - (alpha.a - beta) / ||alpha||_q * delta with delta the maximizer of
// alpha . delta over the unit ball; polyhedral norms go through the smoothed
// minimizer over the tangent parametrization.
inline Vec project_lp(const Hyperplane& h, const Vec& a, const NormSpec& spec) {
  if (spec.is_lp_kind()) {
    const double num = h.signed_eval(a);
    Vec delta = detail::max_alignment_direction(spec, h.alpha);
    return a - (num / h.alpha.dot(delta)) * delta;
  }
  const Mat T = h.tangent_basis();
  const Vec x0 = h.base_point();
  Vec u = T.transpose() * (a - x0);
  const double extent = 1.0 + (a - x0).lpNorm<Eigen::Infinity>();
  const double tie = 1e-10;  // Euclidean tie-break on flat faces
  for (double mu : detail::mu_schedule(true, extent, 1e-10)) {
    auto fgh = [&](const Vec& z, int order, double& f, Vec& g, Mat& hess) {
      const Vec v = a - x0 - T * z;
      detail::LocalModel lm;
      detail::smooth_norm_model(spec, v, mu, order, lm);
      f = lm.val + 0.5 * tie * v.squaredNorm();
      if (order >= 1) g = -T.transpose() * (lm.grad + tie * v);
      if (order >= 2)
        hess = T.transpose() * (lm.hess + tie * Mat::Identity(v.size(), v.size())) * T;
    };
    detail::SolveControl ctl;
    ctl.max_iter = 200;
    detail::newton_minimize(fgh, u, ctl);
  }
  return x0 + T * u;
}

// Vertex set of the full minimizing face of the projection: a single point
// for smooth norms; l1 ties across the max-|alpha_j| axes; linf keeps the
// alpha_j = 0 coordinates free (corners enumerated).
std::vector<Vec> project_lp_face(const Hyperplane& h, const Vec& a, const NormSpec& spec);

inline std::vector<Vec> project_lp_face(const Hyperplane& h, const Vec& a, const NormSpec& spec) {
  const double num = h.signed_eval(a);
  const Eigen::Index d = h.alpha.size();
  const double amax = h.alpha.lpNorm<Eigen::Infinity>();
  std::vector<Vec> verts;
  switch (spec.kind()) {
    case NormKind::L1: {
      for (Eigen::Index j = 0; j < d; ++j)
        if (std::abs(h.alpha[j]) >= amax * (1.0 - 1e-12)) {
          Vec e = Vec::Zero(d);
          e[j] = (h.alpha[j] > 0 ? 1.0 : -1.0);
          verts.push_back(a - (num / amax) * e);
        }
      return verts;
    }
    case NormKind::LInf: {
      // Free coordinates stay boxed; enumerate corners (d is small here).
      std::vector<Eigen::Index> free;
      for (Eigen::Index j = 0; j < d; ++j)
        if (h.alpha[j] == 0.0) free.push_back(j);
      const double t = num / h.alpha.lpNorm<1>();
      Vec base = a;
      for (Eigen::Index j = 0; j < d; ++j)
        base[j] -= t * ((h.alpha[j] > 0) - (h.alpha[j] < 0));
      if (free.empty() || free.size() > 12) return {base};
      for (std::uint32_t mask = 0; mask < (1u << free.size()); ++mask) {
        Vec v = base;
        for (std::size_t i = 0; i < free.size(); ++i)
          v[free[i]] = a[free[i]] + std::abs(t) * (((mask >> i) & 1u) ? 1.0 : -1.0);
        verts.push_back(v);
      }
      return verts;
    }
    default: return {project_lp(h, a, spec)};
  }
}

struct GeneralizedSine {
  double total = 0.0;
  Vec components;
};

// |alpha.a - beta| / ||a - x|| together with the per-coordinate parts
// |alpha_j (a_j - x_j)| / ||a - x||; x must lie on H and differ from a.
inline GeneralizedSine generalized_sine(const Hyperplane& h, const Vec& a, const Vec& x,
                                        const NormSpec& spec) {
  if (std::abs(h.signed_eval(x)) > h.on_tol())
    throw std::invalid_argument("generalized_sine: x is not on the hyperplane");
  const double n = spec.eval(a - x);
  if (n <= 0.0) throw std::invalid_argument("generalized_sine: undefined, a coincides with x");
  GeneralizedSine out;
  out.total = std::abs(h.signed_eval(a)) / n;
  out.components = (h.alpha.array() * (a - x).array()).abs() / n;
  return out;
}

}  // namespace refloc
