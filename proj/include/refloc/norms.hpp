#pragma once

// Norm specifications and their calculus. A NormSpec is a positively scaled
// norm of one of four kinds:
//   * rational l_p with p = r/s > 1 finite (smooth away from the origin),
//   * l_1 and l_inf as dedicated kinds with analytic evaluation,
//   * polyhedral, described by the extreme points of its dual unit ball, so
//     that the norm evaluates as scale * max_e e.v over the generators.
// Everything downstream (projections, gate solvers, conic export) is indexed
// by this type; p is kept as the exact integer pair (r, s), never a float,
// so the power-cone towers and the stationarity exponents agree about it.
//
// Textual form (instance files and CLI flags):
//   lp:r/s[:scale]   l1[:scale]   linf[:scale]   poly:<generator-file>[:scale]

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "refloc/errors.hpp"

namespace refloc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class NormKind { LpRational, L1, LInf, Polyhedral };

class SubdiffSet;

class NormSpec {
 public:
  static NormSpec lp(long r, long s, double scale = 1.0) {
    if (r <= 0 || s <= 0) throw std::invalid_argument("lp norm: r and s must be positive");
    long g = std::gcd(r, s);
    r /= g;
    s /= g;
    if (r <= s) throw std::invalid_argument("lp norm: requires p = r/s > 1; use l1/linf for the boundary kinds");
    NormSpec n;
    n.kind_ = NormKind::LpRational;
    n.r_ = r;
    n.s_ = s;
    n.set_scale(scale);
    return n;
  }

  static NormSpec l1(double scale = 1.0) {
    NormSpec n;
    n.kind_ = NormKind::L1;
    n.set_scale(scale);
    return n;
  }

  static NormSpec linf(double scale = 1.0) {
    NormSpec n;
    n.kind_ = NormKind::LInf;
    n.set_scale(scale);
    return n;
  }

  static NormSpec polyhedral(std::vector<Vec> dual_extreme_points, double scale = 1.0,
                             std::string origin = {}) {
    if (dual_extreme_points.empty())
      throw std::invalid_argument("polyhedral norm: generator set is empty");
    const auto dim = dual_extreme_points.front().size();
    for (const auto& e : dual_extreme_points) {
      if (e.size() != dim) throw std::invalid_argument("polyhedral norm: generators of mixed dimension");
      if (e.lpNorm<Eigen::Infinity>() == 0.0)
        throw std::invalid_argument("polyhedral norm: zero generator");
      bool has_neg = false;
      for (const auto& f : dual_extreme_points)
        if ((e + f).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + e.lpNorm<Eigen::Infinity>())) {
          has_neg = true;
          break;
        }
      if (!has_neg)
        throw std::invalid_argument("polyhedral norm: generator set not symmetric under negation");
    }
    NormSpec n;
    n.kind_ = NormKind::Polyhedral;
    n.gens_ = std::move(dual_extreme_points);
    n.origin_ = std::move(origin);
    n.set_scale(scale);
    return n;
  }

  NormKind kind() const { return kind_; }
  double scale() const { return scale_; }
  long r() const { return r_; }
  long s() const { return s_; }

  // p as a double; 1 for l1, +inf for linf. Polyhedral kinds have no p.
  double p() const {
    switch (kind_) {
      case NormKind::LpRational: return static_cast<double>(r_) / static_cast<double>(s_);
      case NormKind::L1: return 1.0;
      case NormKind::LInf: return std::numeric_limits<double>::infinity();
      case NormKind::Polyhedral: throw std::invalid_argument("polyhedral norm has no exponent p");
    }
    return 0.0;
  }

  bool is_lp_kind() const { return kind_ != NormKind::Polyhedral; }
  bool is_smooth() const { return kind_ == NormKind::LpRational; }

  // Conjugate exponent q with 1/p + 1/q = 1 (q = inf for p = 1, q = 1 for
  // p = inf). Polyhedral duals are handled by generator exchange instead.
  double dual_exponent() const {
    switch (kind_) {
      case NormKind::LpRational: return static_cast<double>(r_) / static_cast<double>(r_ - s_);
      case NormKind::L1: return std::numeric_limits<double>::infinity();
      case NormKind::LInf: return 1.0;
      case NormKind::Polyhedral:
        throw std::invalid_argument("dual_exponent: unsupported for polyhedral norms");
    }
    return 0.0;
  }

  NormSpec with_scale(double scale) const {
    NormSpec n = *this;
    n.set_scale(scale);
    return n;
  }

  // scale * ||v||. Homogeneous of degree one, zero iff v = 0.
  double eval(const Vec& v) const {
    switch (kind_) {
      case NormKind::L1: return scale_ * v.lpNorm<1>();
      case NormKind::LInf: return scale_ * v.lpNorm<Eigen::Infinity>();
      case NormKind::Polyhedral: {
        check_dim(v.size());
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& e : gens_) m = std::max(m, e.dot(v));
        return scale_ * m;
      }
      case NormKind::LpRational: {
        const double m = v.lpNorm<Eigen::Infinity>();
        if (m == 0.0) return 0.0;
        const double pe = p();
        double acc = 0.0;
        for (Eigen::Index j = 0; j < v.size(); ++j) acc += std::pow(std::abs(v[j]) / m, pe);
        return scale_ * m * std::pow(acc, 1.0 / pe);
      }
    }
    return 0.0;
  }

  // Exact gradient of scale * ||.||_p at v != 0 for the smooth kind:
  // components scale * sign(v_j) * (|v_j| / ||v||_p)^(p-1).
  Vec smooth_gradient(const Vec& v) const {
    if (!is_smooth()) throw std::invalid_argument("smooth_gradient: norm is not smooth");
    const double n = eval(v) / scale_;
    if (n == 0.0) throw std::invalid_argument("smooth_gradient: undefined at the origin");
    Vec g(v.size());
    const double pe = p();
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      const double t = std::abs(v[j]) / n;
      g[j] = scale_ * ((v[j] > 0) - (v[j] < 0)) * std::pow(t, pe - 1.0);
    }
    return g;
  }

  // Subdifferential of v -> scale * ||v||, as a closed convex set descriptor.
  // snap > 0 treats |v_j| <= snap (resp. generator gaps <= snap) as ties,
  // which is what residual checks at numerically converged points need.
  SubdiffSet subgradient(const Vec& v, double snap = 0.0) const;

  // Extreme points of the dual unit ball of the *unscaled* norm. l1 enumerates
  // the 2^d sign vectors and is refused for d > 16; linf gives +-e_i. The
  // smooth kind has no finite generator set.
  std::vector<Vec> dual_extreme_points(int dim) const {
    switch (kind_) {
      case NormKind::LInf: {
        std::vector<Vec> e;
        e.reserve(2 * dim);
        for (int i = 0; i < dim; ++i) {
          Vec v = Vec::Zero(dim);
          v[i] = 1.0;
          e.push_back(v);
          v[i] = -1.0;
          e.push_back(v);
        }
        return e;
      }
      case NormKind::L1: {
        if (dim > 16)
          throw std::invalid_argument("l1 generator view refused for d > 16 (2^d extreme points)");
        std::vector<Vec> e;
        e.reserve(std::size_t{1} << dim);
        for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << dim); ++mask) {
          Vec v(dim);
          for (int i = 0; i < dim; ++i) v[i] = (mask >> i) & 1u ? 1.0 : -1.0;
          e.push_back(v);
        }
        return e;
      }
      case NormKind::Polyhedral:
        check_dim(dim);
        return gens_;
      case NormKind::LpRational:
        throw std::invalid_argument("dual_extreme_points: smooth lp norms have no finite generator set");
    }
    return {};
  }

  const std::vector<Vec>& generators() const {
    if (kind_ != NormKind::Polyhedral)
      throw std::invalid_argument("generators: only stored for polyhedral norms");
    return gens_;
  }

  const std::string& origin() const { return origin_; }

  // Token forms listed at the top of this header. Polyhedral generator files
  // hold one d-vector per line, whitespace separated; relative paths resolve
  // against base_dir.
  static NormSpec parse(const std::string& token, const std::string& base_dir = {});
  std::string to_string() const;

  bool operator==(const NormSpec& o) const {
    if (kind_ != o.kind_ || scale_ != o.scale_) return false;
    if (kind_ == NormKind::LpRational) return r_ == o.r_ && s_ == o.s_;
    if (kind_ == NormKind::Polyhedral) {
      if (gens_.size() != o.gens_.size()) return false;
      for (std::size_t i = 0; i < gens_.size(); ++i)
        if (gens_[i] != o.gens_[i]) return false;
    }
    return true;
  }

 private:
  void set_scale(double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale))
      throw std::invalid_argument("norm scale must be positive and finite");
    scale_ = scale;
  }
  void check_dim(Eigen::Index d) const {
    if (kind_ == NormKind::Polyhedral && !gens_.empty() && gens_.front().size() != d)
      throw std::invalid_argument("polyhedral norm: dimension mismatch with generators");
  }

  NormKind kind_ = NormKind::LpRational;
  long r_ = 2, s_ = 1;
  double scale_ = 1.0;
  std::vector<Vec> gens_;
  std::string origin_;
};

namespace detail {

// Euclidean projection onto the probability simplex (sort-based).
inline Vec project_simplex(const Vec& y) {
  const Eigen::Index n = y.size();
  std::vector<double> u(y.data(), y.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  for (int i = 0; i < n; ++i) {
    css += u[i];
    const double t = (css - 1.0) / (i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  return (y.array() - tau).cwiseMax(0.0);
}

// min_theta ||V*theta - z||^2 over the simplex, by accelerated projected
// gradient; V columns are the hull vertices. Hull sizes here are tiny.
inline Vec project_hull(const std::vector<Vec>& verts, const Vec& z) {
  const int k = static_cast<int>(verts.size());
  if (k == 1) return verts[0];
  const Eigen::Index d = z.size();
  Mat V(d, k);
  for (int i = 0; i < k; ++i) V.col(i) = verts[i];
  Mat G = V.transpose() * V;
  Vec c = V.transpose() * z;
  double lip = G.trace();
  if (lip <= 0) lip = 1.0;
  Vec th = Vec::Constant(k, 1.0 / k), yv = th;
  double t_acc = 1.0;
  for (int it = 0; it < 5000; ++it) {
    Vec grad = G * yv - c;
    Vec next = project_simplex(yv - grad / lip);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc));
    yv = next + ((t_acc - 1.0) / t_next) * (next - th);
    t_acc = t_next;
    const double move = (next - th).lpNorm<Eigen::Infinity>();
    th = next;
    if (it > 3 && move < 1e-15) break;
  }
  return V * th;
}

// Projection onto the l_q ball of the given radius, 1 <= q < inf.
// q = 1 bisects the soft threshold; 1 < q < inf nests a component solve
// inside a bisection on the multiplier.
inline Vec project_lq_ball(const Vec& z, double q, double radius) {
  auto lq = [&](const Vec& g) {
    double acc = 0.0;
    const double m = g.lpNorm<Eigen::Infinity>();
    if (m == 0.0) return 0.0;
    for (Eigen::Index j = 0; j < g.size(); ++j) acc += std::pow(std::abs(g[j]) / m, q);
    return m * std::pow(acc, 1.0 / q);
  };
  if (lq(z) <= radius) return z;
  if (q == 1.0) {
    double lo = 0.0, hi = z.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < 200; ++it) {
      const double tau = 0.5 * (lo + hi);
      double acc = 0.0;
      for (Eigen::Index j = 0; j < z.size(); ++j) acc += std::max(std::abs(z[j]) - tau, 0.0);
      (acc > radius ? lo : hi) = tau;
    }
    const double tau = 0.5 * (lo + hi);
    Vec g(z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j)
      g[j] = ((z[j] > 0) - (z[j] < 0)) * std::max(std::abs(z[j]) - tau, 0.0);
    return g;
  }
  // Boundary solution: g_j + theta * g_j^(q-1) = |z_j| componentwise.
  auto g_of = [&](double theta) {
    Vec g(z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      const double zj = std::abs(z[j]);
      double lo = 0.0, hi = zj;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mid + theta * std::pow(mid, q - 1.0) <= zj ? lo : hi) = mid;
      }
      g[j] = ((z[j] > 0) - (z[j] < 0)) * 0.5 * (lo + hi);
    }
    return g;
  };
  double tlo = 0.0, thi = 1.0;
  while (lq(g_of(thi)) > radius && thi < 1e30) thi *= 2.0;
  for (int it = 0; it < 120; ++it) {
    const double mid = 0.5 * (tlo + thi);
    (lq(g_of(mid)) > radius ? tlo : thi) = mid;
  }
  return g_of(0.5 * (tlo + thi));
}

}  // namespace detail

// Closed convex set descriptor returned by NormSpec::subgradient. The forms
// cover every case that arises for the supported norms: a gradient point, a
// coordinate box (l1 at kinks), a convex hull of finitely many generators
// (linf / polyhedral faces and balls), and the scaled dual-norm ball at the
// origin of a smooth norm.
class SubdiffSet {
 public:
  enum class Form { Singleton, Box, Hull, Ball };

  static SubdiffSet singleton(Vec g) {
    SubdiffSet s;
    s.form_ = Form::Singleton;
    s.g_ = std::move(g);
    return s;
  }
  static SubdiffSet box(Vec lo, Vec hi) {
    SubdiffSet s;
    s.form_ = Form::Box;
    s.lo_ = std::move(lo);
    s.hi_ = std::move(hi);
    return s;
  }
  static SubdiffSet hull(std::vector<Vec> verts) {
    if (verts.empty()) throw std::invalid_argument("SubdiffSet::hull: empty vertex set");
    if (verts.size() == 1) return singleton(verts.front());
    SubdiffSet s;
    s.form_ = Form::Hull;
    s.verts_ = std::move(verts);
    return s;
  }
  static SubdiffSet ball(double q, double radius, int dim) {
    SubdiffSet s;
    s.form_ = Form::Ball;
    s.q_ = q;
    s.radius_ = radius;
    s.dim_ = dim;
    return s;
  }

  Form form() const { return form_; }
  const Vec& point() const { return g_; }
  const Vec& lower() const { return lo_; }
  const Vec& upper() const { return hi_; }
  const std::vector<Vec>& vertices() const { return verts_; }
  double ball_exponent() const { return q_; }
  double ball_radius() const { return radius_; }

  SubdiffSet scaled(double w) const {
    SubdiffSet s = *this;
    switch (form_) {
      case Form::Singleton: s.g_ *= w; break;
      case Form::Box:
        s.lo_ *= w;
        s.hi_ *= w;
        if (w < 0) std::swap(s.lo_, s.hi_);
        break;
      case Form::Hull:
        for (auto& v : s.verts_) v *= w;
        break;
      case Form::Ball: s.radius_ *= std::abs(w); break;
    }
    return s;
  }

  Vec any_element() const {
    switch (form_) {
      case Form::Singleton: return g_;
      case Form::Box: return 0.5 * (lo_ + hi_);
      case Form::Hull: return verts_.front();
      case Form::Ball: return Vec::Zero(dim_);
    }
    return {};
  }

  Vec project(const Vec& z) const {
    switch (form_) {
      case Form::Singleton: return g_;
      case Form::Box: return z.cwiseMax(lo_).cwiseMin(hi_);
      case Form::Hull: return detail::project_hull(verts_, z);
      case Form::Ball:
        if (std::isinf(q_)) return z.cwiseMax(-radius_).cwiseMin(radius_);
        return detail::project_lq_ball(z, q_, radius_);
    }
    return {};
  }

  double distance(const Vec& z) const { return (z - project(z)).norm(); }
  bool contains(const Vec& z, double tol) const { return distance(z) <= tol; }

 private:
  Form form_ = Form::Singleton;
  Vec g_, lo_, hi_;
  std::vector<Vec> verts_;
  double q_ = 2.0, radius_ = 0.0;
  int dim_ = 0;
};

inline SubdiffSet NormSpec::subgradient(const Vec& v, double snap) const {
  const Eigen::Index d = v.size();
  const double vmax = v.lpNorm<Eigen::Infinity>();
  const bool at_origin = vmax <= snap;
  switch (kind_) {
    case NormKind::LpRational: {
      if (at_origin) return SubdiffSet::ball(dual_exponent(), scale_, static_cast<int>(d));
      return SubdiffSet::singleton(smooth_gradient(v));
    }
    case NormKind::L1: {
      Vec lo(d), hi(d);
      bool any_free = false;
      for (Eigen::Index j = 0; j < d; ++j) {
        if (std::abs(v[j]) <= snap) {
          lo[j] = -scale_;
          hi[j] = scale_;
          any_free = true;
        } else {
          lo[j] = hi[j] = (v[j] > 0 ? scale_ : -scale_);
        }
      }
      if (!any_free) return SubdiffSet::singleton(lo);
      return SubdiffSet::box(std::move(lo), std::move(hi));
    }
    case NormKind::LInf: {
      if (at_origin) return SubdiffSet::ball(1.0, scale_, static_cast<int>(d));
      std::vector<Vec> verts;
      for (Eigen::Index j = 0; j < d; ++j)
        if (std::abs(v[j]) >= vmax - snap) {
          Vec e = Vec::Zero(d);
          e[j] = (v[j] >= 0 ? scale_ : -scale_);
          verts.push_back(std::move(e));
        }
      return SubdiffSet::hull(std::move(verts));
    }
    case NormKind::Polyhedral: {
      check_dim(d);
      if (at_origin) {
        std::vector<Vec> verts;
        verts.reserve(gens_.size());
        for (const auto& e : gens_) verts.push_back(scale_ * e);
        return SubdiffSet::hull(std::move(verts));
      }
      double m = -std::numeric_limits<double>::infinity();
      for (const auto& e : gens_) m = std::max(m, e.dot(v));
      std::vector<Vec> verts;
      for (const auto& e : gens_)
        if (e.dot(v) >= m - snap * (1.0 + std::abs(m))) verts.push_back(scale_ * e);
      return SubdiffSet::hull(std::move(verts));
    }
  }
  return SubdiffSet::singleton(Vec::Zero(d));
}

inline NormSpec NormSpec::parse(const std::string& token, const std::string& base_dir) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : token) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  if (parts.empty() || parts[0].empty()) throw ParseError("empty norm token");
  const std::string& head = parts[0];
  auto parse_scale = [&](std::size_t idx) {
    if (parts.size() <= idx) return 1.0;
    try {
      std::size_t pos = 0;
      const double s = std::stod(parts[idx], &pos);
      if (pos != parts[idx].size()) throw std::invalid_argument("");
      return s;
    } catch (const std::exception&) {
      throw ParseError("bad norm scale '" + parts[idx] + "' in '" + token + "'");
    }
  };
  try {
    if (head == "l1") {
      if (parts.size() > 2) throw ParseError("too many fields in norm token '" + token + "'");
      return l1(parse_scale(1));
    }
    if (head == "linf") {
      if (parts.size() > 2) throw ParseError("too many fields in norm token '" + token + "'");
      return linf(parse_scale(1));
    }
    if (head == "lp") {
      if (parts.size() < 2 || parts.size() > 3)
        throw ParseError("lp norm token must be lp:r/s[:scale], got '" + token + "'");
      const auto slash = parts[1].find('/');
      long r = 0, s = 1;
      try {
        if (slash == std::string::npos) {
          r = std::stol(parts[1]);
        } else {
          r = std::stol(parts[1].substr(0, slash));
          s = std::stol(parts[1].substr(slash + 1));
        }
      } catch (const std::exception&) {
        throw ParseError("bad rational exponent '" + parts[1] + "' in '" + token + "'");
      }
      return lp(r, s, parse_scale(2));
    }
    if (head == "poly") {
      if (parts.size() < 2 || parts.size() > 3)
        throw ParseError("poly norm token must be poly:<file>[:scale], got '" + token + "'");
      std::string path = parts[1];
      if (!base_dir.empty() && !path.empty() && path.front() != '/') path = base_dir + "/" + path;
      std::ifstream in(path);
      if (!in) throw MissingDataError("cannot open polyhedral generator file '" + path + "'");
      std::vector<Vec> gens;
      std::string line;
      int lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::vector<double> row;
        double x;
        while (ls >> x) row.push_back(x);
        if (row.empty()) continue;
        gens.push_back(Eigen::Map<Vec>(row.data(), static_cast<Eigen::Index>(row.size())));
      }
      return polyhedral(std::move(gens), parse_scale(2), parts[1]);
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string(e.what()) + " (token '" + token + "')");
  }
  throw ParseError("unknown norm kind '" + head + "' in token '" + token + "'");
}

inline std::string NormSpec::to_string() const {
  char buf[64];
  std::string out;
  switch (kind_) {
    case NormKind::L1: out = "l1"; break;
    case NormKind::LInf: out = "linf"; break;
    case NormKind::LpRational:
      std::snprintf(buf, sizeof buf, "lp:%ld/%ld", r_, s_);
      out = buf;
      break;
    case NormKind::Polyhedral:
      if (origin_.empty())
        throw std::invalid_argument(
            "cannot format a polyhedral norm constructed without a generator file");
      out = "poly:" + origin_;
      break;
  }
  if (scale_ != 1.0) {
    std::snprintf(buf, sizeof buf, ":%.17g", scale_);
    out += buf;
  }
  return out;
}

}  // namespace refloc
