#pragma once

// Residual of a stationarity inclusion  lambda * alpha  in  S_1 + ... + S_k
// for subdifferential sets S_i, measured as the Euclidean distance between
// the line and the Minkowski sum:
//     min_{lambda, g_i in S_i} || lambda * alpha - sum_i g_i ||_2.
// Solved by block minimization: the lambda update is closed form, each g_i
// update is a Euclidean projection; the objective is jointly convex and
// smooth, so coordinatewise minima are global.

#include <Eigen/Core>

#include <cmath>
#include <vector>

#include "refloc/norms.hpp"

namespace refloc::detail {

inline double inclusion_residual(const Vec& alpha, const std::vector<SubdiffSet>& sets,
                                 int max_rounds = 4000) {
  const Eigen::Index d = alpha.size();
  std::vector<Vec> g;
  g.reserve(sets.size());
  Vec total = Vec::Zero(d);
  for (const auto& s : sets) {
    g.push_back(s.any_element());
    total += g.back();
  }
  // alpha = 0 asks for dist(0, sum of sets): the multiplier stays pinned.
  const double a2 = alpha.squaredNorm();
  double lambda = a2 > 0.0 ? alpha.dot(total) / a2 : 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int round = 0; round < max_rounds; ++round) {
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const Vec target = lambda * alpha - (total - g[i]);
      Vec gn = sets[i].project(target);
      total += gn - g[i];
      g[i] = std::move(gn);
      if (a2 > 0.0) lambda = alpha.dot(total) / a2;
    }
    const double res = (lambda * alpha - total).norm();
    if (prev - res < 1e-14 * (1.0 + res)) {
      prev = res;
      break;
    }
    prev = res;
  }
  return (lambda * alpha - total).norm();
}

}  // namespace refloc::detail
