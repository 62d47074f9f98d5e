// oracle.hpp - numeric argmin reference for the edge prox kernels
//
// Minimizes  1/2 ||x - z||^2 + t * N(x_i - x_j)  directly over the full
// vector, with N the l2 or l1 norm, by damped Newton on an epsilon-smoothed
// surrogate with continuation down to eps = 1e-10. This shares no algebra
// with the closed-form kernels in objectives.hpp, so agreement between the
// two is a meaningful check. Intended for small probes (nd up to a few
// hundred); cost is a dense solve per Newton step.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "blockprox/blockpoint.hpp"
#include "blockprox/objectives.hpp"

namespace blockprox {

namespace detail {

inline double smoothed_norm(const Eigen::VectorXd& v, RegVariant variant,
                            double eps) {
  if (variant == RegVariant::l2) return std::sqrt(v.squaredNorm() + eps * eps) - eps;
  double s = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k)
    s += std::sqrt(v[k] * v[k] + eps * eps) - eps;
  return s;
}

inline Eigen::VectorXd smoothed_norm_grad(const Eigen::VectorXd& v,
                                          RegVariant variant, double eps) {
  if (variant == RegVariant::l2)
    return v / std::sqrt(v.squaredNorm() + eps * eps);
  Eigen::VectorXd g(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k)
    g[k] = v[k] / std::sqrt(v[k] * v[k] + eps * eps);
  return g;
}

inline Eigen::MatrixXd smoothed_norm_hess(const Eigen::VectorXd& v,
                                          RegVariant variant, double eps) {
  Eigen::Index d = v.size();
  if (variant == RegVariant::l2) {
    double w = std::sqrt(v.squaredNorm() + eps * eps);
    return Eigen::MatrixXd::Identity(d, d) / w -
           (v * v.transpose()) / (w * w * w);
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double w = std::sqrt(v[k] * v[k] + eps * eps);
    h(k, k) = eps * eps / (w * w * w);
  }
  return h;
}

}  // namespace detail

// Full-vector numeric prox for a single pairwise component coupling blocks
// bi and bj with effective step t (= beta * lambda). Returns the argmin of
// the unsmoothed objective to roughly 1e-8 in the iterate.
inline BlockPoint numeric_component_prox(const BlockPoint& z, int bi, int bj,
                                         double t, RegVariant variant) {
  if (t < 0.0) throw std::invalid_argument("numeric_component_prox: t < 0");
  const Eigen::Index nd = z.size();
  const int d = z.dim();
  BlockPoint x = z;  // warm start at z
  if (t == 0.0) return x;

  for (double eps = 1e-2; eps >= 1e-11; eps *= 1e-2) {
    for (int it = 0; it < 100; ++it) {
      Eigen::VectorXd u = x.block(bi) - x.block(bj);
      Eigen::VectorXd gn = detail::smoothed_norm_grad(u, variant, eps);
      Eigen::VectorXd grad = x.vector() - z.vector();
      grad.segment(static_cast<Eigen::Index>(bi) * d, d) += t * gn;
      grad.segment(static_cast<Eigen::Index>(bj) * d, d) -= t * gn;
      if (grad.norm() <= std::max(1e-13, eps * 1e-6)) break;

      Eigen::MatrixXd hn = detail::smoothed_norm_hess(u, variant, eps);
      Eigen::MatrixXd hess = Eigen::MatrixXd::Identity(nd, nd);
      auto bi0 = static_cast<Eigen::Index>(bi) * d;
      auto bj0 = static_cast<Eigen::Index>(bj) * d;
      hess.block(bi0, bi0, d, d) += t * hn;
      hess.block(bj0, bj0, d, d) += t * hn;
      hess.block(bi0, bj0, d, d) -= t * hn;
      hess.block(bj0, bi0, d, d) -= t * hn;

      Eigen::VectorXd step = hess.ldlt().solve(grad);
      auto phi = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd diff =
            v.segment(bi0, d) - v.segment(bj0, d);
        return 0.5 * (v - z.vector()).squaredNorm() +
               t * detail::smoothed_norm(diff, variant, eps);
      };
      double f0 = phi(x.vector());
      double alpha = 1.0;
      Eigen::VectorXd cand = x.vector() - alpha * step;
      int backtracks = 0;
      while (phi(cand) > f0 - 1e-4 * alpha * grad.dot(step) &&
             backtracks < 60) {
        alpha *= 0.5;
        cand = x.vector() - alpha * step;
        ++backtracks;
      }
      x.vector() = cand;
    }
  }
  return x;
}

// Pairwise convenience wrapper over a 2-block point.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> numeric_edge_prox(
    const Eigen::Ref<const Eigen::VectorXd>& z_i,
    const Eigen::Ref<const Eigen::VectorXd>& z_j, double t,
    RegVariant variant) {
  BlockPoint z(2, static_cast<int>(z_i.size()));
  z.block(0) = z_i;
  z.block(1) = z_j;
  BlockPoint x = numeric_component_prox(z, 0, 1, t, variant);
  return {x.block(0), x.block(1)};
}

}  // namespace blockprox
