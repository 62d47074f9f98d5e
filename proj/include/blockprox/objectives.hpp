// objectives.hpp - local losses, regularizer components, and the composite
// objective H(x) = sum_i f_i(x_i) + sum_j G_j(x).
//
// Conventions: all reals are double; the subgradient of a norm at 0 is the
// zero selection; edge prox kernels fold the component weight into a single
// effective step t = beta * lambda.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "blockprox/blockpoint.hpp"

namespace blockprox {

// --- local losses ------------------------------------------------------

class LocalLoss {
 public:
  virtual ~LocalLoss() = default;
  virtual int dim() const = 0;
  virtual double value(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  virtual Eigen::VectorXd subgradient(
      const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  // Fused evaluation; concrete losses override when the two share work.
  virtual double value_and_subgradient(
      const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd& grad) const {
    grad = subgradient(x);
    return value(x);
  }
  // Smoothness / strong convexity constants; negative means "not declared".
  virtual double smoothness() const { return -1.0; }
  virtual double strong_convexity() const { return -1.0; }
};

// f(x) = 0; used by harnesses that exercise the proximal phase alone.
class ZeroLoss final : public LocalLoss {
 public:
  explicit ZeroLoss(int d) : d_(d) {}
  int dim() const override { return d_; }
  double value(const Eigen::Ref<const Eigen::VectorXd>&) const override {
    return 0.0;
  }
  Eigen::VectorXd subgradient(
      const Eigen::Ref<const Eigen::VectorXd>&) const override {
    return Eigen::VectorXd::Zero(d_);
  }
  double smoothness() const override { return 0.0; }
  double strong_convexity() const override { return 0.0; }

 private:
  int d_;
};

// f(x) = 1/2 ||A x - b||^2 + (tau/2) ||x||^2.
// Gradient and value are evaluated through the cached Gram matrix; the
// declared constants are L = lambda_max(A^T A) + tau, mu = lambda_min + tau.
class LeastSquaresLoss final : public LocalLoss {
 public:
  LeastSquaresLoss(Eigen::MatrixXd a, Eigen::VectorXd b, double ridge = 0.0)
      : a_(std::move(a)), b_(std::move(b)), ridge_(ridge) {
    if (a_.rows() != b_.size())
      throw std::invalid_argument("LeastSquaresLoss: A rows != b size");
    if (ridge_ < 0.0)
      throw std::invalid_argument("LeastSquaresLoss: ridge must be >= 0");
    gram_ = a_.transpose() * a_;
    atb_ = a_.transpose() * b_;
    b_sq_ = b_.squaredNorm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_);
    smoothness_ = es.eigenvalues().maxCoeff() + ridge_;
    strong_convexity_ =
        std::max(0.0, es.eigenvalues().minCoeff()) + ridge_;
  }

  int dim() const override { return static_cast<int>(a_.cols()); }

  double value(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
    double quad = 0.5 * x.dot(gram_ * x) - atb_.dot(x) + 0.5 * b_sq_;
    return quad + 0.5 * ridge_ * x.squaredNorm();
  }

  Eigen::VectorXd subgradient(
      const Eigen::Ref<const Eigen::VectorXd>& x) const override {
    return gram_ * x - atb_ + ridge_ * x;
  }

  double value_and_subgradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                               Eigen::VectorXd& grad) const override {
    Eigen::VectorXd gx = gram_ * x;
    grad = gx - atb_ + ridge_ * x;
    return 0.5 * x.dot(gx) - atb_.dot(x) + 0.5 * b_sq_ +
           0.5 * ridge_ * x.squaredNorm();
  }

  double smoothness() const override { return smoothness_; }
  double strong_convexity() const override { return strong_convexity_; }

  const Eigen::MatrixXd& matrix() const { return a_; }
  const Eigen::VectorXd& target() const { return b_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& gram_rhs() const { return atb_; }
  double ridge() const { return ridge_; }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  double ridge_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd atb_;
  double b_sq_ = 0.0;
  double smoothness_ = 0.0;
  double strong_convexity_ = 0.0;
};

// --- edge prox kernels ---------------------------------------------------

// argmin over (x_i, x_j) of t ||x_i - x_j||_2 + 1/2 (||x_i - z_i||^2 +
// ||x_j - z_j||^2). The pair mean is preserved exactly: the difference
// s = z_i - z_j shrinks by 2t toward zero and collapses to zero when
// ||s|| <= 2t.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> prox_edge_l2(
    const Eigen::Ref<const Eigen::VectorXd>& z_i,
    const Eigen::Ref<const Eigen::VectorXd>& z_j, double t) {
  if (t < 0.0) throw std::invalid_argument("prox_edge_l2: t must be >= 0");
  Eigen::VectorXd s = z_i - z_j;
  double ns = s.norm();
  if (ns <= 2.0 * t) {
    Eigen::VectorXd mid = 0.5 * (z_i + z_j);
    return {mid, mid};
  }
  Eigen::VectorXd shift = (t / ns) * s;
  return {z_i - shift, z_j + shift};
}

// Coordinatewise version of the rule above: each coordinate pair shrinks
// its difference by 2t toward the coordinate mean.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> prox_edge_l1(
    const Eigen::Ref<const Eigen::VectorXd>& z_i,
    const Eigen::Ref<const Eigen::VectorXd>& z_j, double t) {
  if (t < 0.0) throw std::invalid_argument("prox_edge_l1: t must be >= 0");
  Eigen::VectorXd x_i = z_i, x_j = z_j;
  for (Eigen::Index k = 0; k < z_i.size(); ++k) {
    double s = z_i[k] - z_j[k];
    if (std::abs(s) <= 2.0 * t) {
      double mid = 0.5 * (z_i[k] + z_j[k]);
      x_i[k] = mid;
      x_j[k] = mid;
    } else {
      double shift = (s > 0.0) ? t : -t;
      x_i[k] = z_i[k] - shift;
      x_j[k] = z_j[k] + shift;
    }
  }
  return {x_i, x_j};
}

// --- regularizer components ----------------------------------------------

enum class RegVariant { l2, l1 };

inline const char* variant_name(RegVariant v) {
  return v == RegVariant::l2 ? "l2" : "l1";
}

class RegularizerComponent {
 public:
  virtual ~RegularizerComponent() = default;
  virtual const std::vector<int>& support() const = 0;
  virtual double value(const BlockPoint& x) const = 0;
  // New values for exactly the blocks in the support, in support order.
  // Blocks outside the support are untouched by partial separability.
  virtual std::vector<Eigen::VectorXd> prox_blocks(const BlockPoint& z,
                                                   double beta) const = 0;
  // Accumulates scale * s into grad for one subgradient selection s. The
  // selection at kinks is the zero vector, matching the library convention.
  virtual void add_subgradient(const BlockPoint& x, double scale,
                               BlockPoint& grad) const = 0;
  // Uniform bound on ||s|| over s in the subdifferential.
  virtual double lipschitz_bound() const = 0;

  bool contains(int node) const {
    const auto& s = support();
    return std::find(s.begin(), s.end(), node) != s.end();
  }
};

// G(x) = lambda ||x_i - x_j||_2 or lambda ||x_i - x_j||_1 for one edge.
class EdgeDiffNorm final : public RegularizerComponent {
 public:
  EdgeDiffNorm(int i, int j, double lambda, RegVariant variant, int d)
      : support_{i, j}, lambda_(lambda), variant_(variant), d_(d) {
    if (i == j) throw std::invalid_argument("EdgeDiffNorm: i == j");
    if (lambda < 0.0)
      throw std::invalid_argument("EdgeDiffNorm: lambda must be >= 0");
  }

  const std::vector<int>& support() const override { return support_; }
  int endpoint_i() const { return support_[0]; }
  int endpoint_j() const { return support_[1]; }
  double weight() const { return lambda_; }
  RegVariant variant() const { return variant_; }

  double value(const BlockPoint& x) const override {
    Eigen::VectorXd diff = x.block(support_[0]) - x.block(support_[1]);
    return lambda_ * (variant_ == RegVariant::l2 ? diff.norm()
                                                 : diff.lpNorm<1>());
  }

  std::vector<Eigen::VectorXd> prox_blocks(const BlockPoint& z,
                                           double beta) const override {
    if (beta < 0.0) throw std::invalid_argument("prox_blocks: beta < 0");
    double t = beta * lambda_;
    auto [xi, xj] = (variant_ == RegVariant::l2)
                        ? prox_edge_l2(z.block(support_[0]),
                                       z.block(support_[1]), t)
                        : prox_edge_l1(z.block(support_[0]),
                                       z.block(support_[1]), t);
    return {std::move(xi), std::move(xj)};
  }

  void add_subgradient(const BlockPoint& x, double scale,
                       BlockPoint& grad) const override {
    auto [gi, gj] = subgradient_pair(x);
    grad.block(support_[0]) += scale * gi;
    grad.block(support_[1]) += scale * gj;
  }

  // Stacked subgradients have the form (lambda u, -lambda u): the tightest
  // uniform bound is sqrt(2) lambda for l2 and sqrt(2 d) lambda for l1.
  double lipschitz_bound() const override {
    double unit = (variant_ == RegVariant::l2)
                      ? 1.0
                      : std::sqrt(static_cast<double>(d_));
    return std::sqrt(2.0) * lambda_ * unit;
  }

  // Subgradient restricted to the two supported blocks, zero selection at
  // the kink; the stacked full-space subgradient is zero elsewhere.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> subgradient_pair(
      const BlockPoint& x) const {
    Eigen::VectorXd diff = x.block(support_[0]) - x.block(support_[1]);
    Eigen::VectorXd u;
    if (variant_ == RegVariant::l2) {
      double ns = diff.norm();
      u = (ns > 0.0) ? Eigen::VectorXd(diff / ns)
                     : Eigen::VectorXd(Eigen::VectorXd::Zero(diff.size()));
    } else {
      u = diff.unaryExpr(
          [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    }
    return {lambda_ * u, -lambda_ * u};
  }

 private:
  std::vector<int> support_;
  double lambda_;
  RegVariant variant_;
  int d_;
};

// --- problem assembly ------------------------------------------------------

using LossPtr = std::shared_ptr<const LocalLoss>;
using ComponentPtr = std::shared_ptr<const RegularizerComponent>;

struct Problem {
  int n = 0;
  int d = 0;
  std::vector<LossPtr> losses;           // size n
  std::vector<ComponentPtr> components;  // size m (possibly 0)

  int component_count() const { return static_cast<int>(components.size()); }

  void check() const {
    if (static_cast<int>(losses.size()) != n)
      throw std::invalid_argument("Problem: losses size != n");
    for (const auto& l : losses)
      if (l->dim() != d)
        throw std::invalid_argument("Problem: loss dimension mismatch");
    for (const auto& c : components)
      for (int i : c->support())
        if (i < 0 || i >= n)
          throw std::invalid_argument("Problem: component support out of range");
  }
};

inline double objective_value(const Problem& p, const BlockPoint& x) {
  if (x.blocks() != p.n || x.dim() != p.d)
    throw std::invalid_argument("objective_value: dimension mismatch");
  double h = 0.0;
  for (int i = 0; i < p.n; ++i) h += p.losses[i]->value(x.block(i));
  for (const auto& c : p.components) h += c->value(x);
  return h;
}

// Fused H(x) and one subgradient selection of H at x.
inline double objective_value_and_subgradient(const Problem& p,
                                              const BlockPoint& x,
                                              BlockPoint& grad) {
  if (x.blocks() != p.n || x.dim() != p.d || !grad.same_shape(x))
    throw std::invalid_argument(
        "objective_value_and_subgradient: dimension mismatch");
  grad.vector().setZero();
  double h = 0.0;
  Eigen::VectorXd g_i;
  for (int i = 0; i < p.n; ++i) {
    h += p.losses[i]->value_and_subgradient(x.block(i), g_i);
    grad.block(i) += g_i;
  }
  for (const auto& c : p.components) {
    h += c->value(x);
    c->add_subgradient(x, 1.0, grad);
  }
  return h;
}

// New values for the blocks in the component's support; everything else in
// prox_{beta G_j}(z) equals z by partial separability.
inline std::vector<Eigen::VectorXd> restricted_prox(
    const RegularizerComponent& component, const BlockPoint& z, double beta) {
  return component.prox_blocks(z, beta);
}

// Full-vector prox of one component: copy of z with the supported blocks
// replaced.
inline BlockPoint full_component_prox(const RegularizerComponent& component,
                                      const BlockPoint& z, double beta) {
  BlockPoint out = z;
  auto blocks = component.prox_blocks(z, beta);
  const auto& s = component.support();
  for (std::size_t k = 0; k < s.size(); ++k) out.block(s[k]) = blocks[k];
  return out;
}

// max_j c_j over the per-component Lipschitz bounds (Assumption-style c).
inline double global_lipschitz_bound(const std::vector<ComponentPtr>& comps) {
  if (comps.empty())
    throw std::invalid_argument("global_lipschitz_bound: empty component list");
  double c = 0.0;
  for (const auto& comp : comps) c = std::max(c, comp->lipschitz_bound());
  return c;
}

}  // namespace blockprox
