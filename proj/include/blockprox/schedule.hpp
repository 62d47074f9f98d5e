// schedule.hpp - step-size schedules; the proximal step always uses
// beta(t) = m * alpha(t).
#pragma once

#include <cmath>
#include <stdexcept>

namespace blockprox {

class StepSchedule {
 public:
  enum class Kind { sqrt_decay, strongly_convex, constant };

  // alpha(t) = alpha0 / sqrt(t + 1)
  static StepSchedule sqrt_decay(double alpha0) {
    require_positive(alpha0);
    return StepSchedule(Kind::sqrt_decay, alpha0, 0.0, 0.0);
  }

  // alpha(k) = 2 mu / (mu^2 k + 12 L^2)
  static StepSchedule strongly_convex(double mu, double smoothness) {
    if (mu <= 0.0 || smoothness <= 0.0)
      throw std::invalid_argument("StepSchedule: need mu > 0 and L > 0");
    return StepSchedule(Kind::strongly_convex, 0.0, mu, smoothness);
  }

  // alpha(t) = alpha, unvalidated (mu, L unknown).
  static StepSchedule constant(double alpha) {
    require_positive(alpha);
    return StepSchedule(Kind::constant, alpha, 0.0, 0.0);
  }

  // alpha(t) = alpha with the linear-rate window 0 < alpha < 2 mu / (3 L^2)
  // enforced.
  static StepSchedule constant(double alpha, double mu, double smoothness) {
    require_positive(alpha);
    if (mu <= 0.0 || smoothness <= 0.0)
      throw std::invalid_argument("StepSchedule: need mu > 0 and L > 0");
    double limit = 2.0 * mu / (3.0 * smoothness * smoothness);
    if (alpha >= limit)
      throw std::invalid_argument(
          "StepSchedule: constant alpha must satisfy alpha < 2 mu / (3 L^2)");
    return StepSchedule(Kind::constant, alpha, mu, smoothness);
  }

  Kind kind() const { return kind_; }
  double alpha0() const { return alpha0_; }

  double alpha(long t) const {
    if (t < 0) throw std::invalid_argument("StepSchedule: t must be >= 0");
    switch (kind_) {
      case Kind::sqrt_decay:
        return alpha0_ / std::sqrt(static_cast<double>(t) + 1.0);
      case Kind::strongly_convex:
        return 2.0 * mu_ /
               (mu_ * mu_ * static_cast<double>(t) + 12.0 * l_ * l_);
      case Kind::constant:
        return alpha0_;
    }
    return 0.0;  // unreachable
  }

  double beta(long t, int m) const {
    return static_cast<double>(m) * alpha(t);
  }

 private:
  StepSchedule(Kind kind, double alpha0, double mu, double smoothness)
      : kind_(kind), alpha0_(alpha0), mu_(mu), l_(smoothness) {}

  static void require_positive(double alpha) {
    if (alpha <= 0.0)
      throw std::invalid_argument("StepSchedule: alpha must be > 0");
  }

  Kind kind_;
  double alpha0_;
  double mu_;
  double l_;
};

}  // namespace blockprox
