// blockpoint.hpp - stacked iterate x in R^{nd} viewed as n blocks of dim d
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace blockprox {

class BlockPoint {
 public:
  BlockPoint() = default;
  BlockPoint(int n, int d) : n_(n), d_(d) {
    if (n <= 0 || d <= 0)
      throw std::invalid_argument("BlockPoint: n and d must be positive");
    data_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * d);
  }

  int blocks() const { return n_; }
  int dim() const { return d_; }
  Eigen::Index size() const { return data_.size(); }

  Eigen::VectorBlock<Eigen::VectorXd> block(int i) {
    return data_.segment(static_cast<Eigen::Index>(i) * d_, d_);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> block(int i) const {
    return data_.segment(static_cast<Eigen::Index>(i) * d_, d_);
  }

  Eigen::VectorXd& vector() { return data_; }
  const Eigen::VectorXd& vector() const { return data_; }

  bool same_shape(const BlockPoint& other) const {
    return n_ == other.n_ && d_ == other.d_;
  }

 private:
  int n_ = 0;
  int d_ = 0;
  Eigen::VectorXd data_;
};

inline double squared_distance(const BlockPoint& a, const BlockPoint& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("squared_distance: shape mismatch");
  return (a.vector() - b.vector()).squaredNorm();
}

}  // namespace blockprox
