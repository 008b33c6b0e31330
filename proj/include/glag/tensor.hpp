#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <vector>

namespace glag {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense cube T(i, j, k) with every index in [0, d).
class Rank3 {
 public:
  Rank3() = default;
  explicit Rank3(int d) : d_(d), data_(static_cast<std::size_t>(d) * d * d, 0.0) {}

  int dim() const { return d_; }
  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  const std::vector<double>& data() const { return data_; }

  /// Largest absolute entry.
  double max_abs() const;

 private:
  std::size_t index(int i, int j, int k) const {
    assert(i >= 0 && i < d_ && j >= 0 && j < d_ && k >= 0 && k < d_);
    return (static_cast<std::size_t>(i) * d_ + j) * d_ + k;
  }

  int d_ = 0;
  std::vector<double> data_;
};

class Rank4 {
 public:
  Rank4() = default;
  explicit Rank4(int d) : d_(d), data_(static_cast<std::size_t>(d) * d * d * d, 0.0) {}

  int dim() const { return d_; }
  double& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }
  const std::vector<double>& data() const { return data_; }
  double max_abs() const;

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * d_ + j) * d_ + k) * d_ + l;
  }

  int d_ = 0;
  std::vector<double> data_;
};

inline double Rank3::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

inline double Rank4::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace glag
