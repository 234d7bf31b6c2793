#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace colearn {

// Real vector carrying models and gradients. Dimension is fixed at
// construction; arithmetic between vectors of different dimension throws
// ContractViolation.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t dim, double fill = 0.0);
  DenseVector(std::initializer_list<double> values);
  explicit DenseVector(std::vector<double> values);

  std::size_t dim() const noexcept { return coords_.size(); }
  bool empty() const noexcept { return coords_.empty(); }

  double& operator[](std::size_t i) { return coords_[i]; }
  double operator[](std::size_t i) const { return coords_[i]; }

  std::span<double> span() noexcept { return coords_; }
  std::span<const double> span() const noexcept { return coords_; }
  const std::vector<double>& values() const noexcept { return coords_; }

  auto begin() noexcept { return coords_.begin(); }
  auto end() noexcept { return coords_.end(); }
  auto begin() const noexcept { return coords_.begin(); }
  auto end() const noexcept { return coords_.end(); }

  DenseVector& operator+=(const DenseVector& other);
  DenseVector& operator-=(const DenseVector& other);
  DenseVector& operator*=(double s);

  // this += a * x
  DenseVector& axpy(double a, const DenseVector& x);

  double dot(const DenseVector& other) const;
  double norm1() const;
  double norm2() const;
  double norm2_squared() const;
  double norm_inf() const;
  bool all_finite() const;
  bool is_zero() const;

  // Bitwise comparison treats +0 and -0 as equal, NaN as unequal.
  friend bool operator==(const DenseVector& a, const DenseVector& b) {
    return a.coords_ == b.coords_;
  }

 private:
  std::vector<double> coords_;
};

DenseVector operator+(DenseVector a, const DenseVector& b);
DenseVector operator-(DenseVector a, const DenseVector& b);
DenseVector operator*(double s, DenseVector a);

void require_same_dim(const DenseVector& a, const DenseVector& b, const char* what);

// Streaming mean x_bar_k = x_bar_{k-1} + (x_k - x_bar_{k-1}) / k. The mean of a
// single vector, or of identical vectors, is reproduced exactly.
class RunningMean {
 public:
  explicit RunningMean(std::size_t dim) : mean_(dim) {}

  void add(const DenseVector& x);
  // Weighted variant: mean += (w / W_total) * (x - mean).
  void add(const DenseVector& x, double weight);

  std::size_t count() const noexcept { return count_; }
  const DenseVector& mean() const noexcept { return mean_; }

 private:
  DenseVector mean_;
  std::size_t count_ = 0;
  double total_weight_ = 0.0;
};

}  // namespace colearn
