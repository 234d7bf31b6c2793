#include "colearn/numerics/dense_vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "colearn/error.hpp"

namespace colearn {

DenseVector::DenseVector(std::size_t dim, double fill) : coords_(dim, fill) {}

DenseVector::DenseVector(std::initializer_list<double> values) : coords_(values) {}

DenseVector::DenseVector(std::vector<double> values) : coords_(std::move(values)) {}

void require_same_dim(const DenseVector& a, const DenseVector& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw ContractViolation(std::string(what) + ": dimension mismatch (" +
                            std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

DenseVector& DenseVector::operator+=(const DenseVector& other) {
  require_same_dim(*this, other, "operator+=");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += other.coords_[i];
  return *this;
}

DenseVector& DenseVector::operator-=(const DenseVector& other) {
  require_same_dim(*this, other, "operator-=");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= other.coords_[i];
  return *this;
}

DenseVector& DenseVector::operator*=(double s) {
  for (double& c : coords_) c *= s;
  return *this;
}

DenseVector& DenseVector::axpy(double a, const DenseVector& x) {
  require_same_dim(*this, x, "axpy");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += a * x.coords_[i];
  return *this;
}

double DenseVector::dot(const DenseVector& other) const {
  require_same_dim(*this, other, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < coords_.size(); ++i) s += coords_[i] * other.coords_[i];
  return s;
}

double DenseVector::norm1() const {
  double s = 0.0;
  for (double c : coords_) s += std::abs(c);
  return s;
}

double DenseVector::norm2_squared() const {
  double s = 0.0;
  for (double c : coords_) s += c * c;
  return s;
}

double DenseVector::norm2() const { return std::sqrt(norm2_squared()); }

double DenseVector::norm_inf() const {
  double m = 0.0;
  for (double c : coords_) m = std::max(m, std::abs(c));
  return m;
}

bool DenseVector::all_finite() const {
  return std::all_of(coords_.begin(), coords_.end(), [](double c) { return std::isfinite(c); });
}

bool DenseVector::is_zero() const {
  return std::all_of(coords_.begin(), coords_.end(), [](double c) { return c == 0.0; });
}

DenseVector operator+(DenseVector a, const DenseVector& b) { return a += b; }
DenseVector operator-(DenseVector a, const DenseVector& b) { return a -= b; }
DenseVector operator*(double s, DenseVector a) { return a *= s; }

void RunningMean::add(const DenseVector& x) {
  require_same_dim(mean_, x, "RunningMean::add");
  ++count_;
  total_weight_ += 1.0;
  const double k = static_cast<double>(count_);
  for (std::size_t i = 0; i < x.dim(); ++i) mean_[i] += (x[i] - mean_[i]) / k;
}

void RunningMean::add(const DenseVector& x, double weight) {
  require_same_dim(mean_, x, "RunningMean::add");
  COLEARN_REQUIRE(weight > 0.0, "RunningMean::add: weight must be positive");
  ++count_;
  total_weight_ += weight;
  const double frac = weight / total_weight_;
  for (std::size_t i = 0; i < x.dim(); ++i) mean_[i] += frac * (x[i] - mean_[i]);
}

}  // namespace colearn
