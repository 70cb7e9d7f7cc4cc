#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace codemap {

// Square row-major matrix of doubles.
class DenseMatrix {
public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), values_(n * n, fill) {}

  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }

  double& operator()(std::size_t i, std::size_t j) {
    assert(i < n_ && j < n_);
    return values_[i * n_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < n_ && j < n_);
    return values_[i * n_ + j];
  }

  std::span<double> row(std::size_t i) { return {values_.data() + i * n_, n_}; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_, n_}; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

}  // namespace codemap
