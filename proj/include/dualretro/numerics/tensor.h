//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_NUMERICS_TENSOR_H_
#define DUALRETRO_NUMERICS_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace dualretro {

class ShapeMismatch: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Dense row-major tensor of doubles with at most three axes. Most of the
// library works on matrices; vectors are represented as 1 x n or n x 1.
class Tensor {
public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape, double fill = 0.0);

  Tensor(std::vector<int> shape, std::vector<double> values);

  static Tensor matrix(int rows, int cols, double fill = 0.0) {
    return Tensor({ rows, cols }, fill);
  }

  static Tensor matrix(int rows, int cols,
                       std::initializer_list<double> values) {
    return Tensor({ rows, cols }, std::vector<double>(values));
  }

  static Tensor scalar(double value) { return Tensor({ 1, 1 }, value); }

  const std::vector<int> &shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const { return shape_.at(axis); }

  // Matrix views; a 1-axis tensor is a single row.
  int rows() const { return ndim() >= 2 ? shape_[0] : 1; }
  int cols() const {
    return ndim() >= 2 ? shape_[1] : (ndim() == 1 ? shape_[0] : 0);
  }

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  std::vector<double> &values() { return data_; }
  const std::vector<double> &values() const { return data_; }

  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double &operator()(int i, int j) {
    return data_[static_cast<std::size_t>(i) * cols() + j];
  }
  double operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * cols() + j];
  }

  double &operator()(int i, int j, int k) {
    return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2]
                 + k];
  }
  double operator()(int i, int j, int k) const {
    return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2]
                 + k];
  }

  double item() const;

  bool same_shape(const Tensor &other) const { return shape_ == other.shape_; }

  void fill(double value);

  // True when every value is finite.
  bool all_finite() const;

  std::string shape_string() const;

private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

std::string shape_string(const std::vector<int> &shape);

}  // namespace dualretro

#endif  // DUALRETRO_NUMERICS_TENSOR_H_
