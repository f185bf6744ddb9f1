//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/numerics/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace dualretro {
namespace {
std::size_t shape_product(const std::vector<int> &shape) {
  if (shape.size() > 3)
    throw ShapeMismatch("tensors have at most three axes, got "
                        + shape_string(shape));

  std::size_t n = 1;
  for (int d: shape) {
    if (d < 0)
      throw ShapeMismatch("negative dimension in " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}
}  // namespace

std::string shape_string(const std::vector<int> &shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0)
      s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

Tensor::Tensor(std::vector<int> shape, double fill)
    : shape_(std::move(shape)), data_(shape_product(shape_), fill) { }

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != shape_product(shape_))
    throw ShapeMismatch("value count " + std::to_string(data_.size())
                        + " does not match shape " + dualretro::shape_string(shape_));
}

double Tensor::item() const {
  if (data_.size() != 1)
    throw ShapeMismatch("item() on tensor of shape " + shape_string());
  return data_[0];
}

void Tensor::fill(double value) {
  std::fill(data_.begin(), data_.end(), value);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  return dualretro::shape_string(shape_);
}

}  // namespace dualretro
