//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/numerics/tape.h"

#include <algorithm>
#include <utility>

namespace dualretro {

int ParameterSet::add(std::string name, Tensor value) {
  if (index_.count(name) != 0)
    throw std::invalid_argument("duplicate parameter name: " + name);

  const int id = size();
  index_.emplace(name, id);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return id;
}

int ParameterSet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? -1 : it->second;
}

int ParameterSet::at(std::string_view name) const {
  const int id = find(name);
  if (id < 0)
    throw std::out_of_range("unknown parameter: " + std::string(name));
  return id;
}

std::vector<Tensor> ParameterSet::zeros_like() const {
  std::vector<Tensor> out;
  out.reserve(values_.size());
  for (const Tensor &v: values_)
    out.emplace_back(v.shape(), 0.0);
  return out;
}

std::size_t ParameterSet::num_scalars() const {
  std::size_t n = 0;
  for (const Tensor &v: values_)
    n += v.size();
  return n;
}

bool ParameterSet::operator==(const ParameterSet &other) const {
  if (names_ != other.names_)
    return false;
  for (int i = 0; i < size(); ++i) {
    if (!values_[i].same_shape(other.values_[i])
        || values_[i].values() != other.values_[i].values())
      return false;
  }
  return true;
}

const Tensor &Var::value() const {
  return tape_->value(*this);
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  return push(std::move(node));
}

Var Tape::parameter(const ParameterSet &params, int id) {
  Node node;
  node.value = params.value(id);
  node.owner = &params;
  node.param_id = id;
  node.requires_grad = record_;
  return push(std::move(node));
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents,
                 BackwardFn fn) {
  Node node;
  node.value = std::move(value);
  if (record_) {
    node.requires_grad =
        std::any_of(parents.begin(), parents.end(),
                    [this](Var p) { return nodes_[p.id()].requires_grad; });
    if (node.requires_grad)
      node.backward = std::move(fn);
  }
  return push(std::move(node));
}

Var Tape::record(Tensor value, const std::vector<Var> &parents,
                 BackwardFn fn) {
  Node node;
  node.value = std::move(value);
  if (record_) {
    node.requires_grad =
        std::any_of(parents.begin(), parents.end(),
                    [this](Var p) { return nodes_[p.id()].requires_grad; });
    if (node.requires_grad)
      node.backward = std::move(fn);
  }
  return push(std::move(node));
}

Tensor &Tape::grad(int id) {
  Node &node = nodes_[id];
  if (node.grad.empty() && !node.value.empty())
    node.grad = Tensor(node.value.shape(), 0.0);
  return node.grad;
}

std::vector<Tensor> Tape::backward(Var loss, const ParameterSet &params) {
  if (loss.tape() != this)
    throw std::invalid_argument("loss was recorded on a different tape");
  if (loss.value().size() != 1)
    throw NonScalarLoss("backward() needs a scalar loss, got shape "
                        + loss.value().shape_string());

  std::vector<Tensor> grads = params.zeros_like();
  if (!nodes_[loss.id()].requires_grad)
    return grads;

  grad(loss.id())[0] = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node &node = nodes_[id];
    if (!node.requires_grad || node.grad.empty())
      continue;

    if (node.backward) {
      node.backward(*this, id);
    } else if (node.owner == &params) {
      Tensor &g = grads[node.param_id];
      for (std::size_t k = 0; k < g.size(); ++k)
        g[k] += node.grad[k];
    }
  }
  return grads;
}

}  // namespace dualretro
