//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_NUMERICS_TAPE_H_
#define DUALRETRO_NUMERICS_TAPE_H_

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dualretro/numerics/tensor.h"

namespace dualretro {

class NonScalarLoss: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Named, ordered collection of trainable tensors. Ids are dense and stable
// for the lifetime of the set; insertion order is the checkpoint order.
class ParameterSet {
public:
  int add(std::string name, Tensor value);

  // -1 when absent.
  int find(std::string_view name) const;

  int at(std::string_view name) const;

  int size() const { return static_cast<int>(values_.size()); }
  bool empty() const { return values_.empty(); }

  const std::string &name(int id) const { return names_[id]; }
  Tensor &value(int id) { return values_[id]; }
  const Tensor &value(int id) const { return values_[id]; }

  std::vector<Tensor> zeros_like() const;

  std::size_t num_scalars() const;

  bool operator==(const ParameterSet &other) const;

private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, int> index_;
};

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
public:
  Var() = default;

  Tape *tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor &value() const;

  int rows() const { return value().rows(); }
  int cols() const { return value().cols(); }

private:
  friend class Tape;

  Var(Tape *tape, int id): tape_(tape), id_(id) { }

  Tape *tape_ = nullptr;
  int id_ = -1;
};

// Records a computation as a sequence of nodes in creation order, which is
// already a topological order. backward() walks it once in reverse.
//
// A tape with recording disabled evaluates the same operations without
// storing adjoints; it is used for inference.
class Tape {
public:
  using BackwardFn = std::function<void(Tape &, int)>;

  explicit Tape(bool record = true): record_(record) { }

  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  bool recording() const { return record_; }

  Var constant(Tensor value);

  // Leaf bound to params.value(id); its gradient is reported by backward().
  Var parameter(const ParameterSet &params, int id);

  Var parameter(const ParameterSet &params, std::string_view name) {
    return parameter(params, params.at(name));
  }

  const Tensor &value(Var v) const { return nodes_[v.id()].value; }
  const Tensor &value(int id) const { return nodes_[id].value; }

  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

  // Used by operations. `parents` decides whether the result requires a
  // gradient; `fn` is dropped when it does not.
  Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn fn);
  Var record(Tensor value, const std::vector<Var> &parents, BackwardFn fn);

  // Gradient buffer of a node, allocated as zeros on first access.
  Tensor &grad(int id);
  bool has_grad(int id) const { return !nodes_[id].grad.empty(); }

  // Runs reverse accumulation from a 1x1 loss and returns one gradient per
  // parameter of `params` (zeros for parameters that were not used).
  std::vector<Tensor> backward(Var loss, const ParameterSet &params);

  std::size_t num_nodes() const { return nodes_.size(); }

private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    const ParameterSet *owner = nullptr;
    int param_id = -1;
    bool requires_grad = false;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  bool record_;
};

}  // namespace dualretro

#endif  // DUALRETRO_NUMERICS_TAPE_H_
