#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "negev/errors.hpp"

namespace negev {

class Tensor;

namespace detail {

/// Storage plus reverse-mode bookkeeping. Parents and the backward closure
/// are only populated when some ancestor requires a gradient, so forward
/// passes through frozen networks build no graph at all.
struct TensorNode {
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until backward() touches this node
  bool requires_grad = false;
  bool needs_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void()> backward;

  std::size_t size() const { return values.size(); }
  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
};

}  // namespace detail

std::size_t shape_size(const std::vector<int>& shape);

/// Dense n-dimensional array of 64-bit reals with an optional gradient
/// buffer. Copying a Tensor copies the handle; the buffer is shared.
class Tensor {
 public:
  Tensor() : node_(std::make_shared<detail::TensorNode>()) {}

  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, double value);
  static Tensor from_values(std::vector<int> shape, std::vector<double> values);
  static Tensor scalar(double value) { return from_values({1}, {value}); }

  const std::vector<int>& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int dim(int axis) const;
  std::size_t size() const { return node_->values.size(); }

  std::span<const double> values() const { return node_->values; }
  std::span<double> values_mut() { return node_->values; }
  double operator[](std::size_t i) const { return node_->values[i]; }

  /// Value of a single-element tensor.
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool on);

  bool has_grad() const { return node_->grad.size() == node_->values.size() && !node_->values.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> grad_mut() { return node_->grad; }
  void zero_grad() { node_->grad.clear(); }

  /// Deep copy of values (no graph, no grad).
  Tensor clone_values() const { return from_values(node_->shape, node_->values); }

  detail::TensorNode* node() const { return node_.get(); }
  const std::shared_ptr<detail::TensorNode>& shared_node() const { return node_; }

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

/// Runs reverse-mode accumulation from a scalar root. Gradients land in the
/// `grad` buffers of every tensor that requires one; everything else is
/// left untouched.
void backward(const Tensor& root);

bool all_finite(std::span<const double> xs);

namespace detail {

/// Wires `out` into the graph. The closure is stored only when a gradient
/// can actually flow; `fn` receives no arguments and must capture what it
/// needs (shared_ptrs to parents, raw pointer to the out node).
void attach_backward(Tensor& out, std::initializer_list<Tensor> inputs,
                     std::function<void()> fn);

}  // namespace detail

}  // namespace negev
