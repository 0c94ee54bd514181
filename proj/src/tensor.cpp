#include "negev/tensor.hpp"

#include <cmath>
#include <unordered_set>

namespace negev {

std::size_t shape_size(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int e : shape) {
    if (e <= 0) throw DimensionError("tensor extents must be positive");
    n *= static_cast<std::size_t>(e);
  }
  return n;
}

Tensor Tensor::zeros(std::vector<int> shape) {
  Tensor t;
  t.node_->values.assign(shape_size(shape), 0.0);
  t.node_->shape = std::move(shape);
  return t;
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  Tensor t;
  t.node_->values.assign(shape_size(shape), value);
  t.node_->shape = std::move(shape);
  return t;
}

Tensor Tensor::from_values(std::vector<int> shape, std::vector<double> values) {
  if (shape_size(shape) != values.size())
    throw DimensionError("value count does not match tensor shape");
  Tensor t;
  t.node_->shape = std::move(shape);
  t.node_->values = std::move(values);
  return t;
}

int Tensor::dim(int axis) const {
  if (axis < 0 || axis >= rank()) throw DimensionError("axis out of range");
  return node_->shape[static_cast<std::size_t>(axis)];
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() requires a single-element tensor");
  return node_->values[0];
}

Tensor& Tensor::set_requires_grad(bool on) {
  node_->requires_grad = on;
  node_->needs_grad = on;
  return *this;
}

bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

namespace detail {

void attach_backward(Tensor& out, std::initializer_list<Tensor> inputs,
                     std::function<void()> fn) {
  bool needs = false;
  for (const Tensor& in : inputs) needs = needs || in.node()->needs_grad;
  if (!needs) return;
  TensorNode* n = out.node();
  n->needs_grad = true;
  n->parents.reserve(inputs.size());
  for (const Tensor& in : inputs) n->parents.push_back(in.shared_node());
  n->backward = std::move(fn);
}

}  // namespace detail

void backward(const Tensor& root) {
  if (root.size() != 1) throw DimensionError("backward() requires a scalar root");
  detail::TensorNode* root_node = root.node();
  if (!root_node->needs_grad) return;

  // Reverse post-order = consumers before producers.
  std::vector<detail::TensorNode*> order;
  std::unordered_set<detail::TensorNode*> seen;
  struct Frame {
    detail::TensorNode* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack{{root_node, 0}};
  seen.insert(root_node);
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      detail::TensorNode* p = f.node->parents[f.next_parent++].get();
      if (p->needs_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  root_node->ensure_grad();
  root_node->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::TensorNode* n = *it;
    if (n->backward && n->grad.size() == n->values.size()) n->backward();
  }
}

}  // namespace negev
