#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "negev/tensor.hpp"

namespace negev {

/// Ordered, named collection of parameter tensors. Each entry carries a
/// trainable flag; frozen entries never receive gradient and are never
/// touched by the optimizer. Iteration order is insertion order, which also
/// fixes the checkpoint byte layout.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
    bool trainable;
  };

  Tensor& add(std::string name, Tensor tensor, bool trainable = true);

  bool contains(std::string_view name) const;
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;
  bool trainable(std::string_view name) const;

  void set_trainable(std::string_view name, bool on);
  void freeze_all();
  bool all_frozen() const;

  std::size_t size() const { return entries_.size(); }
  std::size_t total_values() const;

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  void zero_grads();

 private:
  std::size_t index_of(std::string_view name) const;

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

/// One vanilla SGD step with L2 weight decay coupled into the gradient:
/// w <- w - lr * (grad + weight_decay * w). Trainable entries must have a
/// populated gradient; frozen entries are left bit-identical. Gradients are
/// cleared afterwards.
void sgd_step(ParamSet& params, double lr, double weight_decay);

}  // namespace negev
