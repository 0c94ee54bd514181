#include "negev/param_set.hpp"

namespace negev {

Tensor& ParamSet::add(std::string name, Tensor tensor, bool trainable) {
  if (by_name_.contains(name))
    throw StateError("duplicate parameter name: " + name);
  tensor.set_requires_grad(trainable);
  by_name_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(tensor), trainable});
  return entries_.back().tensor;
}

std::size_t ParamSet::index_of(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end())
    throw StateError("unknown parameter: " + std::string(name));
  return it->second;
}

bool ParamSet::contains(std::string_view name) const {
  return by_name_.contains(std::string(name));
}

Tensor& ParamSet::at(std::string_view name) {
  return entries_[index_of(name)].tensor;
}

const Tensor& ParamSet::at(std::string_view name) const {
  return entries_[index_of(name)].tensor;
}

bool ParamSet::trainable(std::string_view name) const {
  return entries_[index_of(name)].trainable;
}

void ParamSet::set_trainable(std::string_view name, bool on) {
  Entry& e = entries_[index_of(name)];
  e.trainable = on;
  e.tensor.set_requires_grad(on);
}

void ParamSet::freeze_all() {
  for (Entry& e : entries_) {
    e.trainable = false;
    e.tensor.set_requires_grad(false);
    e.tensor.zero_grad();
  }
}

bool ParamSet::all_frozen() const {
  for (const Entry& e : entries_)
    if (e.trainable) return false;
  return true;
}

std::size_t ParamSet::total_values() const {
  std::size_t n = 0;
  for (const Entry& e : entries_) n += e.tensor.size();
  return n;
}

void ParamSet::zero_grads() {
  for (Entry& e : entries_) e.tensor.zero_grad();
}

void sgd_step(ParamSet& params, double lr, double weight_decay) {
  for (ParamSet::Entry& e : params.entries()) {
    if (!e.trainable) continue;
    if (!e.tensor.has_grad())
      throw StateError("sgd_step: trainable parameter '" + e.name +
                       "' has no gradient");
    auto w = e.tensor.values_mut();
    auto g = e.tensor.grad();
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] -= lr * (g[i] + weight_decay * w[i]);
  }
  for (ParamSet::Entry& e : params.entries())
    if (e.trainable) e.tensor.zero_grad();
}

}  // namespace negev
