#include "vqmimo/params.hpp"

#include <cmath>

#include "vqmimo/error.hpp"

namespace vqmimo {

void ParameterStore::add(const std::string& name, Tensor value) {
  require(!entries_.contains(name), ErrorCode::kInvalidArgument,
          "parameter '" + name + "' already registered");
  Entry e;
  e.m = Tensor(value.shape, 0.0);
  e.v = Tensor(value.shape, 0.0);
  e.value = std::move(value);
  entries_.emplace(name, std::move(e));
}

void ParameterStore::assign(const std::string& name, Tensor value) {
  auto it = entries_.find(name);
  require(it != entries_.end(), ErrorCode::kInvalidArgument,
          "unknown parameter '" + name + "'");
  require(it->second.value.same_shape(value), ErrorCode::kShapeMismatch,
          "parameter '" + name + "': shape " + value.shape_string() + " vs " +
              it->second.value.shape_string());
  it->second.value = std::move(value);
}

const ParameterStore::Entry& ParameterStore::entry(const std::string& name) const {
  auto it = entries_.find(name);
  require(it != entries_.end(), ErrorCode::kInvalidArgument,
          "unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParameterStore::value(const std::string& name) const {
  return entry(name).value;
}

long ParameterStore::step_count(const std::string& name) const {
  return entry(name).step;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& kv : entries_) out.push_back(kv.first);
  return out;
}

Var ParameterStore::bind(Graph& g, const std::string& name, bool trainable) const {
  if (auto existing = g.find(name)) return *existing;
  if (!trainable) return g.constant(value(name));
  return g.leaf(value(name), name);
}

void ParameterStore::adam_step(const GradientMap& grads, double lr,
                               const AdamSettings& s) {
  require(lr >= 0.0, ErrorCode::kInvalidArgument, "adam: negative learning rate");
  for (const auto& [name, g] : grads) {
    auto it = entries_.find(name);
    require(it != entries_.end(), ErrorCode::kInvalidArgument,
            "adam: gradient for unknown parameter '" + name + "'");
    Entry& e = it->second;
    require(g.same_shape(e.value), ErrorCode::kShapeMismatch,
            "adam: gradient shape " + g.shape_string() + " for parameter '" +
                name + "' of shape " + e.value.shape_string());
    ++e.step;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(e.step));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(e.step));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double gi = g.data[i];
      e.m.data[i] = s.beta1 * e.m.data[i] + (1.0 - s.beta1) * gi;
      e.v.data[i] = s.beta2 * e.v.data[i] + (1.0 - s.beta2) * gi * gi;
      const double mhat = e.m.data[i] / c1;
      const double vhat = e.v.data[i] / c2;
      e.value.data[i] -= lr * mhat / (std::sqrt(vhat) + s.epsilon);
    }
  }
}

void ParameterStore::reset_optimizer_state() {
  for (auto& kv : entries_) {
    kv.second.m = Tensor(kv.second.value.shape, 0.0);
    kv.second.v = Tensor(kv.second.value.shape, 0.0);
    kv.second.step = 0;
  }
}

double global_norm(const GradientMap& grads) {
  double s = 0.0;
  for (const auto& kv : grads)
    for (double v : kv.second.data) s += v * v;
  return std::sqrt(s);
}

void clip_global_norm(GradientMap& grads, double max_norm) {
  const double n = global_norm(grads);
  if (n <= max_norm || n == 0.0) return;
  const double f = max_norm / n;
  for (auto& kv : grads)
    for (double& v : kv.second.data) v *= f;
}

}  // namespace vqmimo
