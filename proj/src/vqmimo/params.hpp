#pragma once

#include <map>
#include <string>
#include <vector>

#include "vqmimo/graph.hpp"
#include "vqmimo/tensor.hpp"

namespace vqmimo {

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Named trainable tensors with per-parameter Adam moments. Iteration order
/// is lexicographic by name, which keeps serialization deterministic.
class ParameterStore {
 public:
  void add(const std::string& name, Tensor value);
  /// Replaces the value of an existing parameter; shape must match.
  void assign(const std::string& name, Tensor value);
  bool contains(const std::string& name) const { return entries_.contains(name); }
  const Tensor& value(const std::string& name) const;
  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }
  long step_count(const std::string& name) const;

  /// Named differentiable leaf for `name`, reused if already bound in `g`.
  /// Frozen parameters enter as constants and receive no gradient.
  Var bind(Graph& g, const std::string& name, bool trainable = true) const;

  void adam_step(const GradientMap& grads, double lr,
                 const AdamSettings& settings = {});
  void reset_optimizer_state();

 private:
  struct Entry {
    Tensor value;
    Tensor m;
    Tensor v;
    long step = 0;
  };
  const Entry& entry(const std::string& name) const;

  std::map<std::string, Entry> entries_;
};

double global_norm(const GradientMap& grads);
/// Rescales all gradients jointly so their global norm is at most max_norm.
void clip_global_norm(GradientMap& grads, double max_norm);

}  // namespace vqmimo
