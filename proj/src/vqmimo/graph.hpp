#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vqmimo/tensor.hpp"

namespace vqmimo {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
};

/// One differentiable operation. Instances are immutable and may be shared by
/// many nodes.
class Primitive {
 public:
  virtual ~Primitive() = default;
  virtual std::string name() const = 0;
  virtual Tensor forward(std::span<const Tensor* const> in) const = 0;
  /// Adds d(root)/d(input i) into grads[i]. grads[i] is null when input i
  /// does not take a gradient.
  virtual void backward(std::span<const Tensor* const> in, const Tensor& out,
                        const Tensor& grad_out,
                        std::span<Tensor* const> grads) const = 0;
  virtual bool stops_gradient() const { return false; }
};

using GradientMap = std::map<std::string, Tensor>;

/// Reverse-mode tape. Nodes are evaluated eagerly when recorded; forward()
/// re-evaluates the ancestors of a root after leaves were reassigned.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Differentiable leaf. A non-empty name makes its gradient visible in
  /// named_gradients().
  Var leaf(Tensor value, std::string name = {});
  Var apply(std::shared_ptr<const Primitive> op, std::vector<Var> inputs);

  void set_value(Var leaf, Tensor value);
  const Tensor& forward(Var root);
  void backward(Var root);

  const Tensor& value(Var v) const { return node(v).value; }
  /// Gradient from the last backward(); zeros when the node was not reached.
  const Tensor& grad(Var v) const;
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  std::optional<Var> find(const std::string& name);
  GradientMap named_gradients() const;
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::shared_ptr<const Primitive> op;  // null for leaves and constants
    std::vector<std::size_t> inputs;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::string name;
  };

  const Node& node(Var v) const;
  void evaluate(std::size_t id);
  std::vector<bool> ancestors(std::size_t root) const;

  std::vector<Node> nodes_;
  std::map<std::string, std::size_t> names_;
};

// Built-in primitives. Shape rules: elementwise ops need equal shapes; the
// row/column ops need rank-2 operands.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
/// X [B,d] + b [1,d] broadcast over rows.
Var add_bias(Var x, Var bias);
/// X [B,d] scaled row-wise by s [B,1].
Var mul_rows(Var x, Var s);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var softplus(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var rsqrt(Var a);
Var sum(Var a);
Var mean(Var a);
/// Euclidean norm of all entries.
Var norm(Var a);
/// [B,d] -> [B,1].
Var sum_cols(Var a);
/// [K*G,d] -> [K,d], summing consecutive groups of G rows.
Var group_sum_rows(Var a, std::size_t group);
/// [K,d] -> [K*G,d], repeating each row G times.
Var group_expand_rows(Var a, std::size_t group);
Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
/// Identity forward, zero gradient.
Var stop_gradient(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

/// Complex quantity carried as paired real nodes.
struct CVar {
  Var re;
  Var im;
};

/// Complex A B expanded into four real matmuls.
CVar cmatmul(CVar a, CVar b);
CVar cadd(CVar a, CVar b);
CVar ctranspose(CVar a);

}  // namespace vqmimo
