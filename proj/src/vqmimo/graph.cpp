#include "vqmimo/graph.hpp"

#include <cmath>
#include <functional>

#include "vqmimo/error.hpp"

namespace vqmimo {

const Tensor& Var::value() const { return graph->value(*this); }

const Graph::Node& Graph::node(Var v) const {
  require(v.id < nodes_.size(), ErrorCode::kInvalidArgument,
          "graph: node id out of range");
  return nodes_[v.id];
}

Var Graph::constant(Tensor value) {
  require(value.all_finite(), ErrorCode::kNonFinite,
          "graph: non-finite constant");
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Graph::leaf(Tensor value, std::string name) {
  require(value.all_finite(), ErrorCode::kNonFinite,
          "graph: non-finite leaf '" + name + "'");
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  n.name = std::move(name);
  nodes_.push_back(std::move(n));
  if (!nodes_.back().name.empty()) {
    require(!names_.contains(nodes_.back().name), ErrorCode::kInvalidArgument,
            "graph: duplicate leaf name '" + nodes_.back().name + "'");
    names_[nodes_.back().name] = nodes_.size() - 1;
  }
  return {this, nodes_.size() - 1};
}

Var Graph::apply(std::shared_ptr<const Primitive> op, std::vector<Var> inputs) {
  Node n;
  n.op = std::move(op);
  for (const Var& v : inputs) {
    require(v.graph == this, ErrorCode::kInvalidArgument,
            "graph: input from a different graph in " + n.op->name());
    require(v.id < nodes_.size(), ErrorCode::kInvalidArgument,
            "graph: dangling input in " + n.op->name());
    n.inputs.push_back(v.id);
    n.requires_grad = n.requires_grad || nodes_[v.id].requires_grad;
  }
  if (n.op->stops_gradient()) n.requires_grad = false;
  nodes_.push_back(std::move(n));
  evaluate(nodes_.size() - 1);
  return {this, nodes_.size() - 1};
}

void Graph::evaluate(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.op) return;
  std::vector<const Tensor*> in;
  in.reserve(n.inputs.size());
  for (std::size_t i : n.inputs) in.push_back(&nodes_[i].value);
  n.value = n.op->forward(in);
  require(n.value.all_finite(), ErrorCode::kNonFinite,
          "forward: non-finite value produced by " + n.op->name());
}

void Graph::set_value(Var leaf, Tensor value) {
  Node& n = nodes_.at(leaf.id);
  require(!n.op, ErrorCode::kInvalidArgument,
          "set_value: node is not a leaf or constant");
  require(value.same_shape(n.value), ErrorCode::kShapeMismatch,
          "set_value: shape " + value.shape_string() + " vs " +
              n.value.shape_string());
  require(value.all_finite(), ErrorCode::kNonFinite,
          "set_value: non-finite value");
  n.value = std::move(value);
}

std::vector<bool> Graph::ancestors(std::size_t root) const {
  std::vector<bool> mark(nodes_.size(), false);
  mark[root] = true;
  for (std::size_t i = root + 1; i-- > 0;) {
    if (!mark[i]) continue;
    for (std::size_t j : nodes_[i].inputs) mark[j] = true;
  }
  return mark;
}

const Tensor& Graph::forward(Var root) {
  require(root.id < nodes_.size(), ErrorCode::kInvalidArgument,
          "forward: root out of range");
  const auto mark = ancestors(root.id);
  for (std::size_t i = 0; i <= root.id; ++i)
    if (mark[i]) evaluate(i);
  return nodes_[root.id].value;
}

void Graph::backward(Var root) {
  require(root.id < nodes_.size(), ErrorCode::kInvalidArgument,
          "backward: root out of range");
  Node& r = nodes_[root.id];
  require(r.value.size() == 1, ErrorCode::kShapeMismatch,
          "backward: root must be scalar, got shape " + r.value.shape_string());
  for (Node& n : nodes_) n.grad = Tensor();
  const auto mark = ancestors(root.id);
  r.grad = Tensor(r.value.shape, 1.0);
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!mark[i] || !n.op || !n.requires_grad || n.grad.size() == 0) continue;
    std::vector<const Tensor*> in;
    std::vector<Tensor*> grads;
    for (std::size_t j : n.inputs) {
      Node& src = nodes_[j];
      in.push_back(&src.value);
      if (src.requires_grad) {
        if (src.grad.size() == 0) src.grad = Tensor(src.value.shape, 0.0);
        grads.push_back(&src.grad);
      } else {
        grads.push_back(nullptr);
      }
    }
    n.op->backward(in, n.value, n.grad, grads);
  }
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.size() == 0) {
    // Lazily materialize a zero gradient of the right shape.
    auto& mutable_node = const_cast<Node&>(n);
    mutable_node.grad = Tensor(n.value.shape, 0.0);
  }
  return n.grad;
}

std::optional<Var> Graph::find(const std::string& name) {
  auto it = names_.find(name);
  if (it == names_.end()) return std::nullopt;
  return Var{this, it->second};
}

GradientMap Graph::named_gradients() const {
  GradientMap out;
  for (const auto& [name, id] : names_) out[name] = grad(Var{const_cast<Graph*>(this), id});
  return out;
}

namespace {

using Inputs = std::span<const Tensor* const>;
using Grads = std::span<Tensor* const>;
using ForwardFn = std::function<Tensor(Inputs)>;
using BackwardFn = std::function<void(Inputs, const Tensor&, const Tensor&, Grads)>;

class FnPrimitive final : public Primitive {
 public:
  FnPrimitive(std::string name, ForwardFn fwd, BackwardFn bwd, bool stops = false)
      : name_(std::move(name)), fwd_(std::move(fwd)), bwd_(std::move(bwd)), stops_(stops) {}
  std::string name() const override { return name_; }
  Tensor forward(Inputs in) const override { return fwd_(in); }
  void backward(Inputs in, const Tensor& out, const Tensor& g, Grads grads) const override {
    bwd_(in, out, g, grads);
  }
  bool stops_gradient() const override { return stops_; }

 private:
  std::string name_;
  ForwardFn fwd_;
  BackwardFn bwd_;
  bool stops_;
};

Var record(const std::string& name, ForwardFn fwd, BackwardFn bwd,
           std::vector<Var> inputs, bool stops = false) {
  require(!inputs.empty() && inputs[0].graph != nullptr,
          ErrorCode::kInvalidArgument, name + ": unbound input");
  Graph* g = inputs[0].graph;
  return g->apply(std::make_shared<FnPrimitive>(name, std::move(fwd), std::move(bwd), stops),
                  std::move(inputs));
}

void check_same(const std::string& op, const Tensor& a, const Tensor& b) {
  require(a.same_shape(b), ErrorCode::kShapeMismatch,
          op + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

void check_rank2(const std::string& op, const Tensor& a) {
  require(a.rank() == 2, ErrorCode::kShapeMismatch,
          op + ": expected rank-2 operand, got " + a.shape_string());
}

// Elementwise unary op with derivative expressed from (x, y).
Var unary(Var a, const std::string& name, double (*f)(double),
          double (*df)(double x, double y)) {
  return record(
      name,
      [f](Inputs in) {
        Tensor y = *in[0];
        for (double& v : y.data) v = f(v);
        return y;
      },
      [df](Inputs in, const Tensor& out, const Tensor& g, Grads grads) {
        if (!grads[0]) return;
        const Tensor& x = *in[0];
        for (std::size_t i = 0; i < x.size(); ++i)
          grads[0]->data[i] += g.data[i] * df(x.data[i], out.data[i]);
      },
      {a});
}

double softplus_fn(double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); }
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var add(Var a, Var b) {
  return record(
      "add",
      [](Inputs in) {
        check_same("add", *in[0], *in[1]);
        return kernels::add(*in[0], *in[1]);
      },
      [](Inputs, const Tensor&, const Tensor& g, Grads grads) {
        if (grads[0]) kernels::add_inplace(*grads[0], g);
        if (grads[1]) kernels::add_inplace(*grads[1], g);
      },
      {a, b});
}

Var sub(Var a, Var b) {
  return record(
      "sub",
      [](Inputs in) {
        check_same("sub", *in[0], *in[1]);
        return kernels::sub(*in[0], *in[1]);
      },
      [](Inputs, const Tensor&, const Tensor& g, Grads grads) {
        if (grads[0]) kernels::add_inplace(*grads[0], g);
        if (grads[1])
          for (std::size_t i = 0; i < g.size(); ++i) grads[1]->data[i] -= g.data[i];
      },
      {a, b});
}

Var mul(Var a, Var b) {
  return record(
      "mul",
      [](Inputs in) {
        check_same("mul", *in[0], *in[1]);
        Tensor y = *in[0];
        for (std::size_t i = 0; i < y.size(); ++i) y.data[i] *= in[1]->data[i];
        return y;
      },
      [](Inputs in, const Tensor&, const Tensor& g, Grads grads) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (grads[0]) grads[0]->data[i] += g.data[i] * in[1]->data[i];
          if (grads[1]) grads[1]->data[i] += g.data[i] * in[0]->data[i];
        }
      },
      {a, b});
}

Var scale(Var a, double factor) {
  return record(
      "scale",
      [factor](Inputs in) {
        Tensor y = *in[0];
        for (double& v : y.data) v *= factor;
        return y;
      },
      [factor](Inputs, const Tensor&, const Tensor& g, Grads grads) {
        if (!grads[0]) return;
        for (std::size_t i = 0; i < g.size(); ++i) grads[0]->data[i] += factor * g.data[i];
      },
      {a});
}

Var add_scalar(Var a, double offset) {
  return record(
      "add_scalar",
      [offset](Inputs in) {
        Tensor y = *in[0];
        for (double& v : y.data) v += offset;
        return y;
      },
      [](Inputs, const Tensor&, const Tensor& g, Grads grads) {
        if (grads[0]) kernels::add_inplace(*grads[0], g);
      },
      {a});
}

Var add_bias(Var x, Var bias) {
  return record(
      "add_bias",
      [](Inputs in) {
        const Tensor& x = *in[0];
        const Tensor& b = *in[1];
        check_rank2("add_bias", x);
        require(b.size() == x.cols(), ErrorCode::kShapeMismatch,
                "add_bias: bias " + b.shape_string() + " for input " + x.shape_string());
        Tensor y = x;
        for (std::size_t r = 0; r < x.rows(); ++r)
          for (std::size_t c = 0; c < x.cols(); ++c) y(r, c) += b.data[c];
        return y;
      },
      [](Inputs in, const Tensor&, const Tensor& g, Grads grads) {
        const std::size_t rows = in[0]->rows(), cols = in[0]->cols();
        if (grads[0]) kernels::add_inplace(*grads[0], g);
        if (grads[1])
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) grads[1]->data[c] += g(r, c);
      },
      {x, bias});
}

Var mul_rows(Var x, Var s) {
  return record(
      "mul_rows",
      [](Inputs in) {
        const Tensor& x = *in[0];
        const Tensor& s = *in[1];
        check_rank2("mul_rows", x);
        require(s.size() == x.rows(), ErrorCode::kShapeMismatch,
                "mul_rows: scale " + s.shape_string() + " for input " + x.shape_string());
        Tensor y = x;
        for (std::size_t r = 0; r < x.rows(); ++r)
          for (std::size_t c = 0; c < x.cols(); ++c) y(r, c) *= s.data[r];
        return y;
      },
      [](Inputs in, const Tensor&, const Tensor& g, Grads grads) {
        const Tensor& x = *in[0];
        const Tensor& s = *in[1];
        for (std::size_t r = 0; r < x.rows(); ++r)
          for (std::size_t c = 0; c < x.cols(); ++c) {
            if (grads[0]) (*grads[0])(r, c) += g(r, c) * s.data[r];
            if (grads[1]) grads[1]->data[r] += g(r, c) * x(r, c);
          }
      },
      {x, s});
}

Var matmul(Var a, Var b) {
  return record(
      "matmul",
      [](Inputs in) { return kernels::matmul(*in[0], *in[1]); },
      [](Inputs in, const Tensor&, const Tensor& g, Grads grads) {
        if (grads[0])
          kernels::add_inplace(*grads[0], kernels::matmul(g, kernels::transpose(*in[1])));
        if (grads[1])
          kernels::add_inplace(*grads[1], kernels::matmul(kernels::transpose(*in[0]), g));
      },
      {a, b});
}

Var transpose(Var a) {
  return record(
      "transpose", [](Inputs in) { return kernels::transpose(*in[0]); },
      [](Inputs, const Tensor&, const Tensor& g, Grads grads) {
        if (grads[0]) kernels::add_inplace(*grads[0], kernels::transpose(g));
      },
      {a});
}

Var softplus(Var a) {
  return unary(a, "softplus", softplus_fn,
               [](double x, double) { return sigmoid(x); });
}

Var exp(Var a) {
  return unary(a, "exp", [](double x) { return std::exp(x); },
               [](double, double y) { return y; });
}

Var log(Var a) {
  return unary(a, "log", [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Var square(Var a) {
  return unary(a, "square", [](double x) { return x * x; },
               [](double x, double) { return 2.0 * x; });
}

Var rsqrt(Var a) {
  return unary(a, "rsqrt", [](double x) { return 1.0 / std::sqrt(x); },
               [](double x, double y) { return -0.5 * y / x; });
}

Var sum(Var a) {
  return record(
      "sum",
      [](Inputs in) {
        double s = 0.0;
        for (double v : in[0]->data) s += v;
        return Tensor::scalar(s);
      },
      [](Inputs in, const Tensor&, const Tensor& g, Grads grads) {
        if (!grads[0]) return;
        for (std::size_t i = 0; i < in[0]->size(); ++i) grads[0]->data[i] += g.data[0];
      },
      {a});
}

Var mean(Var a) {
  return record(
      "mean",
      [](Inputs in) {
        require(in[0]->size() > 0, ErrorCode::kShapeMismatch, "mean: empty tensor");
        double s = 0.0;
        for (double v : in[0]->data) s += v;
        return Tensor::scalar(s / static_cast<double>(in[0]->size()));
      },
      [](Inputs in, const Tensor&, const Tensor& g, Grads grads) {
        if (!grads[0]) return;
        const double w = g.data[0] / static_cast<double>(in[0]->size());
        for (double& v : grads[0]->data) v += w;
      },
      {a});
}

Var norm(Var a) {
  return record(
      "norm",
      [](Inputs in) {
        double s = 0.0;
        for (double v : in[0]->data) s += v * v;
        return Tensor::scalar(std::sqrt(s));
      },
      [](Inputs in, const Tensor& out, const Tensor& g, Grads grads) {
        if (!grads[0] || out.data[0] == 0.0) return;
        const double w = g.data[0] / out.data[0];
        for (std::size_t i = 0; i < in[0]->size(); ++i)
          grads[0]->data[i] += w * in[0]->data[i];
      },
      {a});
}

Var sum_cols(Var a) {
  return record(
      "sum_cols",
      [](Inputs in) {
        const Tensor& x = *in[0];
        check_rank2("sum_cols", x);
        Tensor y = Tensor::matrix(x.rows(), 1);
        for (std::size_t r = 0; r < x.rows(); ++r)
          for (std::size_t c = 0; c < x.cols(); ++c) y.data[r] += x(r, c);
        return y;
      },
      [](Inputs in, const Tensor&, const Tensor& g, Grads grads) {
        if (!grads[0]) return;
        for (std::size_t r = 0; r < in[0]->rows(); ++r)
          for (std::size_t c = 0; c < in[0]->cols(); ++c) (*grads[0])(r, c) += g.data[r];
      },
      {a});
}

Var group_sum_rows(Var a, std::size_t group) {
  return record(
      "group_sum_rows",
      [group](Inputs in) {
        const Tensor& x = *in[0];
        check_rank2("group_sum_rows", x);
        require(group > 0 && x.rows() % group == 0, ErrorCode::kShapeMismatch,
                "group_sum_rows: " + std::to_string(x.rows()) +
                    " rows not divisible by group " + std::to_string(group));
        Tensor y = Tensor::matrix(x.rows() / group, x.cols());
        for (std::size_t r = 0; r < x.rows(); ++r)
          for (std::size_t c = 0; c < x.cols(); ++c) y(r / group, c) += x(r, c);
        return y;
      },
      [group](Inputs in, const Tensor&, const Tensor& g, Grads grads) {
        if (!grads[0]) return;
        for (std::size_t r = 0; r < in[0]->rows(); ++r)
          for (std::size_t c = 0; c < in[0]->cols(); ++c) (*grads[0])(r, c) += g(r / group, c);
      },
      {a});
}

Var group_expand_rows(Var a, std::size_t group) {
  return record(
      "group_expand_rows",
      [group](Inputs in) {
        const Tensor& x = *in[0];
        check_rank2("group_expand_rows", x);
        require(group > 0, ErrorCode::kShapeMismatch, "group_expand_rows: zero group");
        Tensor y = Tensor::matrix(x.rows() * group, x.cols());
        for (std::size_t r = 0; r < y.rows(); ++r)
          for (std::size_t c = 0; c < x.cols(); ++c) y(r, c) = x(r / group, c);
        return y;
      },
      [group](Inputs in, const Tensor&, const Tensor& g, Grads grads) {
        if (!grads[0]) return;
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < in[0]->cols(); ++c) (*grads[0])(r / group, c) += g(r, c);
      },
      {a});
}

Var concat_cols(const std::vector<Var>& parts) {
  return record(
      "concat_cols",
      [](Inputs in) {
        std::size_t rows = in[0]->rows(), cols = 0;
        for (const Tensor* t : in) {
          check_rank2("concat_cols", *t);
          require(t->rows() == rows, ErrorCode::kShapeMismatch,
                  "concat_cols: row count mismatch " + t->shape_string());
          cols += t->cols();
        }
        Tensor y = Tensor::matrix(rows, cols);
        std::size_t off = 0;
        for (const Tensor* t : in) {
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < t->cols(); ++c) y(r, off + c) = (*t)(r, c);
          off += t->cols();
        }
        return y;
      },
      [](Inputs in, const Tensor&, const Tensor& g, Grads grads) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < in.size(); ++k) {
          const Tensor& t = *in[k];
          if (grads[k])
            for (std::size_t r = 0; r < t.rows(); ++r)
              for (std::size_t c = 0; c < t.cols(); ++c) (*grads[k])(r, c) += g(r, off + c);
          off += t.cols();
        }
      },
      parts);
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  return record(
      "slice_cols",
      [begin, end](Inputs in) {
        const Tensor& x = *in[0];
        check_rank2("slice_cols", x);
        require(begin <= end && end <= x.cols(), ErrorCode::kShapeMismatch,
                "slice_cols: range out of bounds for " + x.shape_string());
        Tensor y = Tensor::matrix(x.rows(), end - begin);
        for (std::size_t r = 0; r < x.rows(); ++r)
          for (std::size_t c = begin; c < end; ++c) y(r, c - begin) = x(r, c);
        return y;
      },
      [begin, end](Inputs in, const Tensor&, const Tensor& g, Grads grads) {
        if (!grads[0]) return;
        for (std::size_t r = 0; r < in[0]->rows(); ++r)
          for (std::size_t c = begin; c < end; ++c) (*grads[0])(r, c) += g(r, c - begin);
      },
      {a});
}

Var stop_gradient(Var a) {
  return record(
      "stop_gradient", [](Inputs in) { return *in[0]; },
      [](Inputs, const Tensor&, const Tensor&, Grads) {}, {a}, /*stops=*/true);
}

CVar cmatmul(CVar a, CVar b) {
  return {matmul(a.re, b.re) - matmul(a.im, b.im),
          matmul(a.re, b.im) + matmul(a.im, b.re)};
}

CVar cadd(CVar a, CVar b) { return {a.re + b.re, a.im + b.im}; }

CVar ctranspose(CVar a) { return {transpose(a.re), transpose(a.im)}; }

}  // namespace vqmimo
