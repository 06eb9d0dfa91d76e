#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "vqmimo/graph.hpp"
#include "vqmimo/linalg.hpp"
#include "vqmimo/rng.hpp"
#include "vqmimo/tensor.hpp"

namespace testing_support {

using vqmimo::Graph;
using vqmimo::Tensor;
using vqmimo::Var;

inline Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double lo = -2.0,
                            double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape), 0.0);
  for (double& v : t.data) v = u(rng);
  return t;
}

inline vqmimo::CVector random_cvector(std::size_t n, std::mt19937_64& rng, double var = 1.0) {
  vqmimo::CVector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = vqmimo::complex_normal(rng, var);
  return v;
}

inline vqmimo::CMatrix random_cmatrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                                      double var = 1.0) {
  vqmimo::CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = vqmimo::complex_normal(rng, var);
  return m;
}

/// Norm-wise relative error ||a - b|| / max(||a||, ||b||, floor).
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b,
                             double floor = 1e-8) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(d) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

/// Central differences of a scalar root w.r.t. each entry of a leaf.
inline std::vector<double> numeric_gradient(Graph& g, Var root, Var leaf, double step = 1e-5) {
  const Tensor base = g.value(leaf);
  std::vector<double> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    Tensor plus = base, minus = base;
    plus.data[i] += step;
    minus.data[i] -= step;
    g.set_value(leaf, plus);
    const double fp = g.forward(root).item();
    g.set_value(leaf, minus);
    const double fm = g.forward(root).item();
    out[i] = (fp - fm) / (2.0 * step);
  }
  g.set_value(leaf, base);
  g.forward(root);
  return out;
}

/// Largest relative error between backward() and central differences over
/// the given leaves.
inline double gradient_check(Graph& g, Var root, const std::vector<Var>& leaves,
                             double step = 1e-5) {
  g.forward(root);
  g.backward(root);
  std::vector<Tensor> analytic;
  for (Var l : leaves) analytic.push_back(g.grad(l));
  double worst = 0.0;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    const auto numeric = numeric_gradient(g, root, leaves[k], step);
    worst = std::max(worst, relative_error(analytic[k].data, numeric));
  }
  return worst;
}

/// sum(out .* W) with a fixed random W, turning any node into a scalar with
/// a generic upstream gradient.
inline Var random_projection(Var out, std::mt19937_64& rng) {
  Graph& g = *out.graph;
  return vqmimo::sum(vqmimo::mul(out, g.constant(random_tensor(out.value().shape, rng))));
}

}  // namespace testing_support
