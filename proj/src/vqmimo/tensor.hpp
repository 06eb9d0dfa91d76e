#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace vqmimo {

/// Dense row-major array of 64-bit reals. Rank 1 and rank 2 are what the
/// graph primitives use; complex quantities travel as (re, im) pairs.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> shape_, std::vector<double> data_);
  explicit Tensor(std::vector<std::size_t> shape_, double fill = 0.0);

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }
  static Tensor vector(std::initializer_list<double> values);
  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
  double item() const;

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
  std::string shape_string() const;
};

std::size_t shape_size(const std::vector<std::size_t>& shape);

// Plain kernels shared by the graph primitives and by non-differentiable
// code paths that must agree with them bit-for-bit.
namespace kernels {

/// C = A B for rank-2 A [m,k], B [k,n]. Each output is accumulated over k in
/// increasing order, independent of m and n.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
void add_inplace(Tensor& acc, const Tensor& x);

}  // namespace kernels
}  // namespace vqmimo
