#include "vqmimo/tensor.hpp"

#include <cmath>
#include <numeric>

#include "vqmimo/error.hpp"

namespace vqmimo {

const char* error_category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kNumerical: return "numerical";
    case ErrorCode::kSingular: return "singular";
    case ErrorCode::kDegenerateOutput: return "degenerate-output";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kFingerprintMismatch: return "fingerprint-mismatch";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kUnknownFlag: return "unknown-flag";
    case ErrorCode::kNotImplemented: return "not-implemented";
    case ErrorCode::kMissingCheckpoint: return "missing-checkpoint";
    case ErrorCode::kInternal: return "internal";
  }
  return "internal";
}

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
  require(data.size() == shape_size(shape), ErrorCode::kShapeMismatch,
          "tensor data length " + std::to_string(data.size()) +
              " does not match shape " + shape_string());
}

Tensor::Tensor(std::vector<std::size_t> shape_, double fill)
    : shape(std::move(shape_)), data(shape_size(shape), fill) {}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

std::size_t Tensor::rows() const {
  return rank() == 2 ? shape[0] : 1;
}

std::size_t Tensor::cols() const {
  return rank() == 2 ? shape[1] : (rank() == 1 ? shape[0] : 1);
}

double Tensor::item() const {
  require(size() == 1, ErrorCode::kShapeMismatch,
          "item() on non-scalar tensor of shape " + shape_string());
  return data[0];
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace kernels {

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.shape[1] == b.shape[0],
          ErrorCode::kShapeMismatch,
          "matmul: incompatible shapes " + a.shape_string() + " x " +
              b.shape_string());
  const std::size_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
  Tensor c = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c.data.data() + i * n;
    const double* arow = a.data.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b.data.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Tensor transpose(const Tensor& a) {
  require(a.rank() == 2, ErrorCode::kShapeMismatch,
          "transpose: expected rank 2, got " + a.shape_string());
  const std::size_t m = a.shape[0], n = a.shape[1];
  Tensor t = Tensor::matrix(n, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) t.data[j * m + i] = a.data[i * n + j];
  return t;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require(a.same_shape(b), ErrorCode::kShapeMismatch,
          "add: " + a.shape_string() + " vs " + b.shape_string());
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data[i] += b.data[i];
  return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require(a.same_shape(b), ErrorCode::kShapeMismatch,
          "sub: " + a.shape_string() + " vs " + b.shape_string());
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data[i] -= b.data[i];
  return c;
}

void add_inplace(Tensor& acc, const Tensor& x) {
  require(acc.size() == x.size(), ErrorCode::kShapeMismatch,
          "accumulate: " + acc.shape_string() + " vs " + x.shape_string());
  for (std::size_t i = 0; i < acc.size(); ++i) acc.data[i] += x.data[i];
}

}  // namespace kernels
}  // namespace vqmimo
