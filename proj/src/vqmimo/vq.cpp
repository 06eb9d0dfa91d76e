#include "vqmimo/vq.hpp"

#include <bit>

#include "vqmimo/error.hpp"

namespace vqmimo {

namespace {

int log2_exact(int c) {
  require(c >= 1 && std::has_single_bit(static_cast<unsigned>(c)), ErrorCode::kInvalidArgument,
          "codebook size " + std::to_string(c) + " is not a power of two");
  return std::countr_zero(static_cast<unsigned>(c));
}

class VqLookupPrimitive final : public Primitive {
 public:
  std::string name() const override { return "vq_lookup"; }

  Tensor forward(std::span<const Tensor* const> in) const override {
    const Tensor& z = *in[0];
    const Tensor& e = *in[1];
    require(z.rank() == 2 && e.rank() == 2 && e.cols() > 0 && z.cols() % e.cols() == 0,
            ErrorCode::kShapeMismatch,
            "vq_lookup: latent " + z.shape_string() + " not divisible by codebook " +
                e.shape_string());
    Tensor q = Tensor::matrix(z.rows(), z.cols());
    const std::size_t d = e.cols();
    for (std::size_t r = 0; r < z.rows(); ++r)
      for (std::size_t off = 0; off < z.cols(); off += d) {
        const std::uint32_t idx = nearest_codeword(&z.data[r * z.cols() + off], e);
        for (std::size_t k = 0; k < d; ++k) q(r, off + k) = e(idx, k);
      }
    return q;
  }

  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> grads) const override {
    if (!grads[1]) return;
    const Tensor& z = *in[0];
    const Tensor& e = *in[1];
    const std::size_t d = e.cols();
    for (std::size_t r = 0; r < z.rows(); ++r)
      for (std::size_t off = 0; off < z.cols(); off += d) {
        const std::uint32_t idx = nearest_codeword(&z.data[r * z.cols() + off], e);
        for (std::size_t k = 0; k < d; ++k) (*grads[1])(idx, k) += g(r, off + k);
      }
  }
};

class StraightThroughPrimitive final : public Primitive {
 public:
  std::string name() const override { return "straight_through"; }
  Tensor forward(std::span<const Tensor* const> in) const override {
    require(in[0]->same_shape(*in[1]), ErrorCode::kShapeMismatch,
            "straight_through: " + in[0]->shape_string() + " vs " + in[1]->shape_string());
    return *in[1];
  }
  void backward(std::span<const Tensor* const>, const Tensor&, const Tensor& g,
                std::span<Tensor* const> grads) const override {
    if (grads[0]) kernels::add_inplace(*grads[0], g);
  }
};

}  // namespace

std::uint32_t nearest_codeword(const double* z, const Tensor& codebook) {
  const std::size_t c = codebook.rows(), d = codebook.cols();
  require(c > 0, ErrorCode::kInvalidArgument, "empty codebook");
  std::uint32_t best = 0;
  double best_dist = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    double dist = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = codebook(i, k) - z[k];
      dist += diff * diff;
    }
    if (i == 0 || dist < best_dist) {
      best = static_cast<std::uint32_t>(i);
      best_dist = dist;
    }
  }
  return best;
}

FeedbackMessage quantize(const RVector& z, const Tensor& codebook) {
  const auto d = static_cast<Eigen::Index>(codebook.cols());
  require(codebook.rank() == 2 && d > 0 && z.size() % d == 0, ErrorCode::kShapeMismatch,
          "quantize: latent length " + std::to_string(z.size()) +
              " not divisible by codeword dimension " + std::to_string(d));
  FeedbackMessage msg;
  msg.f.resize(z.size());
  for (Eigen::Index off = 0; off < z.size(); off += d) {
    const std::uint32_t idx = nearest_codeword(z.data() + off, codebook);
    msg.indices.push_back(idx);
    for (Eigen::Index k = 0; k < d; ++k) msg.f(off + k) = codebook(idx, k);
  }
  return msg;
}

int feedback_bits(int latent_dim, int codeword_dim, int codebook_size) {
  require(latent_dim > 0 && codeword_dim > 0 && latent_dim % codeword_dim == 0,
          ErrorCode::kInvalidArgument,
          "feedback_bits: N_E = " + std::to_string(codeword_dim) + " does not divide N_L = " +
              std::to_string(latent_dim));
  return (latent_dim / codeword_dim) * log2_exact(codebook_size);
}

std::string pack_feedback(const std::vector<std::uint32_t>& indices, int codebook_size) {
  const int width = log2_exact(codebook_size);
  std::string bits;
  bits.reserve(indices.size() * width);
  for (std::uint32_t idx : indices) {
    require(idx < static_cast<std::uint32_t>(codebook_size), ErrorCode::kInvalidArgument,
            "pack_feedback: index " + std::to_string(idx) + " out of range");
    for (int b = width - 1; b >= 0; --b) bits.push_back(((idx >> b) & 1u) ? '1' : '0');
  }
  return bits;
}

std::vector<std::uint32_t> unpack_feedback(const std::string& bits, int codebook_size,
                                           int sub_vectors) {
  const int width = log2_exact(codebook_size);
  require(sub_vectors >= 0 &&
              bits.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(sub_vectors),
          ErrorCode::kInvalidArgument,
          "unpack_feedback: expected " + std::to_string(width * sub_vectors) + " bits, got " +
              std::to_string(bits.size()));
  std::vector<std::uint32_t> out;
  for (int i = 0; i < sub_vectors; ++i) {
    std::uint32_t idx = 0;
    for (int b = 0; b < width; ++b) {
      const char ch = bits[static_cast<std::size_t>(i * width + b)];
      require(ch == '0' || ch == '1', ErrorCode::kInvalidArgument,
              "unpack_feedback: invalid bit character");
      idx = (idx << 1) | (ch == '1' ? 1u : 0u);
    }
    out.push_back(idx);
  }
  return out;
}

Tensor init_codebook(int codebook_size, int codeword_dim, Rng& rng) {
  log2_exact(codebook_size);
  const double a = 1.0 / codebook_size;
  std::uniform_real_distribution<double> u(-a, a);
  Tensor e = Tensor::matrix(static_cast<std::size_t>(codebook_size),
                            static_cast<std::size_t>(codeword_dim));
  for (double& v : e.data) v = u(rng);
  return e;
}

Var vq_lookup(Var z, Var codebook) {
  return z.graph->apply(std::make_shared<VqLookupPrimitive>(), {z, codebook});
}

Var straight_through(Var z, Var q) {
  return z.graph->apply(std::make_shared<StraightThroughPrimitive>(), {z, q});
}

VqLossTerms vq_loss_terms(Var z, Var q, double beta) {
  return {sum_cols(square(stop_gradient(z) - q)),
          scale(sum_cols(square(z - stop_gradient(q))), beta)};
}

}  // namespace vqmimo
