#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vqmimo/graph.hpp"
#include "vqmimo/linalg.hpp"
#include "vqmimo/rng.hpp"

namespace vqmimo {

inline constexpr const char* kCodebook = "vq.codebook";

struct FeedbackMessage {
  std::vector<std::uint32_t> indices;  // one per sub-vector, each in [0, C)
  RVector f;                           // assembled quantized latent
};

/// Nearest codeword per N_E-dimensional sub-vector of z; ties go to the
/// lowest index. `codebook` is [C, N_E].
FeedbackMessage quantize(const RVector& z, const Tensor& codebook);

/// Index of the nearest row of `codebook` to z[offset, offset + N_E).
std::uint32_t nearest_codeword(const double* z, const Tensor& codebook);

/// B = (N_L / N_E) * log2(C).
int feedback_bits(int latent_dim, int codeword_dim, int codebook_size);

/// Big-endian concatenation of log2(C)-bit indices, as a '0'/'1' string.
std::string pack_feedback(const std::vector<std::uint32_t>& indices, int codebook_size);
std::vector<std::uint32_t> unpack_feedback(const std::string& bits, int codebook_size,
                                           int sub_vectors);

/// Entries uniform on [-1/C, 1/C].
Tensor init_codebook(int codebook_size, int codeword_dim, Rng& rng);

/// q = nearest codewords of each sub-vector of z [B, N_L]. Gradient flows to
/// the selected codewords only; z receives none.
Var vq_lookup(Var z, Var codebook);

/// Forward returns q unchanged; the incoming gradient is copied to z.
Var straight_through(Var z, Var q);

struct VqLossTerms {
  Var codebook;    // ||sg(z) - q||^2 per row
  Var commitment;  // beta ||z - sg(q)||^2 per row
};

VqLossTerms vq_loss_terms(Var z, Var q, double beta);

}  // namespace vqmimo
