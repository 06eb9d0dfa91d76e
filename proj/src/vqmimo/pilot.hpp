#pragma once

#include <vector>

#include "vqmimo/channel.hpp"
#include "vqmimo/graph.hpp"
#include "vqmimo/linalg.hpp"
#include "vqmimo/params.hpp"
#include "vqmimo/rng.hpp"

namespace vqmimo {

enum class PilotKind { kFixedDft, kLearnable };

/// Energy constraint applied to learnable pilots after each optimizer step.
enum class PilotConstraint { kFrobenius, kPerRow };

struct PilotMatrix {
  CMatrix p;  // n_p x N
  PilotKind kind = PilotKind::kFixedDft;

  int n_pilots() const { return static_cast<int>(p.rows()); }
};

struct Observation {
  CVector y;
  double noise_variance = 0.0;
};

/// Rows floor(k N / n_p) of the unitary 2D-DFT (D_{n_v} kron D_{n_h}),
/// rescaled to entries of magnitude 1/sqrt(n_p) so that columns have unit norm.
PilotMatrix build_dft_pilots(const ArrayGeometry& geometry, int n_pilots);

/// Batch of complex row vectors as paired [B, n] tensors.
struct ComplexBatch {
  Tensor re;
  Tensor im;

  std::size_t rows() const { return re.rows(); }
  CVector row(std::size_t r) const;
};

ComplexBatch to_batch(const std::vector<CVector>& rows);
ComplexBatch to_batch(const CMatrix& m);  // rows of m
/// Circular Gaussian noise of variance sigma2 per entry, drawn row-major.
ComplexBatch draw_noise(std::size_t rows, std::size_t cols, double sigma2, Rng& rng);

/// Y = H P^T + noise with the same real arithmetic as the graph version.
ComplexBatch observe_batch(const Tensor& pilot_re, const Tensor& pilot_im,
                           const ComplexBatch& h, const ComplexBatch& noise);

Observation observe(const PilotMatrix& pilots, const CVector& h, double sigma2,
                    Rng& rng);

/// Differentiable Y = H P^T + noise; noise and channels enter as constants.
CVar learnable_pilot_forward(Graph& g, CVar pilot, const ComplexBatch& h,
                             const ComplexBatch& noise);

inline constexpr const char* kPilotRe = "pilot.re";
inline constexpr const char* kPilotIm = "pilot.im";

void register_pilot(ParameterStore& store, const PilotMatrix& pilots);
PilotMatrix pilot_from_store(const ParameterStore& store, PilotKind kind);
/// Restores pilot energy: ||P||_F^2 = N, or ||row||^2 = N / n_p per row.
void project_pilot(ParameterStore& store, PilotConstraint constraint);

}  // namespace vqmimo
