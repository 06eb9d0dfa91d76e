#pragma once

#include "vqmimo/channel.hpp"
#include "vqmimo/graph.hpp"
#include "vqmimo/linalg.hpp"

namespace vqmimo {

/// Lower bound on every entry of c, guaranteeing C >= floor * I.
inline constexpr double kCovarianceFloor = 1e-6;

/// Q = F_{n_v} kron F_{n_h}, F_T the first T columns of the unitary 2T-point
/// DFT. Shape 4N x N with orthonormal columns.
struct AngularDictionary {
  CMatrix q;
  ArrayGeometry geometry;

  int antennas() const { return static_cast<int>(q.cols()); }
  int atoms() const { return static_cast<int>(q.rows()); }
};

struct StatisticalCsi {
  CVector mu;
  RVector c;
};

AngularDictionary build_dictionary(const ArrayGeometry& geometry);

/// C = Q^H diag(c) Q: Hermitian, block-Toeplitz with Toeplitz blocks.
CMatrix build_covariance(const RVector& c, const AngularDictionary& dict);

/// ln det(pi C) + (h - mu)^H C^{-1} (h - mu), via Cholesky.
double gaussian_nll(const CVector& h, const StatisticalCsi& stat,
                    const AngularDictionary& dict);

struct NllGradient {
  CVector d_mu;  // real part: d/d Re(mu), imaginary part: d/d Im(mu)
  RVector d_c;
};

NllGradient gaussian_nll_gradient(const CVector& h, const StatisticalCsi& stat,
                                  const AngularDictionary& dict);

double mse_loss(const CVector& h, const CVector& h_bar);

/// Per-row Gaussian NLL of a batch: h, mu as [B,N] pairs, c as [B,4N].
/// Output [B,1]. Gradients are hand-derived; h is usually a constant.
Var gaussian_nll_node(CVar h, CVar mu, Var c, const AngularDictionary& dict);

/// Per-row squared error ||h - h_bar||^2 of a batch, output [B,1].
Var mse_node(CVar h, CVar h_bar);

}  // namespace vqmimo
