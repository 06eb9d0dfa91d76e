#pragma once

#include <string>
#include <vector>

#include "vqmimo/covariance.hpp"
#include "vqmimo/graph.hpp"
#include "vqmimo/linalg.hpp"
#include "vqmimo/rng.hpp"

namespace vqmimo {

/// Columns v_j of an N x J matrix under the budget sum_j ||v_j||^2 <= rho.
struct PrecoderSet {
  CMatrix v;
  double rho = 1.0;

  double power() const { return v.squaredNorm(); }
};

struct SolverReport {
  int iterations = 0;
  std::vector<double> trace;  // objective after init and after every iteration
  bool converged = false;
  std::string stop_reason;
};

/// sum_j log2(1 + |h_j^T v_j|^2 / (sum_{m != j} |h_j^T v_m|^2 + sigma2)).
/// Channels are the columns of h (N x J); plain transpose, no conjugate.
double sum_rate(const CMatrix& h, const CMatrix& v, double sigma2);

PrecoderSet mrt(const CMatrix& h, double rho);
PrecoderSet zf(const CMatrix& h, double rho);

struct WmmseOptions {
  int max_iter = 300;
  double tol = 1e-5;
};

struct SolverResult {
  PrecoderSet precoders;
  SolverReport report;
};

SolverResult wmmse(const CMatrix& h, double rho, double sigma2, const WmmseOptions& opts = {});

/// WMMSE on the sample average (1/S) sum_s R(H_s, V). Every sample set is
/// N x J. The iterate starts at `init`.
SolverResult saa_wmmse(const std::vector<CMatrix>& samples, const CMatrix& init, double rho,
                       double sigma2, const WmmseOptions& opts = {});

/// Sample-average stochastic WMMSE: S draws h = mu + L xi per user, with L the
/// Cholesky factor of Q^H diag(c) Q. Starts from MRT on the means.
SolverResult swmmse(const std::vector<StatisticalCsi>& stats, const AngularDictionary& dict,
                    double rho, double sigma2, int samples, Rng& rng,
                    const WmmseOptions& opts = {});

/// Draws the SAA sample sets used by swmmse.
std::vector<CMatrix> draw_statistical_samples(const std::vector<StatisticalCsi>& stats,
                                              const AngularDictionary& dict, int samples,
                                              Rng& rng);

/// Differentiable per-constellation sum rate. h and v are [K*J, N] with row
/// j of group k holding h_j^T (resp. v_j^T). Output [K,1].
Var sum_rate_node(CVar h, CVar v, std::size_t users, double sigma2);

}  // namespace vqmimo
