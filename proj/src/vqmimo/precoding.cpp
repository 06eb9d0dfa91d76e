#include "vqmimo/precoding.hpp"

#include <cmath>
#include <limits>

#include "vqmimo/error.hpp"

namespace vqmimo {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

void check_sigma(double sigma2) {
  require(sigma2 > 0.0, ErrorCode::kInvalidArgument, "noise variance must be positive");
}

double surrogate_rate(const std::vector<CMatrix>& samples, const CMatrix& v, double sigma2) {
  double r = 0.0;
  for (const CMatrix& h : samples) r += sum_rate(h, v, sigma2);
  return r / static_cast<double>(samples.size());
}

/// argmin over V of the weighted-MSE surrogate: v_m = (A + lambda I)^+ b_m with
/// the smallest lambda >= 0 meeting the power budget.
CMatrix power_constrained_solve(const CMatrix& a, const CMatrix& b, double rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(a);
  const RVector d = eig.eigenvalues().cwiseMax(0.0);
  const CMatrix c = eig.eigenvectors().adjoint() * b;
  const RVector weight = c.cwiseAbs2().rowwise().sum();
  const double floor = 1e-12 * std::max(d.maxCoeff(), std::numeric_limits<double>::min());

  auto power = [&](double lambda) {
    double p = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double denom = d(i) + lambda;
      if (lambda == 0.0 && d(i) <= floor) continue;  // pseudo-inverse on the null space
      p += weight(i) / (denom * denom);
    }
    return p;
  };

  double lambda = 0.0;
  if (power(0.0) > rho) {
    double hi = std::sqrt(b.squaredNorm() / rho);
    if (hi <= 0.0) hi = 1e-12;
    while (power(hi) > rho) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
      if (rho - power(hi) <= 1e-10 * std::max(rho, 1.0)) break;
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (power(mid) > rho)
        lo = mid;
      else
        hi = mid;
    }
    lambda = hi;
  }

  RVector inv(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i)
    inv(i) = (lambda == 0.0 && d(i) <= floor) ? 0.0 : 1.0 / (d(i) + lambda);
  return eig.eigenvectors() * (inv.cast<cdouble>().asDiagonal() * c);
}

}  // namespace

double sum_rate(const CMatrix& h, const CMatrix& v, double sigma2) {
  check_sigma(sigma2);
  require(h.rows() == v.rows() && h.cols() == v.cols(), ErrorCode::kShapeMismatch,
          "sum_rate: channel and precoder shapes differ");
  const CMatrix a = h.transpose() * v;  // a(j, m) = h_j^T v_m
  double r = 0.0;
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    double interference = sigma2;
    for (Eigen::Index m = 0; m < a.cols(); ++m)
      if (m != j) interference += std::norm(a(j, m));
    r += std::log2(1.0 + std::norm(a(j, j)) / interference);
  }
  return r;
}

PrecoderSet mrt(const CMatrix& h, double rho) {
  require(rho > 0.0, ErrorCode::kInvalidArgument, "mrt: rho must be positive");
  PrecoderSet out{CMatrix::Zero(h.rows(), h.cols()), rho};
  const double amp = std::sqrt(rho / static_cast<double>(h.cols()));
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    const double n = h.col(j).norm();
    if (n > 0.0) out.v.col(j) = amp * h.col(j).conjugate() / n;
  }
  return out;
}

PrecoderSet zf(const CMatrix& h, double rho) {
  require(rho > 0.0, ErrorCode::kInvalidArgument, "zf: rho must be positive");
  require(h.cols() <= h.rows(), ErrorCode::kSingular,
          "zf: more users than antennas (" + std::to_string(h.cols()) + " > " +
              std::to_string(h.rows()) + ")");
  const CMatrix g = h.conjugate();
  const CMatrix gram = g.adjoint() * g;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  require(lo > 0.0 && hi / lo <= 1e12, ErrorCode::kSingular,
          "zf: channel Gram matrix is numerically singular");
  CMatrix w = g * gram.ldlt().solve(CMatrix::Identity(h.cols(), h.cols()));
  const double amp = std::sqrt(rho / static_cast<double>(h.cols()));
  for (Eigen::Index j = 0; j < w.cols(); ++j) w.col(j) *= amp / w.col(j).norm();
  return {w, rho};
}

SolverResult saa_wmmse(const std::vector<CMatrix>& samples, const CMatrix& init, double rho,
                       double sigma2, const WmmseOptions& opts) {
  check_sigma(sigma2);
  require(rho > 0.0, ErrorCode::kInvalidArgument, "wmmse: rho must be positive");
  require(!samples.empty(), ErrorCode::kInvalidArgument, "wmmse: no channel samples");
  const Eigen::Index n = init.rows(), users = init.cols();
  for (const CMatrix& h : samples)
    require(h.rows() == n && h.cols() == users, ErrorCode::kShapeMismatch,
            "wmmse: sample shape differs from precoder shape");
  const double inv_s = 1.0 / static_cast<double>(samples.size());

  SolverResult res;
  CMatrix v = init;
  double prev = surrogate_rate(samples, v, sigma2);
  res.report.trace.push_back(prev);
  res.precoders = {v, rho};
  double best = prev;
  res.report.stop_reason = "max_iter";

  for (int it = 1; it <= opts.max_iter; ++it) {
    CMatrix a = CMatrix::Zero(n, n);
    CMatrix b = CMatrix::Zero(n, users);
    for (const CMatrix& h : samples) {
      const CMatrix g = h.conjugate();
      const CMatrix t = h.transpose() * v;  // t(j, m) = g_j^H v_m
      for (Eigen::Index j = 0; j < users; ++j) {
        const double total = t.row(j).squaredNorm() + sigma2;
        const cdouble u = t(j, j) / total;
        const double w = total / (total - std::norm(t(j, j)));
        a.noalias() += (inv_s * w * std::norm(u)) * g.col(j) * g.col(j).adjoint();
        b.col(j) += (inv_s * w) * u * g.col(j);
      }
    }
    a = 0.5 * (a + a.adjoint());
    v = power_constrained_solve(a, b, rho);
    const double r = surrogate_rate(samples, v, sigma2);
    res.report.trace.push_back(r);
    res.report.iterations = it;
    if (r > best) {
      best = r;
      res.precoders = {v, rho};
    }
    if (std::abs(r - prev) <= opts.tol) {
      res.report.converged = true;
      res.report.stop_reason = "tolerance";
      break;
    }
    prev = r;
  }
  return res;
}

SolverResult wmmse(const CMatrix& h, double rho, double sigma2, const WmmseOptions& opts) {
  return saa_wmmse({h}, mrt(h, rho).v, rho, sigma2, opts);
}

std::vector<CMatrix> draw_statistical_samples(const std::vector<StatisticalCsi>& stats,
                                              const AngularDictionary& dict, int samples,
                                              Rng& rng) {
  require(samples >= 1, ErrorCode::kInvalidArgument, "swmmse: S must be >= 1");
  require(!stats.empty(), ErrorCode::kInvalidArgument, "swmmse: no users");
  const int n = dict.antennas();
  const auto users = static_cast<Eigen::Index>(stats.size());
  std::vector<CMatrix> factors;
  for (const StatisticalCsi& s : stats) {
    Eigen::LLT<CMatrix> llt(build_covariance(s.c, dict));
    require(llt.info() == Eigen::Success, ErrorCode::kNumerical,
            "swmmse: Cholesky factorization failed");
    factors.push_back(llt.matrixL());
  }
  std::vector<CMatrix> out(static_cast<std::size_t>(samples), CMatrix(n, users));
  for (int s = 0; s < samples; ++s)
    for (Eigen::Index j = 0; j < users; ++j) {
      CVector xi(n);
      for (int i = 0; i < n; ++i) xi(i) = complex_normal(rng, 1.0);
      out[static_cast<std::size_t>(s)].col(j) = stats[static_cast<std::size_t>(j)].mu +
                                                factors[static_cast<std::size_t>(j)] * xi;
    }
  return out;
}

SolverResult swmmse(const std::vector<StatisticalCsi>& stats, const AngularDictionary& dict,
                    double rho, double sigma2, int samples, Rng& rng, const WmmseOptions& opts) {
  CMatrix means(dict.antennas(), static_cast<Eigen::Index>(stats.size()));
  for (std::size_t j = 0; j < stats.size(); ++j) means.col(static_cast<Eigen::Index>(j)) = stats[j].mu;
  const auto draws = draw_statistical_samples(stats, dict, samples, rng);
  return saa_wmmse(draws, mrt(means, rho).v, rho, sigma2, opts);
}

namespace {

class SumRatePrimitive final : public Primitive {
 public:
  SumRatePrimitive(std::size_t users, double sigma2) : users_(users), sigma2_(sigma2) {}
  std::string name() const override { return "sum_rate"; }

  Tensor forward(std::span<const Tensor* const> in) const override {
    check(in);
    const std::size_t groups = in[0]->rows() / users_;
    Tensor out = Tensor::matrix(groups, 1);
    for (std::size_t k = 0; k < groups; ++k) {
      const auto a = gains(in, k);
      for (std::size_t j = 0; j < users_; ++j) {
        double total = sigma2_;
        for (std::size_t m = 0; m < users_; ++m) total += std::norm(a[j * users_ + m]);
        const double interference = total - std::norm(a[j * users_ + j]);
        out.data[k] += std::log2(total) - std::log2(interference);
      }
    }
    return out;
  }

  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> grads) const override {
    const std::size_t groups = in[0]->rows() / users_, n = in[0]->cols();
    for (std::size_t k = 0; k < groups; ++k) {
      const auto a = gains(in, k);
      for (std::size_t j = 0; j < users_; ++j) {
        double total = sigma2_;
        for (std::size_t m = 0; m < users_; ++m) total += std::norm(a[j * users_ + m]);
        const double interference = total - std::norm(a[j * users_ + j]);
        const std::size_t hj = k * users_ + j;
        for (std::size_t m = 0; m < users_; ++m) {
          // dR / d|a_jm|^2
          const double w =
              g.data[k] * (1.0 / total - (m != j ? 1.0 / interference : 0.0)) / kLn2;
          const cdouble coef = 2.0 * w * a[j * users_ + m];
          const std::size_t vm = k * users_ + m;
          for (std::size_t c = 0; c < n; ++c) {
            // d|a|^2/dv (as re + i im) = 2 a conj(h); symmetric for h.
            const cdouble dv = coef * std::conj(cdouble((*in[0])(hj, c), (*in[1])(hj, c)));
            const cdouble dh = coef * std::conj(cdouble((*in[2])(vm, c), (*in[3])(vm, c)));
            if (grads[0]) (*grads[0])(hj, c) += dh.real();
            if (grads[1]) (*grads[1])(hj, c) += dh.imag();
            if (grads[2]) (*grads[2])(vm, c) += dv.real();
            if (grads[3]) (*grads[3])(vm, c) += dv.imag();
          }
        }
      }
    }
  }

 private:
  void check(std::span<const Tensor* const> in) const {
    require(users_ > 0 && sigma2_ > 0.0, ErrorCode::kInvalidArgument,
            "sum_rate: need users > 0 and sigma2 > 0");
    for (int i = 0; i < 4; ++i)
      require(in[i]->rank() == 2 && in[i]->same_shape(*in[0]), ErrorCode::kShapeMismatch,
              "sum_rate: operand shapes differ: " + in[i]->shape_string());
    require(in[0]->rows() % users_ == 0, ErrorCode::kShapeMismatch,
            "sum_rate: rows not divisible by user count");
  }

  // a(j, m) = h_j^T v_m within group k, row-major J x J.
  std::vector<cdouble> gains(std::span<const Tensor* const> in, std::size_t k) const {
    const std::size_t n = in[0]->cols();
    std::vector<cdouble> a(users_ * users_);
    for (std::size_t j = 0; j < users_; ++j)
      for (std::size_t m = 0; m < users_; ++m) {
        cdouble s = 0.0;
        const std::size_t hj = k * users_ + j, vm = k * users_ + m;
        for (std::size_t c = 0; c < n; ++c)
          s += cdouble((*in[0])(hj, c), (*in[1])(hj, c)) *
               cdouble((*in[2])(vm, c), (*in[3])(vm, c));
        a[j * users_ + m] = s;
      }
    return a;
  }

  std::size_t users_;
  double sigma2_;
};

}  // namespace

Var sum_rate_node(CVar h, CVar v, std::size_t users, double sigma2) {
  return h.re.graph->apply(std::make_shared<SumRatePrimitive>(users, sigma2),
                           {h.re, h.im, v.re, v.im});
}

}  // namespace vqmimo
