#include "vqmimo/covariance.hpp"

#include <cmath>

#include "vqmimo/error.hpp"

namespace vqmimo {

namespace {

CMatrix oversampled_dft_columns(int t) {
  const int m = 2 * t;
  CMatrix f(m, t);
  for (int r = 0; r < m; ++r)
    for (int k = 0; k < t; ++k)
      f(r, k) = std::polar(1.0 / std::sqrt(static_cast<double>(m)),
                           -2.0 * kPi * r * k / static_cast<double>(m));
  return f;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void check_stat(const StatisticalCsi& stat, const AngularDictionary& dict) {
  require(stat.mu.size() == dict.antennas() && stat.c.size() == dict.atoms(),
          ErrorCode::kShapeMismatch, "statistical CSI dimensions do not match dictionary");
}

struct Factored {
  Eigen::LLT<CMatrix> llt;
  double log_det = 0.0;
};

Factored factor(const RVector& c, const AngularDictionary& dict) {
  Factored f;
  f.llt.compute(build_covariance(c, dict));
  require(f.llt.info() == Eigen::Success, ErrorCode::kNumerical,
          "gaussian_nll: Cholesky factorization failed");
  const CMatrix& l = f.llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double d = l(i, i).real();
    require(d > 0.0, ErrorCode::kNumerical, "gaussian_nll: Cholesky factorization failed");
    f.log_det += 2.0 * std::log(d);
  }
  return f;
}

CVector row_vector(const Tensor& re, const Tensor& im, std::size_t r) {
  CVector v(static_cast<Eigen::Index>(re.cols()));
  for (std::size_t k = 0; k < re.cols(); ++k) v(k) = {re(r, k), im(r, k)};
  return v;
}

class GaussianNllPrimitive final : public Primitive {
 public:
  explicit GaussianNllPrimitive(AngularDictionary dict) : dict_(std::move(dict)) {}
  std::string name() const override { return "gaussian_nll"; }

  Tensor forward(std::span<const Tensor* const> in) const override {
    check(in);
    const std::size_t b = in[0]->rows();
    Tensor out = Tensor::matrix(b, 1);
    for (std::size_t r = 0; r < b; ++r) {
      StatisticalCsi stat = stat_row(in, r);
      out.data[r] = gaussian_nll(row_vector(*in[0], *in[1], r), stat, dict_);
    }
    return out;
  }

  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> grads) const override {
    const std::size_t b = in[0]->rows(), n = in[0]->cols();
    for (std::size_t r = 0; r < b; ++r) {
      const double w = g.data[r];
      const NllGradient d =
          gaussian_nll_gradient(row_vector(*in[0], *in[1], r), stat_row(in, r), dict_);
      for (std::size_t k = 0; k < n; ++k) {
        // d/dh = -d/dmu
        if (grads[0]) (*grads[0])(r, k) -= w * d.d_mu(k).real();
        if (grads[1]) (*grads[1])(r, k) -= w * d.d_mu(k).imag();
        if (grads[2]) (*grads[2])(r, k) += w * d.d_mu(k).real();
        if (grads[3]) (*grads[3])(r, k) += w * d.d_mu(k).imag();
      }
      if (grads[4])
        for (Eigen::Index k = 0; k < d.d_c.size(); ++k) (*grads[4])(r, k) += w * d.d_c(k);
    }
  }

 private:
  void check(std::span<const Tensor* const> in) const {
    const auto n = static_cast<std::size_t>(dict_.antennas());
    const std::size_t b = in[0]->rows();
    for (int i = 0; i < 4; ++i)
      require(in[i]->rank() == 2 && in[i]->rows() == b && in[i]->cols() == n,
              ErrorCode::kShapeMismatch,
              "gaussian_nll: expected [B," + std::to_string(n) + "] mean/channel, got " +
                  in[i]->shape_string());
    require(in[4]->rank() == 2 && in[4]->rows() == b &&
                in[4]->cols() == static_cast<std::size_t>(dict_.atoms()),
            ErrorCode::kShapeMismatch,
            "gaussian_nll: expected [B," + std::to_string(dict_.atoms()) + "] c, got " +
                in[4]->shape_string());
  }

  StatisticalCsi stat_row(std::span<const Tensor* const> in, std::size_t r) const {
    StatisticalCsi s;
    s.mu = row_vector(*in[2], *in[3], r);
    s.c.resize(dict_.atoms());
    for (int k = 0; k < dict_.atoms(); ++k) s.c(k) = (*in[4])(r, k);
    return s;
  }

  AngularDictionary dict_;
};

}  // namespace

AngularDictionary build_dictionary(const ArrayGeometry& geometry) {
  geometry.validate();
  return {kron(oversampled_dft_columns(geometry.n_v), oversampled_dft_columns(geometry.n_h)),
          geometry};
}

CMatrix build_covariance(const RVector& c, const AngularDictionary& dict) {
  require(c.size() == dict.atoms(), ErrorCode::kShapeMismatch,
          "build_covariance: c has length " + std::to_string(c.size()) + ", expected " +
              std::to_string(dict.atoms()));
  for (Eigen::Index k = 0; k < c.size(); ++k)
    require(c(k) >= 0.0, ErrorCode::kInvalidArgument,
            "build_covariance: negative entry c[" + std::to_string(k) + "]");
  CMatrix c_mat = dict.q.adjoint() * c.cast<cdouble>().asDiagonal() * dict.q;
  // Remove rounding asymmetry so downstream Cholesky sees a Hermitian matrix.
  return 0.5 * (c_mat + c_mat.adjoint());
}

double gaussian_nll(const CVector& h, const StatisticalCsi& stat, const AngularDictionary& dict) {
  check_stat(stat, dict);
  const Factored f = factor(stat.c, dict);
  const CVector r = h - stat.mu;
  const CVector cr = f.llt.solve(r);
  const double quad = r.dot(cr).real();  // r^H C^{-1} r
  return static_cast<double>(dict.antennas()) * std::log(kPi) + f.log_det + quad;
}

NllGradient gaussian_nll_gradient(const CVector& h, const StatisticalCsi& stat,
                                  const AngularDictionary& dict) {
  check_stat(stat, dict);
  const Factored f = factor(stat.c, dict);
  const CVector r = h - stat.mu;
  const CVector cr = f.llt.solve(r);
  const CMatrix c_inv = f.llt.solve(CMatrix::Identity(dict.antennas(), dict.antennas()));
  // Row k of Q is a_k^H.
  const CMatrix qc = dict.q * c_inv;
  const CVector proj = dict.q * cr;
  NllGradient g;
  g.d_mu = -2.0 * cr;
  g.d_c.resize(dict.atoms());
  for (int k = 0; k < dict.atoms(); ++k) {
    const double quad = qc.row(k).dot(dict.q.row(k)).real();  // conj(qc_k) . q_k
    g.d_c(k) = quad - std::norm(proj(k));
  }
  return g;
}

double mse_loss(const CVector& h, const CVector& h_bar) {
  require(h.size() == h_bar.size(), ErrorCode::kShapeMismatch, "mse_loss: length mismatch");
  return (h - h_bar).squaredNorm();
}

Var gaussian_nll_node(CVar h, CVar mu, Var c, const AngularDictionary& dict) {
  return h.re.graph->apply(std::make_shared<GaussianNllPrimitive>(dict),
                           {h.re, h.im, mu.re, mu.im, c});
}

Var mse_node(CVar h, CVar h_bar) {
  return sum_cols(square(h.re - h_bar.re)) + sum_cols(square(h.im - h_bar.im));
}

}  // namespace vqmimo
