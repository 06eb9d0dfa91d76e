#include "vqmimo/pilot.hpp"

#include <cmath>

#include "vqmimo/error.hpp"

namespace vqmimo {

namespace {

CMatrix unitary_dft(int t) {
  CMatrix d(t, t);
  for (int m = 0; m < t; ++m)
    for (int k = 0; k < t; ++k)
      d(m, k) = std::polar(1.0 / std::sqrt(static_cast<double>(t)),
                           -2.0 * kPi * m * k / static_cast<double>(t));
  return d;
}

}  // namespace

PilotMatrix build_dft_pilots(const ArrayGeometry& geometry, int n_pilots) {
  geometry.validate();
  const int n = geometry.size();
  require(n_pilots >= 1 && n_pilots <= n, ErrorCode::kInvalidArgument,
          "build_dft_pilots: n_p = " + std::to_string(n_pilots) +
              " must lie in [1, " + std::to_string(n) + "]");
  const CMatrix dv = unitary_dft(geometry.n_v);
  const CMatrix dh = unitary_dft(geometry.n_h);
  const double rescale = std::sqrt(static_cast<double>(n) / n_pilots);
  PilotMatrix out;
  out.p.resize(n_pilots, n);
  for (int k = 0; k < n_pilots; ++k) {
    const int r = static_cast<int>((static_cast<long>(k) * n) / n_pilots);
    const int rv = r / geometry.n_h, rh = r % geometry.n_h;
    for (int v = 0; v < geometry.n_v; ++v)
      for (int h = 0; h < geometry.n_h; ++h)
        out.p(k, v * geometry.n_h + h) = rescale * dv(rv, v) * dh(rh, h);
  }
  return out;
}

CVector ComplexBatch::row(std::size_t r) const {
  CVector v(static_cast<Eigen::Index>(re.cols()));
  for (std::size_t c = 0; c < re.cols(); ++c) v(c) = {re(r, c), im(r, c)};
  return v;
}

ComplexBatch to_batch(const std::vector<CVector>& rows) {
  require(!rows.empty(), ErrorCode::kInvalidArgument, "to_batch: empty batch");
  const auto n = static_cast<std::size_t>(rows[0].size());
  ComplexBatch b{Tensor::matrix(rows.size(), n), Tensor::matrix(rows.size(), n)};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(static_cast<std::size_t>(rows[r].size()) == n, ErrorCode::kShapeMismatch,
            "to_batch: ragged rows");
    for (std::size_t c = 0; c < n; ++c) {
      b.re(r, c) = rows[r](c).real();
      b.im(r, c) = rows[r](c).imag();
    }
  }
  return b;
}

ComplexBatch to_batch(const CMatrix& m) {
  const auto rows = static_cast<std::size_t>(m.rows()), cols = static_cast<std::size_t>(m.cols());
  ComplexBatch b{Tensor::matrix(rows, cols), Tensor::matrix(rows, cols)};
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      b.re(r, c) = m(r, c).real();
      b.im(r, c) = m(r, c).imag();
    }
  return b;
}

ComplexBatch draw_noise(std::size_t rows, std::size_t cols, double sigma2, Rng& rng) {
  require(sigma2 >= 0.0, ErrorCode::kInvalidArgument, "noise variance must be >= 0");
  ComplexBatch b{Tensor::matrix(rows, cols), Tensor::matrix(rows, cols)};
  if (sigma2 == 0.0) return b;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const cdouble z = complex_normal(rng, sigma2);
      b.re(r, c) = z.real();
      b.im(r, c) = z.imag();
    }
  return b;
}

ComplexBatch observe_batch(const Tensor& pilot_re, const Tensor& pilot_im,
                           const ComplexBatch& h, const ComplexBatch& noise) {
  using namespace kernels;
  const Tensor pre_t = transpose(pilot_re);
  const Tensor pim_t = transpose(pilot_im);
  Tensor yre = sub(matmul(h.re, pre_t), matmul(h.im, pim_t));
  Tensor yim = add(matmul(h.re, pim_t), matmul(h.im, pre_t));
  return {add(yre, noise.re), add(yim, noise.im)};
}

Observation observe(const PilotMatrix& pilots, const CVector& h, double sigma2, Rng& rng) {
  require(h.size() == pilots.p.cols(), ErrorCode::kShapeMismatch,
          "observe: channel length does not match pilot columns");
  const ComplexBatch pb = to_batch(pilots.p);
  const ComplexBatch noise = draw_noise(1, static_cast<std::size_t>(pilots.p.rows()), sigma2, rng);
  const ComplexBatch y = observe_batch(pb.re, pb.im, to_batch(std::vector<CVector>{h}), noise);
  return {y.row(0), sigma2};
}

CVar learnable_pilot_forward(Graph& g, CVar pilot, const ComplexBatch& h,
                             const ComplexBatch& noise) {
  const CVar hv{g.constant(h.re), g.constant(h.im)};
  const CVar pt = ctranspose(pilot);
  const Var yre = matmul(hv.re, pt.re) - matmul(hv.im, pt.im);
  const Var yim = matmul(hv.re, pt.im) + matmul(hv.im, pt.re);
  return {yre + g.constant(noise.re), yim + g.constant(noise.im)};
}

void register_pilot(ParameterStore& store, const PilotMatrix& pilots) {
  const ComplexBatch b = to_batch(pilots.p);
  store.add(kPilotRe, b.re);
  store.add(kPilotIm, b.im);
}

PilotMatrix pilot_from_store(const ParameterStore& store, PilotKind kind) {
  const Tensor& re = store.value(kPilotRe);
  const Tensor& im = store.value(kPilotIm);
  PilotMatrix out;
  out.kind = kind;
  out.p.resize(static_cast<Eigen::Index>(re.rows()), static_cast<Eigen::Index>(re.cols()));
  for (std::size_t r = 0; r < re.rows(); ++r)
    for (std::size_t c = 0; c < re.cols(); ++c) out.p(r, c) = {re(r, c), im(r, c)};
  return out;
}

void project_pilot(ParameterStore& store, PilotConstraint constraint) {
  Tensor re = store.value(kPilotRe);
  Tensor im = store.value(kPilotIm);
  const std::size_t rows = re.rows(), cols = re.cols();
  if (constraint == PilotConstraint::kFrobenius) {
    double energy = 0.0;
    for (std::size_t i = 0; i < re.size(); ++i)
      energy += re.data[i] * re.data[i] + im.data[i] * im.data[i];
    require(energy > 0.0, ErrorCode::kDegenerateOutput, "pilot matrix collapsed to zero");
    const double f = std::sqrt(static_cast<double>(cols) / energy);
    for (std::size_t i = 0; i < re.size(); ++i) {
      re.data[i] *= f;
      im.data[i] *= f;
    }
  } else {
    const double target = static_cast<double>(cols) / static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      double energy = 0.0;
      for (std::size_t c = 0; c < cols; ++c) energy += re(r, c) * re(r, c) + im(r, c) * im(r, c);
      require(energy > 0.0, ErrorCode::kDegenerateOutput, "pilot row collapsed to zero");
      const double f = std::sqrt(target / energy);
      for (std::size_t c = 0; c < cols; ++c) {
        re(r, c) *= f;
        im(r, c) *= f;
      }
    }
  }
  store.assign(kPilotRe, std::move(re));
  store.assign(kPilotIm, std::move(im));
}

}  // namespace vqmimo
