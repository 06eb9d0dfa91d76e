#include "vqmimo/networks.hpp"

#include <cmath>

#include "vqmimo/error.hpp"
#include "vqmimo/vq.hpp"

namespace vqmimo {

namespace {

void add_dense(ParameterStore& store, const std::string& prefix, int in, int out, Rng& rng) {
  const double a = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> u(-a, a);
  Tensor w = Tensor::matrix(static_cast<std::size_t>(in), static_cast<std::size_t>(out));
  Tensor b = Tensor::matrix(1, static_cast<std::size_t>(out));
  for (double& v : w.data) v = u(rng);
  for (double& v : b.data) v = u(rng);
  store.add(prefix + ".w", std::move(w));
  store.add(prefix + ".b", std::move(b));
}

Tensor matrix_part(const CMatrix& m, bool imag, double sign = 1.0) {
  Tensor t = Tensor::matrix(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      t(r, c) = sign * (imag ? m(r, c).imag() : m(r, c).real());
  return t;
}

int count_gnn_layers(const ParameterStore& store) {
  int l = 0;
  while (store.contains("gnn.msg" + std::to_string(l) + ".w")) ++l;
  return l;
}

}  // namespace

const char* mode_name(FeedbackMode mode) {
  return mode == FeedbackMode::kStatistical ? "statistical" : "instantaneous";
}

FeedbackMode parse_mode(const std::string& name) {
  if (name == "statistical") return FeedbackMode::kStatistical;
  if (name == "instantaneous") return FeedbackMode::kInstantaneous;
  fail(ErrorCode::kConfig, "unknown feedback mode '" + name + "'");
}

void init_vqvae_parameters(ParameterStore& store, const NetworkShape& s,
                           const PilotMatrix& pilots, Rng& rng) {
  const int n = s.geometry.size();
  require(pilots.p.cols() == n && pilots.p.rows() == s.n_pilots, ErrorCode::kShapeMismatch,
          "init: pilot matrix does not match network shape");
  require(s.latent_dim % s.codeword_dim == 0, ErrorCode::kInvalidArgument,
          "init: N_E must divide N_L");
  register_pilot(store, pilots);
  if (!s.freeze_coarse_estimator) {
    // Matched filter P^H, stored transposed for row-vector batches: conj(P).
    store.add("enc.gphi.re", matrix_part(pilots.p, false));
    store.add("enc.gphi.im", matrix_part(pilots.p, true, -1.0));
  }
  add_dense(store, "enc.l0", 8 * n, s.enc_hidden1, rng);
  add_dense(store, "enc.l1", s.enc_hidden1, s.enc_hidden2, rng);
  add_dense(store, "enc.out", s.enc_hidden2, s.latent_dim, rng);
  store.add(kCodebook, init_codebook(s.codebook_size, s.codeword_dim, rng));
  add_dense(store, "dec.l0", s.latent_dim, s.dec_hidden1, rng);
  add_dense(store, "dec.l1", s.dec_hidden1, s.dec_hidden2, rng);
  add_dense(store, "dec.mu", s.dec_hidden2, 2 * n, rng);
  if (s.mode == FeedbackMode::kStatistical) add_dense(store, "dec.c", s.dec_hidden2, 4 * n, rng);
}

void init_gnn_parameters(ParameterStore& store, const NetworkShape& s, Rng& rng) {
  const int n = s.geometry.size();
  add_dense(store, "gnn.feat", 6 * n + 1, s.gnn_features, rng);
  for (int l = 0; l < s.gnn_layers; ++l) {
    add_dense(store, "gnn.msg" + std::to_string(l), s.gnn_features, s.gnn_features, rng);
    add_dense(store, "gnn.upd" + std::to_string(l), 2 * s.gnn_features, s.gnn_features, rng);
  }
  add_dense(store, "gnn.out", s.gnn_features, 2 * n, rng);
}

bool has_gnn_parameters(const ParameterStore& store) { return store.contains("gnn.feat.w"); }

Var ParamBinder::operator()(const std::string& name) const {
  const bool trainable = !trainable_ || trainable_(name);
  return store_.bind(graph_, name, trainable);
}

Var dense(const ParamBinder& bind, const std::string& prefix, Var x) {
  return add_bias(matmul(x, bind(prefix + ".w")), bind(prefix + ".b"));
}

EncoderOutput encode(const ParamBinder& bind, const AngularDictionary& dict, CVar y) {
  Graph& g = bind.graph();
  CVar gphi;
  if (bind.store().contains("enc.gphi.re")) {
    gphi = {bind("enc.gphi.re"), bind("enc.gphi.im")};
  } else {
    gphi = {bind(kPilotRe), scale(bind(kPilotIm), -1.0)};
  }
  require(y.re.value().cols() == gphi.re.value().rows(), ErrorCode::kShapeMismatch,
          "encode: observation length " + std::to_string(y.re.value().cols()) +
              " does not match coarse estimator input " +
              std::to_string(gphi.re.value().rows()));
  const CVar coarse = cmatmul(y, gphi);
  const CVar qt{g.constant(matrix_part(dict.q.transpose(), false)),
                g.constant(matrix_part(dict.q.transpose(), true))};
  const CVar x = cmatmul(coarse, qt);
  Var hidden = softplus(dense(bind, "enc.l0", concat_cols({x.re, x.im})));
  hidden = softplus(dense(bind, "enc.l1", hidden));
  return {coarse, dense(bind, "enc.out", hidden)};
}

DecoderOutput decode(const ParamBinder& bind, FeedbackMode mode, Var f) {
  Var hidden = softplus(dense(bind, "dec.l0", f));
  hidden = softplus(dense(bind, "dec.l1", hidden));
  const Var mu = dense(bind, "dec.mu", hidden);
  const std::size_t n = mu.value().cols() / 2;
  DecoderOutput out{{slice_cols(mu, 0, n), slice_cols(mu, n, 2 * n)}, std::nullopt};
  if (mode == FeedbackMode::kStatistical) {
    require(bind.store().contains("dec.c.w"), ErrorCode::kInvalidArgument,
            "decode: statistical mode needs the covariance head");
    out.c = add_scalar(softplus(dense(bind, "dec.c", hidden)), kCovarianceFloor);
  }
  return out;
}

CVar gnn_precode(const ParamBinder& bind, CVar mu, Var c, std::size_t users, double sigma2,
                 double rho) {
  require(users >= 1, ErrorCode::kInvalidArgument, "gnn_precode: J must be >= 1");
  require(sigma2 > 0.0 && rho > 0.0, ErrorCode::kInvalidArgument,
          "gnn_precode: sigma2 and rho must be positive");
  Graph& g = bind.graph();
  const std::size_t rows = mu.re.value().rows();
  const std::size_t n = mu.re.value().cols();
  require(rows % users == 0, ErrorCode::kShapeMismatch,
          "gnn_precode: batch rows not divisible by J");
  const Var noise_feature = g.constant(Tensor::matrix(rows, 1, std::log(sigma2)));
  Var node = softplus(dense(bind, "gnn.feat", concat_cols({mu.re, mu.im, c, noise_feature})));

  const int layers = count_gnn_layers(bind.store());
  for (int l = 0; l < layers; ++l) {
    const std::string tag = std::to_string(l);
    const Var msg = softplus(dense(bind, "gnn.msg" + tag, node));
    Var agg;
    if (users == 1) {
      agg = g.constant(Tensor(msg.value().shape, 0.0));
    } else {
      const Var total = group_expand_rows(group_sum_rows(msg, users), users);
      agg = scale(total - msg, 1.0 / static_cast<double>(users - 1));
    }
    node = softplus(dense(bind, "gnn.upd" + tag, concat_cols({node, agg})));
  }
  const Var raw = dense(bind, "gnn.out", node);
  const CVar v{slice_cols(raw, 0, n), slice_cols(raw, n, 2 * n)};

  const Var power = group_sum_rows(sum_cols(square(v.re)) + sum_cols(square(v.im)), users);
  for (double p : power.value().data)
    require(p > 0.0, ErrorCode::kDegenerateOutput, "gnn_precode: all-zero raw precoders");
  const Var gain = group_expand_rows(rsqrt(scale(power, 1.0 / rho)), users);
  return {mul_rows(v.re, gain), mul_rows(v.im, gain)};
}

}  // namespace vqmimo
