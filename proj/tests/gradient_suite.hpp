#pragma once

#include <functional>
#include <string>
#include <vector>

#include "support.hpp"
#include "vqmimo/covariance.hpp"
#include "vqmimo/networks.hpp"
#include "vqmimo/pilot.hpp"
#include "vqmimo/precoding.hpp"
#include "vqmimo/training.hpp"
#include "vqmimo/vq.hpp"

namespace testing_support {

struct GradientCase {
  std::string name;
  // Returns the worst relative error of one random instance.
  std::function<double(std::mt19937_64&)> run;
};

inline double unary_case(std::mt19937_64& rng, Var (*op)(Var), double lo, double hi) {
  Graph g;
  Var a = g.leaf(random_tensor({3, 4}, rng, lo, hi));
  return gradient_check(g, random_projection(op(a), rng), {a});
}

inline double binary_case(std::mt19937_64& rng, Var (*op)(Var, Var), std::vector<std::size_t> sa,
                          std::vector<std::size_t> sb) {
  Graph g;
  Var a = g.leaf(random_tensor(sa, rng));
  Var b = g.leaf(random_tensor(sb, rng));
  return gradient_check(g, random_projection(op(a, b), rng), {a, b});
}

inline vqmimo::ArrayGeometry small_geometry() {
  vqmimo::ArrayGeometry geo;
  geo.n_v = 2;
  geo.n_h = 2;
  return geo;
}

/// Gaussian NLL node: returns the error for mu (re and im) and c, and h.
inline double nll_case(std::mt19937_64& rng) {
  const auto dict = vqmimo::build_dictionary(small_geometry());
  const std::size_t n = 4, batch = 2;
  Graph g;
  Var hre = g.leaf(random_tensor({batch, n}, rng));
  Var him = g.leaf(random_tensor({batch, n}, rng));
  Var mre = g.leaf(random_tensor({batch, n}, rng));
  Var mim = g.leaf(random_tensor({batch, n}, rng));
  Var c = g.leaf(random_tensor({batch, 4 * n}, rng, 0.2, 2.0));
  Var root = vqmimo::sum(vqmimo::gaussian_nll_node({hre, him}, {mre, mim}, c, dict));
  return gradient_check(g, root, {mre, mim, c, hre, him});
}

inline double mse_case(std::mt19937_64& rng) {
  Graph g;
  Var hre = g.leaf(random_tensor({2, 4}, rng));
  Var him = g.leaf(random_tensor({2, 4}, rng));
  Var mre = g.leaf(random_tensor({2, 4}, rng));
  Var mim = g.leaf(random_tensor({2, 4}, rng));
  return gradient_check(g, random_projection(vqmimo::mse_node({hre, him}, {mre, mim}), rng),
                        {hre, him, mre, mim});
}

/// Codebook gradient of the lookup and of the codebook loss term.
inline double codebook_case(std::mt19937_64& rng) {
  Graph g;
  Var z = g.constant(random_tensor({3, 4}, rng));
  Var cb = g.leaf(random_tensor({8, 2}, rng));
  Var q = vqmimo::vq_lookup(z, cb);
  Var root = random_projection(q, rng) + vqmimo::sum(vqmimo::vq_loss_terms(z, q, 0.25).codebook);
  return gradient_check(g, root, {cb});
}

/// Commitment term w.r.t. z (the selected codewords are locally constant).
inline double commitment_case(std::mt19937_64& rng) {
  Graph g;
  Var z = g.leaf(random_tensor({3, 4}, rng));
  Var cb = g.constant(random_tensor({8, 2}, rng));
  Var q = vqmimo::vq_lookup(z, cb);
  return gradient_check(g, vqmimo::sum(vqmimo::vq_loss_terms(z, q, 0.25).commitment), {z});
}

/// Straight-through contract: dL/dz from backward equals central differences
/// of L(f) w.r.t. f at f = q.
inline double straight_through_case(std::mt19937_64& rng) {
  const Tensor zv = random_tensor({2, 4}, rng);
  const Tensor cb = random_tensor({8, 2}, rng);
  const Tensor w1 = random_tensor({4, 3}, rng);
  const Tensor w2 = random_tensor({2, 3}, rng);
  auto downstream = [&](Var f) {
    Graph& g = *f.graph;
    return vqmimo::sum(vqmimo::mul(vqmimo::softplus(vqmimo::matmul(f, g.constant(w1))),
                                   g.constant(w2)));
  };
  Graph g;
  Var z = g.leaf(zv);
  Var f = vqmimo::straight_through(z, vqmimo::vq_lookup(z, g.constant(cb)));
  Var root = downstream(f);
  g.backward(root);
  const Tensor dz = g.grad(z);

  Graph h;
  Var fl = h.leaf(f.value());
  const auto numeric = numeric_gradient(h, downstream(fl), fl);
  return relative_error(dz.data, numeric);
}

inline double sum_rate_case(std::mt19937_64& rng) {
  const std::size_t users = 3, groups = 2, n = 4;
  Graph g;
  Var hre = g.leaf(random_tensor({groups * users, n}, rng));
  Var him = g.leaf(random_tensor({groups * users, n}, rng));
  Var vre = g.leaf(random_tensor({groups * users, n}, rng));
  Var vim = g.leaf(random_tensor({groups * users, n}, rng));
  Var root = random_projection(vqmimo::sum_rate_node({hre, him}, {vre, vim}, users, 0.3), rng);
  return gradient_check(g, root, {hre, him, vre, vim});
}

inline double pilot_case(std::mt19937_64& rng) {
  Graph g;
  Var pre = g.leaf(random_tensor({2, 4}, rng));
  Var pim = g.leaf(random_tensor({2, 4}, rng));
  vqmimo::ComplexBatch h{random_tensor({3, 4}, rng), random_tensor({3, 4}, rng)};
  vqmimo::ComplexBatch noise{random_tensor({3, 2}, rng, -0.1, 0.1),
                             random_tensor({3, 2}, rng, -0.1, 0.1)};
  const vqmimo::CVar y = vqmimo::learnable_pilot_forward(g, {pre, pim}, h, noise);
  Var root = vqmimo::sum(vqmimo::square(y.re)) + vqmimo::sum(vqmimo::square(y.im));
  return gradient_check(g, root, {pre, pim});
}

inline std::vector<GradientCase> primitive_cases() {
  using namespace vqmimo;
  std::vector<GradientCase> cases = {
      {"add", [](auto& r) { return binary_case(r, add, {3, 4}, {3, 4}); }},
      {"sub", [](auto& r) { return binary_case(r, sub, {3, 4}, {3, 4}); }},
      {"mul", [](auto& r) { return binary_case(r, mul, {3, 4}, {3, 4}); }},
      {"matmul", [](auto& r) { return binary_case(r, matmul, {3, 4}, {4, 2}); }},
      {"add_bias", [](auto& r) { return binary_case(r, add_bias, {3, 4}, {1, 4}); }},
      {"mul_rows", [](auto& r) { return binary_case(r, mul_rows, {3, 4}, {3, 1}); }},
      {"softplus", [](auto& r) { return unary_case(r, softplus, -2, 2); }},
      {"exp", [](auto& r) { return unary_case(r, exp, -2, 2); }},
      {"log", [](auto& r) { return unary_case(r, log, 0.2, 2); }},
      {"square", [](auto& r) { return unary_case(r, square, -2, 2); }},
      {"rsqrt", [](auto& r) { return unary_case(r, rsqrt, 0.2, 2); }},
      {"transpose", [](auto& r) { return unary_case(r, transpose, -2, 2); }},
      {"sum", [](auto& r) { return unary_case(r, sum, -2, 2); }},
      {"mean", [](auto& r) { return unary_case(r, mean, -2, 2); }},
      {"norm", [](auto& r) { return unary_case(r, norm, -2, 2); }},
      {"sum_cols", [](auto& r) { return unary_case(r, sum_cols, -2, 2); }},
      {"scale",
       [](auto& r) {
         Graph g;
         Var a = g.leaf(random_tensor({3, 4}, r));
         return gradient_check(g, random_projection(scale(a, -1.7), r), {a});
       }},
      {"add_scalar",
       [](auto& r) {
         Graph g;
         Var a = g.leaf(random_tensor({3, 4}, r));
         return gradient_check(g, random_projection(add_scalar(a, 0.3), r), {a});
       }},
      {"group_sum_rows",
       [](auto& r) {
         Graph g;
         Var a = g.leaf(random_tensor({6, 3}, r));
         return gradient_check(g, random_projection(group_sum_rows(a, 3), r), {a});
       }},
      {"group_expand_rows",
       [](auto& r) {
         Graph g;
         Var a = g.leaf(random_tensor({2, 3}, r));
         return gradient_check(g, random_projection(group_expand_rows(a, 3), r), {a});
       }},
      {"concat_cols",
       [](auto& r) {
         Graph g;
         Var a = g.leaf(random_tensor({3, 2}, r));
         Var b = g.leaf(random_tensor({3, 3}, r));
         return gradient_check(g, random_projection(concat_cols({a, b}), r), {a, b});
       }},
      {"slice_cols",
       [](auto& r) {
         Graph g;
         Var a = g.leaf(random_tensor({3, 5}, r));
         return gradient_check(g, random_projection(slice_cols(a, 1, 4), r), {a});
       }},
      {"complex_matmul",
       [](auto& r) {
         Graph g;
         CVar a{g.leaf(random_tensor({3, 4}, r)), g.leaf(random_tensor({3, 4}, r))};
         CVar b{g.leaf(random_tensor({4, 2}, r)), g.leaf(random_tensor({4, 2}, r))};
         const CVar c = cmatmul(a, b);
         Var root = random_projection(c.re, r) + random_projection(c.im, r);
         return gradient_check(g, root, {a.re, a.im, b.re, b.im});
       }},
      {"gaussian_nll", nll_case},
      {"mse", mse_case},
      {"vq_codebook", codebook_case},
      {"vq_commitment", commitment_case},
      {"straight_through", straight_through_case},
      {"sum_rate", sum_rate_case},
      {"pilot_forward", pilot_case},
  };
  return cases;
}

inline vqmimo::NetworkShape tiny_shape() {
  vqmimo::NetworkShape s;
  s.geometry = small_geometry();
  s.n_pilots = 2;
  s.latent_dim = 4;
  s.codeword_dim = 2;
  s.codebook_size = 8;
  s.enc_hidden1 = 12;
  s.enc_hidden2 = 8;
  s.dec_hidden1 = 8;
  s.dec_hidden2 = 12;
  s.gnn_features = 8;
  s.gnn_layers = 2;
  return s;
}

/// End-to-end pipeline (N=4, J=2, N_L=4): backward through the production
/// graph against central differences of the straight-through surrogate, in
/// which the quantizer is replaced by z + (q0 - z0) and the codeword
/// selection is frozen at the base point. Returns the worst relative error
/// over all parameters.
inline double pipeline_case(std::mt19937_64& rng, vqmimo::FeedbackMode mode) {
  using namespace vqmimo;
  NetworkShape shape = tiny_shape();
  shape.mode = mode;
  TrainConfig tc;
  tc.seed = rng();
  ModelCheckpoint ck = init_model(shape, tc);
  ensure_gnn(ck, shape);
  // Spread the codewords so that the selection is stable under perturbation.
  ck.params.assign(kCodebook, random_tensor({8, 2}, rng, -1.0, 1.0));
  const auto dict = build_dictionary(shape.geometry);
  const std::size_t users = 2, groups = 2;
  std::vector<CVector> rows;
  for (std::size_t i = 0; i < users * groups; ++i) rows.push_back(random_cvector(4, rng));
  const ComplexBatch h = to_batch(rows);
  Rng nr(rng());
  const ComplexBatch noise = draw_noise(users * groups, 2, 0.1, nr);
  const double sigma2 = 0.1, rho = 1.0, beta = 0.25;

  Graph g;
  const ParamBinder bind(g, ck.params);
  const PipelineGraph p = build_pipeline_graph(bind, dict, mode, h, noise, users, sigma2, rho, beta);
  g.backward(p.loss);
  const Tensor z0 = p.feedback.enc.z.value();
  const Tensor q0 = p.feedback.q.value();

  Graph s;
  const ParamBinder sb(s, ck.params);
  const CVar y = learnable_pilot_forward(s, {sb(kPilotRe), sb(kPilotIm)}, h, noise);
  const EncoderOutput enc = encode(sb, dict, y);
  Var q_sel = vq_lookup(s.constant(z0), sb(kCodebook));
  Var f = enc.z + s.constant(kernels::sub(q0, z0));
  const DecoderOutput dec = decode(sb, mode, f);
  const CVar hv{s.constant(h.re), s.constant(h.im)};
  Var rec = mode == FeedbackMode::kStatistical ? gaussian_nll_node(hv, dec.mu, *dec.c, dict)
                                               : mse_node(hv, dec.mu);
  Var cbk = sum_cols(square(s.constant(z0) - q_sel));
  Var com = scale(sum_cols(square(enc.z - s.constant(q0))), beta);
  Var c = dec.c ? *dec.c : s.constant(Tensor::matrix(h.rows(), 16, 1.0));
  const CVar v = gnn_precode(sb, dec.mu, c, users, sigma2, rho);
  Var rate = sum_rate_node(hv, v, users, sigma2);
  Var loss = mean(rec + cbk + com) - mean(rate);

  double worst = std::abs(loss.value().item() - p.loss.value().item()) /
                 std::max(1.0, std::abs(p.loss.value().item()));
  for (const std::string& name : ck.params.names()) {
    const auto live = g.find(name);
    const auto sur = s.find(name);
    if (!live || !sur) continue;
    const auto numeric = numeric_gradient(s, loss, *sur);
    worst = std::max(worst, relative_error(g.grad(*live).data, numeric, 1e-6));
  }
  return worst;
}

}  // namespace testing_support
