#include "vqmimo/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vqmimo/error.hpp"
#include "vqmimo/precoding.hpp"

namespace vqmimo {

namespace {

constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamShuffle = 2;
constexpr std::uint64_t kStreamNoise = 3;
constexpr std::uint64_t kStreamGnnInit = 4;
constexpr std::uint64_t kStreamConstellation = 5;

ComplexBatch gather(const ChannelDataset& ds, const std::vector<std::uint64_t>& ids) {
  std::vector<CVector> rows;
  rows.reserve(ids.size());
  for (std::uint64_t i : ids) rows.push_back(ds.channels[i]);
  return to_batch(rows);
}

ParamBinder::Predicate trainable_for(bool learn_pilot) {
  return [learn_pilot](const std::string& name) {
    return learn_pilot || (name != kPilotRe && name != kPilotIm);
  };
}

double draw_noise_variance(const TrainConfig& c, Rng& rng) {
  if (!c.randomize_snr) return noise_variance_from_snr_db(c.snr_db);
  std::uniform_real_distribution<double> u(c.snr_min_db, c.snr_max_db);
  return noise_variance_from_snr_db(u(rng));
}

std::size_t draw_users(const TrainConfig& c, Rng& rng) {
  if (!c.randomize_users) return static_cast<std::size_t>(c.users);
  std::uniform_int_distribution<int> u(2, std::max(2, c.max_users));
  return static_cast<std::size_t>(u(rng));
}

double apply_step(ModelCheckpoint& ckpt, Graph& g, Var loss, const TrainConfig& config,
                  double lr) {
  g.backward(loss);
  GradientMap grads = g.named_gradients();
  for (const auto& [name, grad] : grads)
    require(grad.all_finite(), ErrorCode::kNonFinite,
            "non-finite gradient for parameter '" + name + "'");
  clip_global_norm(grads, config.clip_norm);
  ckpt.params.adam_step(grads, lr);
  if (ckpt.fingerprint.learn_pilot) project_pilot(ckpt.params, config.pilot_constraint);
  return loss.value().item();
}

}  // namespace

double finetune_rate(const TrainConfig& config) {
  return config.finetune_learning_rate.value_or(config.learning_rate / 10.0);
}

double noise_variance_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

ConstellationSampler::ConstellationSampler(const ChannelDataset& ds,
                                           const std::vector<std::uint64_t>& split) {
  std::map<std::uint32_t, std::vector<std::uint64_t>> by_scenario;
  for (std::uint64_t i : split) by_scenario[ds.scenario_of.at(i)].push_back(i);
  for (auto& [s, ids] : by_scenario) {
    scenarios_.push_back(s);
    samples_.push_back(std::move(ids));
  }
}

std::vector<std::uint64_t> ConstellationSampler::draw(std::size_t users, Rng& rng) const {
  require(users >= 1 && users <= scenarios_.size(), ErrorCode::kInvalidArgument,
          "sample_constellation: J = " + std::to_string(users) + " but split has only " +
              std::to_string(scenarios_.size()) + " scenarios");
  std::vector<std::size_t> slots(scenarios_.size());
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
  std::vector<std::uint64_t> out;
  for (std::size_t j = 0; j < users; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, slots.size() - 1);
    std::swap(slots[j], slots[pick(rng)]);
    const auto& ids = samples_[slots[j]];
    std::uniform_int_distribution<std::size_t> which(0, ids.size() - 1);
    out.push_back(ids[which(rng)]);
  }
  return out;
}

Constellation sample_constellation(const ConstellationSampler& sampler, std::size_t users,
                                   double noise_variance, Rng& rng) {
  return {sampler.draw(users, rng), noise_variance};
}

FeedbackGraph build_feedback_graph(const ParamBinder& bind, const AngularDictionary& dict,
                                   FeedbackMode mode, const ComplexBatch& h,
                                   const ComplexBatch& noise, double beta) {
  Graph& g = bind.graph();
  FeedbackGraph fb;
  fb.y = learnable_pilot_forward(g, {bind(kPilotRe), bind(kPilotIm)}, h, noise);
  fb.enc = encode(bind, dict, fb.y);
  fb.q = vq_lookup(fb.enc.z, bind(kCodebook));
  fb.f = straight_through(fb.enc.z, fb.q);
  fb.dec = decode(bind, mode, fb.f);
  const CVar hv{g.constant(h.re), g.constant(h.im)};
  if (mode == FeedbackMode::kStatistical)
    fb.reconstruction = gaussian_nll_node(hv, fb.dec.mu, *fb.dec.c, dict);
  else
    fb.reconstruction = mse_node(hv, fb.dec.mu);
  fb.vq = vq_loss_terms(fb.enc.z, fb.q, beta);
  fb.sample_loss = fb.reconstruction + fb.vq.codebook + fb.vq.commitment;
  return fb;
}

PipelineGraph build_pipeline_graph(const ParamBinder& bind, const AngularDictionary& dict,
                                   FeedbackMode mode, const ComplexBatch& h,
                                   const ComplexBatch& noise, std::size_t users, double sigma2,
                                   double rho, double beta) {
  Graph& g = bind.graph();
  PipelineGraph p;
  p.feedback = build_feedback_graph(bind, dict, mode, h, noise, beta);
  const Var c = p.feedback.dec.c
                    ? *p.feedback.dec.c
                    : g.constant(Tensor::matrix(h.rows(), static_cast<std::size_t>(dict.atoms()), 1.0));
  p.v = gnn_precode(bind, p.feedback.dec.mu, c, users, sigma2, rho);
  p.rate = sum_rate_node({g.constant(h.re), g.constant(h.im)}, p.v, users, sigma2);
  p.loss = mean(p.feedback.sample_loss) - mean(p.rate);
  return p;
}

Fingerprint make_fingerprint(const NetworkShape& shape, const TrainConfig& config) {
  Fingerprint f;
  f.n_v = shape.geometry.n_v;
  f.n_h = shape.geometry.n_h;
  f.n_pilots = shape.n_pilots;
  f.latent_dim = shape.latent_dim;
  f.codeword_dim = shape.codeword_dim;
  f.codebook_size = shape.codebook_size;
  f.mode = shape.mode;
  f.learn_pilot = config.learn_pilot;
  f.beta = config.beta;
  f.seed = config.seed;
  return f;
}

ModelCheckpoint init_model(const NetworkShape& shape, const TrainConfig& config) {
  feedback_bits(shape.latent_dim, shape.codeword_dim, shape.codebook_size);
  ModelCheckpoint ckpt;
  ckpt.stage = Stage::kPretrain;
  ckpt.fingerprint = make_fingerprint(shape, config);
  Rng rng(derive_seed(config.seed, kStreamInit));
  PilotMatrix pilots = build_dft_pilots(shape.geometry, shape.n_pilots);
  pilots.kind = config.learn_pilot ? PilotKind::kLearnable : PilotKind::kFixedDft;
  init_vqvae_parameters(ckpt.params, shape, pilots, rng);
  return ckpt;
}

void ensure_gnn(ModelCheckpoint& ckpt, const NetworkShape& shape) {
  if (has_gnn_parameters(ckpt.params)) return;
  Rng rng(derive_seed(ckpt.fingerprint.seed, kStreamGnnInit));
  init_gnn_parameters(ckpt.params, shape, rng);
}

namespace {

void count_usage(const Tensor& z, const Tensor& codebook, std::vector<std::size_t>& usage) {
  const std::size_t ne = codebook.cols();
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t s = 0; s < z.cols(); s += ne)
      ++usage[nearest_codeword(&z.data[r * z.cols() + s], codebook)];
}

}  // namespace

ModelCheckpoint pretrain(const ChannelDataset& ds, const NetworkShape& shape,
                         const TrainConfig& config, TrainLog* log) {
  require(ds.geometry == shape.geometry, ErrorCode::kFingerprintMismatch,
          "pretrain: dataset geometry does not match the network configuration");
  require(!ds.pretrain.empty(), ErrorCode::kInvalidArgument, "pretrain: empty pre-training split");
  require(config.batch_size >= 1, ErrorCode::kInvalidArgument, "pretrain: batch size must be >= 1");
  ModelCheckpoint ckpt = init_model(shape, config);
  const AngularDictionary dict = build_dictionary(shape.geometry);
  Rng shuffle_rng(derive_seed(config.seed, kStreamShuffle));
  Rng noise_rng(derive_seed(config.seed, kStreamNoise));
  std::vector<std::uint64_t> order = ds.pretrain;
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    if (log) log->codeword_usage.assign(static_cast<std::size_t>(shape.codebook_size), 0);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::vector<std::uint64_t> ids(
          order.begin() + static_cast<std::ptrdiff_t>(start),
          order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + batch)));
      const double sigma2 = draw_noise_variance(config, noise_rng);
      const ComplexBatch h = gather(ds, ids);
      const ComplexBatch noise = draw_noise(ids.size(), static_cast<std::size_t>(shape.n_pilots),
                                            sigma2, noise_rng);
      try {
        Graph g;
        const ParamBinder bind(g, ckpt.params, trainable_for(ckpt.fingerprint.learn_pilot));
        const FeedbackGraph fb = build_feedback_graph(bind, dict, shape.mode, h, noise, config.beta);
        if (log) count_usage(fb.enc.z.value(), ckpt.params.value(kCodebook), log->codeword_usage);
        const double loss = apply_step(ckpt, g, mean(fb.sample_loss), config, config.learning_rate);
        total += loss * static_cast<double>(ids.size());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonFinite && e.code() != ErrorCode::kNumerical) throw;
        fail(e.code(), "pretrain aborted at epoch " + std::to_string(epoch) + ", batch starting at sample " +
                           std::to_string(ids.front()) + ": " + e.what());
      }
    }
    if (log) log->epoch_loss.push_back(total / static_cast<double>(order.size()));
  }
  return ckpt;
}

double finetune_step(ModelCheckpoint& ckpt, const AngularDictionary& dict, const ComplexBatch& h,
                     const ComplexBatch& noise, std::size_t users, double sigma2,
                     const TrainConfig& config, double lr) {
  Graph g;
  const ParamBinder bind(g, ckpt.params, trainable_for(ckpt.fingerprint.learn_pilot));
  const PipelineGraph p = build_pipeline_graph(bind, dict, ckpt.fingerprint.mode, h, noise, users,
                                               sigma2, config.rho, config.beta);
  return apply_step(ckpt, g, p.loss, config, lr);
}

ModelCheckpoint finetune(const ModelCheckpoint& base, const ChannelDataset& ds,
                         const NetworkShape& shape, const TrainConfig& config, TrainLog* log) {
  require(base.stage == Stage::kPretrain, ErrorCode::kInvalidArgument,
          "finetune: expected a pre-training checkpoint");
  check_compatible(make_fingerprint(shape, config), base.fingerprint, "finetune");
  require(ds.geometry == shape.geometry, ErrorCode::kFingerprintMismatch,
          "finetune: dataset geometry does not match the network configuration");
  require(!ds.finetune.empty(), ErrorCode::kInvalidArgument, "finetune: empty fine-tuning split");

  ModelCheckpoint ckpt;
  ckpt.fingerprint = base.fingerprint;
  ckpt.stage = Stage::kFinetune;
  ckpt.params = base.params;
  ckpt.params.reset_optimizer_state();
  ensure_gnn(ckpt, shape);

  const AngularDictionary dict = build_dictionary(shape.geometry);
  const ConstellationSampler sampler(ds, ds.finetune);
  Rng rng(derive_seed(config.seed, kStreamConstellation));
  Rng noise_rng(derive_seed(config.seed, kStreamNoise + 100));
  const double lr = finetune_rate(config);

  for (int epoch = 0; epoch < config.finetune_epochs; ++epoch) {
    double total = 0.0;
    std::size_t seen = 0, steps = 0;
    while (seen < ds.finetune.size()) {
      const std::size_t users = draw_users(config, rng);
      const std::size_t per_batch =
          std::max<std::size_t>(1, static_cast<std::size_t>(config.batch_size) / users);
      const double sigma2 = draw_noise_variance(config, noise_rng);
      std::vector<std::uint64_t> ids;
      for (std::size_t k = 0; k < per_batch; ++k) {
        const Constellation c = sample_constellation(sampler, users, sigma2, rng);
        ids.insert(ids.end(), c.samples.begin(), c.samples.end());
      }
      const ComplexBatch h = gather(ds, ids);
      const ComplexBatch noise =
          draw_noise(ids.size(), static_cast<std::size_t>(shape.n_pilots), sigma2, noise_rng);
      try {
        total += finetune_step(ckpt, dict, h, noise, users, sigma2, config, lr);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonFinite && e.code() != ErrorCode::kNumerical) throw;
        fail(e.code(), "finetune aborted at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(steps) + " (first sample " + std::to_string(ids.front()) +
                           "): " + e.what());
      }
      seen += ids.size();
      ++steps;
    }
    if (log) log->epoch_loss.push_back(total / static_cast<double>(steps));
  }
  return ckpt;
}

}  // namespace vqmimo
