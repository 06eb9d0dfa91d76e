#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vqmimo/channel.hpp"
#include "vqmimo/checkpoint.hpp"
#include "vqmimo/covariance.hpp"
#include "vqmimo/networks.hpp"
#include "vqmimo/pilot.hpp"
#include "vqmimo/vq.hpp"

namespace vqmimo {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::optional<double> finetune_learning_rate;  // default learning_rate / 10
  int batch_size = 64;
  int pretrain_epochs = 10;
  int finetune_epochs = 10;
  int users = 4;
  double snr_db = 15.0;
  bool randomize_users = false;
  int max_users = 8;
  bool randomize_snr = false;
  double snr_min_db = 5.0;
  double snr_max_db = 20.0;
  double beta = 0.25;
  double rho = 1.0;
  double clip_norm = 10.0;
  bool learn_pilot = true;
  PilotConstraint pilot_constraint = PilotConstraint::kFrobenius;
  std::uint64_t seed = 1;
};

double finetune_rate(const TrainConfig& config);
double noise_variance_from_snr_db(double snr_db);

struct TrainLog {
  std::vector<double> epoch_loss;
  std::vector<std::size_t> codeword_usage;  // selections per codeword in the last epoch
};

/// Constellation draws restricted to one split: J distinct scenarios, then
/// one sample of each.
class ConstellationSampler {
 public:
  ConstellationSampler(const ChannelDataset& dataset, const std::vector<std::uint64_t>& split);
  std::vector<std::uint64_t> draw(std::size_t users, Rng& rng) const;
  std::size_t scenario_count() const { return scenarios_.size(); }

 private:
  std::vector<std::uint32_t> scenarios_;
  std::vector<std::vector<std::uint64_t>> samples_;
};

struct Constellation {
  std::vector<std::uint64_t> samples;
  double noise_variance = 0.0;
};

Constellation sample_constellation(const ConstellationSampler& sampler, std::size_t users,
                                   double noise_variance, Rng& rng);

/// Observation, encoding, quantization and decoding for a batch of users,
/// with the per-sample VQ-VAE loss.
struct FeedbackGraph {
  CVar y;
  EncoderOutput enc;
  Var q;  // nearest codewords
  Var f;  // straight-through quantized latent
  DecoderOutput dec;
  Var reconstruction;  // Gaussian NLL or squared error, [B,1]
  VqLossTerms vq;
  Var sample_loss;  // reconstruction + codebook + commitment, [B,1]
};

FeedbackGraph build_feedback_graph(const ParamBinder& bind, const AngularDictionary& dict,
                                   FeedbackMode mode, const ComplexBatch& h,
                                   const ComplexBatch& noise, double beta);

struct PipelineGraph {
  FeedbackGraph feedback;
  CVar v;     // precoders, [B,N]
  Var rate;   // per constellation, [K,1]
  Var loss;   // mean VQ-VAE loss + mean negative sum rate
};

/// Full pipeline for K constellations of `users` users stacked row-wise.
PipelineGraph build_pipeline_graph(const ParamBinder& bind, const AngularDictionary& dict,
                                   FeedbackMode mode, const ComplexBatch& h,
                                   const ComplexBatch& noise, std::size_t users, double sigma2,
                                   double rho, double beta);

Fingerprint make_fingerprint(const NetworkShape& shape, const TrainConfig& config);

/// Fresh model: DFT-initialized pilots plus encoder, codebook and decoder.
ModelCheckpoint init_model(const NetworkShape& shape, const TrainConfig& config);

/// Adds GNN parameters seeded from the checkpoint fingerprint, if absent.
void ensure_gnn(ModelCheckpoint& ckpt, const NetworkShape& shape);

ModelCheckpoint pretrain(const ChannelDataset& dataset, const NetworkShape& shape,
                         const TrainConfig& config, TrainLog* log = nullptr);

ModelCheckpoint finetune(const ModelCheckpoint& base, const ChannelDataset& dataset,
                         const NetworkShape& shape, const TrainConfig& config,
                         TrainLog* log = nullptr);

/// One fine-tuning optimizer step on the given constellations (exposed for
/// tests); returns the batch loss.
double finetune_step(ModelCheckpoint& ckpt, const AngularDictionary& dict, const ComplexBatch& h,
                     const ComplexBatch& noise, std::size_t users, double sigma2,
                     const TrainConfig& config, double lr);

}  // namespace vqmimo
