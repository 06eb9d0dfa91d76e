#pragma once

#include <functional>
#include <optional>
#include <string>

#include "vqmimo/covariance.hpp"
#include "vqmimo/graph.hpp"
#include "vqmimo/params.hpp"
#include "vqmimo/pilot.hpp"
#include "vqmimo/rng.hpp"

namespace vqmimo {

enum class FeedbackMode { kStatistical, kInstantaneous };

const char* mode_name(FeedbackMode mode);
FeedbackMode parse_mode(const std::string& name);

/// Layer widths used at initialization. Forward passes read shapes from the
/// stored tensors, so a loaded checkpoint carries its own architecture.
struct NetworkShape {
  ArrayGeometry geometry;
  int n_pilots = 4;
  int latent_dim = 8;
  int codeword_dim = 2;
  int codebook_size = 16;
  FeedbackMode mode = FeedbackMode::kStatistical;
  int enc_hidden1 = 256;
  int enc_hidden2 = 128;
  int dec_hidden1 = 128;
  int dec_hidden2 = 256;
  int gnn_features = 128;
  int gnn_layers = 3;
  /// Tie the coarse estimator to the matched filter of the current pilots
  /// instead of learning it.
  bool freeze_coarse_estimator = false;
};

/// Registers pilot ("pilot.*"), coarse estimator and encoder ("enc.*"),
/// codebook ("vq.codebook") and decoder ("dec.*").
void init_vqvae_parameters(ParameterStore& store, const NetworkShape& shape,
                           const PilotMatrix& pilots, Rng& rng);
/// Registers the precoder GNN ("gnn.*").
void init_gnn_parameters(ParameterStore& store, const NetworkShape& shape, Rng& rng);
bool has_gnn_parameters(const ParameterStore& store);

/// Binds stored parameters into a graph; parameters rejected by `trainable`
/// enter as constants.
class ParamBinder {
 public:
  using Predicate = std::function<bool(const std::string&)>;
  ParamBinder(Graph& g, const ParameterStore& store, Predicate trainable = {})
      : graph_(g), store_(store), trainable_(std::move(trainable)) {}
  Var operator()(const std::string& name) const;
  Graph& graph() const { return graph_; }
  const ParameterStore& store() const { return store_; }

 private:
  Graph& graph_;
  const ParameterStore& store_;
  Predicate trainable_;
};

/// x W + b with parameters prefix.w [in,out], prefix.b [1,out].
Var dense(const ParamBinder& bind, const std::string& prefix, Var x);

struct EncoderOutput {
  CVar coarse;  // G_phi(y), [B,N]
  Var z;        // [B,N_L]
};

/// Coarse estimate G_phi y, preprocessing [Re(Q h); Im(Q h)], encoder MLP.
EncoderOutput encode(const ParamBinder& bind, const AngularDictionary& dict, CVar y);

struct DecoderOutput {
  CVar mu;               // [B,N]; the reconstruction in instantaneous mode
  std::optional<Var> c;  // [B,4N], softplus + floor; absent in instantaneous mode
};

DecoderOutput decode(const ParamBinder& bind, FeedbackMode mode, Var f);

/// Shared-weight message passing over the users of each constellation
/// (consecutive groups of `users` rows), then per-constellation power
/// normalization to rho. c is [B,4N]; returns v as [B,N] pairs.
CVar gnn_precode(const ParamBinder& bind, CVar mu, Var c, std::size_t users, double sigma2,
                 double rho);

}  // namespace vqmimo
