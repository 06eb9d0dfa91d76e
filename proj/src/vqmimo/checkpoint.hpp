#pragma once

#include <cstdint>
#include <string>

#include "vqmimo/networks.hpp"
#include "vqmimo/params.hpp"

namespace vqmimo {

enum class Stage : std::uint32_t { kPretrain = 0, kFinetune = 1 };

/// Configuration a checkpoint was trained under.
struct Fingerprint {
  int n_v = 2;
  int n_h = 8;
  int n_pilots = 4;
  int latent_dim = 8;
  int codeword_dim = 2;
  int codebook_size = 16;
  FeedbackMode mode = FeedbackMode::kStatistical;
  bool learn_pilot = true;
  double beta = 0.25;
  std::uint64_t seed = 1;

  bool operator==(const Fingerprint&) const = default;
  std::string describe() const;
};

/// Throws kFingerprintMismatch unless geometry, n_p, N_L, N_E, C and mode agree.
void check_compatible(const Fingerprint& expected, const Fingerprint& actual,
                      const std::string& context);

struct ModelCheckpoint {
  Stage stage = Stage::kPretrain;
  Fingerprint fingerprint;
  ParameterStore params;
};

/// Layout (little-endian): magic "VQMCKPT1", u32 version, u32 stage,
/// u32 n_v, n_h, n_p, N_L, N_E, C, mode, learn_pilot, f64 beta, u64 seed,
/// u32 tensor count, then per tensor: u32 name length, name bytes, u32 rank,
/// u64 extents, f64 values.
std::string serialize_checkpoint(const ModelCheckpoint& ckpt);
ModelCheckpoint deserialize_checkpoint(const std::string& bytes, const std::string& origin);
void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path);
ModelCheckpoint load_checkpoint(const std::string& path);

}  // namespace vqmimo
