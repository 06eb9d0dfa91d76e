#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vqmimo/channel.hpp"
#include "vqmimo/checkpoint.hpp"
#include "vqmimo/config.hpp"

namespace vqmimo {

enum class PrecoderKind { kGnn, kSwmmse, kWmmse, kPerfectWmmse, kMrt, kZf };

struct MethodInfo {
  std::string name;
  std::string legend;
  PrecoderKind precoder = PrecoderKind::kMrt;
  /// Empty for methods that need no trained model.
  std::string family;
  FeedbackMode mode = FeedbackMode::kStatistical;
  bool learn_pilot = false;
  /// The feedback model comes from the pre-training checkpoint.
  bool uses_pretrain_stage = false;
};

/// Throws NotImplemented for the GMM entries and Config for unknown names.
MethodInfo method_info(const std::string& name);
std::vector<std::string> method_names();

/// Model families: stat_learnt, inst_learnt, stat_dft, inst_dft.
FeedbackMode family_mode(const std::string& family);
bool family_learns_pilot(const std::string& family);
std::string checkpoint_path(const std::string& dir, const std::string& family, int n_pilots,
                            int codebook_size, Stage stage);

/// Network shape and training settings for one family at (n_p, C).
NetworkShape family_shape(const ExperimentConfig& cfg, const std::string& family, int n_pilots,
                          int codebook_size);
TrainConfig family_train(const ExperimentConfig& cfg, const std::string& family);

/// Constellations and pilot noise fixed by (seed, J, n_p), shared by all methods.
struct EvaluationSet {
  std::size_t users = 0;
  double noise_variance = 0.0;
  std::vector<std::vector<std::uint64_t>> constellations;
  ComplexBatch pilot_noise;  // [K*J, n_p]
};

EvaluationSet make_evaluation_set(const ChannelDataset& dataset, std::size_t users,
                                  std::size_t constellations, int n_pilots, double noise_variance,
                                  std::uint64_t seed);

struct MethodResult {
  std::vector<double> rates;  // per constellation
  double mean = 0.0;
  double std_err = 0.0;
};

MethodResult summarize(std::vector<double> rates);

/// `model` is required for learned methods and must match the expected
/// fingerprint; it is not modified.
MethodResult evaluate_method(const std::string& method, const ModelCheckpoint* model,
                             const ChannelDataset& dataset, const EvaluationSet& set,
                             const ExperimentConfig& cfg);

struct SweepRow {
  std::string sweep_var;
  double value = 0.0;
  std::string method;
  double mean_sum_rate = 0.0;
  double std_err = 0.0;
  std::size_t n_constellations = 0;
  std::uint64_t seed = 0;

  bool operator==(const SweepRow&) const = default;
};

inline constexpr const char* kCsvHeader =
    "sweep_var,value,method,mean_sum_rate,std_err,n_constellations,seed";

std::string format_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_csv(const std::string& text, const std::string& origin);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

enum class SweepAxis { kUsers, kBits, kPilots };
SweepAxis parse_axis(const std::string& name);
const char* axis_name(SweepAxis axis);

struct SweepOptions {
  bool train_missing = false;
};

/// Checkpoint files a sweep reads, keyed by (value, method).
std::map<std::pair<int, std::string>, std::string> sweep_checkpoints(SweepAxis axis,
                                                                     const ExperimentConfig& cfg);

/// Trains (pre-train then fine-tune) one family and writes both checkpoints.
void train_family(const ChannelDataset& dataset, const ExperimentConfig& cfg,
                  const std::string& family, int n_pilots, int codebook_size);

std::vector<SweepRow> run_sweep(SweepAxis axis, const ChannelDataset& dataset,
                                const ExperimentConfig& cfg, const SweepOptions& opts = {});

/// SVG line chart: one polyline per method with standard-error bars.
std::string render_plot(const std::vector<SweepRow>& rows);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// key=value manifest: command, seed, config snapshot, artifact hashes.
void write_manifest(const std::string& path, const std::string& command, const ConfigMap& config,
                    std::uint64_t seed, const std::vector<std::string>& artifacts);

}  // namespace vqmimo
