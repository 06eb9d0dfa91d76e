#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vqmimo/channel.hpp"
#include "vqmimo/networks.hpp"
#include "vqmimo/precoding.hpp"
#include "vqmimo/training.hpp"

namespace vqmimo {

/// Flat key=value settings. Only documented keys are accepted; values are
/// checked when resolved.
class ConfigMap {
 public:
  ConfigMap();  // every key at its desk-scale default

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  /// "key=value" lines in key order.
  std::string to_text() const;
  const std::map<std::string, std::string>& entries() const { return values_; }

  /// Applies `key=value` lines; '#' starts a comment. `origin` names the
  /// source in error messages.
  void merge_text(const std::string& text, const std::string& origin);
  void apply_paper_scale();

  static std::vector<std::string> known_keys();
  static std::string describe_keys();

 private:
  std::map<std::string, std::string> values_;
};

ConfigMap load_config_file(const std::string& path);

struct ExperimentConfig {
  ArrayGeometry geometry;
  std::size_t num_scenarios = 200;
  std::size_t samples_per_scenario = 30;
  std::size_t eval_samples = 2000;

  NetworkShape shape;
  TrainConfig train;

  double rho = 1.0;
  double snr_db = 15.0;
  int users = 4;
  std::size_t constellations = 100;
  int swmmse_samples = 32;
  WmmseOptions wmmse;
  std::vector<int> j_list;
  std::vector<int> n_pilots_list;
  std::vector<int> codebook_size_list;
  std::vector<std::string> methods;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string dataset_path;
  std::string checkpoint_dir;

  DatasetConfig dataset_config() const;
  double noise_variance() const;
};

ExperimentConfig resolve_config(const ConfigMap& map);

}  // namespace vqmimo
