#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vqmimo/linalg.hpp"
#include "vqmimo/rng.hpp"

namespace vqmimo {

/// Uniform rectangular array. Antenna index n = v * n_h + h (vertical-major),
/// matching the Kronecker order of the angular dictionary.
struct ArrayGeometry {
  int n_v = 2;
  int n_h = 8;
  double d_v = 1.0;  // wavelengths
  double d_h = 0.5;

  int size() const { return n_v * n_h; }
  void validate() const;
  bool operator==(const ArrayGeometry&) const = default;
};

struct Cluster {
  double azimuth = 0.0;
  double elevation = 0.0;
  double azimuth_spread = 0.0;
  double elevation_spread = 0.0;
  double gain_variance = 1.0;
};

/// Spatial statistics of one user location.
struct UserScenario {
  std::vector<Cluster> clusters;
  std::uint64_t seed = 0;

  void validate() const;
};

CVector steering_vector(const ArrayGeometry& geometry, double azimuth,
                        double elevation);

/// One ray per cluster with Gaussian angle jitter and a complex Gaussian gain.
CVector sample_channel(const UserScenario& scenario,
                       const ArrayGeometry& geometry, Rng& rng);

/// Scenario prior: P uniform on {1..5}, azimuth uniform on (-pi, pi],
/// elevation uniform on [-pi/6, pi/6], spreads uniform on [1, 10] degrees,
/// gain variances flat-Dirichlet.
UserScenario draw_scenario(Rng& rng);

struct DatasetConfig {
  ArrayGeometry geometry;
  std::size_t num_scenarios = 200;
  std::size_t samples_per_scenario = 30;
  std::size_t eval_samples = 2000;
  std::uint64_t seed = 1;
};

/// Sample k belongs to scenario k % num_scenarios. Training pool is
/// [0, pool - eval); its first half is the pre-training split, the rest the
/// fine-tuning split; the tail is the evaluation split.
struct ChannelDataset {
  ArrayGeometry geometry;
  std::vector<UserScenario> scenarios;
  std::vector<std::uint32_t> scenario_of;
  std::vector<CVector> channels;
  std::vector<std::uint64_t> pretrain;
  std::vector<std::uint64_t> finetune;
  std::vector<std::uint64_t> eval;
  double normalization = 1.0;

  bool operator==(const ChannelDataset& other) const;
};

ChannelDataset build_dataset(const DatasetConfig& config);

/// A new channel from a stored scenario, scaled by the dataset normalization.
CVector fresh_sample(const ChannelDataset& dataset, std::size_t scenario,
                     Rng& rng);

void save_dataset(const ChannelDataset& dataset, const std::string& path);
ChannelDataset load_dataset(const std::string& path);

}  // namespace vqmimo
