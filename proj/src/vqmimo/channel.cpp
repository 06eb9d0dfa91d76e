#include "vqmimo/channel.hpp"

#include <cmath>
#include <fstream>

#include "vqmimo/binio.hpp"
#include "vqmimo/error.hpp"

namespace vqmimo {

namespace {
constexpr char kDatasetMagic[8] = {'V', 'Q', 'M', 'D', 'S', 'E', 'T', '1'};
constexpr std::uint32_t kDatasetVersion = 1;
constexpr double kDeg = kPi / 180.0;
}  // namespace

void ArrayGeometry::validate() const {
  require(n_v >= 1 && n_h >= 1, ErrorCode::kInvalidArgument,
          "geometry: antenna counts must be positive");
  require(d_v > 0.0 && d_h > 0.0, ErrorCode::kInvalidArgument,
          "geometry: spacings must be positive");
}

void UserScenario::validate() const {
  require(!clusters.empty(), ErrorCode::kInvalidArgument,
          "scenario: at least one cluster required");
  double total = 0.0;
  for (const Cluster& c : clusters) {
    require(c.gain_variance >= 0.0, ErrorCode::kInvalidArgument,
            "scenario: negative gain variance");
    require(c.azimuth > -kPi && c.azimuth <= kPi, ErrorCode::kInvalidArgument,
            "scenario: azimuth outside (-pi, pi]");
    require(std::abs(c.elevation) <= kPi / 2, ErrorCode::kInvalidArgument,
            "scenario: elevation outside [-pi/2, pi/2]");
    require(c.azimuth_spread >= 0.0 && c.elevation_spread >= 0.0,
            ErrorCode::kInvalidArgument, "scenario: negative angular spread");
    total += c.gain_variance;
  }
  require(std::abs(total - 1.0) < 1e-9, ErrorCode::kInvalidArgument,
          "scenario: gain variances must sum to 1");
}

CVector steering_vector(const ArrayGeometry& g, double azimuth, double elevation) {
  g.validate();
  require(std::abs(elevation) <= kPi / 2 + 1e-12, ErrorCode::kInvalidArgument,
          "steering_vector: elevation outside [-pi/2, pi/2]");
  const double phase_v = 2.0 * kPi * g.d_v * std::sin(elevation);
  const double phase_h = 2.0 * kPi * g.d_h * std::sin(azimuth) * std::cos(elevation);
  CVector a(g.size());
  for (int v = 0; v < g.n_v; ++v)
    for (int h = 0; h < g.n_h; ++h)
      a(v * g.n_h + h) = std::polar(1.0, phase_v * v + phase_h * h);
  return a;
}

CVector sample_channel(const UserScenario& scenario, const ArrayGeometry& geometry,
                       Rng& rng) {
  std::normal_distribution<double> jitter(0.0, 1.0);
  CVector h = CVector::Zero(geometry.size());
  for (const Cluster& c : scenario.clusters) {
    const cdouble gain = complex_normal(rng, c.gain_variance);
    const double az = c.azimuth + c.azimuth_spread * jitter(rng);
    double el = c.elevation + c.elevation_spread * jitter(rng);
    el = std::clamp(el, -kPi / 2, kPi / 2);
    h += gain * steering_vector(geometry, az, el);
  }
  return h;
}

UserScenario draw_scenario(Rng& rng) {
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> weight(1.0);
  UserScenario s;
  const int p = count(rng);
  double total = 0.0;
  for (int i = 0; i < p; ++i) {
    Cluster c;
    c.azimuth = kPi - 2.0 * kPi * unit(rng);  // (-pi, pi]
    c.elevation = (unit(rng) - 0.5) * (kPi / 3.0);
    c.azimuth_spread = (1.0 + 9.0 * unit(rng)) * kDeg;
    c.elevation_spread = (1.0 + 9.0 * unit(rng)) * kDeg;
    c.gain_variance = weight(rng);
    total += c.gain_variance;
    s.clusters.push_back(c);
  }
  for (Cluster& c : s.clusters) c.gain_variance /= total;
  return s;
}

bool ChannelDataset::operator==(const ChannelDataset& o) const {
  if (!(geometry == o.geometry) || scenario_of != o.scenario_of ||
      pretrain != o.pretrain || finetune != o.finetune || eval != o.eval ||
      normalization != o.normalization || channels.size() != o.channels.size() ||
      scenarios.size() != o.scenarios.size())
    return false;
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i] != o.channels[i]) return false;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& a = scenarios[i];
    const auto& b = o.scenarios[i];
    if (a.seed != b.seed || a.clusters.size() != b.clusters.size()) return false;
    for (std::size_t k = 0; k < a.clusters.size(); ++k) {
      const Cluster& x = a.clusters[k];
      const Cluster& y = b.clusters[k];
      if (x.azimuth != y.azimuth || x.elevation != y.elevation ||
          x.azimuth_spread != y.azimuth_spread ||
          x.elevation_spread != y.elevation_spread ||
          x.gain_variance != y.gain_variance)
        return false;
    }
  }
  return true;
}

ChannelDataset build_dataset(const DatasetConfig& config) {
  config.geometry.validate();
  require(config.num_scenarios >= 1, ErrorCode::kInvalidArgument,
          "dataset: num_scenarios must be positive");
  const std::size_t pool = config.num_scenarios * config.samples_per_scenario;
  require(config.eval_samples <= pool, ErrorCode::kInvalidArgument,
          "dataset: eval size " + std::to_string(config.eval_samples) +
              " exceeds generated pool of " + std::to_string(pool));
  require(pool - config.eval_samples >= 2, ErrorCode::kInvalidArgument,
          "dataset: training pool needs at least two samples");

  ChannelDataset ds;
  ds.geometry = config.geometry;
  for (std::size_t s = 0; s < config.num_scenarios; ++s) {
    Rng rng(derive_seed(config.seed, s));
    UserScenario sc = draw_scenario(rng);
    sc.seed = derive_seed(config.seed ^ 0x5A5A5A5A5A5A5A5AULL, s);
    ds.scenarios.push_back(std::move(sc));
  }

  ds.channels.reserve(pool);
  double energy = 0.0;
  for (std::size_t k = 0; k < pool; ++k) {
    const std::size_t s = k % config.num_scenarios;
    Rng rng(derive_seed(ds.scenarios[s].seed, k / config.num_scenarios));
    ds.channels.push_back(sample_channel(ds.scenarios[s], ds.geometry, rng));
    ds.scenario_of.push_back(static_cast<std::uint32_t>(s));
    energy += ds.channels.back().squaredNorm();
  }
  const double mean_energy = energy / static_cast<double>(pool);
  require(mean_energy > 0.0, ErrorCode::kNumerical, "dataset: zero channel energy");
  ds.normalization = std::sqrt(static_cast<double>(ds.geometry.size()) / mean_energy);
  for (CVector& h : ds.channels) h *= ds.normalization;

  const std::size_t train = pool - config.eval_samples;
  const std::size_t half = train / 2;
  for (std::size_t k = 0; k < half; ++k) ds.pretrain.push_back(k);
  for (std::size_t k = half; k < train; ++k) ds.finetune.push_back(k);
  for (std::size_t k = train; k < pool; ++k) ds.eval.push_back(k);
  return ds;
}

CVector fresh_sample(const ChannelDataset& ds, std::size_t scenario, Rng& rng) {
  require(scenario < ds.scenarios.size(), ErrorCode::kInvalidArgument,
          "fresh_sample: scenario out of range");
  return ds.normalization * sample_channel(ds.scenarios[scenario], ds.geometry, rng);
}

void save_dataset(const ChannelDataset& ds, const std::string& path) {
  binio::make_parent_dirs(path);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  using binio::put;
  os.write(kDatasetMagic, sizeof(kDatasetMagic));
  put<std::uint32_t>(os, kDatasetVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ds.geometry.n_v));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ds.geometry.n_h));
  put<double>(os, ds.geometry.d_v);
  put<double>(os, ds.geometry.d_h);
  put<std::uint64_t>(os, ds.channels.size());
  put<std::uint64_t>(os, ds.scenarios.size());
  put<std::uint64_t>(os, ds.pretrain.size());
  put<std::uint64_t>(os, ds.finetune.size());
  put<std::uint64_t>(os, ds.eval.size());
  put<double>(os, ds.normalization);
  for (const CVector& h : ds.channels)
    for (Eigen::Index n = 0; n < h.size(); ++n) {
      put<double>(os, h(n).real());
      put<double>(os, h(n).imag());
    }
  for (std::uint32_t s : ds.scenario_of) put<std::uint32_t>(os, s);
  for (const auto* table : {&ds.pretrain, &ds.finetune, &ds.eval})
    for (std::uint64_t i : *table) put<std::uint64_t>(os, i);
  for (const UserScenario& sc : ds.scenarios) {
    put<std::uint64_t>(os, sc.seed);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(sc.clusters.size()));
    for (const Cluster& c : sc.clusters) {
      put<double>(os, c.azimuth);
      put<double>(os, c.elevation);
      put<double>(os, c.azimuth_spread);
      put<double>(os, c.elevation_spread);
      put<double>(os, c.gain_variance);
    }
  }
  require(static_cast<bool>(os), ErrorCode::kIo, "write failed for '" + path + "'");
}

ChannelDataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::kIo, "cannot open dataset '" + path + "'");
  using binio::get;
  char magic[8];
  is.read(magic, sizeof(magic));
  require(is && std::equal(magic, magic + 8, kDatasetMagic), ErrorCode::kFormat,
          "'" + path + "' is not a dataset file");
  const auto version = get<std::uint32_t>(is, "version");
  require(version == kDatasetVersion, ErrorCode::kFormat,
          "unsupported dataset version " + std::to_string(version));
  ChannelDataset ds;
  ds.geometry.n_v = static_cast<int>(get<std::uint32_t>(is, "n_v"));
  ds.geometry.n_h = static_cast<int>(get<std::uint32_t>(is, "n_h"));
  ds.geometry.d_v = get<double>(is, "d_v");
  ds.geometry.d_h = get<double>(is, "d_h");
  ds.geometry.validate();
  const auto n_samples = get<std::uint64_t>(is, "sample count");
  const auto n_scenarios = get<std::uint64_t>(is, "scenario count");
  const auto n_pre = get<std::uint64_t>(is, "pretrain count");
  const auto n_fine = get<std::uint64_t>(is, "finetune count");
  const auto n_eval = get<std::uint64_t>(is, "eval count");
  require(n_pre + n_fine + n_eval == n_samples, ErrorCode::kFormat,
          "dataset split counts do not cover the samples");
  ds.normalization = get<double>(is, "normalization");
  const int n = ds.geometry.size();
  ds.channels.reserve(n_samples);
  for (std::uint64_t k = 0; k < n_samples; ++k) {
    CVector h(n);
    for (int i = 0; i < n; ++i) {
      const double re = get<double>(is, "channel");
      const double im = get<double>(is, "channel");
      h(i) = {re, im};
    }
    ds.channels.push_back(std::move(h));
  }
  for (std::uint64_t k = 0; k < n_samples; ++k) {
    ds.scenario_of.push_back(get<std::uint32_t>(is, "scenario id"));
    require(ds.scenario_of.back() < n_scenarios, ErrorCode::kFormat,
            "scenario id out of range");
  }
  auto read_table = [&](std::vector<std::uint64_t>& t, std::uint64_t count) {
    for (std::uint64_t k = 0; k < count; ++k) {
      t.push_back(get<std::uint64_t>(is, "split index"));
      require(t.back() < n_samples, ErrorCode::kFormat, "split index out of range");
    }
  };
  read_table(ds.pretrain, n_pre);
  read_table(ds.finetune, n_fine);
  read_table(ds.eval, n_eval);
  for (std::uint64_t s = 0; s < n_scenarios; ++s) {
    UserScenario sc;
    sc.seed = get<std::uint64_t>(is, "scenario seed");
    const auto p = get<std::uint32_t>(is, "cluster count");
    require(p >= 1 && p < 1024, ErrorCode::kFormat, "implausible cluster count");
    for (std::uint32_t i = 0; i < p; ++i) {
      Cluster c;
      c.azimuth = get<double>(is, "cluster");
      c.elevation = get<double>(is, "cluster");
      c.azimuth_spread = get<double>(is, "cluster");
      c.elevation_spread = get<double>(is, "cluster");
      c.gain_variance = get<double>(is, "cluster");
      sc.clusters.push_back(c);
    }
    ds.scenarios.push_back(std::move(sc));
  }
  is.peek();
  require(is.eof(), ErrorCode::kFormat, "trailing bytes in dataset '" + path + "'");
  return ds;
}

}  // namespace vqmimo
