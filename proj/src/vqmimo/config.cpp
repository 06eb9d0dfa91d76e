#include "vqmimo/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vqmimo/error.hpp"

namespace vqmimo {

namespace {

struct KeySpec {
  const char* key;
  const char* value;
  const char* help;
};

// clang-format off
const KeySpec kKeys[] = {
    {"n_v", "2", "vertical antennas"},
    {"n_h", "8", "horizontal antennas"},
    {"d_v", "1.0", "vertical spacing in wavelengths"},
    {"d_h", "0.5", "horizontal spacing in wavelengths"},
    {"num_scenarios", "200", "user locations in the generated pool"},
    {"samples_per_scenario", "30", "channel samples per location"},
    {"eval_samples", "2000", "size of the evaluation split"},
    {"n_pilots", "4", "pilots n_p"},
    {"latent_dim", "8", "encoder output width N_L"},
    {"codeword_dim", "2", "codeword width N_E"},
    {"codebook_size", "16", "codebook entries C (power of two)"},
    {"mode", "statistical", "statistical | instantaneous"},
    {"learn_pilot", "true", "train the pilot matrix"},
    {"pilot_constraint", "frobenius", "frobenius | per_row"},
    {"freeze_coarse_estimator", "false", "tie the coarse estimator to conj(P)"},
    {"enc_hidden1", "256", "encoder width 1"},
    {"enc_hidden2", "128", "encoder width 2"},
    {"dec_hidden1", "128", "decoder width 1"},
    {"dec_hidden2", "256", "decoder width 2"},
    {"gnn_features", "128", "GNN node feature width"},
    {"gnn_layers", "3", "message passing layers"},
    {"learning_rate", "0.001", "pre-training learning rate"},
    {"finetune_learning_rate", "auto", "auto = learning_rate / 10"},
    {"batch_size", "64", "samples per step (fine-tuning: users per step)"},
    {"pretrain_epochs", "10", "pre-training epochs"},
    {"finetune_epochs", "10", "fine-tuning epochs"},
    {"train_users", "4", "J during fine-tuning"},
    {"train_snr_db", "15", "training SNR"},
    {"randomize_users", "false", "draw J uniformly from [2, max_users] per step"},
    {"max_users", "8", "upper bound for randomize_users"},
    {"randomize_snr", "false", "draw SNR uniformly from [snr_min_db, snr_max_db] per step"},
    {"snr_min_db", "5", ""},
    {"snr_max_db", "20", ""},
    {"beta", "0.25", "commitment weight"},
    {"clip_norm", "10", "global gradient norm limit"},
    {"rho", "1", "transmit power budget"},
    {"snr_db", "15", "evaluation SNR, 1/sigma^2"},
    {"users", "4", "J for evaluate"},
    {"constellations", "100", "evaluation constellations"},
    {"swmmse_samples", "32", "SAA sample count"},
    {"wmmse_max_iter", "300", ""},
    {"wmmse_tol", "1e-5", "stop on |delta R| <= tol"},
    {"j_list", "2,4,6", "sweep values for axis J"},
    {"n_pilots_list", "2,4,8", "sweep values for axis n_p"},
    {"codebook_size_list", "16,64,256", "sweep values for axis B"},
    {"methods",
     "vqvae_s_gnn_learntP,vqae_i_gnn_learntP,vqvae_s_gnn,vqae_i_gnn,vqvae_s_swmmse,vqae_i_wmmse,"
     "wmmse_perfect_csi,mrt,zf",
     "comma-separated method names"},
    {"seed", "1", "master seed"},
    {"out_dir", "out", "output directory"},
    {"dataset", "", "dataset path (default <out_dir>/dataset.bin)"},
    {"checkpoint_dir", "", "checkpoint directory (default <out_dir>/checkpoints)"},
};
// clang-format on

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  fail(ErrorCode::kConfig, "config key '" + key + "': '" + value + "' is not " + expected);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long long as_int(const std::string& key, const std::string& v, long long lo) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  if (out < lo) bad_value(key, v, "an integer >= " + std::to_string(lo));
  return out;
}

double as_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    bad_value(key, v, "a number");
  }
  if (used != v.size() || !std::isfinite(out)) bad_value(key, v, "a finite number");
  return out;
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> as_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& item : split_list(v)) out.push_back(static_cast<int>(as_int(key, item, 1)));
  if (out.empty()) bad_value(key, v, "a non-empty list");
  return out;
}

}  // namespace

ConfigMap::ConfigMap() {
  for (const auto& k : kKeys) values_[k.key] = k.value;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  require(it != values_.end(), ErrorCode::kConfig, "unknown config key '" + key + "'");
  it->second = value;
}

const std::string& ConfigMap::get(const std::string& key) const {
  auto it = values_.find(key);
  require(it != values_.end(), ErrorCode::kConfig, "unknown config key '" + key + "'");
  return it->second;
}

std::string ConfigMap::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

void ConfigMap::merge_text(const std::string& text, const std::string& origin) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::kConfig,
            origin + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    require(values_.contains(key), ErrorCode::kConfig,
            origin + ":" + std::to_string(lineno) + ": unknown config key '" + key + "'");
    values_[key] = trim(line.substr(eq + 1));
  }
}

void ConfigMap::apply_paper_scale() {
  set("n_v", "4");
  set("n_h", "16");
  set("n_pilots", "8");
  set("codebook_size", "1024");
  set("num_scenarios", "1000");
  set("samples_per_scenario", "490");
  set("eval_samples", "10000");
  set("constellations", "500");
  set("users", "8");
  set("j_list", "2,4,6,8");
  set("n_pilots_list", "2,4,8,16");
  set("codebook_size_list", "16,64,256,1024");
}

std::vector<std::string> ConfigMap::known_keys() {
  std::vector<std::string> out;
  for (const auto& k : kKeys) out.emplace_back(k.key);
  return out;
}

std::string ConfigMap::describe_keys() {
  std::string out;
  for (const auto& k : kKeys) {
    out += std::string(k.key) + " (default '" + k.value + "')";
    if (*k.help) out += ": " + std::string(k.help);
    out += "\n";
  }
  return out;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kConfig, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ConfigMap map;
  map.merge_text(ss.str(), path);
  return map;
}

DatasetConfig ExperimentConfig::dataset_config() const {
  DatasetConfig d;
  d.geometry = geometry;
  d.num_scenarios = num_scenarios;
  d.samples_per_scenario = samples_per_scenario;
  d.eval_samples = eval_samples;
  d.seed = seed;
  return d;
}

double ExperimentConfig::noise_variance() const { return noise_variance_from_snr_db(snr_db); }

ExperimentConfig resolve_config(const ConfigMap& m) {
  auto get = [&](const char* k) -> const std::string& { return m.get(k); };
  auto i = [&](const char* k, long long lo = 1) { return as_int(k, get(k), lo); };
  auto d = [&](const char* k) { return as_double(k, get(k)); };
  auto b = [&](const char* k) { return as_bool(k, get(k)); };

  ExperimentConfig c;
  c.geometry.n_v = static_cast<int>(i("n_v"));
  c.geometry.n_h = static_cast<int>(i("n_h"));
  c.geometry.d_v = d("d_v");
  c.geometry.d_h = d("d_h");
  c.num_scenarios = static_cast<std::size_t>(i("num_scenarios"));
  c.samples_per_scenario = static_cast<std::size_t>(i("samples_per_scenario"));
  c.eval_samples = static_cast<std::size_t>(i("eval_samples"));

  NetworkShape& s = c.shape;
  s.geometry = c.geometry;
  s.n_pilots = static_cast<int>(i("n_pilots"));
  s.latent_dim = static_cast<int>(i("latent_dim"));
  s.codeword_dim = static_cast<int>(i("codeword_dim"));
  s.codebook_size = static_cast<int>(i("codebook_size"));
  try {
    s.mode = parse_mode(get("mode"));
  } catch (const Error&) {
    bad_value("mode", get("mode"), "statistical or instantaneous");
  }
  s.freeze_coarse_estimator = b("freeze_coarse_estimator");
  s.enc_hidden1 = static_cast<int>(i("enc_hidden1"));
  s.enc_hidden2 = static_cast<int>(i("enc_hidden2"));
  s.dec_hidden1 = static_cast<int>(i("dec_hidden1"));
  s.dec_hidden2 = static_cast<int>(i("dec_hidden2"));
  s.gnn_features = static_cast<int>(i("gnn_features"));
  s.gnn_layers = static_cast<int>(i("gnn_layers"));
  feedback_bits(s.latent_dim, s.codeword_dim, s.codebook_size);

  TrainConfig& t = c.train;
  t.learning_rate = d("learning_rate");
  if (get("finetune_learning_rate") != "auto") t.finetune_learning_rate = d("finetune_learning_rate");
  t.batch_size = static_cast<int>(i("batch_size"));
  t.pretrain_epochs = static_cast<int>(i("pretrain_epochs", 0));
  t.finetune_epochs = static_cast<int>(i("finetune_epochs", 0));
  t.users = static_cast<int>(i("train_users"));
  t.snr_db = d("train_snr_db");
  t.randomize_users = b("randomize_users");
  t.max_users = static_cast<int>(i("max_users", 2));
  t.randomize_snr = b("randomize_snr");
  t.snr_min_db = d("snr_min_db");
  t.snr_max_db = d("snr_max_db");
  require(t.snr_min_db <= t.snr_max_db, ErrorCode::kConfig, "snr_min_db exceeds snr_max_db");
  t.beta = d("beta");
  require(t.beta >= 0.0, ErrorCode::kConfig, "beta must be >= 0");
  t.clip_norm = d("clip_norm");
  t.learn_pilot = b("learn_pilot");
  const std::string& pc = get("pilot_constraint");
  if (pc == "frobenius")
    t.pilot_constraint = PilotConstraint::kFrobenius;
  else if (pc == "per_row")
    t.pilot_constraint = PilotConstraint::kPerRow;
  else
    bad_value("pilot_constraint", pc, "frobenius or per_row");

  c.rho = d("rho");
  require(c.rho > 0.0, ErrorCode::kConfig, "rho must be > 0");
  t.rho = c.rho;
  c.snr_db = d("snr_db");
  c.users = static_cast<int>(i("users"));
  c.constellations = static_cast<std::size_t>(i("constellations"));
  c.swmmse_samples = static_cast<int>(i("swmmse_samples"));
  c.wmmse.max_iter = static_cast<int>(i("wmmse_max_iter"));
  c.wmmse.tol = d("wmmse_tol");
  c.j_list = as_int_list("j_list", get("j_list"));
  c.n_pilots_list = as_int_list("n_pilots_list", get("n_pilots_list"));
  c.codebook_size_list = as_int_list("codebook_size_list", get("codebook_size_list"));
  for (int cs : c.codebook_size_list) feedback_bits(s.latent_dim, s.codeword_dim, cs);
  c.methods = split_list(get("methods"));
  require(!c.methods.empty(), ErrorCode::kConfig, "methods list is empty");

  c.seed = static_cast<std::uint64_t>(i("seed", 0));
  t.seed = c.seed;
  c.out_dir = get("out_dir");
  c.dataset_path = get("dataset").empty() ? c.out_dir + "/dataset.bin" : get("dataset");
  c.checkpoint_dir = get("checkpoint_dir").empty() ? c.out_dir + "/checkpoints" : get("checkpoint_dir");
  return c;
}

}  // namespace vqmimo
