#include "vqmimo/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "vqmimo/binio.hpp"
#include "vqmimo/error.hpp"
#include "vqmimo/precoding.hpp"
#include "vqmimo/training.hpp"
#include "vqmimo/vq.hpp"

namespace vqmimo {

namespace {

constexpr std::uint64_t kStreamEvalConstellations = 21;
constexpr std::uint64_t kStreamEvalNoise = 22;
constexpr std::uint64_t kStreamEvalSwmmse = 23;

const MethodInfo kMethods[] = {
    {"vqvae_s_gnn_learntP", "VQ-VAE(S) + GNN, learnt P", PrecoderKind::kGnn, "stat_learnt",
     FeedbackMode::kStatistical, true, false},
    {"vqae_i_gnn_learntP", "VQ-AE(I) + GNN, learnt P", PrecoderKind::kGnn, "inst_learnt",
     FeedbackMode::kInstantaneous, true, false},
    {"vqvae_s_gnn", "VQ-VAE(S) + GNN", PrecoderKind::kGnn, "stat_dft", FeedbackMode::kStatistical,
     false, false},
    {"vqae_i_gnn", "VQ-AE(I) + GNN", PrecoderKind::kGnn, "inst_dft", FeedbackMode::kInstantaneous,
     false, false},
    {"vqvae_s_swmmse", "VQ-VAE(S) + SWMMSE", PrecoderKind::kSwmmse, "stat_dft",
     FeedbackMode::kStatistical, false, true},
    {"vqae_i_wmmse", "VQ-AE(I) + WMMSE", PrecoderKind::kWmmse, "inst_dft",
     FeedbackMode::kInstantaneous, false, true},
    {"wmmse_perfect_csi", "WMMSE, perfect CSI", PrecoderKind::kPerfectWmmse, "",
     FeedbackMode::kStatistical, false, false},
    {"mrt", "MRT, perfect CSI", PrecoderKind::kMrt, "", FeedbackMode::kStatistical, false, false},
    {"zf", "ZF, perfect CSI", PrecoderKind::kZf, "", FeedbackMode::kStatistical, false, false},
};

const char* const kGmmMethods[] = {"gmm_gnn", "gmm_swmmse"};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

CMatrix channel_matrix(const ChannelDataset& ds, const std::vector<std::uint64_t>& ids) {
  const auto n = ds.channels.at(ids.front()).size();
  CMatrix h(n, static_cast<Eigen::Index>(ids.size()));
  for (std::size_t j = 0; j < ids.size(); ++j) h.col(static_cast<Eigen::Index>(j)) = ds.channels.at(ids[j]);
  return h;
}

ComplexBatch gather_rows(const ChannelDataset& ds, const EvaluationSet& set) {
  std::vector<CVector> rows;
  for (const auto& c : set.constellations)
    for (std::uint64_t id : c) rows.push_back(ds.channels.at(id));
  return to_batch(rows);
}

CVector row_vector(const Tensor& re, const Tensor& im, std::size_t r) {
  const std::size_t n = re.cols();
  CVector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = {re(r, i), im(r, i)};
  return v;
}

double parse_number(const std::string& field, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  require(!field.empty() && end == field.c_str() + field.size(), ErrorCode::kFormat,
          where + ": '" + field + "' is not a number");
  return v;
}

}  // namespace

MethodInfo method_info(const std::string& name) {
  for (const auto& m : kMethods)
    if (m.name == name) return m;
  for (const char* g : kGmmMethods)
    if (name == g)
      fail(ErrorCode::kNotImplemented,
           "method '" + name + "': GMM feedback is not implemented (out of scope)");
  std::string known;
  for (const auto& m : kMethods) known += " " + m.name;
  fail(ErrorCode::kConfig, "unknown method '" + name + "'; known:" + known);
}

std::vector<std::string> method_names() {
  std::vector<std::string> out;
  for (const auto& m : kMethods) out.push_back(m.name);
  return out;
}

FeedbackMode family_mode(const std::string& family) {
  if (family == "stat_learnt" || family == "stat_dft") return FeedbackMode::kStatistical;
  if (family == "inst_learnt" || family == "inst_dft") return FeedbackMode::kInstantaneous;
  fail(ErrorCode::kInvalidArgument, "unknown model family '" + family + "'");
}

bool family_learns_pilot(const std::string& family) {
  family_mode(family);
  return family.ends_with("_learnt");
}

std::string checkpoint_path(const std::string& dir, const std::string& family, int n_pilots,
                            int codebook_size, Stage stage) {
  return dir + "/" + family + "_np" + std::to_string(n_pilots) + "_C" +
         std::to_string(codebook_size) + (stage == Stage::kPretrain ? ".pretrain" : "") + ".ckpt";
}

NetworkShape family_shape(const ExperimentConfig& cfg, const std::string& family, int n_pilots,
                          int codebook_size) {
  NetworkShape s = cfg.shape;
  s.mode = family_mode(family);
  s.n_pilots = n_pilots;
  s.codebook_size = codebook_size;
  return s;
}

TrainConfig family_train(const ExperimentConfig& cfg, const std::string& family) {
  TrainConfig t = cfg.train;
  t.learn_pilot = family_learns_pilot(family);
  return t;
}

EvaluationSet make_evaluation_set(const ChannelDataset& ds, std::size_t users,
                                  std::size_t constellations, int n_pilots, double noise_variance,
                                  std::uint64_t seed) {
  require(constellations >= 1, ErrorCode::kInvalidArgument, "evaluation needs >= 1 constellation");
  EvaluationSet set;
  set.users = users;
  set.noise_variance = noise_variance;
  const ConstellationSampler sampler(ds, ds.eval);
  Rng rng(derive_seed(derive_seed(seed, kStreamEvalConstellations), users));
  for (std::size_t k = 0; k < constellations; ++k)
    set.constellations.push_back(sampler.draw(users, rng));
  Rng noise_rng(derive_seed(derive_seed(seed, kStreamEvalNoise), users * 1000 + static_cast<std::size_t>(n_pilots)));
  set.pilot_noise = draw_noise(users * constellations, static_cast<std::size_t>(n_pilots),
                               noise_variance, noise_rng);
  return set;
}

MethodResult summarize(std::vector<double> rates) {
  MethodResult r;
  r.rates = std::move(rates);
  const double n = static_cast<double>(r.rates.size());
  for (double v : r.rates) r.mean += v;
  r.mean /= n;
  if (r.rates.size() > 1) {
    double ss = 0.0;
    for (double v : r.rates) ss += (v - r.mean) * (v - r.mean);
    r.std_err = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return r;
}

MethodResult evaluate_method(const std::string& method, const ModelCheckpoint* model,
                             const ChannelDataset& ds, const EvaluationSet& set,
                             const ExperimentConfig& cfg) {
  const MethodInfo info = method_info(method);
  const double sigma2 = set.noise_variance;
  std::vector<double> rates;
  rates.reserve(set.constellations.size());

  if (info.family.empty()) {
    for (const auto& ids : set.constellations) {
      const CMatrix h = channel_matrix(ds, ids);
      CMatrix v;
      switch (info.precoder) {
        case PrecoderKind::kPerfectWmmse: v = wmmse(h, cfg.rho, sigma2, cfg.wmmse).precoders.v; break;
        case PrecoderKind::kMrt: v = mrt(h, cfg.rho).v; break;
        case PrecoderKind::kZf: v = zf(h, cfg.rho).v; break;
        default: fail(ErrorCode::kInternal, "unexpected precoder kind");
      }
      rates.push_back(sum_rate(h, v, sigma2));
    }
    return summarize(std::move(rates));
  }

  require(model != nullptr, ErrorCode::kMissingCheckpoint,
          "method '" + method + "' needs a trained checkpoint");
  const int n_pilots = static_cast<int>(set.pilot_noise.re.cols());
  const NetworkShape shape =
      family_shape(cfg, info.family, n_pilots, cfg.shape.codebook_size);
  check_compatible(make_fingerprint(shape, family_train(cfg, info.family)), model->fingerprint,
                   "evaluate " + method);
  require(model->fingerprint.learn_pilot == info.learn_pilot, ErrorCode::kFingerprintMismatch,
          "evaluate " + method + ": checkpoint learn_pilot=" +
              std::to_string(model->fingerprint.learn_pilot) + " but the method expects " +
              std::to_string(info.learn_pilot));
  require(ds.geometry == shape.geometry, ErrorCode::kFingerprintMismatch,
          "evaluate " + method + ": dataset geometry does not match the configuration");

  ModelCheckpoint local = *model;
  if (info.precoder == PrecoderKind::kGnn) ensure_gnn(local, shape);
  const AngularDictionary dict = build_dictionary(shape.geometry);
  const ComplexBatch h = gather_rows(ds, set);
  Graph g;
  const ParamBinder bind(g, local.params, [](const std::string&) { return false; });

  if (info.precoder == PrecoderKind::kGnn) {
    const PipelineGraph p = build_pipeline_graph(bind, dict, info.mode, h, set.pilot_noise,
                                                 set.users, sigma2, cfg.rho, local.fingerprint.beta);
    const Tensor& r = p.rate.value();
    for (std::size_t k = 0; k < r.rows(); ++k) rates.push_back(r(k, 0));
    return summarize(std::move(rates));
  }

  const FeedbackGraph fb =
      build_feedback_graph(bind, dict, info.mode, h, set.pilot_noise, local.fingerprint.beta);
  const Tensor& mu_re = fb.dec.mu.re.value();
  const Tensor& mu_im = fb.dec.mu.im.value();
  const std::uint64_t swmmse_seed = derive_seed(cfg.seed, kStreamEvalSwmmse);
  std::size_t row = 0;
  for (std::size_t k = 0; k < set.constellations.size(); ++k) {
    const auto& ids = set.constellations[k];
    const CMatrix h_true = channel_matrix(ds, ids);
    CMatrix v;
    if (info.precoder == PrecoderKind::kSwmmse) {
      const Tensor& c = fb.dec.c->value();
      std::vector<StatisticalCsi> stats;
      for (std::size_t j = 0; j < ids.size(); ++j, ++row) {
        StatisticalCsi s;
        s.mu = row_vector(mu_re, mu_im, row);
        s.c.resize(static_cast<Eigen::Index>(c.cols()));
        for (std::size_t i = 0; i < c.cols(); ++i) s.c(static_cast<Eigen::Index>(i)) = c(row, i);
        stats.push_back(std::move(s));
      }
      Rng rng(derive_seed(swmmse_seed, k));
      v = swmmse(stats, dict, cfg.rho, sigma2, cfg.swmmse_samples, rng, cfg.wmmse).precoders.v;
    } else {
      CMatrix est(h_true.rows(), h_true.cols());
      for (std::size_t j = 0; j < ids.size(); ++j, ++row)
        est.col(static_cast<Eigen::Index>(j)) = row_vector(mu_re, mu_im, row);
      v = wmmse(est, cfg.rho, sigma2, cfg.wmmse).precoders.v;
    }
    rates.push_back(sum_rate(h_true, v, sigma2));
  }
  return summarize(std::move(rates));
}

std::string format_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += r.sweep_var + "," + fmt17(r.value) + "," + r.method + "," + fmt17(r.mean_sum_rate) +
           "," + fmt17(r.std_err) + "," + std::to_string(r.n_constellations) + "," +
           std::to_string(r.seed) + "\n";
  }
  return out;
}

std::vector<SweepRow> parse_csv(const std::string& text, const std::string& origin) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  std::vector<SweepRow> rows;
  while (std::getline(ss, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = origin + ": line " + std::to_string(lineno);
    if (lineno == 1) {
      require(line == kCsvHeader, ErrorCode::kFormat, where + ": unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    require(f.size() == 7, ErrorCode::kFormat,
            where + ": expected 7 fields, found " + std::to_string(f.size()));
    SweepRow r;
    r.sweep_var = f[0];
    r.value = parse_number(f[1], where);
    r.method = f[2];
    r.mean_sum_rate = parse_number(f[3], where);
    r.std_err = parse_number(f[4], where);
    const double n = parse_number(f[5], where);
    const double seed = parse_number(f[6], where);
    require(n >= 0 && n == std::floor(n), ErrorCode::kFormat, where + ": bad constellation count");
    r.n_constellations = static_cast<std::size_t>(n);
    try {
      std::size_t used = 0;
      r.seed = std::stoull(f[6], &used);
      require(used == f[6].size(), ErrorCode::kFormat, where + ": bad seed");
    } catch (const std::logic_error&) {
      fail(ErrorCode::kFormat, where + ": bad seed '" + f[6] + "'");
    }
    (void)seed;
    rows.push_back(std::move(r));
  }
  require(lineno >= 1, ErrorCode::kFormat, origin + ": line 1: empty input");
  return rows;
}

void write_text_file(const std::string& path, const std::string& text) {
  binio::make_parent_dirs(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << text;
  require(static_cast<bool>(out), ErrorCode::kIo, "failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "J") return SweepAxis::kUsers;
  if (name == "B") return SweepAxis::kBits;
  if (name == "n_p") return SweepAxis::kPilots;
  fail(ErrorCode::kInvalidArgument, "unknown sweep axis '" + name + "' (J, B or n_p)");
}

const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kUsers: return "J";
    case SweepAxis::kBits: return "B";
    case SweepAxis::kPilots: return "n_p";
  }
  return "?";
}

namespace {

struct SweepPoint {
  int value = 0;  // J, B or n_p
  std::size_t users = 0;
  int n_pilots = 0;
  int codebook_size = 0;
};

std::vector<SweepPoint> sweep_points(SweepAxis axis, const ExperimentConfig& cfg) {
  std::vector<SweepPoint> out;
  const auto base = [&] {
    return SweepPoint{0, static_cast<std::size_t>(cfg.users), cfg.shape.n_pilots,
                      cfg.shape.codebook_size};
  };
  switch (axis) {
    case SweepAxis::kUsers:
      for (int j : cfg.j_list) {
        SweepPoint p = base();
        p.value = j;
        p.users = static_cast<std::size_t>(j);
        out.push_back(p);
      }
      break;
    case SweepAxis::kBits:
      for (int c : cfg.codebook_size_list) {
        SweepPoint p = base();
        p.codebook_size = c;
        p.value = feedback_bits(cfg.shape.latent_dim, cfg.shape.codeword_dim, c);
        out.push_back(p);
      }
      break;
    case SweepAxis::kPilots:
      for (int np : cfg.n_pilots_list) {
        SweepPoint p = base();
        p.value = np;
        p.n_pilots = np;
        out.push_back(p);
      }
      break;
  }
  return out;
}

std::string method_checkpoint(const MethodInfo& info, const ExperimentConfig& cfg,
                              const SweepPoint& p) {
  return checkpoint_path(cfg.checkpoint_dir, info.family, p.n_pilots, p.codebook_size,
                         info.uses_pretrain_stage ? Stage::kPretrain : Stage::kFinetune);
}

}  // namespace

std::map<std::pair<int, std::string>, std::string> sweep_checkpoints(SweepAxis axis,
                                                                     const ExperimentConfig& cfg) {
  std::map<std::pair<int, std::string>, std::string> out;
  for (const SweepPoint& p : sweep_points(axis, cfg))
    for (const std::string& m : cfg.methods) {
      const MethodInfo info = method_info(m);
      if (!info.family.empty()) out[{p.value, m}] = method_checkpoint(info, cfg, p);
    }
  return out;
}

void train_family(const ChannelDataset& ds, const ExperimentConfig& cfg, const std::string& family,
                  int n_pilots, int codebook_size) {
  const NetworkShape shape = family_shape(cfg, family, n_pilots, codebook_size);
  const TrainConfig train = family_train(cfg, family);
  const ModelCheckpoint pre = pretrain(ds, shape, train);
  save_checkpoint(pre, checkpoint_path(cfg.checkpoint_dir, family, n_pilots, codebook_size,
                                       Stage::kPretrain));
  const ModelCheckpoint fine = finetune(pre, ds, shape, train);
  save_checkpoint(fine, checkpoint_path(cfg.checkpoint_dir, family, n_pilots, codebook_size,
                                        Stage::kFinetune));
}

std::vector<SweepRow> run_sweep(SweepAxis axis, const ChannelDataset& ds,
                                const ExperimentConfig& cfg, const SweepOptions& opts) {
  for (const std::string& m : cfg.methods) method_info(m);
  const std::vector<SweepPoint> points = sweep_points(axis, cfg);

  std::vector<std::string> missing;
  std::set<std::tuple<std::string, int, int>> to_train;
  for (const SweepPoint& p : points)
    for (const std::string& m : cfg.methods) {
      const MethodInfo info = method_info(m);
      if (info.family.empty()) continue;
      const std::string path = method_checkpoint(info, cfg, p);
      if (std::filesystem::exists(path)) continue;
      missing.push_back("(" + std::to_string(p.value) + ", " + m + ") -> " + path);
      to_train.insert({info.family, p.n_pilots, p.codebook_size});
    }
  if (!missing.empty()) {
    if (!opts.train_missing) {
      std::string msg = "sweep " + std::string(axis_name(axis)) + ": missing checkpoints for " +
                        std::to_string(missing.size()) + " (value, method) pairs:";
      for (const auto& m : missing) msg += "\n  " + m;
      fail(ErrorCode::kMissingCheckpoint, msg);
    }
    for (const auto& [family, np, cs] : to_train) train_family(ds, cfg, family, np, cs);
  }

  std::vector<SweepRow> rows;
  std::map<std::string, ModelCheckpoint> cache;
  for (const SweepPoint& p : points) {
    ExperimentConfig point_cfg = cfg;
    point_cfg.shape.n_pilots = p.n_pilots;
    point_cfg.shape.codebook_size = p.codebook_size;
    const EvaluationSet set = make_evaluation_set(ds, p.users, cfg.constellations, p.n_pilots,
                                                  cfg.noise_variance(), cfg.seed);
    for (const std::string& m : cfg.methods) {
      const MethodInfo info = method_info(m);
      const ModelCheckpoint* model = nullptr;
      if (!info.family.empty()) {
        const std::string path = method_checkpoint(info, cfg, p);
        auto it = cache.find(path);
        if (it == cache.end()) it = cache.emplace(path, load_checkpoint(path)).first;
        model = &it->second;
      }
      const MethodResult r = evaluate_method(m, model, ds, set, point_cfg);
      rows.push_back({axis_name(axis), static_cast<double>(p.value), m, r.mean, r.std_err,
                      r.rates.size(), cfg.seed});
    }
  }
  return rows;
}

std::string render_plot(const std::vector<SweepRow>& rows) {
  require(!rows.empty(), ErrorCode::kInvalidArgument, "plot: no data rows");
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                        "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22"};
  constexpr double kW = 720, kH = 440, kLeft = 70, kRight = 230, kTop = 30, kBottom = 60;

  std::vector<std::string> methods;
  for (const auto& r : rows)
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
      methods.push_back(r.method);
  double x0 = rows[0].value, x1 = x0;
  double y0 = rows[0].mean_sum_rate - rows[0].std_err, y1 = rows[0].mean_sum_rate + rows[0].std_err;
  for (const auto& r : rows) {
    x0 = std::min(x0, r.value);
    x1 = std::max(x1, r.value);
    y0 = std::min(y0, r.mean_sum_rate - r.std_err);
    y1 = std::max(y1, r.mean_sum_rate + r.std_err);
  }
  if (x1 == x0) { x0 -= 1; x1 += 1; }
  if (y1 == y0) { y0 -= 1; y1 += 1; }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double yv = y0 + (y1 - y0) * t / 4.0;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt2(sy(yv) + 4)
       << "\" text-anchor=\"end\">" << fmt2(yv) << "</text>\n";
  }
  std::set<double> xs;
  for (const auto& r : rows) xs.insert(r.value);
  for (double xv : xs)
    os << "<text x=\"" << fmt2(sx(xv)) << "\" y=\"" << kTop + ph + 18
       << "\" text-anchor=\"middle\">" << fmt17(xv) << "</text>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 15 << "\" text-anchor=\"middle\">"
     << rows[0].sweep_var << "</text>\n"
     << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << kTop + ph / 2 << ")\">sum rate [bit/s/Hz]</text>\n";

  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const char* color = kColors[mi % std::size(kColors)];
    std::vector<const SweepRow*> pts;
    for (const auto& r : rows)
      if (r.method == methods[mi]) pts.push_back(&r);
    std::stable_sort(pts.begin(), pts.end(),
                     [](const SweepRow* a, const SweepRow* b) { return a->value < b->value; });
    os << "<polyline class=\"curve\" data-method=\"" << methods[mi] << "\" fill=\"none\" stroke=\""
       << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      os << (i ? " " : "") << fmt2(sx(pts[i]->value)) << "," << fmt2(sy(pts[i]->mean_sum_rate));
    os << "\"/>\n";
    for (const SweepRow* p : pts) {
      const double x = sx(p->value);
      os << "<line class=\"errbar\" data-method=\"" << methods[mi] << "\" x1=\"" << fmt2(x)
         << "\" x2=\"" << fmt2(x) << "\" y1=\"" << fmt2(sy(p->mean_sum_rate - p->std_err))
         << "\" y2=\"" << fmt2(sy(p->mean_sum_rate + p->std_err)) << "\" stroke=\"" << color
         << "\"/>\n";
    }
    const double ly = kTop + 10 + 20.0 * static_cast<double>(mi);
    os << "<line x1=\"" << kW - kRight + 15 << "\" x2=\"" << kW - kRight + 40 << "\" y1=\"" << ly
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << kW - kRight + 46 << "\" y=\"" << ly + 4 << "\">" << methods[mi]
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  require(EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) == 1,
          ErrorCode::kInternal, "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text_file(path)); }

void write_manifest(const std::string& path, const std::string& command, const ConfigMap& config,
                    std::uint64_t seed, const std::vector<std::string>& artifacts) {
  std::string out = "command=" + command + "\nseed=" + std::to_string(seed) + "\n";
  for (const auto& [k, v] : config.entries()) out += "config." + k + "=" + v + "\n";
  for (std::size_t i = 0; i < artifacts.size(); ++i) {
    out += "artifact." + std::to_string(i) + ".path=" + artifacts[i] + "\n";
    out += "artifact." + std::to_string(i) + ".sha256=" + sha256_file(artifacts[i]) + "\n";
  }
  write_text_file(path, out);
}

}  // namespace vqmimo
