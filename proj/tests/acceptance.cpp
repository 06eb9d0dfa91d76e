// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <Eigen/Eigenvalues>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "gradient_suite.hpp"
#include "support.hpp"
#include "vqmimo/channel.hpp"
#include "vqmimo/checkpoint.hpp"
#include "vqmimo/config.hpp"
#include "vqmimo/covariance.hpp"
#include "vqmimo/error.hpp"
#include "vqmimo/harness.hpp"
#include "vqmimo/networks.hpp"
#include "vqmimo/precoding.hpp"
#include "vqmimo/training.hpp"
#include "vqmimo/vq.hpp"

using namespace vqmimo;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ArrayGeometry geometry(int nv, int nh) {
  ArrayGeometry g;
  g.n_v = nv;
  g.n_h = nh;
  return g;
}

// 1 -------------------------------------------------------------------------

void gradients(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : primitive_cases()) {
    for (int i = 0; i < 20; ++i) {
      const double e = c.run(rng);
      if (e > worst) {
        worst = e;
        worst_name = c.name;
      }
    }
  }
  o.require(worst < 1e-4, "primitive " + worst_name);

  // Closed-form NLL gradient against central differences of the scalar NLL.
  const AngularDictionary dict = build_dictionary(geometry(2, 2));
  double nll_worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    StatisticalCsi s{random_cvector(4, rng), RVector(dict.atoms())};
    std::uniform_real_distribution<double> u(0.2, 2.0);
    for (Eigen::Index i = 0; i < s.c.size(); ++i) s.c(i) = u(rng);
    const CVector h = random_cvector(4, rng);
    const NllGradient g = gaussian_nll_gradient(h, s, dict);
    std::vector<double> analytic, numeric;
    const double step = 1e-6;
    for (Eigen::Index i = 0; i < 4; ++i)
      for (cdouble dir : {cdouble(1, 0), cdouble(0, 1)}) {
        StatisticalCsi p = s, m = s;
        p.mu(i) += step * dir;
        m.mu(i) -= step * dir;
        numeric.push_back((gaussian_nll(h, p, dict) - gaussian_nll(h, m, dict)) / (2 * step));
        analytic.push_back(dir.real() != 0 ? g.d_mu(i).real() : g.d_mu(i).imag());
      }
    for (Eigen::Index i = 0; i < s.c.size(); ++i) {
      StatisticalCsi p = s, m = s;
      p.c(i) += step;
      m.c(i) -= step;
      numeric.push_back((gaussian_nll(h, p, dict) - gaussian_nll(h, m, dict)) / (2 * step));
      analytic.push_back(g.d_c(i));
    }
    nll_worst = std::max(nll_worst, relative_error(analytic, numeric));
  }
  o.require(nll_worst < 1e-4, "closed-form NLL gradient");

  double pipe = 0.0;
  for (auto mode : {FeedbackMode::kStatistical, FeedbackMode::kInstantaneous})
    pipe = std::max(pipe, pipeline_case(rng, mode));
  o.require(pipe < 1e-3, "pipeline");
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, "runtime");
  o.detail << "primitives worst " << worst << " (" << worst_name << "), NLL " << nll_worst
           << ", pipeline " << pipe << ", " << secs << " s";
}

// 2 -------------------------------------------------------------------------

double toeplitz_defect(const CMatrix& c, int nv, int nh) {
  double worst = 0.0;
  for (int v1 = 0; v1 < nv; ++v1)
    for (int h1 = 0; h1 < nh; ++h1)
      for (int v2 = 0; v2 < nv; ++v2)
        for (int h2 = 0; h2 < nh; ++h2) {
          const int dv = v1 - v2, dh = h1 - h2;
          const cdouble anchor = c(std::max(dv, 0) * nh + std::max(dh, 0),
                                   std::max(-dv, 0) * nh + std::max(-dh, 0));
          worst = std::max(worst, std::abs(c(v1 * nh + h1, v2 * nh + h2) - anchor));
        }
  return worst;
}

void covariance(Outcome& o) {
  const AngularDictionary dict = build_dictionary(geometry(2, 8));
  const CMatrix id = build_covariance(RVector::Ones(dict.atoms()), dict);
  const double id_err = (id - CMatrix::Identity(16, 16)).cwiseAbs().maxCoeff();
  o.require(id_err < 1e-12, "c = 1 gives identity");

  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(kCovarianceFloor, 3.0);
  double herm = 0.0, toep = 0.0, min_eig = 1e300;
  for (int t = 0; t < 100; ++t) {
    RVector c(dict.atoms());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = t % 2 ? u(rng) : kCovarianceFloor;
    if (t % 2 == 0) c(static_cast<Eigen::Index>(t) % c.size()) = u(rng);
    const CMatrix cov = build_covariance(c, dict);
    herm = std::max(herm, (cov - cov.adjoint()).cwiseAbs().maxCoeff());
    toep = std::max(toep, toeplitz_defect(cov, 2, 8));
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<CMatrix>(cov).eigenvalues().minCoeff());
  }
  o.require(herm < 1e-12, "Hermitian");
  o.require(toep < 1e-10, "Toeplitz structure");
  o.require(min_eig >= kCovarianceFloor - 1e-10, "eigenvalue floor");
  o.detail << "identity err " << id_err << ", hermitian " << herm << ", toeplitz " << toep
           << ", min eig " << min_eig;
}

// 3 -------------------------------------------------------------------------

std::vector<std::uint32_t> scan(const RVector& z, const Tensor& e) {
  std::vector<std::uint32_t> out;
  const std::size_t ne = e.cols();
  for (std::size_t s = 0; s * ne < static_cast<std::size_t>(z.size()); ++s) {
    std::uint32_t best = 0;
    double best_d = 1e300;
    for (std::size_t c = 0; c < e.rows(); ++c) {
      double d = 0.0;
      for (std::size_t k = 0; k < ne; ++k) {
        const double diff = z(static_cast<Eigen::Index>(s * ne + k)) - e(c, k);
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::uint32_t>(c);
      }
    }
    out.push_back(best);
  }
  return out;
}

void quantizer(Outcome& o) {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> log_c(1, 6), ne_pick(1, 4), groups(1, 4);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  int mismatches = 0, ties = 0, roundtrip_fail = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t c = std::size_t{1} << log_c(rng);
    const std::size_t ne = static_cast<std::size_t>(ne_pick(rng));
    const std::size_t nl = ne * static_cast<std::size_t>(groups(rng));
    Tensor e = random_tensor({c, ne}, rng, -1.0, 1.0);
    const bool grid = t % 4 == 0;
    if (grid)
      for (double& v : e.data) v = std::round(v * 2.0);
    RVector z(static_cast<Eigen::Index>(nl));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = grid ? std::round(u(rng) * 2.0) / 2.0 : u(rng);
    const std::vector<std::uint32_t> expect = scan(z, e);
    const FeedbackMessage msg = quantize(z, e);
    if (msg.indices != expect) ++mismatches;
    if (grid) ++ties;
    const std::string bits = pack_feedback(msg.indices, static_cast<int>(c));
    if (unpack_feedback(bits, static_cast<int>(c), msg.indices.size()) != msg.indices) ++roundtrip_fail;
  }
  const int bits = feedback_bits(8, 2, 1024);
  o.require(mismatches == 0, "nearest codeword");
  o.require(roundtrip_fail == 0, "pack/unpack");
  o.require(bits == 40, "feedback_bits(8,2,1024)");
  o.detail << "1000 instances (" << ties << " on a tie grid), " << mismatches << " mismatches, "
           << roundtrip_fail << " round-trip failures, B = " << bits;
}

// 4 -------------------------------------------------------------------------

void wmmse_suite(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> n_pick(2, 8), j_pick(1, 6);
  std::uniform_real_distribution<double> log_s(-2.0, 1.0), log_rho(-1.0, 1.0);
  double drop = 0.0, over = -1e300;
  for (int t = 0; t < 100; ++t) {
    const CMatrix h = random_cmatrix(static_cast<std::size_t>(n_pick(rng)),
                                     static_cast<std::size_t>(j_pick(rng)), rng);
    const double s2 = std::pow(10.0, log_s(rng)), rho = std::pow(10.0, log_rho(rng));
    const SolverResult r = wmmse(h, rho, s2);
    for (std::size_t k = 1; k < r.report.trace.size(); ++k)
      drop = std::max(drop, r.report.trace[k - 1] - r.report.trace[k]);
    over = std::max(over, r.precoders.power() - rho);
  }
  double mf_err = 0.0;
  for (int t = 0; t < 100; ++t) {
    const CMatrix h = random_cmatrix(static_cast<std::size_t>(n_pick(rng)), 1, rng);
    const double s2 = std::pow(10.0, log_s(rng)), rho = std::pow(10.0, log_rho(rng));
    const SolverResult r = wmmse(h, rho, s2);
    const double closed = std::log2(1.0 + rho * h.squaredNorm() / s2);
    mf_err = std::max(mf_err, std::abs(sum_rate(h, r.precoders.v, s2) - closed));
    over = std::max(over, r.precoders.power() - rho);
  }
  double gap = 1e300;
  for (int t = 0; t < 100; ++t) {
    const CMatrix h = random_cmatrix(4, 2, rng);
    const SolverResult r = wmmse(h, 1.0, 0.1);
    const double base = std::max(sum_rate(h, mrt(h, 1.0).v, 0.1), sum_rate(h, zf(h, 1.0).v, 0.1));
    gap = std::min(gap, sum_rate(h, r.precoders.v, 0.1) - base);
    over = std::max(over, r.precoders.power() - 1.0);
  }
  const double secs = seconds_since(t0);
  o.require(drop <= 1e-8, "monotone trace");
  o.require(mf_err < 1e-4, "single-user matched filter");
  o.require(gap >= -1e-6, "dominance over MRT and ZF");
  o.require(over <= 1e-9, "power feasibility");
  o.require(secs < 120.0, "runtime");
  o.detail << "largest trace drop " << drop << ", J=1 err " << mf_err << ", min margin " << gap
           << ", max excess power " << over << ", " << secs << " s";
}

// 5 -------------------------------------------------------------------------

void swmmse_degeneracy(Outcome& o) {
  const AngularDictionary dict = build_dictionary(geometry(2, 2));
  std::mt19937_64 gen(505);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int users = 1 + t % 3;
    std::vector<StatisticalCsi> stats;
    CMatrix mu(4, users);
    for (int j = 0; j < users; ++j) {
      stats.push_back({random_cvector(4, gen), RVector::Constant(dict.atoms(), kCovarianceFloor)});
      mu.col(j) = stats.back().mu;
    }
    Rng rng(static_cast<std::uint64_t>(t));
    const SolverResult s = swmmse(stats, dict, 1.0, 0.1, 8, rng);
    const SolverResult w = wmmse(mu, 1.0, 0.1);
    worst = std::max(worst, std::abs(sum_rate(mu, s.precoders.v, 0.1) - sum_rate(mu, w.precoders.v, 0.1)));
  }
  o.require(worst < 1e-3, "rate gap");
  o.detail << "worst rate gap " << worst << " over 20 instances";
}

// 6 -------------------------------------------------------------------------

struct GnnOut {
  Tensor re, im;
};

GnnOut run_gnn(const ParameterStore& store, const Tensor& mre, const Tensor& mim, const Tensor& c,
               std::size_t users, double sigma2, double rho) {
  Graph g;
  const ParamBinder bind(g, store);
  const CVar v = gnn_precode(bind, {g.constant(mre), g.constant(mim)}, g.constant(c), users, sigma2, rho);
  return {g.value(v.re), g.value(v.im)};
}

Tensor permute_rows(const Tensor& t, const std::vector<std::size_t>& perm) {
  Tensor out = t;
  for (std::size_t r = 0; r < perm.size(); ++r)
    for (std::size_t k = 0; k < t.cols(); ++k) out(r, k) = t(perm[r], k);
  return out;
}

void gnn_contracts(Outcome& o) {
  NetworkShape s;
  s.gnn_features = 32;
  s.gnn_layers = 3;
  ParameterStore store;
  Rng init(606);
  init_gnn_parameters(store, s, init);
  const std::size_t n = static_cast<std::size_t>(s.geometry.size());
  std::mt19937_64 rng(606);

  const std::size_t j = 6;
  const Tensor mre = random_tensor({j, n}, rng), mim = random_tensor({j, n}, rng);
  const Tensor c = random_tensor({j, 4 * n}, rng, 0.01, 2.0);
  const GnnOut base = run_gnn(store, mre, mim, c, j, 0.05, 1.0);
  std::vector<std::size_t> perm(j);
  std::iota(perm.begin(), perm.end(), 0);
  double equi = 0.0;
  for (int t = 0; t < 50; ++t) {
    std::shuffle(perm.begin(), perm.end(), rng);
    const GnnOut out = run_gnn(store, permute_rows(mre, perm), permute_rows(mim, perm),
                               permute_rows(c, perm), j, 0.05, 1.0);
    for (std::size_t r = 0; r < j; ++r)
      for (std::size_t k = 0; k < n; ++k) {
        equi = std::max(equi, std::abs(out.re(r, k) - base.re(perm[r], k)));
        equi = std::max(equi, std::abs(out.im(r, k) - base.im(perm[r], k)));
      }
  }

  double power_err = 0.0;
  bool all_ran = true;
  for (std::size_t users = 1; users <= 8; ++users) {
    const std::size_t rows = 3 * users;
    const double rho = 0.5 * static_cast<double>(users);
    try {
      const GnnOut v = run_gnn(store, random_tensor({rows, n}, rng), random_tensor({rows, n}, rng),
                               random_tensor({rows, 4 * n}, rng, 0.01, 2.0), users, 0.1, rho);
      for (std::size_t k = 0; k < 3; ++k) {
        double p = 0.0;
        for (std::size_t r = k * users; r < (k + 1) * users; ++r)
          for (std::size_t a = 0; a < n; ++a) p += v.re(r, a) * v.re(r, a) + v.im(r, a) * v.im(r, a);
        power_err = std::max(power_err, std::abs(p - rho) / rho);
      }
    } catch (const Error&) {
      all_ran = false;
    }
  }
  o.require(equi <= 1e-10, "permutation equivariance");
  o.require(power_err <= 1e-12, "power normalization");
  o.require(all_ran, "J = 1..8");
  o.detail << "equivariance " << equi << " over 50 permutations, relative power error " << power_err
           << ", J = 1..8 " << (all_ran ? "ran" : "failed");
}

// 7 -------------------------------------------------------------------------

void sum_rate_oracle(Outcome& o) {
  CMatrix h1(1, 1), v1(1, 1);
  h1 << 1.0;
  v1 << 1.0;
  const double e1 = std::abs(sum_rate(h1, v1, 1.0) - 1.0);

  const CMatrix h2 = CMatrix::Identity(2, 2);
  const CMatrix v2 = CMatrix::Identity(2, 2) / std::sqrt(2.0);
  const double e2 = std::abs(sum_rate(h2, v2, 1.0) - 2.0 * std::log2(1.5));

  std::mt19937_64 rng(707);
  double e3 = 0.0, zero = 0.0;
  for (int t = 0; t < 20; ++t) {
    const CMatrix h = random_cmatrix(4, 1, rng);
    const double rho = 0.5 + t, s2 = 0.1 * (t + 1);
    e3 = std::max(e3, std::abs(sum_rate(h, mrt(h, rho).v, s2) - std::log2(1.0 + rho * h.squaredNorm() / s2)));
    const CMatrix hj = random_cmatrix(4, 3, rng);
    zero = std::max(zero, std::abs(sum_rate(hj, CMatrix::Zero(4, 3), s2)));
  }
  // Transposed, not conjugated: h = (1, i) and v = (1, -i) give h^T v = 2.
  CMatrix ht(2, 1), vt(2, 1);
  ht << 1.0, cdouble(0, 1);
  vt << 1.0, cdouble(0, -1);
  const double e4 = std::abs(sum_rate(ht, vt, 1.0) - std::log2(5.0));

  o.require(e1 < 1e-12, "single antenna");
  o.require(e2 < 1e-12, "orthogonal users");
  o.require(e3 < 1e-12, "matched filter");
  o.require(zero == 0.0, "zero precoders");
  o.require(e4 < 1e-12, "transpose convention");
  o.detail << "closed-form errors " << e1 << ", " << e2 << ", " << e3 << "; V=0 gives " << zero;
}

// 8 -------------------------------------------------------------------------

void normalization(Outcome& o) {
  const DatasetConfig dc;
  const ChannelDataset ds = build_dataset(dc);
  const double n = ds.geometry.size();
  double total = 0.0;
  for (const CVector& h : ds.channels) total += h.squaredNorm();
  const double gen = total / static_cast<double>(ds.channels.size()) / n - 1.0;

  Rng rng(808);
  const std::size_t draws = 20000;
  double fresh_total = 0.0;
  for (std::size_t i = 0; i < draws; ++i)
    fresh_total += fresh_sample(ds, i % ds.scenarios.size(), rng).squaredNorm();
  const double fresh = fresh_total / static_cast<double>(draws) / n - 1.0;
  o.require(std::abs(gen) < 0.01, "generating set");
  o.require(std::abs(fresh) < 0.03, "fresh samples");
  o.detail << "relative deviation " << gen << " on " << ds.channels.size() << " samples, "
           << fresh << " on " << draws << " fresh samples";
}

// 9 -------------------------------------------------------------------------

ConfigMap trend_config(int n_pilots) {
  ConfigMap m;
  m.set("n_v", "2");
  m.set("n_h", "8");
  m.set("num_scenarios", "200");
  m.set("samples_per_scenario", "30");
  m.set("eval_samples", "2000");
  m.set("n_pilots", std::to_string(n_pilots));
  m.set("codebook_size", "16");
  m.set("users", "4");
  m.set("train_users", "4");
  m.set("constellations", "100");
  m.set("snr_db", "15");
  m.set("train_snr_db", "15");
  m.set("learning_rate", "0.003");
  m.set("batch_size", "16");
  m.set("pretrain_epochs", "15");
  m.set("finetune_epochs", "30");
  m.set("finetune_learning_rate", "0.001");
  m.set("seed", "1");
  return m;
}

struct TrendRun {
  std::vector<double> pretrain_loss;
  double init_rate = 0.0;
  double final_rate = 0.0;
};

TrendRun train_and_score(const ChannelDataset& ds, const ExperimentConfig& cfg,
                         const std::string& method) {
  const MethodInfo info = method_info(method);
  const NetworkShape shape = family_shape(cfg, info.family, cfg.shape.n_pilots, cfg.shape.codebook_size);
  const TrainConfig tc = family_train(cfg, info.family);
  const EvaluationSet set = make_evaluation_set(ds, cfg.users, cfg.constellations, shape.n_pilots,
                                                cfg.noise_variance(), cfg.seed);
  TrendRun out;
  TrainLog log;
  const ModelCheckpoint pre = pretrain(ds, shape, tc, &log);
  out.pretrain_loss = log.epoch_loss;
  out.init_rate = evaluate_method(method, &pre, ds, set, cfg).mean;
  const ModelCheckpoint fine = finetune(pre, ds, shape, tc);
  out.final_rate = evaluate_method(method, &fine, ds, set, cfg).mean;
  return out;
}

void trends(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = resolve_config(trend_config(4));
  const ChannelDataset ds = build_dataset(cfg.dataset_config());
  const TrendRun learnt = train_and_score(ds, cfg, "vqvae_s_gnn_learntP");
  const TrendRun dft = train_and_score(ds, cfg, "vqvae_s_gnn");

  const auto& l = learnt.pretrain_loss;
  const bool decreasing = l.size() >= 3 && l[1] < l[0] && l[2] < l[1];
  o.require(decreasing, "(a) pretrain loss over 3 epochs");
  o.require(learnt.final_rate > dft.final_rate, "(b) learnt pilots beat DFT pilots");
  o.require(learnt.final_rate > learnt.init_rate, "(b) fine-tuning beats initialization");

  const ExperimentConfig cfg2 = resolve_config(trend_config(2));
  const TrendRun stat = train_and_score(ds, cfg2, "vqvae_s_gnn_learntP");
  const TrendRun inst = train_and_score(ds, cfg2, "vqae_i_gnn_learntP");
  o.require(stat.final_rate >= inst.final_rate, "(c) statistical >= instantaneous at n_p=2");

  o.detail << "(a) pretrain loss";
  for (std::size_t k = 0; k < std::min<std::size_t>(3, l.size()); ++k) o.detail << " " << l[k];
  o.detail << "; (b) learnt P " << learnt.final_rate << " (init " << learnt.init_rate << ") vs DFT "
           << dft.final_rate << "; (c) n_p=2 statistical " << stat.final_rate << " vs instantaneous "
           << inst.final_rate << "; " << seconds_since(t0) << " s";
}

// 10 ------------------------------------------------------------------------

ConfigMap small_config(const std::string& dir) {
  ConfigMap m;
  for (auto [k, v] : std::initializer_list<std::pair<const char*, const char*>>{
           {"n_v", "2"}, {"n_h", "2"}, {"num_scenarios", "24"}, {"samples_per_scenario", "20"},
           {"eval_samples", "80"}, {"n_pilots", "2"}, {"latent_dim", "4"}, {"codebook_size", "8"},
           {"enc_hidden1", "12"}, {"enc_hidden2", "8"}, {"dec_hidden1", "8"}, {"dec_hidden2", "12"},
           {"gnn_features", "8"}, {"gnn_layers", "2"}, {"pretrain_epochs", "2"},
           {"finetune_epochs", "1"}, {"batch_size", "16"}, {"train_users", "2"}, {"users", "2"},
           {"constellations", "12"}, {"j_list", "1,2"}, {"swmmse_samples", "4"},
           {"methods", "wmmse_perfect_csi,zf,vqvae_s_gnn_learntP,vqvae_s_swmmse,vqae_i_gnn_learntP"}})
    m.set(k, v);
  m.set("out_dir", dir);
  m.set("seed", "5");
  return m;
}

// Hashes of every artifact one full run produces.
std::vector<std::string> artifact_hashes(const std::string& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const ExperimentConfig cfg = resolve_config(small_config(dir));
  const ChannelDataset ds = build_dataset(cfg.dataset_config());
  save_dataset(ds, dir + "/dataset.bin");
  const std::vector<SweepRow> rows = run_sweep(SweepAxis::kUsers, ds, cfg, {true});
  write_text_file(dir + "/sweep.csv", format_csv(rows));
  write_text_file(dir + "/sweep.svg", render_plot(rows));

  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path().lexically_relative(dir).string());
  std::sort(files.begin(), files.end());
  std::vector<std::string> out;
  for (const auto& f : files) out.push_back(f + " " + sha256_file(dir + "/" + f));
  return out;
}

void determinism(Outcome& o) {
  const std::string base = (fs::temp_directory_path() / "vqmimo_acceptance").string();
  const auto a = artifact_hashes(base + "/run1");
  const auto b = artifact_hashes(base + "/run2");
  std::size_t checkpoints = 0;
  for (const auto& s : a)
    if (s.find(".ckpt") != std::string::npos) ++checkpoints;
  o.require(a == b, "artifact hashes");
  o.require(checkpoints >= 2, "checkpoints produced");
  o.detail << a.size() << " artifacts (" << checkpoints << " checkpoints, dataset, CSV, plot) "
           << (a == b ? "bit-identical" : "differ") << " across two runs";
  fs::remove_all(base);
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
      {"gradient suite", gradients},
      {"covariance structure", covariance},
      {"quantizer oracle", quantizer},
      {"WMMSE suite", wmmse_suite},
      {"SWMMSE degeneracy", swmmse_degeneracy},
      {"GNN contracts", gnn_contracts},
      {"sum-rate oracle", sum_rate_oracle},
      {"normalization", normalization},
      {"two-stage trends", trends},
      {"determinism", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2d %-22s %s  %s\n", index, name, o.pass ? "PASS" : "FAIL",
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
