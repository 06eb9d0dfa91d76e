#include "vqmimo/vqmimo.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "vqmimo/channel.hpp"
#include "vqmimo/checkpoint.hpp"
#include "vqmimo/config.hpp"
#include "vqmimo/error.hpp"
#include "vqmimo/harness.hpp"
#include "vqmimo/precoding.hpp"
#include "vqmimo/training.hpp"
#include "vqmimo/vq.hpp"

struct vqm_config {
  vqmimo::ConfigMap map;
};

struct vqm_dataset {
  vqmimo::ChannelDataset data;
};

struct vqm_model {
  vqmimo::ModelCheckpoint ckpt;
};

namespace {

using vqmimo::ErrorCode;

thread_local std::string g_last_error;

int record(ErrorCode code, const char* what) {
  try {
    g_last_error = what;
  } catch (...) {
  }
  return static_cast<int>(code);
}

template <typename F>
int guarded(F&& body) noexcept {
  try {
    g_last_error.clear();
    body();
    return VQM_OK;
  } catch (const vqmimo::Error& e) {
    return record(e.code(), e.what());
  } catch (const std::bad_alloc&) {
    return record(ErrorCode::kInternal, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return record(ErrorCode::kIo, e.what());
  } catch (const std::exception& e) {
    return record(ErrorCode::kInternal, e.what());
  } catch (...) {
    return record(ErrorCode::kInternal, "unknown error");
  }
}

void need(const void* p, const char* what) {
  vqmimo::require(p != nullptr, ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

void copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size();
  vqmimo::require(buf != nullptr && cap > s.size(), ErrorCode::kInvalidArgument,
                  "buffer too small: need " + std::to_string(s.size() + 1) + " bytes");
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

vqmimo::CMatrix read_matrix(size_t n, size_t j, const double* p) {
  need(p, "matrix");
  vqmimo::CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
  for (size_t c = 0; c < j; ++c)
    for (size_t r = 0; r < n; ++r) {
      const size_t k = 2 * (c * n + r);
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = {p[k], p[k + 1]};
    }
  return m;
}

void write_matrix(const vqmimo::CMatrix& m, double* p) {
  const auto n = static_cast<size_t>(m.rows());
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const size_t k = 2 * (static_cast<size_t>(c) * n + static_cast<size_t>(r));
      p[k] = m(r, c).real();
      p[k + 1] = m(r, c).imag();
    }
}

vqmimo::ExperimentConfig resolved(const vqm_config* cfg) {
  need(cfg, "config");
  return vqmimo::resolve_config(cfg->map);
}

}  // namespace

extern "C" {

const char* vqm_last_error(void) { return g_last_error.c_str(); }

const char* vqm_status_name(int status) {
  if (status < 0 || status > static_cast<int>(ErrorCode::kInternal)) return "unknown";
  return vqmimo::error_category(static_cast<ErrorCode>(status));
}

const char* vqm_version(void) { return "1.0.0"; }

int vqm_config_new(vqm_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new vqm_config();
  });
}

int vqm_config_load(const char* path, vqm_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new vqm_config{vqmimo::load_config_file(path)};
  });
}

void vqm_config_free(vqm_config* cfg) { delete cfg; }

int vqm_config_set(vqm_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    cfg->map.set(key, value);
  });
}

int vqm_config_get(const vqm_config* cfg, const char* key, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    copy_out(cfg->map.get(key), buf, cap, needed);
  });
}

int vqm_config_merge_file(vqm_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "config");
    need(path, "path");
    std::string text;
    try {
      text = vqmimo::read_text_file(path);
    } catch (const vqmimo::Error&) {
      vqmimo::fail(ErrorCode::kConfig, std::string("cannot read config file '") + path + "'");
    }
    cfg->map.merge_text(text, path);
  });
}

int vqm_config_checkpoint_path(const vqm_config* cfg, int stage, char* buf, size_t cap,
                               size_t* needed) {
  return guarded([&] {
    const auto c = resolved(cfg);
    const std::string family =
        std::string(c.shape.mode == vqmimo::FeedbackMode::kStatistical ? "stat" : "inst") +
        (c.train.learn_pilot ? "_learnt" : "_dft");
    vqmimo::require(stage == 0 || stage == 1, ErrorCode::kInvalidArgument, "stage must be 0 or 1");
    copy_out(vqmimo::checkpoint_path(c.checkpoint_dir, family, c.shape.n_pilots,
                                     c.shape.codebook_size,
                                     stage == 0 ? vqmimo::Stage::kPretrain : vqmimo::Stage::kFinetune),
             buf, cap, needed);
  });
}

int vqm_config_apply_paper_scale(vqm_config* cfg) {
  return guarded([&] {
    need(cfg, "config");
    cfg->map.apply_paper_scale();
  });
}

int vqm_config_validate(const vqm_config* cfg) {
  return guarded([&] {
    const auto c = resolved(cfg);
    for (const auto& m : c.methods) {
      try {
        vqmimo::method_info(m);
      } catch (const vqmimo::Error& e) {
        // GMM entries are valid names that fail only when run.
        if (e.code() != ErrorCode::kNotImplemented) throw;
      }
    }
  });
}

int vqm_config_to_text(const vqm_config* cfg, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(cfg, "config");
    copy_out(cfg->map.to_text(), buf, cap, needed);
  });
}

int vqm_config_describe_keys(char* buf, size_t cap, size_t* needed) {
  return guarded([&] { copy_out(vqmimo::ConfigMap::describe_keys(), buf, cap, needed); });
}

int vqm_dataset_generate(const vqm_config* cfg, vqm_dataset** out) {
  return guarded([&] {
    need(out, "out");
    const auto c = resolved(cfg);
    *out = new vqm_dataset{vqmimo::build_dataset(c.dataset_config())};
  });
}

int vqm_dataset_load(const char* path, vqm_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new vqm_dataset{vqmimo::load_dataset(path)};
  });
}

int vqm_dataset_save(const vqm_dataset* ds, const char* path) {
  return guarded([&] {
    need(ds, "dataset");
    need(path, "path");
    vqmimo::save_dataset(ds->data, path);
  });
}

void vqm_dataset_free(vqm_dataset* ds) { delete ds; }

int vqm_dataset_info_get(const vqm_dataset* ds, vqm_dataset_info* out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    const auto& d = ds->data;
    *out = {d.geometry.n_v,     d.geometry.n_h,     d.channels.size(), d.scenarios.size(),
            d.pretrain.size(), d.finetune.size(), d.eval.size(),     d.normalization};
  });
}

int vqm_dataset_channel(const vqm_dataset* ds, size_t index, double* out, size_t n) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    vqmimo::require(index < ds->data.channels.size(), ErrorCode::kInvalidArgument,
                    "sample index out of range");
    const auto& h = ds->data.channels[index];
    vqmimo::require(n == static_cast<size_t>(h.size()), ErrorCode::kShapeMismatch,
                    "expected n = " + std::to_string(h.size()));
    for (size_t i = 0; i < n; ++i) {
      out[2 * i] = h(static_cast<Eigen::Index>(i)).real();
      out[2 * i + 1] = h(static_cast<Eigen::Index>(i)).imag();
    }
  });
}

int vqm_pretrain(const vqm_config* cfg, const vqm_dataset* ds, vqm_model** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    const auto c = resolved(cfg);
    *out = new vqm_model{vqmimo::pretrain(ds->data, c.shape, c.train)};
  });
}

int vqm_finetune(const vqm_config* cfg, const vqm_dataset* ds, const vqm_model* base,
                 vqm_model** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(base, "base model");
    need(out, "out");
    const auto c = resolved(cfg);
    *out = new vqm_model{vqmimo::finetune(base->ckpt, ds->data, c.shape, c.train)};
  });
}

int vqm_model_load(const char* path, vqm_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new vqm_model{vqmimo::load_checkpoint(path)};
  });
}

int vqm_model_save(const vqm_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    vqmimo::save_checkpoint(model->ckpt, path);
  });
}

void vqm_model_free(vqm_model* model) { delete model; }

int vqm_model_info_get(const vqm_model* model, vqm_model_info* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    const auto& f = model->ckpt.fingerprint;
    out->stage = static_cast<int>(model->ckpt.stage);
    out->n_v = f.n_v;
    out->n_h = f.n_h;
    out->n_pilots = f.n_pilots;
    out->latent_dim = f.latent_dim;
    out->codeword_dim = f.codeword_dim;
    out->codebook_size = f.codebook_size;
    out->statistical = f.mode == vqmimo::FeedbackMode::kStatistical ? 1 : 0;
    out->learn_pilot = f.learn_pilot ? 1 : 0;
    out->has_gnn = vqmimo::has_gnn_parameters(model->ckpt.params) ? 1 : 0;
    out->beta = f.beta;
    out->seed = f.seed;
    out->parameters = model->ckpt.params.size();
  });
}

int vqm_evaluate(const vqm_config* cfg, const vqm_dataset* ds, const char* method,
                 const vqm_model* model, vqm_eval_result* out) {
  return guarded([&] {
    need(ds, "dataset");
    need(method, "method");
    need(out, "out");
    const auto c = resolved(cfg);
    const auto set = vqmimo::make_evaluation_set(ds->data, static_cast<size_t>(c.users),
                                                 c.constellations, c.shape.n_pilots,
                                                 c.noise_variance(), c.seed);
    const auto r =
        vqmimo::evaluate_method(method, model ? &model->ckpt : nullptr, ds->data, set, c);
    *out = {r.mean, r.std_err, r.rates.size()};
  });
}

int vqm_evaluate_csv(const vqm_config* cfg, const vqm_dataset* ds, const char* methods,
                     const char* checkpoint, const char* csv_path) {
  return guarded([&] {
    need(ds, "dataset");
    need(csv_path, "csv path");
    auto c = resolved(cfg);
    if (methods) {
      vqm_config tmp{cfg->map};
      tmp.map.set("methods", methods);
      c.methods = vqmimo::resolve_config(tmp.map).methods;
    }
    const auto set = vqmimo::make_evaluation_set(ds->data, static_cast<size_t>(c.users),
                                                 c.constellations, c.shape.n_pilots,
                                                 c.noise_variance(), c.seed);
    std::vector<vqmimo::SweepRow> rows;
    for (const auto& m : c.methods) {
      const auto info = vqmimo::method_info(m);
      std::optional<vqmimo::ModelCheckpoint> model;
      if (!info.family.empty()) {
        const std::string path =
            checkpoint ? std::string(checkpoint)
                       : vqmimo::checkpoint_path(c.checkpoint_dir, info.family, c.shape.n_pilots,
                                                 c.shape.codebook_size,
                                                 info.uses_pretrain_stage ? vqmimo::Stage::kPretrain
                                                                          : vqmimo::Stage::kFinetune);
        model = vqmimo::load_checkpoint(path);
      }
      const auto r = vqmimo::evaluate_method(m, model ? &*model : nullptr, ds->data, set, c);
      rows.push_back({"J", static_cast<double>(c.users), m, r.mean, r.std_err, r.rates.size(),
                      c.seed});
    }
    vqmimo::write_text_file(csv_path, vqmimo::format_csv(rows));
  });
}

int vqm_sweep(const vqm_config* cfg, const vqm_dataset* ds, const char* axis, int train_missing,
              const char* csv_path) {
  return guarded([&] {
    need(ds, "dataset");
    need(axis, "axis");
    need(csv_path, "csv path");
    const auto c = resolved(cfg);
    const auto rows = vqmimo::run_sweep(vqmimo::parse_axis(axis), ds->data, c,
                                        {.train_missing = train_missing != 0});
    vqmimo::write_text_file(csv_path, vqmimo::format_csv(rows));
  });
}

int vqm_plot(const char* csv_path, const char* svg_path) {
  return guarded([&] {
    need(csv_path, "csv path");
    need(svg_path, "svg path");
    const auto rows = vqmimo::parse_csv(vqmimo::read_text_file(csv_path), csv_path);
    vqmimo::write_text_file(svg_path, vqmimo::render_plot(rows));
  });
}

int vqm_write_manifest(const char* path, const char* command, const vqm_config* cfg,
                       const char* const* artifacts, size_t count) {
  return guarded([&] {
    need(path, "path");
    need(command, "command");
    const auto c = resolved(cfg);
    std::vector<std::string> files;
    for (size_t i = 0; i < count; ++i) {
      need(artifacts[i], "artifact path");
      files.emplace_back(artifacts[i]);
    }
    vqmimo::write_manifest(path, command, cfg->map, c.seed, files);
  });
}

int vqm_file_sha256(const char* path, char* out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    const std::string h = vqmimo::sha256_file(path);
    std::memcpy(out, h.c_str(), h.size() + 1);
  });
}

int vqm_feedback_bits(int latent_dim, int codeword_dim, int codebook_size, int* out) {
  return guarded([&] {
    need(out, "out");
    *out = vqmimo::feedback_bits(latent_dim, codeword_dim, codebook_size);
  });
}

int vqm_pack_feedback(const uint32_t* indices, size_t count, int codebook_size, char* buf,
                      size_t cap, size_t* needed) {
  return guarded([&] {
    if (count) need(indices, "indices");
    const std::vector<std::uint32_t> v(indices, indices + count);
    copy_out(vqmimo::pack_feedback(v, codebook_size), buf, cap, needed);
  });
}

int vqm_unpack_feedback(const char* bits, int codebook_size, uint32_t* indices, size_t count) {
  return guarded([&] {
    need(bits, "bits");
    if (count) need(indices, "indices");
    const auto v = vqmimo::unpack_feedback(bits, codebook_size, static_cast<int>(count));
    std::copy(v.begin(), v.end(), indices);
  });
}

int vqm_sum_rate(size_t n, size_t j, const double* h, const double* v, double sigma2,
                 double* out) {
  return guarded([&] {
    need(out, "out");
    vqmimo::require(sigma2 > 0.0, ErrorCode::kInvalidArgument, "sigma2 must be > 0");
    *out = vqmimo::sum_rate(read_matrix(n, j, h), read_matrix(n, j, v), sigma2);
  });
}

int vqm_wmmse(size_t n, size_t j, const double* h, double rho, double sigma2, int max_iter,
              double tol, double* v_out, int* iterations) {
  return guarded([&] {
    need(v_out, "v_out");
    const auto r = vqmimo::wmmse(read_matrix(n, j, h), rho, sigma2, {max_iter, tol});
    write_matrix(r.precoders.v, v_out);
    if (iterations) *iterations = r.report.iterations;
  });
}

}  // extern "C"
