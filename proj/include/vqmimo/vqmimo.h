/* C interface to the vqmimo library.
 *
 * Every function returning int returns a vqm_status. On failure a message is
 * available from vqm_last_error() on the calling thread until the next call.
 * Complex arrays are interleaved (re, im) and column-major: an N x J matrix
 * stores column j (user j) at offset 2*N*j.
 */
#ifndef VQMIMO_H
#define VQMIMO_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(VQMIMO_BUILDING)
#define VQM_API __attribute__((visibility("default")))
#else
#define VQM_API
#endif

typedef enum vqm_status {
  VQM_OK = 0,
  VQM_ERR_INVALID_ARGUMENT = 1,
  VQM_ERR_SHAPE_MISMATCH = 2,
  VQM_ERR_NON_FINITE = 3,
  VQM_ERR_NUMERICAL = 4,
  VQM_ERR_SINGULAR = 5,
  VQM_ERR_DEGENERATE_OUTPUT = 6,
  VQM_ERR_IO = 7,
  VQM_ERR_FORMAT = 8,
  VQM_ERR_FINGERPRINT_MISMATCH = 9,
  VQM_ERR_CONFIG = 10,
  VQM_ERR_UNKNOWN_FLAG = 11,
  VQM_ERR_NOT_IMPLEMENTED = 12,
  VQM_ERR_MISSING_CHECKPOINT = 13,
  VQM_ERR_INTERNAL = 14
} vqm_status;

typedef struct vqm_config vqm_config;
typedef struct vqm_dataset vqm_dataset;
typedef struct vqm_model vqm_model;

VQM_API const char* vqm_last_error(void);
/* Machine-readable category, e.g. "fingerprint-mismatch". */
VQM_API const char* vqm_status_name(int status);
VQM_API const char* vqm_version(void);

/* Functions filling a caller buffer write at most cap bytes including the
 * terminator and always store the full length (without terminator) in
 * *needed; a short buffer yields VQM_ERR_INVALID_ARGUMENT. */

/* ---- configuration ---- */
VQM_API int vqm_config_new(vqm_config** out);
VQM_API int vqm_config_load(const char* path, vqm_config** out);
VQM_API void vqm_config_free(vqm_config* cfg);
VQM_API int vqm_config_set(vqm_config* cfg, const char* key, const char* value);
VQM_API int vqm_config_get(const vqm_config* cfg, const char* key, char* buf, size_t cap,
                           size_t* needed);
/* Applies key=value lines from a file over the current values. */
VQM_API int vqm_config_merge_file(vqm_config* cfg, const char* path);
VQM_API int vqm_config_apply_paper_scale(vqm_config* cfg);
/* Default checkpoint file for the model the config describes (mode,
 * learn_pilot, n_pilots, codebook_size); stage 0 pre-training, 1 final. */
VQM_API int vqm_config_checkpoint_path(const vqm_config* cfg, int stage, char* buf, size_t cap,
                                       size_t* needed);
/* Checks every value; returns the first problem. */
VQM_API int vqm_config_validate(const vqm_config* cfg);
VQM_API int vqm_config_to_text(const vqm_config* cfg, char* buf, size_t cap, size_t* needed);
VQM_API int vqm_config_describe_keys(char* buf, size_t cap, size_t* needed);

/* ---- datasets ---- */
typedef struct vqm_dataset_info {
  int n_v;
  int n_h;
  size_t samples;
  size_t scenarios;
  size_t pretrain;
  size_t finetune;
  size_t eval;
  double normalization;
} vqm_dataset_info;

VQM_API int vqm_dataset_generate(const vqm_config* cfg, vqm_dataset** out);
VQM_API int vqm_dataset_load(const char* path, vqm_dataset** out);
VQM_API int vqm_dataset_save(const vqm_dataset* ds, const char* path);
VQM_API void vqm_dataset_free(vqm_dataset* ds);
VQM_API int vqm_dataset_info_get(const vqm_dataset* ds, vqm_dataset_info* out);
/* Copies sample `index` into out[2n] as (re, im) pairs; n must equal N. */
VQM_API int vqm_dataset_channel(const vqm_dataset* ds, size_t index, double* out, size_t n);

/* ---- models ---- */
typedef struct vqm_model_info {
  int stage; /* 0 pre-training, 1 fine-tuning */
  int n_v;
  int n_h;
  int n_pilots;
  int latent_dim;
  int codeword_dim;
  int codebook_size;
  int statistical; /* 1 statistical, 0 instantaneous */
  int learn_pilot;
  int has_gnn;
  double beta;
  uint64_t seed;
  size_t parameters;
} vqm_model_info;

/* Pre-trains the feedback model described by cfg (mode, learn_pilot, ...). */
VQM_API int vqm_pretrain(const vqm_config* cfg, const vqm_dataset* ds, vqm_model** out);
/* Fine-tunes a pre-training checkpoint together with a new GNN. */
VQM_API int vqm_finetune(const vqm_config* cfg, const vqm_dataset* ds, const vqm_model* base,
                         vqm_model** out);
VQM_API int vqm_model_load(const char* path, vqm_model** out);
VQM_API int vqm_model_save(const vqm_model* model, const char* path);
VQM_API void vqm_model_free(vqm_model* model);
VQM_API int vqm_model_info_get(const vqm_model* model, vqm_model_info* out);

/* ---- evaluation ---- */
typedef struct vqm_eval_result {
  double mean_sum_rate;
  double std_err;
  size_t n_constellations;
} vqm_eval_result;

/* Evaluates one method at the config's operating point (users, n_pilots,
 * codebook_size, snr_db). model may be NULL for methods without a trained
 * model. */
VQM_API int vqm_evaluate(const vqm_config* cfg, const vqm_dataset* ds, const char* method,
                         const vqm_model* model, vqm_eval_result* out);

/* Evaluates a comma-separated method list (NULL: the config's list) and
 * writes the result CSV. Learned methods read `checkpoint` when given, else
 * their default file under checkpoint_dir. */
VQM_API int vqm_evaluate_csv(const vqm_config* cfg, const vqm_dataset* ds, const char* methods,
                             const char* checkpoint, const char* csv_path);

/* Sweep over axis "J", "B" or "n_p"; writes the CSV. With train_missing set,
 * absent checkpoints are trained first instead of reported. */
VQM_API int vqm_sweep(const vqm_config* cfg, const vqm_dataset* ds, const char* axis,
                      int train_missing, const char* csv_path);

/* Renders a result CSV to an SVG chart. */
VQM_API int vqm_plot(const char* csv_path, const char* svg_path);

/* Manifest beside outputs: command, seed, config snapshot, SHA-256 of each
 * artifact. */
VQM_API int vqm_write_manifest(const char* path, const char* command, const vqm_config* cfg,
                               const char* const* artifacts, size_t count);
/* Lowercase hex digest into out[65]. */
VQM_API int vqm_file_sha256(const char* path, char* out);

/* ---- numerics ---- */
VQM_API int vqm_feedback_bits(int latent_dim, int codeword_dim, int codebook_size, int* out);
/* indices[count] -> '0'/'1' string of count*log2(C) characters. */
VQM_API int vqm_pack_feedback(const uint32_t* indices, size_t count, int codebook_size, char* buf,
                              size_t cap, size_t* needed);
VQM_API int vqm_unpack_feedback(const char* bits, int codebook_size, uint32_t* indices,
                                size_t count);
/* h and v are N x J; sum over users of log2(1 + SINR) with h_j^T v_m gains. */
VQM_API int vqm_sum_rate(size_t n, size_t j, const double* h, const double* v, double sigma2,
                         double* out);
/* WMMSE from MRT on channel h; writes precoders to v_out (N x J). */
VQM_API int vqm_wmmse(size_t n, size_t j, const double* h, double rho, double sigma2,
                      int max_iter, double tol, double* v_out, int* iterations);

#ifdef __cplusplus
}
#endif

#endif /* VQMIMO_H */
