#include "vqmimo/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "vqmimo/binio.hpp"
#include "vqmimo/error.hpp"

namespace vqmimo {

namespace {
constexpr char kMagic[8] = {'V', 'Q', 'M', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string Fingerprint::describe() const {
  std::ostringstream os;
  os << "N_v=" << n_v << " N_h=" << n_h << " n_p=" << n_pilots << " N_L=" << latent_dim
     << " N_E=" << codeword_dim << " C=" << codebook_size << " mode=" << mode_name(mode)
     << " learn_pilot=" << (learn_pilot ? 1 : 0) << " beta=" << beta << " seed=" << seed;
  return os.str();
}

void check_compatible(const Fingerprint& e, const Fingerprint& a, const std::string& context) {
  const bool ok = e.n_v == a.n_v && e.n_h == a.n_h && e.n_pilots == a.n_pilots &&
                  e.latent_dim == a.latent_dim && e.codeword_dim == a.codeword_dim &&
                  e.codebook_size == a.codebook_size && e.mode == a.mode;
  require(ok, ErrorCode::kFingerprintMismatch,
          context + ": checkpoint fingerprint {" + a.describe() +
              "} does not match configuration {" + e.describe() + "}");
}

std::string serialize_checkpoint(const ModelCheckpoint& ckpt) {
  using binio::put;
  std::ostringstream os(std::ios::binary);
  const Fingerprint& f = ckpt.fingerprint;
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.stage));
  for (int v : {f.n_v, f.n_h, f.n_pilots, f.latent_dim, f.codeword_dim, f.codebook_size})
    put<std::uint32_t>(os, static_cast<std::uint32_t>(v));
  put<std::uint32_t>(os, f.mode == FeedbackMode::kStatistical ? 0u : 1u);
  put<std::uint32_t>(os, f.learn_pilot ? 1u : 0u);
  put<double>(os, f.beta);
  put<std::uint64_t>(os, f.seed);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.params.size()));
  for (const std::string& name : ckpt.params.names()) {
    const Tensor& t = ckpt.params.value(name);
    binio::put_string(os, name);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape) put<std::uint64_t>(os, d);
    for (double v : t.data) put<double>(os, v);
  }
  return os.str();
}

ModelCheckpoint deserialize_checkpoint(const std::string& bytes, const std::string& origin) {
  using binio::get;
  std::istringstream is(bytes, std::ios::binary);
  char magic[8];
  is.read(magic, sizeof(magic));
  require(is && std::equal(magic, magic + 8, kMagic), ErrorCode::kFormat,
          "'" + origin + "' is not a model checkpoint");
  const auto version = get<std::uint32_t>(is, "version");
  require(version == kVersion, ErrorCode::kFormat,
          "unsupported checkpoint version " + std::to_string(version));
  ModelCheckpoint ckpt;
  const auto stage = get<std::uint32_t>(is, "stage");
  require(stage <= 1, ErrorCode::kFormat, "invalid stage tag");
  ckpt.stage = static_cast<Stage>(stage);
  Fingerprint& f = ckpt.fingerprint;
  for (int* v : {&f.n_v, &f.n_h, &f.n_pilots, &f.latent_dim, &f.codeword_dim, &f.codebook_size})
    *v = static_cast<int>(get<std::uint32_t>(is, "fingerprint"));
  const auto mode = get<std::uint32_t>(is, "mode");
  require(mode <= 1, ErrorCode::kFormat, "invalid mode tag");
  f.mode = mode == 0 ? FeedbackMode::kStatistical : FeedbackMode::kInstantaneous;
  f.learn_pilot = get<std::uint32_t>(is, "learn_pilot") != 0;
  f.beta = get<double>(is, "beta");
  f.seed = get<std::uint64_t>(is, "seed");
  const auto count = get<std::uint32_t>(is, "tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = binio::get_string(is, "tensor name");
    const auto rank = get<std::uint32_t>(is, "tensor rank");
    require(rank <= 4, ErrorCode::kFormat, "implausible tensor rank for '" + name + "'");
    std::vector<std::size_t> shape;
    for (std::uint32_t r = 0; r < rank; ++r)
      shape.push_back(static_cast<std::size_t>(get<std::uint64_t>(is, "tensor extent")));
    const std::size_t n = shape_size(shape);
    require(n <= bytes.size() / sizeof(double), ErrorCode::kFormat,
            "tensor '" + name + "' larger than file");
    std::vector<double> data(n);
    for (double& v : data) v = get<double>(is, "tensor data");
    ckpt.params.add(name, Tensor(std::move(shape), std::move(data)));
  }
  is.peek();
  require(is.eof(), ErrorCode::kFormat, "trailing bytes in checkpoint '" + origin + "'");
  return ckpt;
}

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path) {
  binio::make_parent_dirs(path);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  const std::string bytes = serialize_checkpoint(ckpt);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(os), ErrorCode::kIo, "write failed for '" + path + "'");
}

ModelCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::kMissingCheckpoint,
          "cannot open checkpoint '" + path + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return deserialize_checkpoint(buf.str(), path);
}

}  // namespace vqmimo
