#include "core/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "core/error.hpp"

namespace flores {

namespace {

constexpr char kMagic[8] = {'F', 'L', 'O', 'R', 'E', 'S', 'C', 'P'};
constexpr uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw_io("cannot open checkpoint for writing: " + path);
  }
  void u32(uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out_.write(reinterpret_cast<char*>(b), 4);
  }
  void u64(uint64_t v) {
    u32(static_cast<uint32_t>(v));
    u32(static_cast<uint32_t>(v >> 32));
  }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void raw(const void* p, size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  bool good() const { return static_cast<bool>(out_); }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw_io("cannot open checkpoint: " + path);
  }
  uint32_t u32() {
    unsigned char b[4];
    in_.read(reinterpret_cast<char*>(b), 4);
    if (!in_) throw_format("corrupt checkpoint: truncated");
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
  }
  uint64_t u64() {
    const uint64_t lo = u32();
    return lo | static_cast<uint64_t>(u32()) << 32;
  }
  float f32() {
    const uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string str() {
    const uint32_t n = u32();
    if (n > (1u << 24)) throw_format("corrupt checkpoint: absurd string length");
    std::string s(n, '\0');
    in_.read(s.data(), n);
    if (!in_) throw_format("corrupt checkpoint: truncated");
    return s;
  }
  void raw(void* p, size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw_format("corrupt checkpoint: truncated");
  }
  void magic() {
    char m[8];
    in_.read(m, 8);
    if (!in_ || std::memcmp(m, kMagic, 8) != 0)
      throw_format("not a checkpoint file (bad magic)");
  }

 private:
  std::ifstream in_;
};

void write_dims(Writer& w, const NetDims& d) {
  w.u32(static_cast<uint32_t>(d.obs));
  w.u32(static_cast<uint32_t>(d.history_steps));
  w.u32(static_cast<uint32_t>(d.act));
  w.u32(static_cast<uint32_t>(d.latent));
  auto vec = [&](const std::vector<int>& v) {
    w.u32(static_cast<uint32_t>(v.size()));
    for (int x : v) w.u32(static_cast<uint32_t>(x));
  };
  vec(d.encoder_hidden);
  vec(d.actor_hidden);
  vec(d.critic_hidden);
}

NetDims read_dims(Reader& r) {
  NetDims d;
  d.obs = static_cast<int>(r.u32());
  d.history_steps = static_cast<int>(r.u32());
  d.act = static_cast<int>(r.u32());
  d.latent = static_cast<int>(r.u32());
  auto vec = [&]() {
    std::vector<int> v(r.u32());
    for (auto& x : v) x = static_cast<int>(r.u32());
    return v;
  };
  d.encoder_hidden = vec();
  d.actor_hidden = vec();
  d.critic_hidden = vec();
  if (d.obs < 1 || d.history_steps < 1 || d.act < 1 || d.latent < 1)
    throw_format("corrupt checkpoint: bad dimensions");
  return d;
}

void write_tensor(Writer& w, const std::string& name, const nets::Mat<float>& m) {
  w.str(name);
  w.u32(static_cast<uint32_t>(m.rows()));
  w.u32(static_cast<uint32_t>(m.cols()));
  // row-major on disk
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f32(m(i, j));
}

void read_tensor_into(Reader& r, const std::string& expected_name, nets::Mat<float>& m) {
  const std::string name = r.str();
  if (name != expected_name)
    throw_format("checkpoint layout mismatch: expected tensor " + expected_name + ", found " +
                 name);
  const uint32_t rows = r.u32();
  const uint32_t cols = r.u32();
  if (static_cast<Eigen::Index>(rows) != m.rows() ||
      static_cast<Eigen::Index>(cols) != m.cols())
    throw_format("checkpoint shape mismatch for tensor " + expected_name);
  for (uint32_t i = 0; i < rows; ++i)
    for (uint32_t j = 0; j < cols; ++j) m(i, j) = r.f32();
}

template <typename Fn>
void for_each_tensor(PolicyNets<float>& p, Fn&& fn) {
  p.encoder.visit([&](nets::Tensor<float>& t) { fn("encoder." + t.name, t.value); });
  p.actor.visit([&](nets::Tensor<float>& t) { fn("actor." + t.name, t.value); });
  fn("log_std", p.log_std.value);
  p.critic.visit([&](nets::Tensor<float>& t) { fn("critic." + t.name, t.value); });
  fn("target_projection", p.target_projection.value);
}

}  // namespace

void save_checkpoint(PolicyNets<float>& policy, const CheckpointMeta& meta,
                     const std::string& path) {
  Writer w(path);
  w.raw(kMagic, 8);
  w.u32(kVersion);
  w.str(meta.morphology);
  w.u64(meta.seed);
  w.str(meta.config_json);
  write_dims(w, policy.dims);

  uint32_t count = 1;  // obs_scale
  for_each_tensor(policy, [&](const std::string&, const nets::Mat<float>&) { ++count; });
  w.u32(count);
  for_each_tensor(policy,
                  [&](const std::string& name, const nets::Mat<float>& m) { write_tensor(w, name, m); });
  nets::Mat<float> scale = policy.obs_scale;
  write_tensor(w, "obs_scale", scale);
  if (!w.good()) throw_io("checkpoint write failed: " + path);
}

std::pair<PolicyNets<float>, CheckpointMeta> load_checkpoint(const std::string& path) {
  Reader r(path);
  r.magic();
  CheckpointMeta meta;
  meta.version = r.u32();
  if (meta.version != kVersion)
    throw_format("checkpoint format version " + std::to_string(meta.version) +
                 " is not supported (expected " + std::to_string(kVersion) + ")");
  meta.morphology = r.str();
  meta.seed = r.u64();
  meta.config_json = r.str();
  const NetDims dims = read_dims(r);

  PolicyNets<float> policy = make_policy<float>(dims, 0);
  const uint32_t count = r.u32();
  uint32_t expected = 1;
  for_each_tensor(policy, [&](const std::string&, const nets::Mat<float>&) { ++expected; });
  if (count != expected) throw_format("checkpoint tensor count mismatch");

  for_each_tensor(policy, [&](const std::string& name, nets::Mat<float>& m) {
    read_tensor_into(r, name, m);
  });
  nets::Mat<float> scale(dims.obs, 1);
  read_tensor_into(r, "obs_scale", scale);
  policy.obs_scale = scale.col(0);
  for (int h = 0; h < dims.history_steps; ++h)
    policy.history_scale.segment(h * dims.obs, dims.obs) = policy.obs_scale;
  policy.state_scale.topRows(dims.obs) = policy.obs_scale;
  policy.state_scale.bottomRows(dims.history_dim()) = policy.history_scale;
  return {std::move(policy), std::move(meta)};
}

CheckpointMeta inspect_checkpoint(const std::string& path) {
  Reader r(path);
  r.magic();
  CheckpointMeta meta;
  meta.version = r.u32();
  if (meta.version != kVersion)
    throw_format("checkpoint format version " + std::to_string(meta.version) +
                 " is not supported (expected " + std::to_string(kVersion) + ")");
  meta.morphology = r.str();
  meta.seed = r.u64();
  meta.config_json = r.str();
  return meta;
}

}  // namespace flores
