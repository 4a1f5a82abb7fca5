#include "factm/state_codec.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace factm {

namespace {

constexpr char kMagic[8] = {'F', 'A', 'C', 'T', 'M', 'S', 'T', '\0'};

class Writer {
 public:
  void raw(const void* data, std::size_t n) {
    out_.append(static_cast<const char*>(data), n);
  }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  // Block: u32 name length, name, u32 rows, u32 cols, u64 count, values
  // in column-major order.
  void block(const std::string& name, const Matrix& m) {
    u32(static_cast<std::uint32_t>(name.size()));
    raw(name.data(), name.size());
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    u64(static_cast<std::uint64_t>(m.size()));
    for (Eigen::Index i = 0; i < m.size(); ++i) f64(m.data()[i]);
  }

  void block(const std::string& name, const Vector& v) {
    block(name, Matrix(v));
  }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}

  void raw(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, in_.data() + pos_, n);
    pos_ += n;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  Matrix block(const std::string& expected_name) {
    const std::uint32_t len = u32();
    std::string name(len, '\0');
    raw(name.data(), len);
    if (name != expected_name) {
      throw std::runtime_error("state: expected block '" + expected_name + "', found '" +
                               name + "'");
    }
    const std::uint32_t rows = u32();
    const std::uint32_t cols = u32();
    const std::uint64_t count = u64();
    if (count != static_cast<std::uint64_t>(rows) * cols) {
      throw std::runtime_error("state: block '" + name + "' has inconsistent size");
    }
    Matrix m(rows, cols);
    for (std::uint64_t i = 0; i < count; ++i) m.data()[i] = f64();
    return m;
  }

  Vector vector_block(const std::string& expected_name) {
    Matrix m = block(expected_name);
    if (m.cols() != 1 && m.size() != 0) {
      throw std::runtime_error("state: block '" + expected_name + "' is not a vector");
    }
    return Eigen::Map<const Vector>(m.data(), m.size());
  }

  [[nodiscard]] bool at_end() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw std::runtime_error("state: truncated input");
  }

  const std::string& in_;
  std::size_t pos_ = 0;
};

std::string prefix(const char* kind, std::size_t i) {
  return std::string(kind) + "[" + std::to_string(i) + "].";
}

}  // namespace

std::string encode_state(const VariationalState& state) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kStateFormatVersion);
  w.u32(static_cast<std::uint32_t>(state.simple.size()));
  w.u32(static_cast<std::uint32_t>(state.structured.size()));
  w.block("z_mean", state.z_mean);
  w.block("z_var", state.z_var);
  for (std::size_t m = 0; m < state.simple.size(); ++m) {
    const auto& v = state.simple[m];
    const std::string p = prefix("simple", m);
    w.block(p + "incl_prob", v.incl_prob);
    w.block(p + "slab_mean", v.slab_mean);
    w.block(p + "slab_var", v.slab_var);
    w.block(p + "alpha_shape", v.alpha_shape);
    w.block(p + "alpha_rate", v.alpha_rate);
    w.block(p + "theta_a", v.theta_a);
    w.block(p + "theta_b", v.theta_b);
    w.block(p + "tau_shape", v.tau_shape);
    w.block(p + "tau_rate", v.tau_rate);
  }
  for (std::size_t s = 0; s < state.structured.size(); ++s) {
    const auto& v = state.structured[s];
    const std::string p = prefix("structured", s);
    w.block(p + "wbar_mean", v.wbar_mean);
    w.block(p + "wbar_var", v.wbar_var);
    w.block(p + "alphabar_shape", v.alphabar_shape);
    w.block(p + "alphabar_rate", v.alphabar_rate);
    w.block(p + "link_mean", v.link_mean);
    w.block(p + "link_cov", v.link_cov);
    w.block(p + "eta_mean", v.eta_mean);
    w.block(p + "eta_var", v.eta_var);
    w.block(p + "zeta", v.zeta);
    w.u32(static_cast<std::uint32_t>(v.phi.size()));
    for (std::size_t n = 0; n < v.phi.size(); ++n) {
      w.block(p + "phi[" + std::to_string(n) + "]", v.phi[n]);
    }
    w.block(p + "topic_dirichlet", v.topic_dirichlet);
    w.block(p + "mu0", v.mu0);
    w.block(p + "sigma0", v.sigma0);
  }
  return w.take();
}

VariationalState decode_state(const std::string& bytes) {
  Reader r(bytes);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error("state: bad magic, not a factm state file");
  }
  const std::uint32_t version = r.u32();
  if (version != kStateFormatVersion) {
    throw std::runtime_error("state: unsupported format version " + std::to_string(version));
  }
  const std::uint32_t n_simple = r.u32();
  const std::uint32_t n_structured = r.u32();

  VariationalState state;
  state.z_mean = r.block("z_mean");
  state.z_var = r.block("z_var");
  state.simple.resize(n_simple);
  for (std::size_t m = 0; m < n_simple; ++m) {
    auto& v = state.simple[m];
    const std::string p = prefix("simple", m);
    v.incl_prob = r.block(p + "incl_prob");
    v.slab_mean = r.block(p + "slab_mean");
    v.slab_var = r.block(p + "slab_var");
    v.alpha_shape = r.vector_block(p + "alpha_shape");
    v.alpha_rate = r.vector_block(p + "alpha_rate");
    v.theta_a = r.vector_block(p + "theta_a");
    v.theta_b = r.vector_block(p + "theta_b");
    v.tau_shape = r.vector_block(p + "tau_shape");
    v.tau_rate = r.vector_block(p + "tau_rate");
  }
  state.structured.resize(n_structured);
  for (std::size_t s = 0; s < n_structured; ++s) {
    auto& v = state.structured[s];
    const std::string p = prefix("structured", s);
    v.wbar_mean = r.block(p + "wbar_mean");
    v.wbar_var = r.block(p + "wbar_var");
    v.alphabar_shape = r.vector_block(p + "alphabar_shape");
    v.alphabar_rate = r.vector_block(p + "alphabar_rate");
    v.link_mean = r.block(p + "link_mean");
    v.link_cov = r.block(p + "link_cov");
    v.eta_mean = r.block(p + "eta_mean");
    v.eta_var = r.block(p + "eta_var");
    v.zeta = r.vector_block(p + "zeta");
    const std::uint32_t n_docs = r.u32();
    v.phi.resize(n_docs);
    for (std::size_t n = 0; n < n_docs; ++n) {
      v.phi[n] = r.block(p + "phi[" + std::to_string(n) + "]");
    }
    v.topic_dirichlet = r.block(p + "topic_dirichlet");
    v.mu0 = r.vector_block(p + "mu0");
    v.sigma0 = r.block(p + "sigma0");
  }
  if (!r.at_end()) throw std::runtime_error("state: trailing bytes after last block");
  return state;
}

}  // namespace factm
