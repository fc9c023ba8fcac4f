#include "autodiff/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "common/error.hpp"

namespace pcsod::ad {
namespace {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename V>
  void scalar(V value) {
    static_assert(std::is_arithmetic_v<V>);
    unsigned char bytes[sizeof(V)];
    std::memcpy(bytes, &value, sizeof(V));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(V));
    out_.write(reinterpret_cast<const char*>(bytes), sizeof(V));
  }
  void string(const std::string& s) {
    scalar<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void shape(const Shape& shape) {
    scalar<std::uint32_t>(static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) scalar<std::uint32_t>(static_cast<std::uint32_t>(d));
  }
  void floats(const std::vector<float>& v) {
    for (float f : v) scalar(f);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string where) : in_(in), where_(std::move(where)) {}

  template <typename V>
  V scalar() {
    unsigned char bytes[sizeof(V)];
    in_.read(reinterpret_cast<char*>(bytes), sizeof(V));
    if (in_.gcount() != static_cast<std::streamsize>(sizeof(V))) throw_data(where_ + ": truncated checkpoint");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(V));
    V value;
    std::memcpy(&value, bytes, sizeof(V));
    return value;
  }
  std::string string() {
    const auto n = scalar<std::uint32_t>();
    if (n > (1u << 24)) throw_data(where_ + ": corrupt checkpoint string length");
    std::string s(n, '\0');
    in_.read(s.data(), n);
    if (in_.gcount() != static_cast<std::streamsize>(n)) throw_data(where_ + ": truncated checkpoint");
    return s;
  }
  Shape shape() {
    const auto n = scalar<std::uint32_t>();
    if (n > 8) throw_data(where_ + ": corrupt checkpoint shape");
    Shape s(n);
    for (auto& d : s) d = scalar<std::uint32_t>();
    return s;
  }
  std::vector<float> floats(std::size_t n) {
    if (n > (std::size_t{1} << 32)) throw_data(where_ + ": corrupt checkpoint tensor size");
    std::vector<float> v(n);
    for (auto& f : v) f = scalar<float>();
    return v;
  }

 private:
  std::istream& in_;
  std::string where_;
};

void write_record(Writer& w, const TensorRecord& r) {
  w.string(r.name);
  w.shape(r.shape);
  w.floats(r.values);
}

TensorRecord read_record(Reader& r) {
  TensorRecord rec;
  rec.name = r.string();
  rec.shape = r.shape();
  rec.values = r.floats(element_count(rec.shape));
  return rec;
}

template <typename T>
void copy_checked(const TensorRecord& rec, const std::string& name, const Shape& shape, std::vector<T>& dst) {
  if (rec.name != name || rec.shape != shape) {
    throw_data("checkpoint/config mismatch: expected " + name + " " + shape_string(shape) + ", found " + rec.name +
               " " + shape_string(rec.shape));
  }
  dst.assign(rec.values.begin(), rec.values.end());
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_data(path.string() + ": cannot open for writing");
  Writer w(out);
  out.write(kCheckpointMagic, 4);
  w.scalar<std::uint32_t>(kCheckpointVersion);
  w.string(ckpt.config_text);
  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(ckpt.parameters.size()));
  for (const auto& r : ckpt.parameters) write_record(w, r);
  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(ckpt.buffers.size()));
  for (const auto& r : ckpt.buffers) write_record(w, r);
  w.scalar<std::uint8_t>(ckpt.optimizer ? 1 : 0);
  if (ckpt.optimizer) {
    const auto& o = *ckpt.optimizer;
    w.scalar<std::uint64_t>(o.step);
    w.scalar(o.config.lr);
    w.scalar(o.config.weight_decay);
    w.scalar(o.config.beta1);
    w.scalar(o.config.beta2);
    w.scalar(o.config.eps);
    w.scalar<std::uint32_t>(static_cast<std::uint32_t>(o.moments.size()));
    for (const auto& m : o.moments) {
      w.string(m.name);
      w.shape(m.shape);
      w.floats(m.first);
      w.floats(m.second);
    }
  }
  out.flush();
  if (!out) throw_data(path.string() + ": write failed");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data(path.string() + ": cannot open checkpoint");
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kCheckpointMagic, 4) != 0) throw_data("bad checkpoint header");
  Reader r(in, path.string());
  const auto version = r.scalar<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw_data("bad checkpoint header: unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.config_text = r.string();
  const auto nparams = r.scalar<std::uint32_t>();
  for (std::uint32_t i = 0; i < nparams; ++i) ckpt.parameters.push_back(read_record(r));
  const auto nbuf = r.scalar<std::uint32_t>();
  for (std::uint32_t i = 0; i < nbuf; ++i) ckpt.buffers.push_back(read_record(r));
  if (r.scalar<std::uint8_t>() != 0) {
    OptimizerRecord o;
    o.step = r.scalar<std::uint64_t>();
    o.config.lr = r.scalar<double>();
    o.config.weight_decay = r.scalar<double>();
    o.config.beta1 = r.scalar<double>();
    o.config.beta2 = r.scalar<double>();
    o.config.eps = r.scalar<double>();
    const auto n = r.scalar<std::uint32_t>();
    for (std::uint32_t i = 0; i < n; ++i) {
      MomentRecord m;
      m.name = r.string();
      m.shape = r.shape();
      m.first = r.floats(element_count(m.shape));
      m.second = r.floats(element_count(m.shape));
      o.moments.push_back(std::move(m));
    }
    ckpt.optimizer = std::move(o);
  }
  return ckpt;
}

Checkpoint capture(const ParamStore<float>& store, const AdamState<float>* optimizer, std::string config_text) {
  Checkpoint ckpt;
  ckpt.config_text = std::move(config_text);
  for (const auto& p : store.parameters()) {
    ckpt.parameters.push_back({p.name, p.tensor.shape(), {p.tensor.data().begin(), p.tensor.data().end()}});
  }
  for (const auto& b : store.norm_buffers()) {
    const Shape s{b.buffers->running_mean.size()};
    ckpt.buffers.push_back({b.name + ".running_mean", s, b.buffers->running_mean});
    ckpt.buffers.push_back({b.name + ".running_var", s, b.buffers->running_var});
  }
  if (optimizer) {
    OptimizerRecord o;
    o.step = optimizer->step;
    o.config = optimizer->config;
    const auto& params = store.parameters();
    if (!optimizer->first_moment.empty()) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        o.moments.push_back(
            {params[i].name, params[i].tensor.shape(), optimizer->first_moment[i], optimizer->second_moment[i]});
      }
    }
    ckpt.optimizer = std::move(o);
  }
  return ckpt;
}

void restore(const Checkpoint& ckpt, ParamStore<float>& store, AdamState<float>* optimizer) {
  const auto& params = store.parameters();
  if (ckpt.parameters.size() != params.size()) {
    throw_data("checkpoint/config mismatch: checkpoint has " + std::to_string(ckpt.parameters.size()) +
               " parameters, model has " + std::to_string(params.size()));
  }
  const auto& buffers = store.norm_buffers();
  if (ckpt.buffers.size() != 2 * buffers.size()) throw_data("checkpoint/config mismatch: normalization buffers");
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<float> values;
    copy_checked(ckpt.parameters[i], params[i].name, params[i].tensor.shape(), values);
    Tensor<float> t = params[i].tensor;
    std::copy(values.begin(), values.end(), t.mutable_data().begin());
  }
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    const Shape s{buffers[i].buffers->running_mean.size()};
    copy_checked(ckpt.buffers[2 * i], buffers[i].name + ".running_mean", s, buffers[i].buffers->running_mean);
    copy_checked(ckpt.buffers[2 * i + 1], buffers[i].name + ".running_var", s, buffers[i].buffers->running_var);
  }
  if (optimizer) {
    *optimizer = AdamState<float>{};
    if (ckpt.optimizer) {
      optimizer->step = ckpt.optimizer->step;
      optimizer->config = ckpt.optimizer->config;
      if (!ckpt.optimizer->moments.empty()) {
        if (ckpt.optimizer->moments.size() != params.size()) throw_data("checkpoint/config mismatch: optimizer state");
        for (std::size_t i = 0; i < params.size(); ++i) {
          const auto& m = ckpt.optimizer->moments[i];
          if (m.name != params[i].name || m.shape != params[i].tensor.shape()) {
            throw_data("checkpoint/config mismatch: optimizer state for " + params[i].name);
          }
          optimizer->first_moment.push_back(m.first);
          optimizer->second_moment.push_back(m.second);
        }
      }
    }
  }
}

}  // namespace pcsod::ad
