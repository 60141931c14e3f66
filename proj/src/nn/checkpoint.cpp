#include "gpd/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gpd/scene/error.hpp"

namespace gpd::nn {

namespace {

constexpr char kMagic[8] = {'G', 'P', 'D', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::ostream& out, float f) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint64_t uint(int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      const int c = in_.get();
      if (c == EOF) throw std::runtime_error("checkpoint truncated");
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
  }
  std::string bytes(std::size_t n) {
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw std::runtime_error("checkpoint truncated");
    return s;
  }
  float f32() {
    const auto bits = static_cast<std::uint32_t>(uint(4));
    float f = 0;
    std::memcpy(&f, &bits, 4);
    return f;
  }

 private:
  std::istream& in_;
};

}  // namespace

const NamedArray* Checkpoint::find(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const std::string& Checkpoint::require(const std::string& key) const {
  const auto it = header.find(key);
  if (it == header.end()) throw ConfigError("checkpoint header lacks '" + key + "'");
  return it->second;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ostringstream head;
  for (const auto& [k, v] : ckpt.header) head << k << '=' << v << '\n';
  const std::string h = head.str();

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(kMagic, 8);
    put_u32(out, static_cast<std::uint32_t>(h.size()));
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    put_u32(out, static_cast<std::uint32_t>(ckpt.arrays.size()));
    for (const auto& a : ckpt.arrays) {
      put_u32(out, static_cast<std::uint32_t>(a.name.size()));
      out.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
      put_u32(out, static_cast<std::uint32_t>(a.shape.size()));
      for (auto d : a.shape) put_u64(out, d);
      for (float f : a.data) put_f32(out, f);
    }
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read checkpoint " + path.string());
  Reader r(in);
  if (r.bytes(8) != std::string(kMagic, 8)) throw ConfigError(path.string() + " is not a checkpoint");
  Checkpoint ckpt;
  std::istringstream head(r.bytes(r.uint(4)));
  std::string line;
  while (std::getline(head, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("bad checkpoint header line '" + line + "'");
    ckpt.header[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto count = r.uint(4);
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = r.bytes(r.uint(4));
    const auto rank = r.uint(4);
    for (std::uint64_t d = 0; d < rank; ++d) a.shape.push_back(r.uint(8));
    a.data.resize(shape_size(a.shape));
    for (auto& f : a.data) f = r.f32();
    ckpt.arrays.push_back(std::move(a));
  }
  return ckpt;
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string content_hash(const Checkpoint& ckpt) {
  std::uint64_t h = fnv1a64(nullptr, 0);
  for (const auto& a : ckpt.arrays) {
    h = fnv1a64(a.name.data(), a.name.size(), h);
    for (auto d : a.shape) h = fnv1a64(&d, sizeof d, h);
    h = fnv1a64(a.data.data(), a.data.size() * sizeof(float), h);
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

template <typename T>
void export_params(const ParameterSet<T>& params, Checkpoint& ckpt, const std::string& prefix) {
  for (const auto* p : params.all()) {
    NamedArray a;
    a.name = prefix + p->name;
    a.shape = p->value.shape();
    a.data.assign(p->value.values().begin(), p->value.values().end());
    ckpt.arrays.push_back(std::move(a));
  }
}

template <typename T>
void import_params(ParameterSet<T>& params, const Checkpoint& ckpt, const std::string& prefix) {
  for (auto* p : params.all()) {
    const NamedArray* a = ckpt.find(prefix + p->name);
    if (a == nullptr) throw ConfigError("checkpoint lacks parameter " + prefix + p->name);
    if (a->shape != p->value.shape()) {
      throw ConfigError("parameter " + p->name + " shape " + shape_str(a->shape) + " != " + shape_str(p->value.shape()));
    }
    for (std::size_t i = 0; i < a->data.size(); ++i) p->value[i] = static_cast<T>(a->data[i]);
  }
}

template <typename T>
void export_optimizer(const AdamW<T>& opt, Checkpoint& ckpt) {
  ckpt.header["opt.step"] = std::to_string(opt.state().step);
  for (std::size_t k = 0; k < opt.params().size(); ++k) {
    const auto& name = opt.params()[k]->name;
    for (int which = 0; which < 2; ++which) {
      const Tensor<T>& t = which == 0 ? opt.state().m[k] : opt.state().v[k];
      ckpt.arrays.push_back({(which == 0 ? "opt.m." : "opt.v.") + name, t.shape(), {t.values().begin(), t.values().end()}});
    }
  }
}

template <typename T>
void import_optimizer(AdamW<T>& opt, const Checkpoint& ckpt) {
  opt.state().step = std::stoll(ckpt.require("opt.step"));
  for (std::size_t k = 0; k < opt.params().size(); ++k) {
    const auto& name = opt.params()[k]->name;
    for (int which = 0; which < 2; ++which) {
      const NamedArray* a = ckpt.find((which == 0 ? "opt.m." : "opt.v.") + name);
      if (a == nullptr) throw ConfigError("checkpoint lacks optimizer state for " + name);
      Tensor<T>& t = which == 0 ? opt.state().m[k] : opt.state().v[k];
      if (a->shape != t.shape()) throw ConfigError("optimizer state shape mismatch for " + name);
      for (std::size_t i = 0; i < a->data.size(); ++i) t[i] = static_cast<T>(a->data[i]);
    }
  }
}

template void export_params(const ParameterSet<float>&, Checkpoint&, const std::string&);
template void export_params(const ParameterSet<double>&, Checkpoint&, const std::string&);
template void import_params(ParameterSet<float>&, const Checkpoint&, const std::string&);
template void import_params(ParameterSet<double>&, const Checkpoint&, const std::string&);
template void export_optimizer(const AdamW<float>&, Checkpoint&);
template void import_optimizer(AdamW<float>&, const Checkpoint&);

}  // namespace gpd::nn
