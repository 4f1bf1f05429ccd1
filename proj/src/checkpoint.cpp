// Copyright 2026 The realsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "realsr/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <regex>
#include <unordered_map>

#include "realsr/common.hpp"
#include "realsr/image_io.hpp"

namespace realsr {
namespace {

constexpr std::string_view kCheckpointMagic{"RSRCKPT\0", 8};
constexpr std::string_view kArchiveMagic{"RSRTENS\0", 8};
constexpr uint32_t kArchiveVersion = 1;

class Writer {
 public:
  void bytes(std::string_view b) { out_.append(b); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void str(std::string_view s) {
    u32(static_cast<uint32_t>(s.size()));
    bytes(s);
  }
  void tensor(const std::string& name, const Tensor& t) {
    str(name);
    const Shape& s = t.shape();
    u32(4);
    for (int d : {s.n, s.c, s.h, s.w}) u32(static_cast<uint32_t>(d));
    for (double v : t.values()) u32(std::bit_cast<uint32_t>(static_cast<float>(v)));
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::string_view bytes(size_t n) {
    if (data_.size() - pos_ < n) throw ValidationError("truncated file");
    std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  uint32_t u32() {
    const std::string_view b = bytes(4);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<size_t>(i)]);
    return v;
  }
  uint64_t u64() {
    const uint64_t lo = u32();
    return lo | (static_cast<uint64_t>(u32()) << 32);
  }
  std::string str() {
    const uint32_t n = u32();
    return std::string(bytes(n));
  }
  NamedTensor tensor() {
    NamedTensor out;
    out.name = str();
    const uint32_t rank = u32();
    if (rank != 4) throw ValidationError("tensor '" + out.name + "' has rank " + std::to_string(rank));
    Shape s;
    s.n = static_cast<int>(u32());
    s.c = static_cast<int>(u32());
    s.h = static_cast<int>(u32());
    s.w = static_cast<int>(u32());
    if (s.n <= 0 || s.c <= 0 || s.h <= 0 || s.w <= 0) {
      throw ValidationError("tensor '" + out.name + "' has empty shape " + s.str());
    }
    if (s.numel() > (data_.size() - pos_) / 4) throw ValidationError("truncated file");
    out.value = Tensor(s);
    for (double& v : out.value.values()) {
      v = static_cast<double>(std::bit_cast<float>(u32()));
      if (!std::isfinite(v)) throw ValidationError("non-finite value in tensor '" + out.name + "'");
    }
    return out;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  size_t pos_ = 0;
};

std::string read_bytes(const std::filesystem::path& path) {
  const std::vector<uint8_t> raw = read_file(path);
  return std::string(raw.begin(), raw.end());
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  write_file(path, std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()));
}

NetworkParams read_network(Reader& r, const std::string& role) {
  const std::string arch_id = r.str();
  const std::string preset = r.str();
  const std::string version = r.str();
  if (version != NetworkParams::kVersion) {
    throw ValidationError("network '" + role + "': unsupported parameter version '" + version + "'");
  }
  NetworkParams params(parse_architecture(arch_id), parse_preset(preset));
  const uint32_t count = r.u32();
  if (count != params.tensors().size()) {
    throw ValidationError("network '" + role + "' (" + arch_id + "/" + preset + "): expected " +
                          std::to_string(params.tensors().size()) + " tensors, file has " +
                          std::to_string(count));
  }
  for (const auto& [name, var] : params.tensors()) {
    NamedTensor t = r.tensor();
    if (t.name != name) {
      throw ValidationError("network '" + role + "': expected tensor '" + name + "', found '" + t.name + "'");
    }
    if (!(t.value.shape() == var.shape())) {
      throw ValidationError("network '" + role + "': tensor '" + name + "' has shape " +
                            t.value.shape().str() + ", schema says " + var.shape().str());
    }
    params[name].mutable_value() = std::move(t.value);
  }
  return params;
}

// Copies `src` into `dst` when element counts agree and non-unit dims match
// in order, which admits rank-1 biases and (out, in) linear weights.
bool compatible(const Tensor& src, const Shape& dst) {
  if (src.numel() != dst.numel()) return false;
  auto squeeze = [](const Shape& s) {
    std::vector<int> d;
    for (int v : {s.n, s.c, s.h, s.w}) {
      if (v != 1) d.push_back(v);
    }
    return d;
  };
  return squeeze(src.shape()) == squeeze(dst);
}

void assign_from(NetworkParams& params, const std::unordered_map<std::string, const Tensor*>& by_name,
                 const std::string& what) {
  for (const auto& [name, var] : params.tensors()) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw ValidationError(what + ": missing tensor '" + name + "'");
    if (!compatible(*it->second, var.shape())) {
      throw ValidationError(what + ": tensor '" + name + "' has shape " + it->second->shape().str() +
                            ", schema says " + var.shape().str());
    }
    Tensor t(var.shape(), std::vector<double>(it->second->values().begin(), it->second->values().end()));
    t.round_to_float();
    params[name].mutable_value() = std::move(t);
  }
  params.require_finite();
}

}  // namespace

bool Checkpoint::has_network(const std::string& role) const {
  for (const auto& [r, p] : networks) {
    if (r == role) return true;
  }
  return false;
}

const NetworkParams& Checkpoint::network(const std::string& role) const {
  for (const auto& [r, p] : networks) {
    if (r == role) return p;
  }
  throw ValidationError("checkpoint has no network '" + role + "'");
}

NetworkParams& Checkpoint::network(const std::string& role) {
  return const_cast<NetworkParams&>(static_cast<const Checkpoint&>(*this).network(role));
}

void Checkpoint::set_network(const std::string& role, const NetworkParams& params) {
  for (auto& [r, p] : networks) {
    if (r == role) {
      p = params.clone();
      return;
    }
  }
  networks.emplace_back(role, params.clone());
}

const std::vector<NamedTensor>* Checkpoint::extra(const std::string& group) const {
  for (const auto& [g, t] : extras) {
    if (g == group) return &t;
  }
  return nullptr;
}

std::string Checkpoint::meta_or(const std::string& key, const std::string& fallback) const {
  auto it = meta.find(key);
  return it == meta.end() ? fallback : it->second;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kCheckpointMagic);
  w.u32(Checkpoint::kFormatVersion);
  w.u64(ckpt.step);
  w.u32(static_cast<uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<uint32_t>(ckpt.networks.size()));
  for (const auto& [role, params] : ckpt.networks) {
    w.str(role);
    w.str(architecture_id(params.architecture()));
    w.str(to_string(params.preset()));
    w.str(NetworkParams::kVersion);
    w.u32(static_cast<uint32_t>(params.tensors().size()));
    for (const auto& [name, var] : params.tensors()) w.tensor(name, var.value());
  }
  w.u32(static_cast<uint32_t>(ckpt.extras.size()));
  for (const auto& [group, tensors] : ckpt.extras) {
    w.str(group);
    w.u32(static_cast<uint32_t>(tensors.size()));
    for (const NamedTensor& t : tensors) w.tensor(t.name, t.value);
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (bytes.size() < kCheckpointMagic.size() || r.bytes(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw ValidationError("not a realsr checkpoint (bad magic)");
  }
  const uint32_t version = r.u32();
  if (version != Checkpoint::kFormatVersion) {
    throw ValidationError("unsupported checkpoint format version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.step = r.u64();
  for (uint32_t n = r.u32(), i = 0; i < n; ++i) {
    std::string k = r.str();
    ckpt.meta[k] = r.str();
  }
  for (uint32_t n = r.u32(), i = 0; i < n; ++i) {
    std::string role = r.str();
    NetworkParams p = read_network(r, role);
    ckpt.networks.emplace_back(std::move(role), std::move(p));
  }
  for (uint32_t n = r.u32(), i = 0; i < n; ++i) {
    std::string group = r.str();
    std::vector<NamedTensor> tensors;
    for (uint32_t m = r.u32(), j = 0; j < m; ++j) tensors.push_back(r.tensor());
    ckpt.extras.emplace_back(std::move(group), std::move(tensors));
  }
  if (!r.done()) throw ValidationError("trailing bytes after checkpoint payload");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  write_bytes(tmp, encode_checkpoint(ckpt));
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_bytes(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string encode_tensor_archive(const std::vector<NamedTensor>& tensors) {
  Writer w;
  w.bytes(kArchiveMagic);
  w.u32(kArchiveVersion);
  w.u32(static_cast<uint32_t>(tensors.size()));
  for (const NamedTensor& t : tensors) w.tensor(t.name, t.value);
  return w.take();
}

bool is_tensor_archive(const std::string& bytes) {
  return bytes.size() >= kArchiveMagic.size() && std::string_view(bytes).substr(0, 8) == kArchiveMagic;
}

std::vector<NamedTensor> decode_tensor_archive(const std::string& bytes) {
  if (!is_tensor_archive(bytes)) throw ValidationError("not a realsr tensor archive (bad magic)");
  Reader r(bytes);
  r.bytes(kArchiveMagic.size());
  const uint32_t version = r.u32();
  if (version != kArchiveVersion) {
    throw ValidationError("unsupported tensor archive version " + std::to_string(version));
  }
  std::vector<NamedTensor> out;
  for (uint32_t n = r.u32(), i = 0; i < n; ++i) out.push_back(r.tensor());
  if (!r.done()) throw ValidationError("trailing bytes after tensor archive payload");
  return out;
}

NetworkParams import_esrgan(const std::vector<NamedTensor>& state, Preset preset) {
  // Later naming -> original naming.
  static const std::vector<std::pair<std::regex, std::string>> kRenames = {
      {std::regex(R"(^body\.(\d+)\.rdb(\d)\.(conv\d)\.)"), "RRDB_trunk.$1.RDB$2.$3."},
      {std::regex(R"(^conv_body\.)"), "trunk_conv."},
      {std::regex(R"(^conv_up1\.)"), "upconv1."},
      {std::regex(R"(^conv_up2\.)"), "upconv2."},
      {std::regex(R"(^conv_hr\.)"), "HRconv."},
  };
  std::vector<std::pair<std::string, const Tensor*>> renamed;
  for (const NamedTensor& t : state) {
    std::string name = t.name;
    if (name.rfind("module.", 0) == 0) name = name.substr(7);
    for (const auto& [re, repl] : kRenames) name = std::regex_replace(name, re, repl);
    renamed.emplace_back(std::move(name), &t.value);
  }
  NetworkParams params(Architecture::kSrGenerator, preset);
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& [n, t] : renamed) {
    if (!params.contains(n)) {
      throw ValidationError("ESRGAN import: tensor '" + n + "' has no counterpart in the " +
                            to_string(preset) + " SR schema");
    }
    by_name[n] = t;
  }
  assign_from(params, by_name, "ESRGAN import");
  return params;
}

NetworkParams params_from_archive(const std::vector<NamedTensor>& state, Architecture arch,
                                  Preset preset) {
  NetworkParams params(arch, preset);
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const NamedTensor& t : state) by_name[t.name] = &t.value;
  assign_from(params, by_name, architecture_id(arch) + " import");
  return params;
}

NetworkParams load_sr_weights(const std::filesystem::path& path, Preset preset) {
  const std::string bytes = read_bytes(path);
  if (is_tensor_archive(bytes)) return import_esrgan(decode_tensor_archive(bytes), preset);
  Checkpoint ckpt = decode_checkpoint(bytes);
  const NetworkParams& s = ckpt.network("S");
  if (s.architecture() != Architecture::kSrGenerator || s.preset() != preset) {
    throw ValidationError(path.string() + ": SR weights are " + architecture_id(s.architecture()) + "/" +
                          to_string(s.preset()) + ", runtime wants rrdb_sr/" + to_string(preset));
  }
  return s.clone();
}

std::filesystem::path cache_dir() {
  if (const char* env = std::getenv("REALSR_CACHE"); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) {
    return std::filesystem::path(xdg) / "realsr";
  }
  if (const char* home = std::getenv("HOME"); home && *home) {
    return std::filesystem::path(home) / ".cache" / "realsr";
  }
  return std::filesystem::temp_directory_path() / "realsr-cache";
}

std::filesystem::path resolve_weight_file(const std::filesystem::path& name) {
  if (std::filesystem::exists(name)) return name;
  const std::filesystem::path cached = cache_dir() / name;
  if (std::filesystem::exists(cached)) return cached;
  throw IoError("weight file not found: " + name.string() + " (also looked in " + cache_dir().string() + ")");
}

}  // namespace realsr
