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

#ifndef REALSR_CHECKPOINT_HPP_
#define REALSR_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "realsr/nets.hpp"

namespace realsr {

struct NamedTensor {
  std::string name;
  Tensor value;
};

// Container for a training stage: networks by role ("G", "F", "D_X", "D_Z",
// "S", "C", "H"), free-form metadata and auxiliary tensors (optimiser
// moments, RNG state).
//
// File layout, all integers little-endian:
//   magic "RSRCKPT\0", u32 format version
//   u64 step
//   u32 n_meta, n_meta x (str key, str value)
//   u32 n_networks, per network: str role, str architecture_id, str preset,
//       str params version, u32 n_tensors, n_tensors x tensor
//   u32 n_extra, per group: str group, u32 n_tensors, n_tensors x tensor
// where str = u32 length + bytes and tensor = str name, u32 rank (4),
// 4 x u32 dims, dims-product x float32.
struct Checkpoint {
  static constexpr uint32_t kFormatVersion = 1;

  uint64_t step = 0;
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, NetworkParams>> networks;
  std::vector<std::pair<std::string, std::vector<NamedTensor>>> extras;

  bool has_network(const std::string& role) const;
  const NetworkParams& network(const std::string& role) const;
  NetworkParams& network(const std::string& role);
  void set_network(const std::string& role, const NetworkParams& params);
  const std::vector<NamedTensor>* extra(const std::string& group) const;
  std::string meta_or(const std::string& key, const std::string& fallback) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
// Rejects bad magic, unknown versions, truncation, schema mismatches and
// non-finite values.
Checkpoint decode_checkpoint(const std::string& bytes);

// Written to a temporary sibling and renamed, so an interrupted save never
// clobbers the previous file.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Flat archive of named tensors ("RSRTENS\0", u32 version, u32 count,
// count x tensor). Used to carry weights converted from other frameworks.
std::string encode_tensor_archive(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> decode_tensor_archive(const std::string& bytes);
bool is_tensor_archive(const std::string& bytes);

// Maps a published ESRGAN state dict (either the original RRDBNet names or
// the later body/conv_body naming, optionally "module."-prefixed) onto the
// SR generator schema. Biases may be rank 1.
NetworkParams import_esrgan(const std::vector<NamedTensor>& state, Preset preset);

// Builds a parameter set of `arch` from an archive whose names equal the
// schema names (e.g. torchvision VGG19 "features.N.*").
NetworkParams params_from_archive(const std::vector<NamedTensor>& state, Architecture arch,
                                  Preset preset);

// Reads SR weights from either a checkpoint (role "S") or a tensor archive
// in ESRGAN naming.
NetworkParams load_sr_weights(const std::filesystem::path& path, Preset preset);

// Cache directory for weight and plugin files: $REALSR_CACHE, else
// $XDG_CACHE_HOME/realsr, else ~/.cache/realsr.
std::filesystem::path cache_dir();
// `name` as given if it exists, else resolved inside cache_dir().
std::filesystem::path resolve_weight_file(const std::filesystem::path& name);

}  // namespace realsr

#endif  // REALSR_CHECKPOINT_HPP_
