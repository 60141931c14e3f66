#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gpd/nn/layers.hpp"
#include "gpd/nn/optim.hpp"

namespace gpd::nn {

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

/// Versioned container of named float32 arrays plus a key=value header.
///
/// Binary layout (all integers little-endian):
///   "GPDCKPT1"                       8-byte magic
///   u32 header_bytes, header text    "key=value\n" lines, keys sorted
///   u32 array_count
///   per array: u32 name_len, name, u32 rank, u64 dims[rank], f32 data[prod(dims)]
struct Checkpoint {
  std::map<std::string, std::string> header;
  std::vector<NamedArray> arrays;

  const NamedArray* find(const std::string& name) const;
  const std::string& require(const std::string& key) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// FNV-1a 64-bit.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);
/// Hex digest of the arrays (names, shapes, and values; header excluded).
std::string content_hash(const Checkpoint& ckpt);

template <typename T>
void export_params(const ParameterSet<T>& params, Checkpoint& ckpt, const std::string& prefix = "");
/// Copies arrays into matching parameters; throws ConfigError on a missing
/// name or a shape mismatch.
template <typename T>
void import_params(ParameterSet<T>& params, const Checkpoint& ckpt, const std::string& prefix = "");

template <typename T>
void export_optimizer(const AdamW<T>& opt, Checkpoint& ckpt);
template <typename T>
void import_optimizer(AdamW<T>& opt, const Checkpoint& ckpt);

}  // namespace gpd::nn
