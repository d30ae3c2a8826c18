#pragma once

#include <filesystem>

#include "asvlab/policy.hpp"

namespace asv {

struct CheckpointError : ConfigError {
  using ConfigError::ConfigError;
};

struct CheckpointMeta {
  std::uint64_t config_hash = 0;
  int iteration = 0;
};

/// Text header (dims, block table, payload checksum) followed by the
/// parameters as row-major little-endian float32, block by block. Stable
/// across platforms; saving a just-loaded checkpoint reproduces the file
/// byte for byte.
void save_checkpoint(const Net& net, const CheckpointMeta& meta,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
  Net net;
  CheckpointMeta meta;
};

/// Throws CheckpointError on bad magic, malformed header, dimension or
/// checksum mismatch, or a short payload.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Guard for consumers with a fixed interface (env observation/action
/// sizes). Throws CheckpointError naming both shapes.
void require_dims(const LoadedCheckpoint& ckpt, int obs_dim, int act_dim);

}  // namespace asv
