#pragma once

#include <cstdint>
#include <vector>

namespace f3dgs {

/// Contiguous temporal chunk owned by one client. Every 8th frame of the
/// chunk (relative offsets 0, 8, 16, ...) is held out for validation.
struct ClientPartition {
  std::uint32_t client_id = 0;
  std::int64_t first = 0;  // inclusive
  std::int64_t last = 0;   // inclusive
  std::vector<std::int64_t> train_indices;
  std::vector<std::int64_t> val_indices;

  std::int64_t size() const { return last - first + 1; }
};

constexpr std::int64_t kValidationStride = 8;

/// K = ceil(N / C) chunks I_k = [kC, min((k+1)C - 1, N - 1)].
std::vector<ClientPartition> partition_dataset(std::int64_t frame_count, std::int64_t chunk_size);

/// Single partition spanning every frame, training on the union of the given
/// partitions' train frames and validating on the union of their val frames.
/// Used for the centralized baseline so both setups score the same frames.
ClientPartition merge_partitions(const std::vector<ClientPartition>& parts);

}  // namespace f3dgs
