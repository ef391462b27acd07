#include "f3dgs/partition.hpp"

#include <algorithm>

#include "f3dgs/error.hpp"

namespace f3dgs {

std::vector<ClientPartition> partition_dataset(std::int64_t frame_count,
                                               std::int64_t chunk_size) {
  if (frame_count < 1 || chunk_size < 1) {
    throw Error(ErrorCode::kConfig, "partition_dataset needs N >= 1 and C >= 1");
  }
  const std::int64_t clients = (frame_count + chunk_size - 1) / chunk_size;
  std::vector<ClientPartition> parts;
  parts.reserve(static_cast<std::size_t>(clients));
  for (std::int64_t k = 0; k < clients; ++k) {
    ClientPartition p;
    p.client_id = static_cast<std::uint32_t>(k);
    p.first = k * chunk_size;
    p.last = std::min((k + 1) * chunk_size - 1, frame_count - 1);
    for (std::int64_t t = p.first; t <= p.last; ++t) {
      if ((t - p.first) % kValidationStride == 0) {
        p.val_indices.push_back(t);
      } else {
        p.train_indices.push_back(t);
      }
    }
    parts.push_back(std::move(p));
  }
  return parts;
}

ClientPartition merge_partitions(const std::vector<ClientPartition>& parts) {
  if (parts.empty()) throw Error(ErrorCode::kConfig, "merge_partitions needs a partition");
  ClientPartition merged;
  merged.client_id = 0;
  merged.first = parts.front().first;
  merged.last = parts.front().last;
  for (const auto& p : parts) {
    merged.first = std::min(merged.first, p.first);
    merged.last = std::max(merged.last, p.last);
    merged.train_indices.insert(merged.train_indices.end(), p.train_indices.begin(),
                                p.train_indices.end());
    merged.val_indices.insert(merged.val_indices.end(), p.val_indices.begin(),
                              p.val_indices.end());
  }
  std::sort(merged.train_indices.begin(), merged.train_indices.end());
  std::sort(merged.val_indices.begin(), merged.val_indices.end());
  return merged;
}

}  // namespace f3dgs
