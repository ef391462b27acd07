#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "f3dgs/types.hpp"

namespace f3dgs {

/// Appearance attributes and visibility counters a client sends after one
/// round. Tensors are stored exactly as they travel on the wire (float32).
struct ClientUpdate {
  std::uint32_t client_id = 0;
  std::uint32_t round = 0;
  std::uint32_t sh_degree = 1;
  std::vector<float> log_scale;      // M x 3
  std::vector<float> quat;           // M x 4, (w, x, y, z)
  std::vector<float> logit_opacity;  // M
  std::vector<float> sh;             // M x 3 x (L+1)^2, channel-major per Gaussian
  std::vector<std::uint32_t> visibility;  // M

  std::size_t size() const { return logit_opacity.size(); }
  int coeffs_per_channel() const { return sh_coeff_count(static_cast<int>(sh_degree)); }

  /// Throws ShapeMismatch when tensor lengths disagree.
  void validate() const;

  friend bool operator==(const ClientUpdate&, const ClientUpdate&) = default;
};

/// Client id used for server broadcasts and model files.
constexpr std::uint32_t kServerId = 0xFFFFFFFFu;

/// Snapshot of a cloud's appearance, rounded to float32.
ClientUpdate make_update(const GaussianCloud& cloud, std::uint32_t client_id,
                         std::uint32_t round, std::vector<std::uint32_t> visibility = {});

/// Overwrites the appearance of `cloud` with the update's tensors. Positions
/// are never touched.
void apply_appearance(const ClientUpdate& update, GaussianCloud& cloud);

// Binary layout (little-endian):
//   "F3GS" | version u32 | client_id u32 | round u32 | M u64 | sh_degree u32
//   | log_scale f32[M*3] | quat f32[M*4] | logit_opacity f32[M]
//   | sh f32[M*3*(L+1)^2] | visibility u32[M] | crc32 u32
// The CRC covers every preceding byte. Model files use the same layout
// without the visibility block.
constexpr std::string_view kWireMagic = "F3GS";
constexpr std::uint32_t kWireVersion = 1;

std::vector<std::uint8_t> encode_update(const ClientUpdate& update);
ClientUpdate decode_update(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_model(const ClientUpdate& appearance);
ClientUpdate decode_model(std::span<const std::uint8_t> bytes);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

}  // namespace f3dgs
