#include "f3dgs/client_update.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <string>

#include "f3dgs/error.hpp"

namespace f3dgs {
namespace {

constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 8 + 4;

class Writer {
 public:
  explicit Writer(std::size_t reserve) { buf_.reserve(reserve); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

  std::vector<std::uint8_t> finish() {
    u32(crc32_of(buf_));
    return std::move(buf_);
  }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string_view tag(std::size_t n) {
    need(n);
    std::string_view s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw Error(ErrorCode::kTruncated, "wire payload truncated at byte " + std::to_string(pos_));
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::size_t payload_size(std::uint64_t m, std::uint32_t degree, bool with_visibility) {
  const auto ncoef = static_cast<std::uint64_t>(sh_coeff_count(static_cast<int>(degree)));
  const std::uint64_t floats = m * (3 + 4 + 1 + 3 * ncoef);
  return kHeaderBytes + 4 * floats + (with_visibility ? 4 * m : 0) + 4;
}

std::vector<std::uint8_t> encode(const ClientUpdate& u, bool with_visibility) {
  u.validate();
  const std::uint64_t m = u.size();
  Writer w(payload_size(m, u.sh_degree, with_visibility));
  w.bytes(kWireMagic);
  w.u32(kWireVersion);
  w.u32(u.client_id);
  w.u32(u.round);
  w.u64(m);
  w.u32(u.sh_degree);
  for (const float v : u.log_scale) w.f32(v);
  for (const float v : u.quat) w.f32(v);
  for (const float v : u.logit_opacity) w.f32(v);
  for (const float v : u.sh) w.f32(v);
  if (with_visibility) {
    for (const std::uint32_t v : u.visibility) w.u32(v);
  }
  return w.finish();
}

ClientUpdate decode(std::span<const std::uint8_t> bytes, bool with_visibility) {
  Reader r(bytes);
  if (r.tag(4) != kWireMagic) throw Error(ErrorCode::kBadMagic, "wire payload has bad magic");
  const std::uint32_t version = r.u32();
  if (version != kWireVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "unsupported wire format version " + std::to_string(version));
  }
  if (bytes.size() < kHeaderBytes + 4) {
    throw Error(ErrorCode::kTruncated, "wire payload shorter than its header");
  }
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(bytes[body + i]) << (8 * i);
  if (stored != crc32_of(bytes.first(body))) {
    throw Error(ErrorCode::kCrcMismatch, "wire payload failed CRC check");
  }

  ClientUpdate u;
  u.client_id = r.u32();
  u.round = r.u32();
  const std::uint64_t m = r.u64();
  u.sh_degree = r.u32();
  if (u.sh_degree > static_cast<std::uint32_t>(kMaxShDegree)) {
    throw Error(ErrorCode::kShapeMismatch, "wire payload sh degree out of range");
  }
  if (bytes.size() != payload_size(m, u.sh_degree, with_visibility)) {
    throw Error(ErrorCode::kTruncated, "wire payload size does not match its header");
  }
  const auto n = static_cast<std::size_t>(m);
  const auto ncoef = static_cast<std::size_t>(u.coeffs_per_channel());
  auto read_floats = [&](std::vector<float>& out, std::size_t count) {
    out.resize(count);
    for (float& v : out) v = r.f32();
  };
  read_floats(u.log_scale, n * 3);
  read_floats(u.quat, n * 4);
  read_floats(u.logit_opacity, n);
  read_floats(u.sh, n * 3 * ncoef);
  u.visibility.assign(n, 0);
  if (with_visibility) {
    for (std::uint32_t& v : u.visibility) v = r.u32();
  }
  return u;
}

}  // namespace

void ClientUpdate::validate() const {
  const std::size_t m = size();
  const auto ncoef = static_cast<std::size_t>(coeffs_per_channel());
  if (sh_degree > static_cast<std::uint32_t>(kMaxShDegree) || log_scale.size() != 3 * m ||
      quat.size() != 4 * m || sh.size() != 3 * ncoef * m || visibility.size() != m) {
    throw Error(ErrorCode::kShapeMismatch,
                "client update " + std::to_string(client_id) + " has inconsistent tensor sizes");
  }
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

ClientUpdate make_update(const GaussianCloud& cloud, std::uint32_t client_id, std::uint32_t round,
                         std::vector<std::uint32_t> visibility) {
  const std::size_t m = cloud.size();
  const auto ncoef = static_cast<std::size_t>(cloud.coeffs_per_channel());
  ClientUpdate u;
  u.client_id = client_id;
  u.round = round;
  u.sh_degree = static_cast<std::uint32_t>(cloud.sh_degree);
  u.log_scale.reserve(3 * m);
  u.quat.reserve(4 * m);
  u.logit_opacity.reserve(m);
  u.sh.reserve(3 * ncoef * m);
  for (const Gaussian& g : cloud.gaussians) {
    for (int a = 0; a < 3; ++a) u.log_scale.push_back(static_cast<float>(g.log_scale[a]));
    for (int a = 0; a < 4; ++a) u.quat.push_back(static_cast<float>(g.quat[a]));
    u.logit_opacity.push_back(static_cast<float>(g.logit_opacity));
    for (int c = 0; c < 3; ++c) {
      for (std::size_t k = 0; k < ncoef; ++k) u.sh.push_back(static_cast<float>(g.sh[k][c]));
    }
  }
  u.visibility = visibility.empty() ? std::vector<std::uint32_t>(m, 0) : std::move(visibility);
  u.validate();
  return u;
}

void apply_appearance(const ClientUpdate& u, GaussianCloud& cloud) {
  u.validate();
  if (u.size() != cloud.size() || static_cast<int>(u.sh_degree) != cloud.sh_degree) {
    throw Error(ErrorCode::kShapeMismatch,
                "update for " + std::to_string(u.size()) + " gaussians (degree " +
                    std::to_string(u.sh_degree) + ") does not fit cloud of " +
                    std::to_string(cloud.size()) + " (degree " +
                    std::to_string(cloud.sh_degree) + ")");
  }
  const auto ncoef = static_cast<std::size_t>(u.coeffs_per_channel());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Gaussian& g = cloud.gaussians[i];
    for (int a = 0; a < 3; ++a) g.log_scale[a] = u.log_scale[3 * i + a];
    for (int a = 0; a < 4; ++a) g.quat[a] = u.quat[4 * i + a];
    g.logit_opacity = u.logit_opacity[i];
    g.sh.resize(ncoef);
    for (int c = 0; c < 3; ++c) {
      for (std::size_t k = 0; k < ncoef; ++k) {
        g.sh[k][c] = u.sh[(3 * i + static_cast<std::size_t>(c)) * ncoef + k];
      }
    }
  }
}

std::vector<std::uint8_t> encode_update(const ClientUpdate& update) { return encode(update, true); }
ClientUpdate decode_update(std::span<const std::uint8_t> bytes) { return decode(bytes, true); }
std::vector<std::uint8_t> encode_model(const ClientUpdate& a) { return encode(a, false); }
ClientUpdate decode_model(std::span<const std::uint8_t> bytes) { return decode(bytes, false); }

}  // namespace f3dgs
