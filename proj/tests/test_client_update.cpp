#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <string>

#include "f3dgs/client_update.hpp"
#include "f3dgs/error.hpp"
#include "test_util.hpp"

namespace f3dgs {
namespace {

ErrorCode decode_error(std::span<const std::uint8_t> bytes) {
  try {
    decode_update(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode succeeded";
  return ErrorCode::kIo;
}

ClientUpdate sample_update(std::mt19937_64& rng, std::size_t m, int degree) {
  const GaussianCloud cloud = testing::random_cloud(rng, m, degree);
  std::vector<std::uint32_t> vis(m);
  for (std::size_t i = 0; i < m; ++i) vis[i] = static_cast<std::uint32_t>(rng() % 1000);
  return make_update(cloud, 3, 2, vis);
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_f32(std::vector<std::uint8_t>& b, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(b, v);
}

TEST(Crc, KnownVector) {
  const std::string s = "123456789";
  const std::vector<std::uint8_t> bytes(s.begin(), s.end());
  EXPECT_EQ(crc32_of(bytes), 0xCBF43926u);
}

TEST(Wire, ByteLayout) {
  ClientUpdate u;
  u.client_id = 9;
  u.round = 4;
  u.sh_degree = 0;
  u.log_scale = {1.0f, -2.0f, 0.5f};
  u.quat = {1.0f, 0.0f, 0.0f, 0.0f};
  u.logit_opacity = {0.25f};
  u.sh = {0.1f, 0.2f, 0.3f};
  u.visibility = {77};
  std::vector<std::uint8_t> want = {'F', '3', 'G', 'S'};
  put_u32(want, 1);
  put_u32(want, 9);
  put_u32(want, 4);
  put_u32(want, 1);  // M low word
  put_u32(want, 0);  // M high word
  put_u32(want, 0);
  for (const float f : u.log_scale) put_f32(want, f);
  for (const float f : u.quat) put_f32(want, f);
  put_f32(want, 0.25f);
  for (const float f : u.sh) put_f32(want, f);
  put_u32(want, 77);
  put_u32(want, crc32_of(want));
  EXPECT_EQ(encode_update(u), want);
}

TEST(Wire, RoundTripIsExact) {
  std::mt19937_64 rng(41);
  for (int degree = 0; degree <= 3; ++degree) {
    const ClientUpdate u = sample_update(rng, 17, degree);
    EXPECT_EQ(decode_update(encode_update(u)), u);
  }
}

TEST(Wire, ModelOmitsVisibility) {
  std::mt19937_64 rng(42);
  const ClientUpdate u = sample_update(rng, 10, 1);
  const auto model = encode_model(u);
  EXPECT_EQ(model.size() + 4 * 10, encode_update(u).size());
  ClientUpdate back = decode_model(model);
  EXPECT_EQ(back.visibility, std::vector<std::uint32_t>(10, 0));
  back.visibility = u.visibility;
  EXPECT_EQ(back, u);
}

TEST(Wire, SingleBitFlipsAreDetected) {
  std::mt19937_64 rng(43);
  const auto bytes = encode_update(sample_update(rng, 8, 1));
  for (std::size_t pos = 0; pos < bytes.size(); pos += 3) {
    for (int bit = 0; bit < 8; bit += 3) {
      auto bad = bytes;
      bad[pos] ^= static_cast<std::uint8_t>(1u << bit);
      EXPECT_THROW(decode_update(bad), Error) << pos;
    }
  }
}

TEST(Wire, ErrorKinds) {
  std::mt19937_64 rng(44);
  const auto bytes = encode_update(sample_update(rng, 6, 1));

  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(decode_error(magic), ErrorCode::kBadMagic);

  auto version = bytes;
  version[4] = 2;
  EXPECT_EQ(decode_error(version), ErrorCode::kUnsupportedVersion);

  auto payload = bytes;
  payload[40] ^= 0x10;
  EXPECT_EQ(decode_error(payload), ErrorCode::kCrcMismatch);

  const std::span<const std::uint8_t> all(bytes);
  EXPECT_EQ(decode_error(all.first(3)), ErrorCode::kTruncated);
  EXPECT_EQ(decode_error(all.first(20)), ErrorCode::kTruncated);
  EXPECT_EQ(decode_error(all.first(bytes.size() - 1)), ErrorCode::kCrcMismatch);

  // A payload that is internally consistent but too short for its header.
  std::vector<std::uint8_t> shortened(bytes.begin(), bytes.end() - 8);
  const std::uint32_t crc = crc32_of(shortened);
  for (int i = 0; i < 4; ++i) shortened.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
  EXPECT_EQ(decode_error(shortened), ErrorCode::kTruncated);
}

TEST(Appearance, ApplyKeepsPositions) {
  std::mt19937_64 rng(45);
  GaussianCloud a = testing::random_cloud(rng, 12, 2);
  const GaussianCloud b = testing::random_cloud(rng, 12, 2);
  const GaussianCloud before = a;
  apply_appearance(make_update(b, 0, 0), a);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.gaussians[i].mu, before.gaussians[i].mu);
    EXPECT_EQ(a.gaussians[i].logit_opacity,
              static_cast<double>(static_cast<float>(b.gaussians[i].logit_opacity)));
    EXPECT_EQ(a.gaussians[i].sh[3].y(), static_cast<double>(static_cast<float>(b.gaussians[i].sh[3].y())));
  }
  EXPECT_THROW(apply_appearance(make_update(testing::random_cloud(rng, 11, 2), 0, 0), a), Error);
  EXPECT_THROW(apply_appearance(make_update(testing::random_cloud(rng, 12, 1), 0, 0), a), Error);
}

TEST(Appearance, ShWireOrderIsChannelMajor) {
  GaussianCloud c;
  c.sh_degree = 1;
  Gaussian g;
  g.sh = {Vec3(1, 2, 3), Vec3(4, 5, 6), Vec3(7, 8, 9), Vec3(10, 11, 12)};
  c.gaussians.push_back(g);
  const ClientUpdate u = make_update(c, 0, 0);
  EXPECT_EQ(u.sh, (std::vector<float>{1, 4, 7, 10, 2, 5, 8, 11, 3, 6, 9, 12}));
}

}  // namespace
}  // namespace f3dgs
