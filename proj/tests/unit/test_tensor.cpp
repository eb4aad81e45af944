#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <numeric>

#include "ifedit/error.hpp"
#include "ifedit/tensor.hpp"
#include "ifedit/tensor_io.hpp"
#include "test_support.hpp"

using namespace ifedit;
using ifedit::testing::random_latent;

namespace {

bool same_bits(float a, float b) { return std::memcmp(&a, &b, sizeof(float)) == 0; }

std::vector<std::size_t> random_index_set(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(1 + rng() % n);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

TEST_CASE("concat_channels stacks z, y and a single mask channel") {
  std::mt19937_64 rng(1);
  const auto z = random_latent(rng, {4, 9, 8, 8});
  const auto y = random_latent(rng, {4, 9, 8, 8});
  const auto m = TemporalMask::first_observed(9, 8, 8);
  const auto packed = concat_channels(z, y, m);
  CHECK(packed.dims() == LatentDims{9, 9, 8, 8});

  SUBCASE("block extraction recovers each input bit-exactly") {
    CHECK(channel_block(packed, 0, 4) == z);
    CHECK(channel_block(packed, 4, 4) == y);
    const auto mask_channel = channel_block(packed, 8, 1);
    CHECK(std::equal(mask_channel.data().begin(), mask_channel.data().end(), m.values().begin()));
  }
}

TEST_CASE("concat_channels single-site layout is [z | y | m]") {
  const VideoLatent z({1, 1, 1, 1}, {2.0f});
  const auto y = VideoLatent::zeros({1, 1, 1, 1});
  const auto m = TemporalMask::first_observed(1, 1, 1);
  const auto packed = concat_channels(z, y, m);
  REQUIRE(packed.dims() == LatentDims{3, 1, 1, 1});
  CHECK(packed.data()[0] == 2.0f);
  CHECK(packed.data()[1] == 0.0f);
  CHECK(packed.data()[2] == 1.0f);
}

TEST_CASE("concat_channels names the mismatched axis") {
  const auto z = VideoLatent::zeros({4, 9, 8, 8});
  const auto y = VideoLatent::zeros({4, 8, 8, 8});
  const auto m = TemporalMask::first_observed(9, 8, 8);
  CHECK_THROWS_WITH_AS(concat_channels(z, y, m), doctest::Contains("temporal"), ShapeError);
  const auto y_w = VideoLatent::zeros({4, 9, 8, 7});
  CHECK_THROWS_WITH_AS(concat_channels(z, y_w, m), doctest::Contains("width"), ShapeError);
}

TEST_CASE("temporal_select") {
  std::mt19937_64 rng(2);
  const auto x = random_latent(rng, {3, 9, 4, 5});

  SUBCASE("full index list is the identity") {
    std::vector<std::size_t> all(9);
    std::iota(all.begin(), all.end(), 0);
    CHECK(temporal_select(x, all) == x);
  }
  SUBCASE("picks slices") {
    const std::vector<std::size_t> keep{0, 3, 6, 8};
    const auto out = temporal_select(x, keep);
    CHECK(out.frames() == 4);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t h = 0; h < 4; ++h) {
        for (std::size_t w = 0; w < 5; ++w) CHECK(same_bits(out.at(c, 3, h, w), x.at(c, 8, h, w)));
      }
    }
  }
  SUBCASE("errors") {
    const std::vector<std::size_t> out_of_range{0, 9};
    CHECK_THROWS_AS(temporal_select(x, out_of_range), IndexError);
    CHECK_THROWS_AS(temporal_select(x, std::vector<std::size_t>{}), ArgumentError);
    CHECK_THROWS_AS(temporal_select(x, std::vector<std::size_t>{3, 3}), ArgumentError);
    CHECK_THROWS_AS(temporal_select(x, std::vector<std::size_t>{4, 2}), ArgumentError);
  }
}

TEST_CASE("temporal_select composes like index composition (randomized)") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t frames = 1 + rng() % 12;
    const auto x = random_latent(rng, {1 + rng() % 3, frames, 1 + rng() % 4, 1 + rng() % 4});
    const auto outer = random_index_set(rng, frames);
    const auto inner = random_index_set(rng, outer.size());
    std::vector<std::size_t> composed;
    for (auto j : inner) composed.push_back(outer[j]);
    CHECK(temporal_select(temporal_select(x, outer), inner) == temporal_select(x, composed));
  }
}

TEST_CASE("TemporalMask invariants") {
  const auto m = TemporalMask::first_observed(4, 2, 3);
  CHECK(m.slice_value(0) == 1.0f);
  for (std::size_t f = 1; f < 4; ++f) CHECK(m.slice_value(f) == 0.0f);
  const auto kept = temporal_select(m, std::vector<std::size_t>{0, 3});
  CHECK(kept.slice_value(0) == 1.0f);
  CHECK(kept.slice_value(1) == 0.0f);

  CHECK_THROWS_AS(TemporalMask(1, 1, 2, {1.0f, 0.0f}), DomainError);
  CHECK_THROWS_AS(TemporalMask(1, 1, 1, {0.5f}), DomainError);
}

TEST_CASE("VideoLatent rejects bad construction") {
  CHECK_THROWS_AS(VideoLatent({0, 1, 1, 1}, {}), ShapeError);
  CHECK_THROWS_AS(VideoLatent({1, 1, 1, 2}, {1.0f}), ShapeError);
  CHECK_THROWS_AS(VideoLatent({1, 1, 1, 1}, {std::numeric_limits<float>::quiet_NaN()}), DomainError);
  CHECK_THROWS_AS(VideoLatent({1, 1, 1, 1}, {std::numeric_limits<float>::infinity()}), DomainError);
}

TEST_CASE("IFED header layout") {
  const DenseTensor t{{2, 1}, {1.0f, -2.5f}};
  const std::string bytes = encode_ifed(t);
  const std::string expected_prefix("IFED\x01\x00\x00\x00\x02\x00\x00\x00\x02\x00\x00\x00\x01\x00\x00\x00", 20);
  CHECK(bytes.substr(0, 20) == expected_prefix);
  // 1.0f = 0x3F800000 little-endian
  CHECK(bytes.substr(20, 4) == std::string("\x00\x00\x80\x3F", 4));
  CHECK(bytes.size() == 28);
}

TEST_CASE("IFED round trip is bit-exact (randomized)") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::uint32_t> any_bits;
  for (int trial = 0; trial < 50; ++trial) {
    DenseTensor t;
    const std::size_t ndims = 1 + rng() % 4;
    std::size_t count = 1;
    for (std::size_t i = 0; i < ndims; ++i) {
      t.dims.push_back(1 + rng() % 5);
      count *= t.dims.back();
    }
    // Arbitrary bit patterns, NaN payloads included.
    for (std::size_t i = 0; i < count; ++i) t.data.push_back(std::bit_cast<float>(any_bits(rng)));
    CHECK(decode_ifed(encode_ifed(t)) == t);
  }
}

TEST_CASE("IFED decode errors") {
  CHECK_THROWS_AS(decode_ifed("NOPE"), ProtocolError);
  std::string bytes = encode_ifed(DenseTensor{{3}, {1, 2, 3}});
  CHECK_THROWS_AS(decode_ifed(bytes.substr(0, bytes.size() - 1)), ProtocolError);
  CHECK_THROWS_AS(latent_from_dense(DenseTensor{{3}, {1, 2, 3}}), ShapeError);
}
