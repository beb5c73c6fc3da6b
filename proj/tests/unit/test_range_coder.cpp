#include <gtest/gtest.h>

#include "psc/error.hpp"
#include "psc/range_coder.hpp"
#include "psc/rng.hpp"

using namespace psc;

namespace {

std::vector<std::uint8_t> random_bytes(std::size_t n, std::uint64_t seed) {
  RngStream s = derive_stream(seed, Domain::kInit, 70, 0);
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(s.next_u64() >> 56);
  return out;
}

}  // namespace

TEST(RangeCoder, UniformRoundTripAndRate) {
  const auto symbols = random_bytes(100000, 1);
  const auto payload = range_encode(symbols);
  EXPECT_EQ(range_decode(payload, symbols.size()), symbols);
  EXPECT_LE(8.0 * payload.size() / symbols.size(), 8.1);
}

TEST(RangeCoder, ConstantStreamCompresses) {
  const std::vector<std::uint8_t> symbols(1000, 0x38);
  const auto payload = range_encode(symbols);
  EXPECT_LE(payload.size(), 150u);
  EXPECT_EQ(range_decode(payload, 1000), symbols);
}

TEST(RangeCoder, EmptyInputs) {
  const auto payload = range_encode({});
  EXPECT_TRUE(range_decode(payload, 0).empty());
  EXPECT_TRUE(range_decode(range_encode(random_bytes(10, 2)), 0).empty());
}

TEST(RangeCoder, PrefixProperty) {
  const auto symbols = random_bytes(1000, 3);
  const auto payload = range_encode(symbols);
  const auto full = range_decode(payload, 1000);
  const auto half = range_decode(payload, 500);
  EXPECT_TRUE(std::equal(half.begin(), half.end(), full.begin()));
}

TEST(RangeCoder, SkewedSourcesRoundTrip) {
  RngStream s = derive_stream(4, Domain::kInit, 71, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint8_t> symbols(5000);
    for (auto& b : symbols) {
      const double u = s.uniform();
      b = u < 0.9 ? 0x00 : (u < 0.99 ? 0xFF : static_cast<std::uint8_t>(s.next_u64()));
    }
    ASSERT_EQ(range_decode(range_encode(symbols), symbols.size()), symbols);
  }
}

TEST(RangeCoder, LongRunTriggersRescale) {
  std::vector<std::uint8_t> symbols(200000, 0x12);
  for (std::size_t i = 0; i < symbols.size(); i += 97) symbols[i] = static_cast<std::uint8_t>(i);
  RangeEncoder enc;
  for (auto b : symbols) enc.encode(b);
  EXPECT_LT(enc.model().total(), AdaptiveByteModel::kRescaleAt);
  const auto payload = enc.finish();
  EXPECT_EQ(range_decode(payload, symbols.size()), symbols);
}

TEST(RangeCoder, TruncatedPayloadNeverCrashes) {
  const auto symbols = random_bytes(4000, 5);
  auto payload = range_encode(symbols);
  payload.resize(payload.size() / 2);
  try {
    const auto out = range_decode(payload, symbols.size());
    EXPECT_NE(out, symbols);
  } catch (const PscError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruptStream);
  }
}

TEST(RangeCoder, FlippedBytesNeverCrash) {
  const auto symbols = random_bytes(2000, 6);
  const auto clean = range_encode(symbols);
  RngStream s = derive_stream(6, Domain::kInit, 72, 0);
  for (int trial = 0; trial < 200; ++trial) {
    auto payload = clean;
    payload[s.next_u64() % payload.size()] ^= static_cast<std::uint8_t>(1 + s.next_u64() % 255);
    try {
      RangeDecoder dec(payload);
      for (std::size_t i = 0; i < symbols.size(); ++i) dec.decode();
      dec.verify_trailer();
    } catch (const PscError& e) {
      EXPECT_EQ(e.code(), ErrorCode::kCorruptStream);
    }
  }
}

TEST(RangeCoder, TrailerIsChecked) {
  const auto symbols = random_bytes(100, 7);
  auto payload = range_encode(symbols);
  payload.back() = 1;
  RangeDecoder dec(payload);
  for (std::size_t i = 0; i < symbols.size(); ++i) dec.decode();
  EXPECT_THROW(dec.verify_trailer(), PscError);
}

TEST(AdaptiveModel, CountsAndRescale) {
  AdaptiveByteModel m;
  EXPECT_EQ(m.total(), 256u);
  m.update(5);
  EXPECT_EQ(m.frequency(5), 33u);
  EXPECT_EQ(m.cumulative(6), 5u + 33u);
  std::uint32_t cum = 0;
  EXPECT_EQ(m.find(5, cum), 5);
  EXPECT_EQ(cum, 5u);
}
