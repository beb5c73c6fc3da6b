#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace psc {

// Adaptive order-0 byte model. Counts start at 1, grow by 32 per coded
// symbol, and are halved (floor, min 1) once the total reaches 2^16.
class AdaptiveByteModel {
 public:
  static constexpr std::uint32_t kIncrement = 32;
  static constexpr std::uint32_t kRescaleAt = 1u << 16;

  AdaptiveByteModel();

  std::uint32_t total() const noexcept { return total_; }
  std::uint32_t frequency(std::uint8_t symbol) const { return counts_[symbol]; }
  std::uint32_t cumulative(std::uint8_t symbol) const;
  // Symbol whose [cum, cum + freq) contains target; target < total().
  std::uint8_t find(std::uint32_t target, std::uint32_t& cum) const;
  void update(std::uint8_t symbol);

  const std::array<std::uint32_t, 256>& counts() const noexcept { return counts_; }
  friend bool operator==(const AdaptiveByteModel&, const AdaptiveByteModel&) = default;

 private:
  std::array<std::uint32_t, 256> counts_;
  std::uint32_t total_;
};

// 64-bit low / 32-bit range coder with byte-wise renormalization below 2^24.
// A carry out of the low register is propagated back into bytes already
// emitted. finish() appends the four low bytes (big-endian) and four zero
// bytes.
class RangeEncoder {
 public:
  void encode(std::uint8_t symbol);
  std::vector<std::uint8_t> finish();
  const AdaptiveByteModel& model() const noexcept { return model_; }

 private:
  void propagate_carry();

  AdaptiveByteModel model_;
  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::vector<std::uint8_t> out_;
};

// Sequential decoder; stopping after any number of symbols is valid, which
// is what progressive prefix decoding relies on.
class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> payload);

  std::uint8_t decode();
  const AdaptiveByteModel& model() const noexcept { return model_; }
  // After decoding every encoded symbol: exactly the zero trailer remains.
  void verify_trailer() const;

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> payload_;
  std::size_t pos_ = 0;
  AdaptiveByteModel model_;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
};

std::vector<std::uint8_t> range_encode(std::span<const std::uint8_t> symbols);
std::vector<std::uint8_t> range_decode(std::span<const std::uint8_t> payload, std::size_t n);

}  // namespace psc
