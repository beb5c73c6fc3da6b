#include "psc/range_coder.hpp"

#include "psc/error.hpp"

namespace psc {
namespace {

constexpr std::uint32_t kTop = 1u << 24;
constexpr std::uint64_t kCarry = std::uint64_t{1} << 32;
constexpr std::size_t kTrailerBytes = 4;

}  // namespace

AdaptiveByteModel::AdaptiveByteModel() : total_(256) { counts_.fill(1); }

std::uint32_t AdaptiveByteModel::cumulative(std::uint8_t symbol) const {
  std::uint32_t cum = 0;
  for (int s = 0; s < symbol; ++s) cum += counts_[s];
  return cum;
}

std::uint8_t AdaptiveByteModel::find(std::uint32_t target, std::uint32_t& cum) const {
  cum = 0;
  for (int s = 0; s < 255; ++s) {
    if (target < cum + counts_[s]) return static_cast<std::uint8_t>(s);
    cum += counts_[s];
  }
  return 255;
}

void AdaptiveByteModel::update(std::uint8_t symbol) {
  counts_[symbol] += kIncrement;
  total_ += kIncrement;
  if (total_ >= kRescaleAt) {
    total_ = 0;
    for (auto& c : counts_) {
      c = c / 2 > 0 ? c / 2 : 1;
      total_ += c;
    }
  }
}

void RangeEncoder::propagate_carry() {
  for (std::size_t i = out_.size(); i-- > 0;) {
    if (++out_[i] != 0) return;
  }
}

void RangeEncoder::encode(std::uint8_t symbol) {
  const std::uint32_t total = model_.total();
  const std::uint32_t r = range_ / total;
  low_ += static_cast<std::uint64_t>(r) * model_.cumulative(symbol);
  range_ = r * model_.frequency(symbol);
  if (low_ >= kCarry) {
    propagate_carry();
    low_ -= kCarry;
  }
  while (range_ < kTop) {
    out_.push_back(static_cast<std::uint8_t>(low_ >> 24));
    low_ = (low_ << 8) & 0xFFFFFFFFu;
    range_ <<= 8;
  }
  model_.update(symbol);
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  for (int shift = 24; shift >= 0; shift -= 8)
    out_.push_back(static_cast<std::uint8_t>(low_ >> shift));
  out_.insert(out_.end(), kTrailerBytes, 0);
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> payload) : payload_(payload) {
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  // The zero trailer is never consumed by a well-formed stream.
  if (pos_ + kTrailerBytes >= payload_.size())
    fail(ErrorCode::kCorruptStream, "range decoder ran past the payload");
  return payload_[pos_++];
}

std::uint8_t RangeDecoder::decode() {
  const std::uint32_t total = model_.total();
  const std::uint32_t r = range_ / total;
  const std::uint32_t target = code_ / r;
  if (target >= total) fail(ErrorCode::kCorruptStream, "code point outside the interval");
  std::uint32_t cum = 0;
  const std::uint8_t symbol = model_.find(target, cum);
  code_ -= r * cum;
  range_ = r * model_.frequency(symbol);
  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
  model_.update(symbol);
  return symbol;
}

void RangeDecoder::verify_trailer() const {
  if (pos_ + kTrailerBytes != payload_.size())
    fail(ErrorCode::kCorruptStream, "payload length disagrees with the symbol count");
  for (std::size_t i = pos_; i < payload_.size(); ++i)
    if (payload_[i] != 0) fail(ErrorCode::kCorruptStream, "non-zero payload trailer");
}

std::vector<std::uint8_t> range_encode(std::span<const std::uint8_t> symbols) {
  RangeEncoder enc;
  for (std::uint8_t s : symbols) enc.encode(s);
  return enc.finish();
}

std::vector<std::uint8_t> range_decode(std::span<const std::uint8_t> payload, std::size_t n) {
  std::vector<std::uint8_t> out;
  if (n == 0) return out;
  RangeDecoder dec(payload);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(dec.decode());
  return out;
}

}  // namespace psc
