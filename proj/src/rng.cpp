#include "psc/rng.hpp"

#include <cmath>
#include <numbers>

namespace psc {
namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kPhiloxW0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kPhiloxW1 = 0xBB67AE8584CAA73BULL;
constexpr int kPhiloxRounds = 10;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& lo,
                    std::uint64_t& hi) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  lo = static_cast<std::uint64_t>(p);
  hi = static_cast<std::uint64_t>(p >> 64);
}

constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

}  // namespace

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                        std::array<std::uint64_t, 2> key) {
  for (int round = 0; round < kPhiloxRounds; ++round) {
    std::uint64_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
    mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

RngStream::RngStream(const StreamKey& key, std::uint64_t counter)
    : key_(key), counter_(counter) {}

std::uint64_t RngStream::word_at(std::uint64_t position) const {
  const std::array<std::uint64_t, 4> ctr = {
      position / 4,
      (static_cast<std::uint64_t>(key_.iteration) << 32) | key_.sample, 0, 0};
  const std::array<std::uint64_t, 2> k = {
      key_.seed, static_cast<std::uint64_t>(key_.domain)};
  return philox4x64(ctr, k)[position % 4];
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t block = counter_ / 4;
  if (block != cached_block_) {
    const std::array<std::uint64_t, 4> ctr = {
        block, (static_cast<std::uint64_t>(key_.iteration) << 32) | key_.sample,
        0, 0};
    cache_ = philox4x64(ctr, {key_.seed, static_cast<std::uint64_t>(key_.domain)});
    cached_block_ = block;
  }
  return cache_[counter_++ % 4];
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * kTwoPow53Inv;
}

void RngStream::gauss_into(double* out, std::size_t n) {
  std::size_t i = 0;
  while (i < n) {
    // u1 in (0, 1] keeps the log finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * kTwoPow53Inv;
    const double u2 = static_cast<double>(next_u64() >> 11) * kTwoPow53Inv;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[i++] = radius * std::cos(angle);
    if (i < n) out[i++] = radius * std::sin(angle);
  }
}

std::vector<double> RngStream::gauss(std::size_t n) {
  std::vector<double> out(n);
  gauss_into(out.data(), n);
  return out;
}

RngStream derive_stream(std::uint64_t seed, Domain domain,
                        std::uint32_t iteration, std::uint32_t sample) {
  return RngStream(StreamKey{seed, domain, iteration, sample});
}

}  // namespace psc
