#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace psc {

// Purpose codes mixed into every stream key. Encoder and decoder must agree
// on which draws feed which step, so these values are part of the format.
enum class Domain : std::uint8_t {
  kSelect = 1,
  kRestore = 2,
  kInit = 3,
};

struct StreamKey {
  std::uint64_t seed = 0;
  Domain domain = Domain::kSelect;
  std::uint32_t iteration = 0;
  std::uint32_t sample = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

// Philox4x64-10 keyed by (seed, domain) with (iteration, sample) and the
// block index in the counter. One block yields four 64-bit words; the
// stream counter addresses single words, so word w is word (w % 4) of
// block (w / 4). Any word can be computed without generating the others.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(const StreamKey& key, std::uint64_t counter = 0);

  const StreamKey& key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  // Word at an absolute position; does not touch the counter.
  std::uint64_t word_at(std::uint64_t position) const;

  std::uint64_t next_u64();
  // 53-bit uniform in [0, 1). Consumes one word.
  double uniform();
  // Standard normals by Box-Muller. Consumes 2 * ceil(n / 2) words; for odd
  // n the sine half of the final pair is discarded.
  std::vector<double> gauss(std::size_t n);
  void gauss_into(double* out, std::size_t n);

 private:
  StreamKey key_{};
  std::uint64_t counter_ = 0;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  std::array<std::uint64_t, 4> cache_{};
};

RngStream derive_stream(std::uint64_t seed, Domain domain,
                        std::uint32_t iteration, std::uint32_t sample);

}  // namespace psc
