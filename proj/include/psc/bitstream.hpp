#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace psc {

inline constexpr std::uint8_t kBitstreamVersion = 1;
inline constexpr std::uint8_t kEntropyRangeCoder = 0;

// Everything the decoder needs to replay the encoder, except the prior
// itself (which is only identified by digest). Serialized little-endian with
// fixed-width fields; see FORMAT.md.
struct BitstreamHeader {
  std::vector<std::uint32_t> shape;
  std::uint32_t iterations = 0;
  std::uint32_t rows_per_iteration = 0;
  std::uint32_t samples = 0;
  std::uint8_t sampler_id = 0;
  std::uint8_t selection_mode = 0;
  double eta = 1.0;
  double eta_b = 1.0;
  std::uint32_t steps = 0;
  std::uint64_t seed = 0;
  std::uint8_t quantizer_id = 0;
  std::uint8_t entropy_id = kEntropyRangeCoder;
  double prescale = 1.0;
  std::uint64_t prior_digest = 0;
  std::uint32_t payload_symbol_count = 0;

  friend bool operator==(const BitstreamHeader&, const BitstreamHeader&) = default;
};

struct Bitstream {
  BitstreamHeader header;
  std::vector<std::uint8_t> payload;

  // Header bytes as serialized, including both checksums.
  std::size_t header_size() const;
  std::vector<std::uint8_t> serialize() const;
  // Validates magic, version, header checksum, payload length and payload
  // checksum.
  static Bitstream parse(std::span<const std::uint8_t> bytes);

  friend bool operator==(const Bitstream&, const Bitstream&) = default;
};

std::size_t header_size_for(std::size_t ndim);

void write_bitstream(const std::filesystem::path& path, const Bitstream& b);
Bitstream read_bitstream(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace psc
