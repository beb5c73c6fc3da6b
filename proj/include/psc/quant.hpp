#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace psc {

// float8 e4m3, finite-only: 1 sign bit, 4 exponent bits (bias 7), 3 mantissa
// bits. 0x7F and 0xFF are the only invalid patterns; 0x7E = 448 is the
// largest finite value and 0x01 = 2^-9 the smallest subnormal.
struct F8Code {
  std::uint8_t bits = 0;
  friend bool operator==(F8Code, F8Code) = default;
};

inline constexpr double kE4m3Max = 448.0;

bool is_valid(F8Code code);

// Round to nearest, ties to even; |v| > 448 saturates to +-448. A negative
// value that rounds to zero yields +0; only an IEEE -0.0 input keeps the
// sign bit, so that 0x80 survives a dequantize/quantize round trip.
F8Code quantize_e4m3(double v);
double dequantize_e4m3(F8Code code);

enum class QuantizerId : std::uint8_t {
  kE4m3 = 0,
  // Stores the measurement as 8 little-endian bytes of its float64 bits.
  // Exists so tests can take quantization out of the loop.
  kRaw64 = 1,
};

QuantizerId quantizer_id_from_code(std::uint8_t code);
QuantizerId parse_quantizer_name(std::string_view name);
std::string_view quantizer_name(QuantizerId id);
std::size_t bytes_per_measurement(QuantizerId id);

// Appends the code bytes for v.
void quantize_into(QuantizerId id, double v, std::vector<std::uint8_t>& out);
// Decodes one measurement from the front of bytes (bytes_per_measurement).
double dequantize_from(QuantizerId id, std::span<const std::uint8_t> bytes);

}  // namespace psc
