#include "psc/quant.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "psc/error.hpp"

namespace psc {

bool is_valid(F8Code code) { return (code.bits & 0x7F) != 0x7F; }

F8Code quantize_e4m3(double v) {
  if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteInput, "quantize_e4m3 input");
  const std::uint8_t sign = std::signbit(v) ? 0x80 : 0x00;
  const double a = std::abs(v);
  if (a == 0.0) return F8Code{sign};
  if (a >= kE4m3Max) return F8Code{static_cast<std::uint8_t>(sign | 0x7E)};

  std::uint8_t magnitude = 0;
  if (a < 0x1p-6) {
    // Subnormal grid of step 2^-9; a result of 8 is exactly the smallest
    // normal, whose bit pattern is also 8.
    magnitude = static_cast<std::uint8_t>(std::nearbyint(a * 0x1p9));
  } else {
    int exp2 = 0;
    const double frac = std::frexp(a, &exp2);  // a = frac * 2^exp2, frac in [0.5, 1)
    int exponent = exp2 - 1;
    double mantissa = std::nearbyint((frac * 2.0 - 1.0) * 8.0);
    if (mantissa == 8.0) {
      mantissa = 0.0;
      ++exponent;
    }
    const int field = exponent + 7;
    if (field > 15 || (field == 15 && mantissa == 7.0)) {
      magnitude = 0x7E;
    } else {
      magnitude = static_cast<std::uint8_t>((field << 3) | static_cast<int>(mantissa));
    }
  }
  if (magnitude == 0) return F8Code{0};
  return F8Code{static_cast<std::uint8_t>(sign | magnitude)};
}

double dequantize_e4m3(F8Code code) {
  if (!is_valid(code))
    fail(ErrorCode::kInvalidCode, "e4m3 pattern " + std::to_string(code.bits));
  const int field = (code.bits >> 3) & 0x0F;
  const int mantissa = code.bits & 0x07;
  double value = field == 0 ? std::ldexp(static_cast<double>(mantissa), -9)
                            : std::ldexp(1.0 + mantissa / 8.0, field - 7);
  return (code.bits & 0x80) ? -value : value;
}

QuantizerId quantizer_id_from_code(std::uint8_t code) {
  if (code == 0) return QuantizerId::kE4m3;
  if (code == 1) return QuantizerId::kRaw64;
  fail(ErrorCode::kConfigInvalid, "quantizer id " + std::to_string(code));
}

QuantizerId parse_quantizer_name(std::string_view name) {
  if (name == "e4m3") return QuantizerId::kE4m3;
  if (name == "raw64") return QuantizerId::kRaw64;
  fail(ErrorCode::kConfigInvalid, "quantizer '" + std::string(name) + "'");
}

std::string_view quantizer_name(QuantizerId id) {
  return id == QuantizerId::kE4m3 ? "e4m3" : "raw64";
}

std::size_t bytes_per_measurement(QuantizerId id) { return id == QuantizerId::kE4m3 ? 1 : 8; }

void quantize_into(QuantizerId id, double v, std::vector<std::uint8_t>& out) {
  if (id == QuantizerId::kE4m3) {
    out.push_back(quantize_e4m3(v).bits);
    return;
  }
  if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteInput, "measurement");
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

double dequantize_from(QuantizerId id, std::span<const std::uint8_t> bytes) {
  if (bytes.size() < bytes_per_measurement(id))
    fail(ErrorCode::kCorruptStream, "truncated measurement");
  if (id == QuantizerId::kE4m3) return dequantize_e4m3(F8Code{bytes[0]});
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  const double v = std::bit_cast<double>(bits);
  if (!std::isfinite(v)) fail(ErrorCode::kInvalidCode, "non-finite raw64 measurement");
  return v;
}

}  // namespace psc
