#include "psc/signal_file.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "psc/bitstream.hpp"
#include "psc/error.hpp"

namespace psc {
namespace {

constexpr unsigned char kSignalMagic[4] = {'P', 'S', 'C', 'R'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + 4 > in.size()) fail(ErrorCode::kFormat, "signal file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  pos += 4;
  return v;
}

}  // namespace

std::size_t SignalFile::size() const {
  std::size_t n = 1;
  for (std::uint32_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

Vector SignalFile::values() const { return Vector(data.begin(), data.end()); }

SignalFile SignalFile::from_values(std::vector<std::uint32_t> shape, std::span<const double> values,
                                   float peak) {
  SignalFile s{std::move(shape), peak, {}};
  if (s.size() != values.size()) fail(ErrorCode::kShapeMismatch, "values vs shape");
  s.data.assign(values.begin(), values.end());
  return s;
}

std::vector<std::uint8_t> serialize_signal(const SignalFile& s) {
  if (s.shape.empty() || s.shape.size() > 255) fail(ErrorCode::kFormat, "bad signal shape");
  if (s.data.size() != s.size()) fail(ErrorCode::kShapeMismatch, "signal data vs shape");
  std::vector<std::uint8_t> out(std::begin(kSignalMagic), std::end(kSignalMagic));
  out.push_back(static_cast<std::uint8_t>(s.shape.size()));
  for (std::uint32_t d : s.shape) put_u32(out, d);
  put_u32(out, std::bit_cast<std::uint32_t>(s.peak));
  for (float v : s.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

SignalFile parse_signal(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5) fail(ErrorCode::kFormat, "signal file truncated");
  for (int i = 0; i < 4; ++i)
    if (bytes[i] != kSignalMagic[i]) fail(ErrorCode::kFormat, "not a PSCR signal file");
  std::size_t pos = 4;
  SignalFile s;
  const std::uint8_t ndim = bytes[pos++];
  if (ndim == 0) fail(ErrorCode::kFormat, "signal has no dimensions");
  for (std::uint8_t i = 0; i < ndim; ++i) s.shape.push_back(get_u32(bytes, pos));
  s.peak = std::bit_cast<float>(get_u32(bytes, pos));
  const std::size_t n = s.size();
  if (bytes.size() - pos != 4 * n)
    fail(ErrorCode::kFormat, "signal payload has " + std::to_string(bytes.size() - pos) +
                                 " bytes, expected " + std::to_string(4 * n));
  s.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.data[i] = std::bit_cast<float>(get_u32(bytes, pos));
    if (!std::isfinite(s.data[i])) fail(ErrorCode::kFormat, "signal contains a non-finite value");
  }
  return s;
}

SignalFile read_signal(const std::filesystem::path& path) {
  return parse_signal(read_file_bytes(path));
}

void write_signal(const std::filesystem::path& path, const SignalFile& s) {
  write_file_bytes(path, serialize_signal(s));
}

}  // namespace psc
