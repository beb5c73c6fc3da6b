#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "psc/linalg.hpp"

namespace psc {

// "PSCR" | ndim u8 | dims u32 x ndim | peak f32 | data f32 x prod(dims),
// all little-endian, row-major.
struct SignalFile {
  std::vector<std::uint32_t> shape;
  float peak = 1.0f;
  std::vector<float> data;

  std::size_t size() const;
  Vector values() const;
  static SignalFile from_values(std::vector<std::uint32_t> shape, std::span<const double> values,
                                float peak);
};

std::vector<std::uint8_t> serialize_signal(const SignalFile& s);
SignalFile parse_signal(std::span<const std::uint8_t> bytes);
SignalFile read_signal(const std::filesystem::path& path);
void write_signal(const std::filesystem::path& path, const SignalFile& s);

}  // namespace psc
