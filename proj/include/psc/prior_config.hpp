#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "psc/prior.hpp"

namespace psc {

// Parses the key = value prior description documented in FORMAT.md.
PriorModel parse_prior_config(std::string_view text);

// Throws kIo naming the path when the file cannot be read.
PriorModel load_prior_config(const std::filesystem::path& path);

// Seeded Haar-like orthogonal matrix: Gram-Schmidt on Gaussian rows drawn
// from derive_stream(seed, kInit, 1, 0).
Matrix random_orthogonal(std::size_t dim, std::uint64_t seed);

}  // namespace psc
