#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "psc/linalg.hpp"
#include "psc/prior.hpp"
#include "psc/sampler.hpp"

namespace psc {

enum class SelectionMode : std::uint8_t {
  kSamplePca = 0,
  kExactCovariance = 1,
};

SelectionMode selection_mode_from_code(std::uint8_t code);
SelectionMode parse_selection_mode(std::string_view name);
std::string_view selection_mode_name(SelectionMode mode);

// max(r + 2, floor(4r / 3)): centering costs one rank, so the sample matrix
// needs at least r + 1 rows; r = 12 still gives 16.
std::size_t default_sample_count(std::size_t rows_per_iteration);

struct SelectionContext {
  const PriorModel* prior = nullptr;
  SamplerId sampler = SamplerId::kDdrmNl;
  SamplerConfig sampler_config;
  std::uint64_t seed = 0;
  std::uint32_t iteration = 0;
  std::size_t samples = 0;
};

// One step of adaptive row selection: draw s posterior samples, center them,
// take the top r right singular vectors, then orthonormalize against H.
// Missing directions (rank loss) fall back to canonical basis rows.
OrthonormalRows select_new_rows(const OrthonormalRows& h, std::span<const double> y,
                                std::size_t r, const SelectionContext& ctx);

// Top r eigenvectors of the exact Gaussian posterior covariance, which does
// not depend on y.
OrthonormalRows select_new_rows_exact(const GaussianPrior& prior, const OrthonormalRows& h,
                                      std::size_t r);

}  // namespace psc
