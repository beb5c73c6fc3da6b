#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "psc/linalg.hpp"
#include "psc/prior.hpp"
#include "psc/rng.hpp"

namespace psc {

inline constexpr std::size_t kDefaultSteps = 25;

// sigmas[0] = sigma_T (largest) ... sigmas[T-1] = sigma_1 (smallest).
class NoiseSchedule {
 public:
  NoiseSchedule() = default;
  explicit NoiseSchedule(std::vector<double> sigmas);

  static NoiseSchedule geometric(double sigma_max, double sigma_min, std::size_t steps);

  std::size_t steps() const noexcept { return sigmas_.size(); }
  const std::vector<double>& sigmas() const noexcept { return sigmas_; }
  double largest() const { return sigmas_.front(); }
  double smallest() const { return sigmas_.back(); }

 private:
  std::vector<double> sigmas_;
};

struct SamplerConfig {
  NoiseSchedule schedule;
  double eta = 1.0;
  double eta_b = 1.0;
};

void validate(const SamplerConfig& cfg);

// Geometric ladder from 2 sqrt(lambda_max) down to 1e-3 of that.
NoiseSchedule default_schedule(const PriorModel& prior, std::size_t steps = kDefaultSteps);

enum class SamplerId : std::uint8_t {
  kDdrmNl = 0,
  kExactGaussian = 1,
  kExactGmm = 2,
};

SamplerId sampler_id_from_code(std::uint8_t code);
SamplerId parse_sampler_name(std::string_view name);
std::string_view sampler_name(SamplerId id);

// DDRM restricted to noiseless measurements through orthonormal rows. Draw
// order: init eps_m = gauss(k), eps = gauss(D); then per step eps_m' =
// gauss(k), eps' = gauss(D).
Vector ddrm_nl_sample(const Denoiser& denoiser, const OrthonormalRows& h,
                      std::span<const double> y, const SamplerConfig& cfg,
                      RngStream& stream);

// s posterior draws; draw i uses derive_stream(seed, domain, iteration, i)
// so the batch does not depend on execution order.
std::vector<Vector> sample_batch(SamplerId sampler, const PriorModel& prior,
                                 const OrthonormalRows& h, std::span<const double> y,
                                 std::size_t count, const SamplerConfig& cfg,
                                 std::uint64_t seed, std::uint32_t iteration,
                                 Domain domain = Domain::kSelect);

}  // namespace psc
