#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "psc/codec.hpp"
#include "psc/linalg.hpp"
#include "psc/prior.hpp"

namespace psc {

// Mean over coordinates, accumulated in index order.
double mean_squared_error(std::span<const double> a, std::span<const double> b);
// Sum over coordinates.
double squared_error(std::span<const double> a, std::span<const double> b);
// 10 log10(peak^2 / mse); +inf when mse == 0.
double psnr(double peak, double mse);
std::string format_psnr(double value);

// Top-k eigenvectors of the prior's (mixture) covariance.
OrthonormalRows klt_transform(const PriorModel& prior, std::size_t k);
OrthonormalRows random_orthonormal_transform(std::size_t dim, std::size_t k, std::uint64_t seed);

struct FixedTransformResult {
  Vector reconstruction;
  std::size_t payload_bytes = 0;
};

// Quantize H x the same way the codec does, entropy-code the codes, and
// reconstruct with H^T.
FixedTransformResult run_fixed_transform(const OrthonormalRows& h, std::span<const double> x,
                                         QuantizerId quantizer, double prescale);

struct SweepOptions {
  std::vector<double> rates;  // target bpp
  std::vector<std::size_t> ranks;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  SamplerId sampler = SamplerId::kDdrmNl;
  SelectionMode selection = SelectionMode::kSamplePca;
  QuantizerId quantizer = QuantizerId::kE4m3;
  std::size_t steps = kDefaultSteps;
  double eta = 1.0;
  double eta_b = 1.0;
  std::size_t samples = 0;
  std::size_t average_count = kDefaultAverageCount;
  double peak = 1.0;
};

struct SweepRow {
  double rate_bpp = 0.0;
  std::size_t rank = 0;
  std::string mode;
  double mean_psnr = 0.0;
  double std_psnr = 0.0;
  double mean_mse = 0.0;
  double wall_time = 0.0;
  std::size_t measurements = 0;
  double achieved_bpp = 0.0;
};

// One row per (rate, rank, mode) for the PSC restorations (pinv, mean,
// sample) and the KLT / random-orthonormal baselines at the same measurement
// count and quantizer. Trial t draws its signal from
// derive_stream(seed, kInit, 0, t).
std::vector<SweepRow> run_sweep(const PriorModel& prior, const SweepOptions& options);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace psc
