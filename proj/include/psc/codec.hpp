#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "psc/bitstream.hpp"
#include "psc/linalg.hpp"
#include "psc/prior.hpp"
#include "psc/quant.hpp"
#include "psc/sampler.hpp"
#include "psc/selection.hpp"

namespace psc {

inline constexpr std::size_t kDefaultRowsPerIteration = 12;
inline constexpr std::size_t kDefaultAverageCount = 64;

struct PscConfig {
  std::vector<std::uint32_t> shape;
  std::size_t iterations = 0;  // N
  std::size_t rows_per_iteration = kDefaultRowsPerIteration;  // r
  std::size_t samples = 0;  // s; 0 picks default_sample_count(r)
  SamplerId sampler = SamplerId::kDdrmNl;
  SelectionMode selection = SelectionMode::kSamplePca;
  std::size_t steps = kDefaultSteps;
  double eta = 1.0;
  double eta_b = 1.0;
  std::uint64_t seed = 0;
  QuantizerId quantizer = QuantizerId::kE4m3;
  std::uint8_t entropy = kEntropyRangeCoder;
  double prescale = 1.0;

  std::size_t dim() const;
  std::size_t effective_samples() const;
};

void validate(const PscConfig& cfg, const PriorModel& prior);
SamplerConfig make_sampler_config(const PscConfig& cfg, const PriorModel& prior);
PscConfig config_from_header(const BitstreamHeader& header);

// Quantized measurements. The code bytes are the single source of truth;
// dequantized values are always derived from them.
class MeasurementRecord {
 public:
  explicit MeasurementRecord(QuantizerId quantizer = QuantizerId::kE4m3);
  static MeasurementRecord from_codes(QuantizerId quantizer, std::vector<std::uint8_t> codes);

  QuantizerId quantizer() const noexcept { return quantizer_; }
  std::size_t size() const noexcept { return dequantized_.size(); }
  const std::vector<std::uint8_t>& codes() const noexcept { return codes_; }
  const Vector& dequantized() const noexcept { return dequantized_; }

  // Quantizes v and returns its dequantized value.
  double append(double v);
  MeasurementRecord prefix(std::size_t count) const;

 private:
  QuantizerId quantizer_;
  std::vector<std::uint8_t> codes_;
  Vector dequantized_;
};

std::uint64_t transform_hash(const OrthonormalRows& h);

struct EncodeResult {
  Bitstream bitstream;
  OrthonormalRows transform;
  MeasurementRecord record;
  std::uint64_t transform_hash = 0;
};

EncodeResult psc_encode(std::span<const double> x, const PriorModel& prior, const PscConfig& cfg);

enum class RestorationMode : std::uint8_t { kPinv, kPosteriorMean, kPosteriorSample };
RestorationMode parse_restoration_mode(std::string_view name);
std::string_view restoration_mode_name(RestorationMode mode);

struct DecodeOptions {
  RestorationMode mode = RestorationMode::kPinv;
  std::optional<std::size_t> prefix;  // measurement count, multiple of r
  std::size_t average_count = kDefaultAverageCount;
};

struct DecodeResult {
  Vector signal;
  OrthonormalRows transform;
  MeasurementRecord record;
  std::uint64_t transform_hash = 0;
};

// Rebuilds the transform by replaying the encoder's selection loop on the
// decoded measurements. Throws PriorMismatch, ChecksumMismatch or
// CorruptStream instead of returning a plausible wrong signal.
DecodeResult psc_decode(const Bitstream& b, const PriorModel& prior,
                        const DecodeOptions& options = {});

// Replays only the transform (no restoration) for the first `measurements`
// entries of record.
OrthonormalRows rebuild_transform(const MeasurementRecord& record, const PriorModel& prior,
                                  const PscConfig& cfg, std::size_t measurements);

// H^T y / prescale.
Vector restore_pinv(const OrthonormalRows& h, std::span<const double> y_deq,
                    double prescale = 1.0);

struct RestorationSampler {
  SamplerId sampler = SamplerId::kDdrmNl;
  SamplerConfig config;
  std::uint64_t seed = 0;
  double prescale = 1.0;
};

// Fixed-order average of n_avg draws from derive_stream(seed, kRestore, 0, i).
Vector restore_posterior_mean(const OrthonormalRows& h, std::span<const double> y_deq,
                              const PriorModel& prior, std::size_t n_avg,
                              const RestorationSampler& sampler);
// Draw 0 of the same streams.
Vector restore_posterior_sample(const OrthonormalRows& h, std::span<const double> y_deq,
                                const PriorModel& prior, const RestorationSampler& sampler);

// Spatial positions: the product of all dimensions, except that 3-D shapes
// are (channels, height, width) and count height * width.
std::size_t signal_positions(std::span<const std::uint32_t> shape);
double measure_bpp(std::size_t total_bytes, std::span<const std::uint32_t> shape);
double measure_bpp(const Bitstream& b);

// Rate control: N = floor(bpp * positions / (8 r)), measured before
// entropy coding.
std::size_t iterations_for_rate(double bpp, std::span<const std::uint32_t> shape,
                                std::size_t rows_per_iteration);

}  // namespace psc
