#include "psc/codec.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "psc/error.hpp"
#include "psc/hash.hpp"
#include "psc/range_coder.hpp"

namespace psc {
namespace {

Vector to_signal_units(std::span<const double> y_deq, std::size_t count, double prescale) {
  Vector y(count);
  for (std::size_t i = 0; i < count; ++i) y[i] = y_deq[i] / prescale;
  return y;
}

// One selection step; encoder and decoder both go through here.
OrthonormalRows next_rows(const OrthonormalRows& h, std::span<const double> y_signal,
                          std::size_t iteration, const PscConfig& cfg,
                          const PriorModel& prior, const SamplerConfig& sampler_cfg) {
  if (cfg.selection == SelectionMode::kExactCovariance) {
    return select_new_rows_exact(std::get<GaussianPrior>(prior), h, cfg.rows_per_iteration);
  }
  SelectionContext ctx;
  ctx.prior = &prior;
  ctx.sampler = cfg.sampler;
  ctx.sampler_config = sampler_cfg;
  ctx.seed = cfg.seed;
  ctx.iteration = static_cast<std::uint32_t>(iteration);
  ctx.samples = cfg.effective_samples();
  return select_new_rows(h, y_signal, cfg.rows_per_iteration, ctx);
}

}  // namespace

std::size_t PscConfig::dim() const {
  std::size_t d = 1;
  for (std::uint32_t s : shape) d *= s;
  return shape.empty() ? 0 : d;
}

std::size_t PscConfig::effective_samples() const {
  return samples != 0 ? samples : default_sample_count(rows_per_iteration);
}

void validate(const PscConfig& cfg, const PriorModel& prior) {
  if (cfg.shape.empty() || cfg.shape.size() > 4)
    fail(ErrorCode::kConfigInvalid, "shape must have 1 to 4 dimensions");
  const std::size_t d = cfg.dim();
  if (d != prior_dim(prior))
    fail(ErrorCode::kConfigInvalid, "signal dimension " + std::to_string(d) +
                                        " != prior dimension " + std::to_string(prior_dim(prior)));
  if (cfg.rows_per_iteration == 0) fail(ErrorCode::kConfigInvalid, "r must be >= 1");
  if (cfg.iterations * cfg.rows_per_iteration > d)
    fail(ErrorCode::kConfigInvalid, "N * r = " +
                                        std::to_string(cfg.iterations * cfg.rows_per_iteration) +
                                        " exceeds D = " + std::to_string(d));
  if (cfg.iterations > std::numeric_limits<std::uint32_t>::max())
    fail(ErrorCode::kConfigInvalid, "too many iterations");
  if (cfg.effective_samples() < cfg.rows_per_iteration + 1)
    fail(ErrorCode::kConfigInvalid, "s must be at least r + 1");
  const bool gaussian = std::holds_alternative<GaussianPrior>(prior);
  if (cfg.selection == SelectionMode::kExactCovariance && !gaussian)
    fail(ErrorCode::kConfigInvalid, "exact-cov selection needs a gaussian prior");
  if (cfg.sampler == SamplerId::kExactGaussian && !gaussian)
    fail(ErrorCode::kConfigInvalid, "exact-gaussian sampler needs a gaussian prior");
  if (cfg.steps < 2) fail(ErrorCode::kConfigInvalid, "need at least 2 sampler steps");
  if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0)) fail(ErrorCode::kConfigInvalid, "eta outside [0,1]");
  if (!(cfg.eta_b >= 0.0 && cfg.eta_b <= 1.0))
    fail(ErrorCode::kConfigInvalid, "eta_b outside [0,1]");
  if (!std::isfinite(cfg.prescale) || !(cfg.prescale > 0.0))
    fail(ErrorCode::kConfigInvalid, "prescale must be positive and finite");
  if (cfg.entropy != kEntropyRangeCoder)
    fail(ErrorCode::kConfigInvalid, "unknown entropy coder id " + std::to_string(cfg.entropy));
}

SamplerConfig make_sampler_config(const PscConfig& cfg, const PriorModel& prior) {
  return SamplerConfig{default_schedule(prior, cfg.steps), cfg.eta, cfg.eta_b};
}

PscConfig config_from_header(const BitstreamHeader& h) {
  PscConfig cfg;
  cfg.shape = h.shape;
  cfg.iterations = h.iterations;
  cfg.rows_per_iteration = h.rows_per_iteration;
  cfg.samples = h.samples;
  cfg.sampler = sampler_id_from_code(h.sampler_id);
  cfg.selection = selection_mode_from_code(h.selection_mode);
  cfg.steps = h.steps;
  cfg.eta = h.eta;
  cfg.eta_b = h.eta_b;
  cfg.seed = h.seed;
  cfg.quantizer = quantizer_id_from_code(h.quantizer_id);
  cfg.entropy = h.entropy_id;
  cfg.prescale = h.prescale;
  return cfg;
}

MeasurementRecord::MeasurementRecord(QuantizerId quantizer) : quantizer_(quantizer) {}

MeasurementRecord MeasurementRecord::from_codes(QuantizerId quantizer,
                                                std::vector<std::uint8_t> codes) {
  const std::size_t width = bytes_per_measurement(quantizer);
  if (codes.size() % width != 0)
    fail(ErrorCode::kCorruptStream, "code bytes are not a whole number of measurements");
  MeasurementRecord rec(quantizer);
  rec.dequantized_.reserve(codes.size() / width);
  for (std::size_t i = 0; i < codes.size(); i += width)
    rec.dequantized_.push_back(dequantize_from(quantizer, std::span(codes).subspan(i, width)));
  rec.codes_ = std::move(codes);
  return rec;
}

double MeasurementRecord::append(double v) {
  const std::size_t start = codes_.size();
  quantize_into(quantizer_, v, codes_);
  const double deq = dequantize_from(quantizer_, std::span(codes_).subspan(start));
  dequantized_.push_back(deq);
  return deq;
}

MeasurementRecord MeasurementRecord::prefix(std::size_t count) const {
  if (count > size()) fail(ErrorCode::kShapeMismatch, "record prefix too long");
  const std::size_t width = bytes_per_measurement(quantizer_);
  return from_codes(quantizer_, std::vector<std::uint8_t>(
                                    codes_.begin(), codes_.begin() + static_cast<std::ptrdiff_t>(count * width)));
}

std::uint64_t transform_hash(const OrthonormalRows& h) {
  Fnv1a64 hash;
  hash.update_u64(h.count());
  hash.update_u64(h.dim());
  hash.update_f64s(h.matrix().data());
  return hash.digest();
}

EncodeResult psc_encode(std::span<const double> x, const PriorModel& prior, const PscConfig& cfg) {
  validate(cfg, prior);
  const std::size_t d = cfg.dim();
  if (x.size() != d) fail(ErrorCode::kShapeMismatch, "signal length vs shape");
  for (double v : x)
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteInput, "signal contains a non-finite value");

  const SamplerConfig sampler_cfg = make_sampler_config(cfg, prior);
  OrthonormalRows h(d);
  MeasurementRecord record(cfg.quantizer);
  Vector y_signal;
  for (std::size_t n = 0; n < cfg.iterations; ++n) {
    const OrthonormalRows rows = next_rows(h, y_signal, n, cfg, prior, sampler_cfg);
    for (std::size_t i = 0; i < rows.count(); ++i) {
      // Later iterations condition on the dequantized value, exactly what
      // the decoder will see.
      const double deq = record.append(cfg.prescale * dot(rows.row(i), x));
      y_signal.push_back(deq / cfg.prescale);
    }
    h.append(rows);
  }

  EncodeResult out{{}, std::move(h), std::move(record), 0};
  auto& hdr = out.bitstream.header;
  hdr.shape = cfg.shape;
  hdr.iterations = static_cast<std::uint32_t>(cfg.iterations);
  hdr.rows_per_iteration = static_cast<std::uint32_t>(cfg.rows_per_iteration);
  hdr.samples = static_cast<std::uint32_t>(cfg.effective_samples());
  hdr.sampler_id = static_cast<std::uint8_t>(cfg.sampler);
  hdr.selection_mode = static_cast<std::uint8_t>(cfg.selection);
  hdr.eta = cfg.eta;
  hdr.eta_b = cfg.eta_b;
  hdr.steps = static_cast<std::uint32_t>(cfg.steps);
  hdr.seed = cfg.seed;
  hdr.quantizer_id = static_cast<std::uint8_t>(cfg.quantizer);
  hdr.entropy_id = cfg.entropy;
  hdr.prescale = cfg.prescale;
  hdr.prior_digest = prior_digest(prior);
  hdr.payload_symbol_count = static_cast<std::uint32_t>(out.record.size());
  out.bitstream.payload = range_encode(out.record.codes());
  out.transform_hash = transform_hash(out.transform);
  return out;
}

RestorationMode parse_restoration_mode(std::string_view name) {
  if (name == "pinv") return RestorationMode::kPinv;
  if (name == "mean") return RestorationMode::kPosteriorMean;
  if (name == "sample") return RestorationMode::kPosteriorSample;
  fail(ErrorCode::kConfigInvalid, "restoration mode '" + std::string(name) + "'");
}

std::string_view restoration_mode_name(RestorationMode mode) {
  switch (mode) {
    case RestorationMode::kPinv: return "pinv";
    case RestorationMode::kPosteriorMean: return "mean";
    case RestorationMode::kPosteriorSample: return "sample";
  }
  return "unknown";
}

OrthonormalRows rebuild_transform(const MeasurementRecord& record, const PriorModel& prior,
                                  const PscConfig& cfg, std::size_t measurements) {
  const std::size_t r = cfg.rows_per_iteration;
  if (measurements > record.size() || measurements % r != 0)
    fail(ErrorCode::kConfigInvalid, "measurement count must be a multiple of r within the record");
  const SamplerConfig sampler_cfg = make_sampler_config(cfg, prior);
  OrthonormalRows h(cfg.dim());
  for (std::size_t n = 0; n < measurements / r; ++n) {
    const Vector y_signal = to_signal_units(record.dequantized(), n * r, cfg.prescale);
    h.append(next_rows(h, y_signal, n, cfg, prior, sampler_cfg));
  }
  return h;
}

DecodeResult psc_decode(const Bitstream& b, const PriorModel& prior, const DecodeOptions& options) {
  const PscConfig cfg = config_from_header(b.header);
  if (b.header.prior_digest != prior_digest(prior))
    fail(ErrorCode::kPriorMismatch, "bitstream was encoded with a different prior");
  validate(cfg, prior);
  const std::size_t total = cfg.iterations * cfg.rows_per_iteration;
  if (b.header.payload_symbol_count != total)
    fail(ErrorCode::kCorruptStream, "symbol count disagrees with N * r");
  const std::size_t k = options.prefix.value_or(total);
  if (k > total || k % cfg.rows_per_iteration != 0)
    fail(ErrorCode::kConfigInvalid, "prefix must be a multiple of r and at most N * r");

  const std::size_t width = bytes_per_measurement(cfg.quantizer);
  std::vector<std::uint8_t> codes;
  codes.reserve(k * width);
  {
    RangeDecoder dec(b.payload);
    for (std::size_t i = 0; i < k * width; ++i) codes.push_back(dec.decode());
    if (k == total) dec.verify_trailer();
  }

  DecodeResult out{{}, OrthonormalRows(cfg.dim()),
                   MeasurementRecord::from_codes(cfg.quantizer, std::move(codes)), 0};
  out.transform = rebuild_transform(out.record, prior, cfg, k);
  out.transform_hash = transform_hash(out.transform);

  const RestorationSampler sampler{cfg.sampler, make_sampler_config(cfg, prior), cfg.seed,
                                   cfg.prescale};
  switch (options.mode) {
    case RestorationMode::kPinv:
      out.signal = restore_pinv(out.transform, out.record.dequantized(), cfg.prescale);
      break;
    case RestorationMode::kPosteriorMean:
      // With nothing measured the posterior mean is the prior mean; no need
      // to estimate it.
      if (k == 0) {
        out.signal = prior_mean(prior);
        break;
      }
      out.signal = restore_posterior_mean(out.transform, out.record.dequantized(), prior,
                                          options.average_count, sampler);
      break;
    case RestorationMode::kPosteriorSample:
      out.signal = restore_posterior_sample(out.transform, out.record.dequantized(), prior,
                                            sampler);
      break;
  }
  return out;
}

Vector restore_pinv(const OrthonormalRows& h, std::span<const double> y_deq, double prescale) {
  Vector x = h.apply_transposed(y_deq);
  for (double& v : x) v /= prescale;
  return x;
}

Vector restore_posterior_mean(const OrthonormalRows& h, std::span<const double> y_deq,
                              const PriorModel& prior, std::size_t n_avg,
                              const RestorationSampler& sampler) {
  if (n_avg == 0) fail(ErrorCode::kConfigInvalid, "n_avg must be >= 1");
  const Vector y = to_signal_units(y_deq, y_deq.size(), sampler.prescale);
  const std::vector<Vector> draws = sample_batch(sampler.sampler, prior, h, y, n_avg,
                                                 sampler.config, sampler.seed, 0, Domain::kRestore);
  Vector mean(h.dim(), 0.0);
  for (const auto& x : draws)
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += x[j];
  for (double& v : mean) v /= static_cast<double>(n_avg);
  return mean;
}

Vector restore_posterior_sample(const OrthonormalRows& h, std::span<const double> y_deq,
                                const PriorModel& prior, const RestorationSampler& sampler) {
  const Vector y = to_signal_units(y_deq, y_deq.size(), sampler.prescale);
  return sample_batch(sampler.sampler, prior, h, y, 1, sampler.config, sampler.seed, 0,
                      Domain::kRestore)
      .front();
}

std::size_t signal_positions(std::span<const std::uint32_t> shape) {
  if (shape.empty()) return 0;
  if (shape.size() == 3) return static_cast<std::size_t>(shape[1]) * shape[2];
  std::size_t n = 1;
  for (std::uint32_t s : shape) n *= s;
  return n;
}

double measure_bpp(std::size_t total_bytes, std::span<const std::uint32_t> shape) {
  const std::size_t positions = signal_positions(shape);
  if (positions == 0) fail(ErrorCode::kConfigInvalid, "shape has no positions");
  return static_cast<double>(total_bytes) * 8.0 / static_cast<double>(positions);
}

double measure_bpp(const Bitstream& b) {
  return measure_bpp(b.header_size() + b.payload.size(), b.header.shape);
}

std::size_t iterations_for_rate(double bpp, std::span<const std::uint32_t> shape,
                                std::size_t rows_per_iteration) {
  if (!(bpp >= 0.0) || !std::isfinite(bpp)) fail(ErrorCode::kConfigInvalid, "bpp must be >= 0");
  if (rows_per_iteration == 0) fail(ErrorCode::kConfigInvalid, "r must be >= 1");
  const double bits = bpp * static_cast<double>(signal_positions(shape));
  return static_cast<std::size_t>(std::floor(bits / (8.0 * static_cast<double>(rows_per_iteration))));
}

}  // namespace psc
