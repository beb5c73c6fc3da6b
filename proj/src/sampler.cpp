#include "psc/sampler.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "psc/error.hpp"
#include "psc/parallel.hpp"

namespace psc {

NoiseSchedule::NoiseSchedule(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
  if (sigmas_.empty()) fail(ErrorCode::kConfigInvalid, "noise schedule is empty");
  for (std::size_t i = 0; i < sigmas_.size(); ++i) {
    if (!std::isfinite(sigmas_[i]) || !(sigmas_[i] > 0.0))
      fail(ErrorCode::kConfigInvalid, "noise levels must be positive and finite");
    if (i > 0 && !(sigmas_[i] < sigmas_[i - 1]))
      fail(ErrorCode::kConfigInvalid, "noise levels must strictly decrease");
  }
}

NoiseSchedule NoiseSchedule::geometric(double sigma_max, double sigma_min, std::size_t steps) {
  if (steps < 2) fail(ErrorCode::kConfigInvalid, "schedule needs at least 2 steps");
  std::vector<double> sigmas(steps);
  const double log_ratio = std::log(sigma_min / sigma_max);
  for (std::size_t i = 0; i < steps; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(steps - 1);
    sigmas[i] = sigma_max * std::exp(log_ratio * frac);
  }
  sigmas.front() = sigma_max;
  sigmas.back() = sigma_min;
  return NoiseSchedule(std::move(sigmas));
}

void validate(const SamplerConfig& cfg) {
  if (cfg.schedule.steps() < 2) fail(ErrorCode::kConfigInvalid, "schedule needs >= 2 steps");
  if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0)) fail(ErrorCode::kConfigInvalid, "eta outside [0,1]");
  if (!(cfg.eta_b >= 0.0 && cfg.eta_b <= 1.0))
    fail(ErrorCode::kConfigInvalid, "eta_b outside [0,1]");
}

NoiseSchedule default_schedule(const PriorModel& prior, std::size_t steps) {
  const double lambda = prior_largest_eigenvalue(prior);
  if (!(lambda > 0.0)) fail(ErrorCode::kConfigInvalid, "prior has no variance to schedule over");
  const double sigma_max = 2.0 * std::sqrt(lambda);
  return NoiseSchedule::geometric(sigma_max, 1e-3 * sigma_max, steps);
}

SamplerId sampler_id_from_code(std::uint8_t code) {
  switch (code) {
    case 0: return SamplerId::kDdrmNl;
    case 1: return SamplerId::kExactGaussian;
    case 2: return SamplerId::kExactGmm;
  }
  fail(ErrorCode::kUnknownSamplerId, "sampler id " + std::to_string(code));
}

SamplerId parse_sampler_name(std::string_view name) {
  if (name == "ddrm" || name == "ddrm-nl") return SamplerId::kDdrmNl;
  if (name == "exact-gaussian") return SamplerId::kExactGaussian;
  if (name == "exact-gmm") return SamplerId::kExactGmm;
  fail(ErrorCode::kUnknownSamplerId, "sampler '" + std::string(name) + "'");
}

std::string_view sampler_name(SamplerId id) {
  switch (id) {
    case SamplerId::kDdrmNl: return "ddrm-nl";
    case SamplerId::kExactGaussian: return "exact-gaussian";
    case SamplerId::kExactGmm: return "exact-gmm";
  }
  return "unknown";
}

Vector ddrm_nl_sample(const Denoiser& denoiser, const OrthonormalRows& h,
                      std::span<const double> y, const SamplerConfig& cfg,
                      RngStream& stream) {
  const std::size_t d = h.dim();
  const std::size_t k = h.count();
  if (denoiser.dim() != d) fail(ErrorCode::kShapeMismatch, "denoiser vs H dimension");
  if (y.size() != k) fail(ErrorCode::kShapeMismatch, "y length vs H rows");
  for (double v : y)
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteInput, "measurement");
  validate(cfg);

  const auto& sig = cfg.schedule.sigmas();
  const double keep = std::sqrt(1.0 - cfg.eta * cfg.eta);

  Vector meas(k);
  Vector x(d);
  Vector eps_m(k);
  Vector eps(d);

  // x_T = H^T (y + sigma_T eps_m) + P_perp (sigma_T eps)
  stream.gauss_into(eps_m.data(), k);
  stream.gauss_into(eps.data(), d);
  for (std::size_t i = 0; i < k; ++i) meas[i] = y[i] + sig[0] * eps_m[i];
  {
    Vector noise = project_complement(eps, h);
    const Vector lifted = h.apply_transposed(meas);
    for (std::size_t j = 0; j < d; ++j) x[j] = lifted[j] + sig[0] * noise[j];
  }

  Vector blend(d);
  for (std::size_t step = 1; step < sig.size(); ++step) {
    const double sigma_prev = sig[step - 1];
    const double sigma = sig[step];
    const Vector x0 = denoiser.denoise(x, sigma_prev);

    stream.gauss_into(eps_m.data(), k);
    stream.gauss_into(eps.data(), d);

    const Vector hx0 = h.apply(x0);
    for (std::size_t i = 0; i < k; ++i)
      meas[i] = (1.0 - cfg.eta_b) * hx0[i] + cfg.eta_b * y[i] + sigma * eps_m[i];

    const double mix = keep * sigma / sigma_prev;
    for (std::size_t j = 0; j < d; ++j)
      blend[j] = x0[j] + mix * (x[j] - x0[j]) + cfg.eta * sigma * eps[j];
    const Vector complement = project_complement(blend, h);
    const Vector lifted = h.apply_transposed(meas);
    for (std::size_t j = 0; j < d; ++j) x[j] = lifted[j] + complement[j];
  }
  return denoiser.denoise(x, sig.back());
}

std::vector<Vector> sample_batch(SamplerId sampler, const PriorModel& prior,
                                 const OrthonormalRows& h, std::span<const double> y,
                                 std::size_t count, const SamplerConfig& cfg,
                                 std::uint64_t seed, std::uint32_t iteration,
                                 Domain domain) {
  if (count == 0) fail(ErrorCode::kConfigInvalid, "sample count must be >= 1");
  if (h.dim() != prior_dim(prior)) fail(ErrorCode::kShapeMismatch, "H vs prior dimension");
  std::vector<Vector> out(count);
  auto stream_for = [&](std::size_t i) {
    return derive_stream(seed, domain, iteration, static_cast<std::uint32_t>(i));
  };

  switch (sampler) {
    case SamplerId::kDdrmNl: {
      const Denoiser& denoiser = as_denoiser(prior);
      validate(cfg);
      parallel_for(count, [&](std::size_t i) {
        RngStream stream = stream_for(i);
        out[i] = ddrm_nl_sample(denoiser, h, y, cfg, stream);
      });
      break;
    }
    case SamplerId::kExactGaussian: {
      const auto* g = std::get_if<GaussianPrior>(&prior);
      if (g == nullptr)
        fail(ErrorCode::kConfigInvalid, "exact-gaussian sampler needs a gaussian prior");
      const GaussianPosterior posterior(*g, h, y);
      parallel_for(count, [&](std::size_t i) {
        RngStream stream = stream_for(i);
        out[i] = posterior.sample(stream);
      });
      break;
    }
    case SamplerId::kExactGmm: {
      std::unique_ptr<GmmPosterior> posterior;
      if (const auto* g = std::get_if<GaussianPrior>(&prior)) {
        posterior = std::make_unique<GmmPosterior>(GmmPrior({1.0}, {*g}), h, y);
      } else {
        posterior = std::make_unique<GmmPosterior>(std::get<GmmPrior>(prior), h, y);
      }
      parallel_for(count, [&](std::size_t i) {
        RngStream stream = stream_for(i);
        out[i] = posterior->sample(stream);
      });
      break;
    }
    default:
      fail(ErrorCode::kUnknownSamplerId,
           "sampler id " + std::to_string(static_cast<int>(sampler)));
  }
  return out;
}

}  // namespace psc
