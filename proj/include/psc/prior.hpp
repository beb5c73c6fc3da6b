#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "psc/linalg.hpp"
#include "psc/rng.hpp"

namespace psc {

// Anything that approximates E[x | x + sigma * eps = x_t].
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual std::size_t dim() const = 0;
  virtual Vector denoise(std::span<const double> x_t, double sigma) const = 0;
};

class GaussianPrior final : public Denoiser {
 public:
  GaussianPrior(Vector mean, Matrix covariance);

  std::size_t dim() const override { return mean_.size(); }
  const Vector& mean() const noexcept { return mean_; }
  const Matrix& covariance() const noexcept { return covariance_; }
  const EigenDecomposition& eigen() const noexcept { return eigen_; }
  double largest_eigenvalue() const { return eigen_.values.empty() ? 0.0 : eigen_.values[0]; }
  double trace() const;

  // mu + Sigma (Sigma + sigma^2 I)^{-1} (x_t - mu), via the stored eigenbasis.
  Vector denoise(std::span<const double> x_t, double sigma) const override;

  // log N(x; mu, Sigma + sigma^2 I).
  double log_density(std::span<const double> x, double sigma) const;

  Vector sample(RngStream& stream) const;
  Vector sample_with(std::span<const double> eps) const;

 private:
  Vector mean_;
  Matrix covariance_;
  EigenDecomposition eigen_;
};

class GmmPrior final : public Denoiser {
 public:
  GmmPrior(std::vector<double> weights, std::vector<GaussianPrior> components);

  std::size_t dim() const override { return components_.front().dim(); }
  std::size_t size() const noexcept { return components_.size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<GaussianPrior>& components() const noexcept { return components_; }
  double largest_eigenvalue() const;

  // Normalized responsibilities of each component for x_t at noise sigma.
  std::vector<double> responsibilities(std::span<const double> x_t, double sigma) const;
  Vector denoise(std::span<const double> x_t, double sigma) const override;
  double log_density(std::span<const double> x, double sigma) const;

  // Consumes the gauss draws first, then one uniform word for the component.
  Vector sample(RngStream& stream) const;

 private:
  std::vector<double> weights_;
  std::vector<GaussianPrior> components_;
};

using PriorModel = std::variant<GaussianPrior, GmmPrior>;

const Denoiser& as_denoiser(const PriorModel& prior);
std::size_t prior_dim(const PriorModel& prior);
double prior_largest_eigenvalue(const PriorModel& prior);
Vector prior_sample(const PriorModel& prior, RngStream& stream);
// Mean and covariance of the whole model (mixture moments for GMMs).
Vector prior_mean(const PriorModel& prior);
Matrix prior_covariance(const PriorModel& prior);
// Hash of the materialized parameters; guards against decoding with a
// different prior than the encoder used.
std::uint64_t prior_digest(const PriorModel& prior);

struct PosteriorMoments {
  Vector mean;
  Matrix covariance;
};

// Noiseless linear conditioning of a Gaussian on y = H x. H Sigma H^T gets a
// 1e-12 * trace ridge before its Cholesky factorization.
PosteriorMoments gaussian_posterior_moments(const GaussianPrior& prior,
                                            const OrthonormalRows& h,
                                            std::span<const double> y);

// log N(y; H mu, H Sigma H^T) with the same ridge.
double gaussian_measurement_log_likelihood(const GaussianPrior& prior,
                                           const OrthonormalRows& h,
                                           std::span<const double> y);

// Eigen-factorized Gaussian posterior, reusable across many draws.
class GaussianPosterior {
 public:
  GaussianPosterior(const GaussianPrior& prior, const OrthonormalRows& h,
                    std::span<const double> y);

  const Vector& mean() const noexcept { return mean_; }
  const Matrix& covariance() const noexcept { return covariance_; }
  // mean + sum_i sqrt(lambda_i) eps_i v_i with eps = stream.gauss(D).
  // Eigenvalues below 1e-10 * trace(prior covariance) count as zero.
  Vector sample(RngStream& stream) const;
  Vector sample_with(std::span<const double> eps) const;

 private:
  Vector mean_;
  Matrix covariance_;
  Vector scales_;
  Matrix directions_;
};

class GmmPosterior {
 public:
  GmmPosterior(const GmmPrior& prior, const OrthonormalRows& h,
               std::span<const double> y);

  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<GaussianPosterior>& components() const noexcept { return components_; }
  // eps = gauss(D) first, then one uniform word picks the component, so a
  // single-component mixture reproduces the Gaussian sampler exactly.
  Vector sample(RngStream& stream) const;

 private:
  std::vector<double> weights_;
  std::vector<GaussianPosterior> components_;
};

Vector gaussian_exact_posterior_sample(const GaussianPrior& prior, const OrthonormalRows& h,
                                       std::span<const double> y, RngStream& stream);
Vector gmm_exact_posterior_sample(const GmmPrior& prior, const OrthonormalRows& h,
                                  std::span<const double> y, RngStream& stream);

}  // namespace psc
