#include "psc/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "psc/error.hpp"
#include "psc/hash.hpp"

namespace psc {
namespace {

constexpr double kGramRidge = 1e-12;
constexpr double kZeroEigenvalue = 1e-10;
constexpr double kPsdTolerance = 1e-10;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// In-place lower Cholesky; false when a pivot is not positive.
bool cholesky(Matrix& g) {
  const std::size_t n = g.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double d = g(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= g(j, k) * g(j, k);
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    g(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = g(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= g(i, k) * g(j, k);
      g(i, j) = v / d;
    }
    for (std::size_t k = j + 1; k < n; ++k) g(j, k) = 0.0;
  }
  return true;
}

// Solves L L^T x = b in place.
void cholesky_solve(const Matrix& l, std::span<double> b) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= l(i, k) * b[k];
    b[i] = v / l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double v = b[i];
    for (std::size_t k = i + 1; k < n; ++k) v -= l(k, i) * b[k];
    b[i] = v / l(i, i);
  }
}

// Factorized H Sigma H^T (+ ridge) shared by conditioning and likelihoods.
struct MeasurementGram {
  Matrix b;         // H Sigma, k x D
  Matrix cholesky;  // of H Sigma H^T + ridge I
};

MeasurementGram factor_gram(const GaussianPrior& prior, const OrthonormalRows& h) {
  MeasurementGram out{multiply(h.matrix(), prior.covariance()), {}};
  Matrix g = multiply_abt(out.b, h.matrix());
  const std::size_t k = g.rows();
  double trace = 0.0;
  for (std::size_t i = 0; i < k; ++i) trace += g(i, i);
  if (!(trace > 0.0))
    fail(ErrorCode::kDegenerateGram, "H Sigma H^T has non-positive trace");
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) g(i, j) = g(j, i) = 0.5 * (g(i, j) + g(j, i));
  const double ridge = kGramRidge * trace;
  for (std::size_t i = 0; i < k; ++i) g(i, i) += ridge;
  if (!cholesky(g)) fail(ErrorCode::kDegenerateGram, "H Sigma H^T is not positive definite");
  out.cholesky = std::move(g);
  return out;
}

double log_sum_exp(std::span<const double> logs) {
  const double top = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : logs) acc += std::exp(v - top);
  return top + std::log(acc);
}

std::vector<double> normalize_log_weights(std::span<const double> logs) {
  const double total = log_sum_exp(logs);
  std::vector<double> w(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) w[i] = std::exp(logs[i] - total);
  return w;
}

std::size_t pick_component(std::span<const double> weights, double u) {
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    cumulative += weights[i];
    if (u < cumulative) return i;
  }
  return weights.size() - 1;
}

}  // namespace

GaussianPrior::GaussianPrior(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  const std::size_t d = mean_.size();
  if (d == 0) fail(ErrorCode::kConfigInvalid, "prior dimension must be positive");
  if (covariance_.rows() != d || covariance_.cols() != d)
    fail(ErrorCode::kShapeMismatch, "covariance must be " + std::to_string(d) + "x" +
                                        std::to_string(d));
  for (double v : mean_)
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteInput, "prior mean");
  for (double v : covariance_.data())
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteInput, "prior covariance");
  eigen_ = sym_eig_desc(covariance_);
  const double floor = -kPsdTolerance * std::max(1.0, std::abs(eigen_.values.front()));
  for (double& lambda : eigen_.values) {
    if (lambda < floor)
      fail(ErrorCode::kConfigInvalid, "covariance is not positive semidefinite");
    lambda = std::max(lambda, 0.0);
  }
}

double GaussianPrior::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) t += covariance_(i, i);
  return t;
}

Vector GaussianPrior::denoise(std::span<const double> x_t, double sigma) const {
  if (x_t.size() != dim()) fail(ErrorCode::kShapeMismatch, "denoise input dimension");
  if (sigma == 0.0) return Vector(x_t.begin(), x_t.end());
  const double s2 = sigma * sigma;
  Vector centered(dim());
  for (std::size_t i = 0; i < dim(); ++i) centered[i] = x_t[i] - mean_[i];
  Vector coeffs = multiply(eigen_.vectors, centered);
  for (std::size_t i = 0; i < dim(); ++i) {
    const double lambda = eigen_.values[i];
    coeffs[i] *= lambda / (lambda + s2);
  }
  Vector out = multiply_transposed(eigen_.vectors, coeffs);
  for (std::size_t i = 0; i < dim(); ++i) out[i] += mean_[i];
  return out;
}

double GaussianPrior::log_density(std::span<const double> x, double sigma) const {
  Vector centered(dim());
  for (std::size_t i = 0; i < dim(); ++i) centered[i] = x[i] - mean_[i];
  const Vector coeffs = multiply(eigen_.vectors, centered);
  const double s2 = sigma * sigma;
  double acc = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double var = std::max(eigen_.values[i] + s2, std::numeric_limits<double>::min());
    acc += coeffs[i] * coeffs[i] / var + std::log(var) + kLog2Pi;
  }
  return -0.5 * acc;
}

Vector GaussianPrior::sample(RngStream& stream) const {
  return sample_with(stream.gauss(dim()));
}

Vector GaussianPrior::sample_with(std::span<const double> eps) const {
  Vector out = mean_;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double c = std::sqrt(eigen_.values[i]) * eps[i];
    if (c == 0.0) continue;
    const auto v = eigen_.vectors.row(i);
    for (std::size_t j = 0; j < dim(); ++j) out[j] += c * v[j];
  }
  return out;
}

GmmPrior::GmmPrior(std::vector<double> weights, std::vector<GaussianPrior> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty()) fail(ErrorCode::kConfigInvalid, "mixture needs a component");
  if (weights_.size() != components_.size())
    fail(ErrorCode::kConfigInvalid, "one weight per component required");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0)) fail(ErrorCode::kConfigInvalid, "mixture weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    fail(ErrorCode::kConfigInvalid, "mixture weights sum to " + std::to_string(total));
  for (const auto& c : components_)
    if (c.dim() != components_.front().dim())
      fail(ErrorCode::kShapeMismatch, "mixture components disagree on dimension");
}

double GmmPrior::largest_eigenvalue() const {
  double best = 0.0;
  for (const auto& c : components_) best = std::max(best, c.largest_eigenvalue());
  return best;
}

std::vector<double> GmmPrior::responsibilities(std::span<const double> x_t,
                                               double sigma) const {
  std::vector<double> logs(size());
  for (std::size_t k = 0; k < size(); ++k)
    logs[k] = std::log(weights_[k]) + components_[k].log_density(x_t, sigma);
  return normalize_log_weights(logs);
}

Vector GmmPrior::denoise(std::span<const double> x_t, double sigma) const {
  if (x_t.size() != dim()) fail(ErrorCode::kShapeMismatch, "denoise input dimension");
  if (sigma == 0.0) return Vector(x_t.begin(), x_t.end());
  const std::vector<double> gamma = responsibilities(x_t, sigma);
  Vector out(dim(), 0.0);
  for (std::size_t k = 0; k < size(); ++k) {
    if (gamma[k] == 0.0) continue;
    const Vector part = components_[k].denoise(x_t, sigma);
    for (std::size_t i = 0; i < dim(); ++i) out[i] += gamma[k] * part[i];
  }
  return out;
}

double GmmPrior::log_density(std::span<const double> x, double sigma) const {
  std::vector<double> logs(size());
  for (std::size_t k = 0; k < size(); ++k)
    logs[k] = std::log(weights_[k]) + components_[k].log_density(x, sigma);
  return log_sum_exp(logs);
}

Vector GmmPrior::sample(RngStream& stream) const {
  const Vector eps = stream.gauss(dim());
  const std::size_t k = size() == 1 ? 0 : pick_component(weights_, stream.uniform());
  return components_[k].sample_with(eps);
}

const Denoiser& as_denoiser(const PriorModel& prior) {
  return std::visit([](const auto& p) -> const Denoiser& { return p; }, prior);
}

std::size_t prior_dim(const PriorModel& prior) { return as_denoiser(prior).dim(); }

double prior_largest_eigenvalue(const PriorModel& prior) {
  return std::visit([](const auto& p) { return p.largest_eigenvalue(); }, prior);
}

Vector prior_sample(const PriorModel& prior, RngStream& stream) {
  return std::visit([&](const auto& p) { return p.sample(stream); }, prior);
}

Vector prior_mean(const PriorModel& prior) {
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) return g->mean();
  const auto& gmm = std::get<GmmPrior>(prior);
  Vector m(gmm.dim(), 0.0);
  for (std::size_t k = 0; k < gmm.size(); ++k)
    for (std::size_t i = 0; i < m.size(); ++i)
      m[i] += gmm.weights()[k] * gmm.components()[k].mean()[i];
  return m;
}

Matrix prior_covariance(const PriorModel& prior) {
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) return g->covariance();
  const auto& gmm = std::get<GmmPrior>(prior);
  const Vector m = prior_mean(prior);
  const std::size_t d = gmm.dim();
  Matrix cov(d, d);
  for (std::size_t k = 0; k < gmm.size(); ++k) {
    const auto& c = gmm.components()[k];
    const double w = gmm.weights()[k];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        cov(i, j) += w * (c.covariance()(i, j) +
                          (c.mean()[i] - m[i]) * (c.mean()[j] - m[j]));
  }
  return cov;
}

std::uint64_t prior_digest(const PriorModel& prior) {
  Fnv1a64 h;
  auto add_gaussian = [&](const GaussianPrior& g) {
    h.update_f64s(g.mean());
    h.update_f64s(g.covariance().data());
  };
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) {
    h.update_u64(1);
    h.update_u64(g->dim());
    add_gaussian(*g);
  } else {
    const auto& gmm = std::get<GmmPrior>(prior);
    h.update_u64(2);
    h.update_u64(gmm.dim());
    h.update_u64(gmm.size());
    for (std::size_t k = 0; k < gmm.size(); ++k) {
      h.update_f64(gmm.weights()[k]);
      add_gaussian(gmm.components()[k]);
    }
  }
  return h.digest();
}

PosteriorMoments gaussian_posterior_moments(const GaussianPrior& prior,
                                            const OrthonormalRows& h,
                                            std::span<const double> y) {
  if (h.dim() != prior.dim()) fail(ErrorCode::kShapeMismatch, "H width vs prior dimension");
  if (y.size() != h.count()) fail(ErrorCode::kShapeMismatch, "y length vs H rows");
  if (h.count() == 0) return {prior.mean(), prior.covariance()};

  const MeasurementGram gram = factor_gram(prior, h);
  const std::size_t d = prior.dim();
  const std::size_t k = h.count();

  Vector innovation = h.apply(prior.mean());
  for (std::size_t i = 0; i < k; ++i) innovation[i] = y[i] - innovation[i];
  cholesky_solve(gram.cholesky, innovation);
  PosteriorMoments out{multiply_transposed(gram.b, innovation), prior.covariance()};
  for (std::size_t i = 0; i < d; ++i) out.mean[i] += prior.mean()[i];

  // Sigma - B^T G^{-1} B, one column of G^{-1} B at a time.
  Vector column(k);
  Matrix solved(k, d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < k; ++i) column[i] = gram.b(i, j);
    cholesky_solve(gram.cholesky, column);
    for (std::size_t i = 0; i < k; ++i) solved(i, j) = column[i];
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t m = 0; m < k; ++m) acc += gram.b(m, i) * solved(m, j);
      out.covariance(i, j) -= acc;
    }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const double avg = 0.5 * (out.covariance(i, j) + out.covariance(j, i));
      out.covariance(i, j) = out.covariance(j, i) = avg;
    }
  return out;
}

double gaussian_measurement_log_likelihood(const GaussianPrior& prior,
                                           const OrthonormalRows& h,
                                           std::span<const double> y) {
  if (h.count() == 0) return 0.0;
  const MeasurementGram gram = factor_gram(prior, h);
  const std::size_t k = h.count();
  Vector r = h.apply(prior.mean());
  for (std::size_t i = 0; i < k; ++i) r[i] = y[i] - r[i];
  // Forward substitution only: ||L^{-1} r||^2 = r^T G^{-1} r.
  double quad = 0.0;
  double log_det = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double v = r[i];
    for (std::size_t m = 0; m < i; ++m) v -= gram.cholesky(i, m) * r[m];
    r[i] = v / gram.cholesky(i, i);
    quad += r[i] * r[i];
    log_det += 2.0 * std::log(gram.cholesky(i, i));
  }
  return -0.5 * (quad + log_det + static_cast<double>(k) * kLog2Pi);
}

GaussianPosterior::GaussianPosterior(const GaussianPrior& prior, const OrthonormalRows& h,
                                     std::span<const double> y) {
  PosteriorMoments m = gaussian_posterior_moments(prior, h, y);
  mean_ = std::move(m.mean);
  covariance_ = std::move(m.covariance);
  const double floor = kZeroEigenvalue * prior.trace();
  if (h.count() >= prior.dim()) {
    // Fully conditioned: the posterior is a point mass.
    scales_.assign(prior.dim(), 0.0);
    directions_ = Matrix(0, prior.dim());
    return;
  }
  EigenDecomposition eig = sym_eig_desc(covariance_);
  scales_.resize(prior.dim());
  for (std::size_t i = 0; i < scales_.size(); ++i)
    scales_[i] = eig.values[i] > floor ? std::sqrt(eig.values[i]) : 0.0;
  directions_ = std::move(eig.vectors);
}

Vector GaussianPosterior::sample(RngStream& stream) const {
  return sample_with(stream.gauss(mean_.size()));
}

Vector GaussianPosterior::sample_with(std::span<const double> eps) const {
  Vector out = mean_;
  for (std::size_t i = 0; i < directions_.rows(); ++i) {
    const double c = scales_[i] * eps[i];
    if (c == 0.0) continue;
    const auto v = directions_.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += c * v[j];
  }
  return out;
}

GmmPosterior::GmmPosterior(const GmmPrior& prior, const OrthonormalRows& h,
                           std::span<const double> y) {
  std::vector<double> logs(prior.size());
  for (std::size_t k = 0; k < prior.size(); ++k) {
    const auto& c = prior.components()[k];
    logs[k] = std::log(prior.weights()[k]) + gaussian_measurement_log_likelihood(c, h, y);
    components_.emplace_back(c, h, y);
  }
  weights_ = normalize_log_weights(logs);
}

Vector GmmPosterior::sample(RngStream& stream) const {
  const Vector eps = stream.gauss(components_.front().mean().size());
  const std::size_t k =
      components_.size() == 1 ? 0 : pick_component(weights_, stream.uniform());
  return components_[k].sample_with(eps);
}

Vector gaussian_exact_posterior_sample(const GaussianPrior& prior, const OrthonormalRows& h,
                                       std::span<const double> y, RngStream& stream) {
  return GaussianPosterior(prior, h, y).sample(stream);
}

Vector gmm_exact_posterior_sample(const GmmPrior& prior, const OrthonormalRows& h,
                                  std::span<const double> y, RngStream& stream) {
  return GmmPosterior(prior, h, y).sample(stream);
}

}  // namespace psc
