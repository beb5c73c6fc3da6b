#include "psc/selection.hpp"

#include <algorithm>
#include <string>

#include "psc/error.hpp"

namespace psc {

SelectionMode selection_mode_from_code(std::uint8_t code) {
  if (code == 0) return SelectionMode::kSamplePca;
  if (code == 1) return SelectionMode::kExactCovariance;
  fail(ErrorCode::kConfigInvalid, "selection mode " + std::to_string(code));
}

SelectionMode parse_selection_mode(std::string_view name) {
  if (name == "sample-pca") return SelectionMode::kSamplePca;
  if (name == "exact-cov") return SelectionMode::kExactCovariance;
  fail(ErrorCode::kConfigInvalid, "selection mode '" + std::string(name) + "'");
}

std::string_view selection_mode_name(SelectionMode mode) {
  return mode == SelectionMode::kSamplePca ? "sample-pca" : "exact-cov";
}

std::size_t default_sample_count(std::size_t r) { return std::max(r + 2, (4 * r) / 3); }

OrthonormalRows select_new_rows(const OrthonormalRows& h, std::span<const double> y,
                                std::size_t r, const SelectionContext& ctx) {
  if (ctx.prior == nullptr) fail(ErrorCode::kConfigInvalid, "selection without a prior");
  const std::size_t d = h.dim();
  if (h.count() + r > d)
    fail(ErrorCode::kDimensionExhausted, std::to_string(h.count()) + " + " +
                                             std::to_string(r) + " rows exceed D = " +
                                             std::to_string(d));
  const std::size_t s = ctx.samples;
  if (s < r + 1)
    fail(ErrorCode::kConfigInvalid, "need at least r + 1 samples, got " + std::to_string(s));

  const std::vector<Vector> samples = sample_batch(ctx.sampler, *ctx.prior, h, y, s,
                                                   ctx.sampler_config, ctx.seed, ctx.iteration);
  Vector mean(d, 0.0);
  for (const auto& x : samples)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x[j];
  for (double& m : mean) m /= static_cast<double>(s);
  Matrix centered(s, d);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < d; ++j) centered(i, j) = samples[i][j] - mean[j];

  const TruncatedSvd svd = truncated_right_singular_vectors(centered, r);
  Matrix candidates(r, d);  // rows past the numerical rank stay zero
  for (std::size_t i = 0; i < svd.right_vectors.rows(); ++i) {
    const auto src = svd.right_vectors.row(i);
    std::copy(src.begin(), src.end(), candidates.row(i).begin());
  }
  return orthonormalize_against(candidates, h);
}

OrthonormalRows select_new_rows_exact(const GaussianPrior& prior, const OrthonormalRows& h,
                                      std::size_t r) {
  const std::size_t d = h.dim();
  if (h.count() + r > d)
    fail(ErrorCode::kDimensionExhausted, std::to_string(h.count()) + " + " +
                                             std::to_string(r) + " rows exceed D = " +
                                             std::to_string(d));
  const Vector zeros(h.count(), 0.0);
  const PosteriorMoments post = gaussian_posterior_moments(prior, h, zeros);
  const EigenDecomposition eig = sym_eig_desc(post.covariance);
  Matrix candidates(r, d);
  for (std::size_t i = 0; i < r; ++i) {
    const auto src = eig.vectors.row(i);
    std::copy(src.begin(), src.end(), candidates.row(i).begin());
  }
  return orthonormalize_against(candidates, h);
}

}  // namespace psc
