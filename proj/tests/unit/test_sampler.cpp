#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <cstdlib>

#include "psc/error.hpp"
#include "psc/sampler.hpp"

using namespace psc;

namespace {

const GaussianPrior kDiag41({0.0, 0.0}, Matrix(2, 2, {4, 0, 0, 1}));

struct Moments {
  Vector mean;
  Vector var;
};

Moments moments(const std::vector<Vector>& xs) {
  const std::size_t d = xs.front().size();
  Moments m{Vector(d, 0.0), Vector(d, 0.0)};
  for (const auto& x : xs)
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += x[j];
  for (double& v : m.mean) v /= static_cast<double>(xs.size());
  for (const auto& x : xs)
    for (std::size_t j = 0; j < d; ++j) m.var[j] += (x[j] - m.mean[j]) * (x[j] - m.mean[j]);
  for (double& v : m.var) v /= static_cast<double>(xs.size() - 1);
  return m;
}

SamplerConfig config_for(const PriorModel& prior, std::size_t steps = kDefaultSteps) {
  return SamplerConfig{default_schedule(prior, steps), 1.0, 1.0};
}

}  // namespace

TEST(Schedule, UnitPriorEndpoints) {
  const PriorModel p = GaussianPrior({0.0, 0.0}, Matrix::identity(2));
  const NoiseSchedule s = default_schedule(p, 2);
  EXPECT_EQ(s.sigmas(), (std::vector<double>{2.0, 0.002}));
}

TEST(Schedule, GeometricRatio) {
  const NoiseSchedule s = default_schedule(PriorModel(kDiag41));
  ASSERT_EQ(s.steps(), 25u);
  const double ratio = s.sigmas()[1] / s.sigmas()[0];
  for (std::size_t i = 1; i < s.steps(); ++i)
    EXPECT_NEAR(s.sigmas()[i] / s.sigmas()[i - 1], ratio, 1e-12 * ratio);
}

TEST(Schedule, RejectsNonDecreasing) {
  EXPECT_THROW(NoiseSchedule({1.0, 1.0}), PscError);
  EXPECT_THROW(NoiseSchedule({1.0, -0.5}), PscError);
}

TEST(SamplerId, Codes) {
  EXPECT_EQ(sampler_id_from_code(0), SamplerId::kDdrmNl);
  EXPECT_EQ(sampler_id_from_code(2), SamplerId::kExactGmm);
  try {
    sampler_id_from_code(9);
    FAIL();
  } catch (const PscError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownSamplerId);
  }
}

// Variance of one unmeasured coordinate of a zero-mean Gaussian with
// variance lambda after the sampler's recursion, evaluated in closed form
// step by step: x_T = sigma_T e; x_t = c x_{t+1} + eta sigma_t e with
// c = a + sqrt(1 - eta^2) (sigma_t / sigma_{t+1}) (1 - a),
// a = lambda / (lambda + sigma_{t+1}^2); output a_1 x_1.
double predicted_variance(double lambda, const NoiseSchedule& schedule, double eta) {
  const auto& s = schedule.sigmas();
  double v = s[0] * s[0];
  for (std::size_t t = 1; t < s.size(); ++t) {
    const double a = lambda / (lambda + s[t - 1] * s[t - 1]);
    const double c = a + std::sqrt(1.0 - eta * eta) * (s[t] / s[t - 1]) * (1.0 - a);
    v = c * c * v + eta * eta * s[t] * s[t];
  }
  const double a = lambda / (lambda + s.back() * s.back());
  return a * a * v;
}

// Count of |err| > 3 sigma_1 over the trials; Gaussian final-step noise puts
// about 0.27% of coordinates there.
struct Excess {
  int over_three = 0;
  double worst = 0.0;
};

TEST(Ddrm, FullRankPinsEveryCoordinate) {
  const PriorModel prior = kDiag41;
  const SamplerConfig cfg = config_for(prior);
  const OrthonormalRows h(Matrix(2, 2, {0.6, 0.8, 0.8, -0.6}));
  const Vector y{1.0, -0.5};
  const Vector target = h.apply_transposed(y);
  const double s1 = cfg.schedule.smallest();
  Excess e;
  for (std::uint32_t i = 0; i < 100; ++i) {
    RngStream s = derive_stream(1, Domain::kSelect, 0, i);
    const Vector x = ddrm_nl_sample(kDiag41, h, y, cfg, s);
    for (std::size_t j = 0; j < 2; ++j) {
      const double err = std::abs(x[j] - target[j]);
      e.worst = std::max(e.worst, err);
      if (err > 3 * s1) ++e.over_three;
    }
  }
  EXPECT_LE(e.over_three, 3);
  EXPECT_LE(e.worst, 5 * s1);
}

TEST(Ddrm, ConsistentWithMeasurements) {
  const PriorModel prior = kDiag41;
  const SamplerConfig cfg = config_for(prior);
  const OrthonormalRows h(Matrix(1, 2, {0.6, 0.8}));
  const double s1 = cfg.schedule.smallest();
  Excess e;
  for (std::uint32_t i = 0; i < 100; ++i) {
    RngStream s = derive_stream(5, Domain::kRestore, 0, i);
    const Vector x = ddrm_nl_sample(kDiag41, h, Vector{1.3}, cfg, s);
    const double err = std::abs(h.apply(x)[0] - 1.3);
    e.worst = std::max(e.worst, err);
    if (err > 3 * s1) ++e.over_three;
  }
  EXPECT_LE(e.over_three, 2);
  EXPECT_LE(e.worst, 5 * s1);
}

TEST(Ddrm, UnconditionalFollowsVarianceRecursion) {
  const PriorModel prior = kDiag41;
  const SamplerConfig cfg = config_for(prior);
  const auto xs = sample_batch(SamplerId::kDdrmNl, prior, OrthonormalRows(2), Vector{}, 2000, cfg, 3, 0);
  const Moments m = moments(xs);
  for (std::size_t j = 0; j < 2; ++j) {
    const double want = predicted_variance(kDiag41.covariance()(j, j), cfg.schedule, 1.0);
    EXPECT_NEAR(m.var[j], want, 0.1 * want) << j;
    EXPECT_NEAR(m.mean[j], 0.0, 0.15);
  }
}

TEST(Ddrm, FullyStochasticStepHalvesVariance) {
  // With eta = 1 every step restarts from the denoised estimate, which loses
  // Var(x0 | x_t); in the fine-step limit the output variance tends to
  // lambda / 2 rather than lambda.
  const NoiseSchedule fine = NoiseSchedule::geometric(4.0, 4e-3, 2000);
  EXPECT_NEAR(predicted_variance(1.0, fine, 1.0), 0.5, 0.01);
  EXPECT_NEAR(predicted_variance(4.0, fine, 1.0), 2.0, 0.04);
}

TEST(Ddrm, DeterministicStepRecoversMoreVariance) {
  const PriorModel prior = kDiag41;
  SamplerConfig cfg = config_for(prior);
  cfg.eta = 0.0;
  const auto xs = sample_batch(SamplerId::kDdrmNl, prior, OrthonormalRows(2), Vector{}, 2000, cfg, 3, 0);
  const Moments m = moments(xs);
  for (std::size_t j = 0; j < 2; ++j) {
    const double want = predicted_variance(kDiag41.covariance()(j, j), cfg.schedule, 0.0);
    EXPECT_NEAR(m.var[j], want, 0.1 * want) << j;
  }
}

TEST(Ddrm, PosteriorMeanAndRecursionVariance) {
  const PriorModel prior = kDiag41;
  const SamplerConfig cfg = config_for(prior);
  const OrthonormalRows h(Matrix(1, 2, {1, 0}));
  const auto xs = sample_batch(SamplerId::kDdrmNl, prior, h, Vector{2.0}, 2000, cfg, 4, 0);
  const Moments m = moments(xs);
  const PosteriorMoments oracle = gaussian_posterior_moments(kDiag41, h, Vector{2.0});
  EXPECT_NEAR(m.mean[0], oracle.mean[0], 0.15);
  EXPECT_NEAR(m.mean[1], oracle.mean[1], 0.15);
  const double want = predicted_variance(oracle.covariance(1, 1), cfg.schedule, 1.0);
  EXPECT_NEAR(m.var[1], want, 0.1 * want);
  // The measured coordinate only carries the final-step noise.
  EXPECT_LE(m.var[0], 1e-4);
}

TEST(Ddrm, RejectsNonFiniteMeasurement) {
  const PriorModel prior = kDiag41;
  RngStream s = derive_stream(5, Domain::kRestore, 0, 0);
  EXPECT_THROW(ddrm_nl_sample(kDiag41, OrthonormalRows(Matrix(1, 2, {1, 0})), Vector{NAN},
                              config_for(prior), s),
               PscError);
}

TEST(SampleBatch, StreamIsolation) {
  const PriorModel prior = kDiag41;
  const OrthonormalRows h(Matrix(1, 2, {1, 0}));
  const auto one = sample_batch(SamplerId::kDdrmNl, prior, h, Vector{2.0}, 1, config_for(prior), 6, 2);
  const auto four = sample_batch(SamplerId::kDdrmNl, prior, h, Vector{2.0}, 4, config_for(prior), 6, 2);
  EXPECT_EQ(one[0], four[0]);
}

TEST(SampleBatch, ThreadCountDoesNotMatter) {
  const PriorModel prior = kDiag41;
  const OrthonormalRows h(Matrix(1, 2, {0.6, 0.8}));
  ::setenv("PSC_THREADS", "1", 1);
  const auto serial = sample_batch(SamplerId::kDdrmNl, prior, h, Vector{1.0}, 33, config_for(prior), 7, 1);
  ::setenv("PSC_THREADS", "5", 1);
  const auto parallel = sample_batch(SamplerId::kDdrmNl, prior, h, Vector{1.0}, 33, config_for(prior), 7, 1);
  ::unsetenv("PSC_THREADS");
  EXPECT_EQ(serial, parallel);
  for (std::uint32_t i = 0; i < 33; ++i) {
    RngStream s = derive_stream(7, Domain::kSelect, 1, i);
    EXPECT_EQ(ddrm_nl_sample(kDiag41, h, Vector{1.0}, config_for(prior), s), serial[i]);
  }
}

TEST(SampleBatch, ExactAndDdrmAgree) {
  const PriorModel prior = kDiag41;
  const OrthonormalRows h(Matrix(1, 2, {1, 0}));
  const Moments a = moments(sample_batch(SamplerId::kExactGaussian, prior, h, Vector{2.0}, 500,
                                         config_for(prior), 8, 0));
  const Moments b = moments(
      sample_batch(SamplerId::kDdrmNl, prior, h, Vector{2.0}, 500, config_for(prior), 8, 0));
  EXPECT_NEAR(a.mean[0], b.mean[0], 0.2);
  EXPECT_NEAR(a.mean[1], b.mean[1], 0.2);
}

TEST(SampleBatch, ExactGaussianNeedsGaussianPrior) {
  const PriorModel prior = GmmPrior({1.0}, {kDiag41});
  try {
    sample_batch(SamplerId::kExactGaussian, prior, OrthonormalRows(2), Vector{}, 1,
                 config_for(prior), 0, 0);
    FAIL();
  } catch (const PscError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigInvalid);
  }
}

TEST(SampleBatch, ExactGmmOnGaussianPrior) {
  const PriorModel prior = kDiag41;
  const OrthonormalRows h(Matrix(1, 2, {1, 0}));
  const auto a = sample_batch(SamplerId::kExactGaussian, prior, h, Vector{2.0}, 3, config_for(prior), 9, 0);
  const auto b = sample_batch(SamplerId::kExactGmm, prior, h, Vector{2.0}, 3, config_for(prior), 9, 0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(a[i][j], b[i][j], 1e-12);
}
