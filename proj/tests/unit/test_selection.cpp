#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "psc/error.hpp"
#include "psc/prior_config.hpp"
#include "psc/selection.hpp"

using namespace psc;

namespace {

const GaussianPrior kDiag41({0.0, 0.0}, Matrix(2, 2, {4, 0, 0, 1}));

SelectionContext exact_context(const PriorModel& prior, std::size_t s, std::uint64_t seed = 1) {
  SelectionContext ctx;
  ctx.prior = &prior;
  ctx.sampler = SamplerId::kExactGaussian;
  ctx.sampler_config = SamplerConfig{NoiseSchedule({1.0, 0.1}), 1.0, 1.0};
  ctx.seed = seed;
  ctx.samples = s;
  return ctx;
}

double largest_principal_angle(const OrthonormalRows& a, const OrthonormalRows& b) {
  const Matrix m = multiply_abt(a.matrix(), b.matrix());
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  const double smallest = Eigen::JacobiSVD<Eigen::MatrixXd>(e).singularValues().minCoeff();
  return std::acos(std::min(1.0, smallest)) * 180.0 / std::numbers::pi;
}

}  // namespace

TEST(SampleCount, Default) {
  EXPECT_EQ(default_sample_count(1), 3u);
  EXPECT_EQ(default_sample_count(4), 6u);
  EXPECT_EQ(default_sample_count(12), 16u);
  EXPECT_EQ(default_sample_count(30), 40u);
}

TEST(SelectNewRows, IdenticalSamplesFallBackToCanonical) {
  const PriorModel prior = GaussianPrior({0.5, -1.0, 2.0}, Matrix(3, 3, {1, 0, 0, 0, 0, 0, 0, 0, 0}));
  const OrthonormalRows h(Matrix(1, 3, {1, 0, 0}));
  const SelectionContext ctx = exact_context(prior, 8);
  const OrthonormalRows a = select_new_rows(h, Vector{0.3}, 1, ctx);
  EXPECT_EQ(a.matrix(), Matrix(1, 3, {0, 1, 0}));
  EXPECT_EQ(a, select_new_rows(h, Vector{0.3}, 1, ctx));
}

TEST(SelectNewRows, PrincipalDirectionOfPrior) {
  const PriorModel prior = kDiag41;
  const OrthonormalRows row = select_new_rows(OrthonormalRows(2), Vector{}, 1, exact_context(prior, 256));
  EXPECT_GE(std::abs(row.row(0)[0]), 0.99);
}

TEST(SelectNewRows, AfterMeasuringFirstCoordinate) {
  const PriorModel prior = kDiag41;
  const OrthonormalRows h(Matrix(1, 2, {1, 0}));
  const OrthonormalRows row = select_new_rows(h, Vector{1.0}, 1, exact_context(prior, 256));
  EXPECT_GE(std::abs(row.row(0)[1]), 0.99);
}

TEST(SelectNewRows, NeedsEnoughSamples) {
  const PriorModel prior = kDiag41;
  try {
    select_new_rows(OrthonormalRows(2), Vector{}, 1, exact_context(prior, 1));
    FAIL();
  } catch (const PscError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigInvalid);
  }
}

TEST(SelectNewRows, DimensionExhausted) {
  const PriorModel prior = kDiag41;
  try {
    select_new_rows(OrthonormalRows(Matrix::identity(2)), Vector{0, 0}, 1, exact_context(prior, 4));
    FAIL();
  } catch (const PscError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionExhausted);
  }
}

TEST(SelectNewRows, SampleModeNearExactSubspace) {
  const PriorModel prior = load_prior_config(PSC_FIXTURE_DIR "/gaussian16.prior");
  const auto& g = std::get<GaussianPrior>(prior);
  const OrthonormalRows exact = select_new_rows_exact(g, OrthonormalRows(16), 4);
  const OrthonormalRows sampled = select_new_rows(OrthonormalRows(16), Vector{}, 4, exact_context(prior, 64));
  EXPECT_LE(largest_principal_angle(exact, sampled), 15.0);
}

TEST(SelectExact, DiagonalOrder) {
  const OrthonormalRows rows = select_new_rows_exact(kDiag41, OrthonormalRows(2), 2);
  EXPECT_EQ(rows.matrix(), Matrix(2, 2, {1, 0, 0, 1}));
}

TEST(SelectExact, Deflation) {
  const OrthonormalRows rows = select_new_rows_exact(kDiag41, OrthonormalRows(Matrix(1, 2, {1, 0})), 1);
  EXPECT_NEAR(rows.row(0)[1], 1.0, 1e-12);
  EXPECT_NEAR(rows.row(0)[0], 0.0, 1e-12);
}

TEST(SelectExact, IteratingReproducesEigenbasis) {
  const PriorModel prior = load_prior_config(PSC_FIXTURE_DIR "/gaussian16.prior");
  const auto& g = std::get<GaussianPrior>(prior);
  OrthonormalRows h(16);
  for (int i = 0; i < 16; ++i) h.append(select_new_rows_exact(g, h, 1));
  const EigenDecomposition eig = sym_eig_desc(g.covariance());
  for (std::size_t i = 0; i < 16; ++i)
    EXPECT_GE(std::abs(dot(h.row(i), eig.vectors.row(i))), 0.999) << "row " << i;
}
