#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "crbkit/info_metrics.hpp"

using namespace crbkit;

namespace {

constexpr double kHalfLog2PiE = 1.4189385332046727;  // 0.5 ln(2 pi e)

NoiseModel unit_laplace(Index n = 1) { return make_shaped(BaseFamily::laplace(), MatrixXd::Identity(n, n)); }

MatrixXd mat2(double a, double b, double c, double d) {
  MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST(FimMonteCarlo, UnitGaussian) {
  const FimEstimate f = fim_monte_carlo(make_gaussian(MatrixXd::Identity(2, 2)), 1, 100000);
  EXPECT_EQ(f.method, FimMethod::monte_carlo);
  EXPECT_EQ(f.sample_count, 100000u);
  const MatrixXd err = (f.matrix - MatrixXd::Identity(2, 2)).cwiseAbs();
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) EXPECT_LE(err(i, j), 3.0 * f.std_error(i, j));
}

TEST(FimMonteCarlo, IidLaplace) {
  const FimEstimate f = fim_monte_carlo(unit_laplace(2), 2, 100000);
  // Laplace score is +-sqrt2 so diagonal entries are exactly 2 except at v = 0.
  EXPECT_NEAR(f.matrix(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(f.matrix(1, 1), 2.0, 1e-12);
  EXPECT_LE(std::abs(f.matrix(0, 1)), 4.0 * f.std_error(0, 1));
}

TEST(FimMonteCarlo, CorrelatedGaussianInverse) {
  const MatrixXd sigma = mat2(2, 1, 1, 2);
  const FimEstimate f = fim_monte_carlo(make_gaussian(sigma), 3, 100000);
  const MatrixXd expected = mat2(2, -1, -1, 2) / 3.0;
  EXPECT_LE((f.matrix - expected).norm(), 3.0 * f.aggregate_stderr());
}

TEST(FimMonteCarlo, SymmetricPsd) {
  const auto mix = MixtureComponents::standardized({0.5, 0.5}, {-1.0, 1.0}, {0.25, 0.25});
  const FimEstimate f = fim_monte_carlo(make_shaped(BaseFamily::gauss_mixture(mix), mat2(1, 0, 0.5, 1)), 4, 20000);
  EXPECT_EQ(f.matrix, MatrixXd(f.matrix.transpose()));
  EXPECT_GE(eigmin(f.matrix), -4.0 * f.std_error.maxCoeff());
  EXPECT_GE(f.matrix.diagonal().minCoeff(), 0.0);
}

TEST(FimMonteCarlo, GaussianConvergesToAnalytic) {
  MatrixXd sigma(3, 3);
  sigma << 2.0, 0.5, 0.1, 0.5, 1.0, -0.2, 0.1, -0.2, 0.7;
  const NoiseModel g = make_gaussian(sigma);
  const FimEstimate mc = fim_monte_carlo(g, 5, 100000);
  const FimEstimate an = *fim_analytic(g);
  EXPECT_LE((mc.matrix - an.matrix).norm(), 3.0 * mc.aggregate_stderr());
}

TEST(FimMonteCarlo, StudentMatchesClosedForm) {
  const NoiseModel t = make_shaped(BaseFamily::student_t(5.0), mat2(1, 0, 0.5, 1));
  const FimEstimate mc = fim_monte_carlo(t, 6, 200000);
  const FimEstimate an = *fim_analytic(t);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) EXPECT_LE(std::abs(mc.matrix(i, j) - an.matrix(i, j)), 4.0 * mc.std_error(i, j));
}

TEST(FimMonteCarlo, NonFiniteScoreNamesDraw) {
  const NoiseModel g = make_gaussian(MatrixXd::Identity(1, 1));
  SampleBatch b = sample(g, 1, 2000);
  b.data(1234, 0) = std::numeric_limits<double>::infinity();
  try {
    fim_monte_carlo(g, b);
    FAIL() << "expected NonFiniteScore";
  } catch (const NonFiniteScore& e) {
    EXPECT_EQ(e.draw(), 1234u);
  }
}

TEST(FimMonteCarlo, RejectsSmallCount) {
  EXPECT_THROW(fim_monte_carlo(unit_laplace(), 1, 999), std::invalid_argument);
}

TEST(FimAnalytic, Examples) {
  MatrixXd sigma = MatrixXd::Zero(2, 2);
  sigma.diagonal() << 1.0, 4.0;
  const auto g = fim_analytic(make_gaussian(sigma));
  ASSERT_TRUE(g.has_value());
  EXPECT_NEAR(g->matrix(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(g->matrix(1, 1), 0.25, 1e-15);
  EXPECT_EQ(g->std_error, MatrixXd::Zero(2, 2));
  EXPECT_EQ(g->method, FimMethod::analytic);

  EXPECT_NEAR(fim_analytic(unit_laplace())->matrix(0, 0), 2.0, 1e-14);

  const double nu = 5.0, s2 = (nu - 2.0) / nu;
  const auto t = fim_analytic(make_shaped(BaseFamily::student_t(nu), MatrixXd::Identity(1, 1)));
  EXPECT_NEAR(t->matrix(0, 0), (nu + 1.0) / ((nu + 3.0) * s2), 1e-14);

  const auto mix = MixtureComponents::standardized({0.5, 0.5}, {-1.0, 1.0}, {0.25, 0.25});
  EXPECT_FALSE(fim_analytic(make_shaped(BaseFamily::gauss_mixture(mix), MatrixXd::Identity(1, 1))).has_value());
}

TEST(FimAnalytic, ShapingPropagation) {
  const MatrixXd a = mat2(2, 0, 1, 1);
  const auto j = fim_analytic(make_shaped(BaseFamily::laplace(), a));
  const MatrixXd ainv = a.inverse();
  EXPECT_LE((j->matrix - 2.0 * ainv.transpose() * ainv).norm(), 1e-14);
}

TEST(Entropy, ClosedForms) {
  EXPECT_NEAR(entropy_closed_form(make_gaussian(MatrixXd::Identity(1, 1)))->value, 1.41894, 1e-5);
  EXPECT_NEAR(entropy_closed_form(unit_laplace())->value, 1.0 + std::log(std::numbers::sqrt2), 1e-14);
  EXPECT_NEAR(entropy_closed_form(unit_laplace())->value, 1.34657, 1e-5);
  const auto mix = MixtureComponents::standardized({0.5, 0.5}, {-1.0, 1.0}, {0.25, 0.25});
  EXPECT_FALSE(entropy_closed_form(make_shaped(BaseFamily::gauss_mixture(mix), MatrixXd::Identity(1, 1))).has_value());
}

TEST(Entropy, ShapingRuleExact) {
  const MatrixXd a = mat2(2, 0, 1, 3);
  for (const BaseFamily& b : {BaseFamily::laplace(), BaseFamily::student_t(5.0)}) {
    const double base = entropy_closed_form(make_shaped(b, MatrixXd::Identity(2, 2)))->value;
    const double shaped = entropy_closed_form(make_shaped(b, a))->value;
    EXPECT_NEAR(shaped, base + std::log(6.0), 1e-13);
  }
  const double hg = entropy_closed_form(make_gaussian(mat2(2, 1, 1, 2)))->value;
  EXPECT_NEAR(hg, 2.0 * kHalfLog2PiE + 0.5 * std::log(3.0), 1e-13);
}

TEST(Entropy, KnnOnUnitGaussian) {
  const EntropyEstimate h = entropy(make_gaussian(MatrixXd::Identity(1, 1)), 1, 100000, EntropyMethod::knn);
  EXPECT_EQ(h.method, EntropyMethod::knn);
  EXPECT_GT(h.std_error, 0.0);
  EXPECT_NEAR(h.value, kHalfLog2PiE, 0.02);
}

TEST(Entropy, KnnAgreesWithClosedFormUpToDim3) {
  MatrixXd sigma(3, 3);
  sigma << 1.0, 0.3, 0.0, 0.3, 2.0, 0.4, 0.0, 0.4, 1.5;
  const std::vector<NoiseModel> models = {make_gaussian(sigma), unit_laplace(1),
                                          make_shaped(BaseFamily::laplace(), mat2(1, 0, 0.5, 1)),
                                          make_gaussian(mat2(2, 1, 1, 2))};
  for (const NoiseModel& m : models) {
    const double exact = entropy_closed_form(m)->value;
    const double knn = entropy(m, 11, 100000, EntropyMethod::knn).value;
    EXPECT_LE(std::abs(knn - exact), 0.03) << m.id();
  }
}

TEST(Entropy, DefaultsToClosedForm) {
  const EntropyEstimate h = entropy(unit_laplace(), 1, 1000);
  EXPECT_EQ(h.method, EntropyMethod::closed_form);
  EXPECT_EQ(h.std_error, 0.0);
}

TEST(Entropy, DegenerateBatchRejected) {
  RowMatrix p = RowMatrix::Zero(2000, 1);
  for (Index i = 0; i < 1000; ++i) p(i, 0) = static_cast<double>(i);
  EXPECT_THROW(entropy_knn(p), DegenerateBatch);
}

TEST(EntropyPower, Examples) {
  EXPECT_NEAR(entropy_power(kHalfLog2PiE, 1), 1.0, 1e-14);
  EXPECT_NEAR(entropy_power(entropy_closed_form(unit_laplace())->value, 1), 0.86526, 1e-5);
  EXPECT_NEAR(entropy_power(*entropy_closed_form(make_gaussian(MatrixXd::Identity(2, 2))), 2), 1.0, 1e-14);
}

TEST(MutualInfo, GaussianClosedForm) {
  const MiEstimate mi = mutual_info_additive(make_gaussian(MatrixXd::Identity(1, 1)), MatrixXd::Identity(1, 1), 1, 10);
  EXPECT_NEAR(mi.value, 0.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(gaussian_additive_mi(mat2(2, 1, 1, 2), MatrixXd::Identity(2, 2)),
              0.5 * std::log(8.0 / 3.0), 1e-14);
}

TEST(MutualInfo, ZeroNoiseIsZero) {
  const MiEstimate mi = mutual_info_additive(unit_laplace(), MatrixXd::Zero(1, 1), 1, 100000);
  EXPECT_EQ(mi.value, 0.0);
  EXPECT_EQ(mi.std_error, 0.0);
}

TEST(MutualInfo, NegativeCovarianceRejected) {
  EXPECT_THROW(mutual_info_additive(unit_laplace(), -MatrixXd::Identity(1, 1), 1, 100000), std::invalid_argument);
}

TEST(MutualInfo, LaplaceAboveGaussian) {
  const MiEstimate mi = mutual_info_additive(unit_laplace(), MatrixXd::Identity(1, 1), 2, 100000);
  EXPECT_GT(mi.std_error, 0.0);
  EXPECT_GE(mi.value, 0.5 * std::log(2.0) - 3.0 * mi.std_error);
}

TEST(MutualInfo, KnnOnGaussianMatchesClosedForm) {
  const NoiseModel g = make_gaussian(MatrixXd::Identity(1, 1));
  const MiEstimate knn = mutual_info_additive(g, MatrixXd::Identity(1, 1) * 0.5, 3, 100000, {.force_knn = true});
  EXPECT_LE(std::abs(knn.value - 0.5 * std::log(1.5)), 4.0 * knn.std_error);
}

TEST(MutualInfo, MonotoneInNoiseVariance) {
  const NoiseModel l = unit_laplace();
  double prev = 0.0, prev_se = 0.0;
  for (double s : {0.1, 0.5, 1.0, 2.0}) {
    const MiEstimate mi = mutual_info_additive(l, MatrixXd::Identity(1, 1) * s, 4, 100000);
    EXPECT_GE(mi.value, -4.0 * mi.std_error);
    EXPECT_GE(mi.value, prev - 3.0 * std::hypot(mi.std_error, prev_se)) << "sigma_z^2 = " << s;
    prev = mi.value;
    prev_se = mi.std_error;
  }
}

TEST(MutualInfo, KnnPathNeedsCount) {
  EXPECT_THROW(mutual_info_additive(unit_laplace(), MatrixXd::Identity(1, 1), 1, 5000), std::invalid_argument);
}

TEST(AddGaussian, CommonRandomNumbers) {
  const SampleBatch w = sample(unit_laplace(), 1, 100);
  const RowMatrix a = add_gaussian(w.data, MatrixXd::Identity(1, 1), 9);
  const RowMatrix b = add_gaussian(w.data, MatrixXd::Identity(1, 1) * 4.0, 9);
  EXPECT_LE(((b - w.data) - 2.0 * (a - w.data)).cwiseAbs().maxCoeff(), 1e-14);
}
