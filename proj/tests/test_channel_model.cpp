#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "crbkit/channel_model.hpp"

using namespace crbkit;

namespace {

const cplx I1(0.0, 1.0);

TrainingSequence seq_of(std::initializer_list<cplx> v, Index n, Index m) {
  VectorXcd s(static_cast<Index>(v.size()));
  Index k = 0;
  for (cplx x : v) s(k++) = x;
  return TrainingSequence::make(s, n, m);
}

TrainingSequence ones(Index n, Index m) { return TrainingSequence::make(VectorXcd::Ones(n + m - 1), n, m); }

VectorXcd taps(std::initializer_list<cplx> v) {
  VectorXcd h(static_cast<Index>(v.size()));
  Index k = 0;
  for (cplx x : v) h(k++) = x;
  return h;
}

NoiseModel white_circular(Index n, double variance = 1.0) {
  return make_gaussian(circular_real_covariance(MatrixXcd::Identity(n, n) * variance));
}

struct RandomSpecs {
  std::mt19937_64 rng{2024};
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud{-std::numbers::pi, std::numbers::pi};

  VectorXcd cvec(Index n) {
    VectorXcd v(n);
    for (Index k = 0; k < n; ++k) v(k) = cplx(nd(rng), nd(rng));
    return v;
  }

  MatrixXcd hermitian_pd(Index n) {
    MatrixXcd a(n, n);
    for (Index i = 0; i < n; ++i) a.col(i) = cvec(n);
    return a * a.adjoint() / static_cast<double>(n) + MatrixXcd::Identity(n, n) * 0.5;
  }

  ChannelSpec make(Index n, Index m, bool colored) {
    const TrainingSequence s = TrainingSequence::make(cvec(n + m - 1), n, m);
    const MatrixXcd c = colored ? hermitian_pd(n) : MatrixXcd(MatrixXcd::Identity(n, n));
    return ChannelSpec(s, {ud(rng), cvec(m)}, make_gaussian(circular_real_covariance(c)));
  }
};

// Central-difference Jacobian of signal_mean; rows ordered as [omega, h_R, h_I].
MatrixXcd numeric_jacobian(const ChannelSpec& spec, double step) {
  const Index m = spec.m();
  MatrixXcd g(2 * m + 1, spec.n());
  auto eval = [&](double d_omega, Index tap, cplx d_h) {
    ChannelSpec s = spec;
    s.params.omega += d_omega;
    if (tap >= 0) s.params.h(tap) += d_h;
    return VectorXcd(signal_mean(s));
  };
  g.row(0) = ((eval(step, -1, 0.0) - eval(-step, -1, 0.0)) / (2.0 * step)).transpose();
  for (Index k = 0; k < m; ++k) {
    g.row(1 + k) = ((eval(0.0, k, step) - eval(0.0, k, -step)) / (2.0 * step)).transpose();
    g.row(1 + m + k) = ((eval(0.0, k, I1 * step) - eval(0.0, k, -I1 * step)) / (2.0 * step)).transpose();
  }
  return g;
}

}  // namespace

TEST(TrainingSequence, Validation) {
  EXPECT_THROW(TrainingSequence::make(VectorXcd::Ones(3), 3, 2), std::invalid_argument);
  EXPECT_THROW(TrainingSequence::make(VectorXcd::Zero(4), 3, 2), std::invalid_argument);
  VectorXcd bad = VectorXcd::Ones(4);
  bad(1) = cplx(std::nan(""), 0.0);
  EXPECT_THROW(TrainingSequence::make(bad, 3, 2), std::invalid_argument);
  EXPECT_DOUBLE_EQ(ones(3, 2).power(), 1.0);
}

TEST(Toeplitz, AllOnes) {
  const MatrixXcd s = build_toeplitz_S(ones(3, 2));
  EXPECT_EQ(s, MatrixXcd::Ones(3, 2));
}

TEST(Toeplitz, UnitImpulse) {
  const MatrixXcd s = build_toeplitz_S(seq_of({0.0, 1.0, 0.0, 0.0}, 3, 2));
  EXPECT_EQ(VectorXcd(s.col(0)), taps({1.0, 0.0, 0.0}));
  EXPECT_EQ(VectorXcd(s.col(1)), taps({0.0, 1.0, 0.0}));
}

TEST(Toeplitz, IndexBookkeeping) {
  const TrainingSequence seq = seq_of({4.0, 1.0, 2.0, 3.0}, 3, 2);
  const MatrixXcd s = build_toeplitz_S(seq);
  MatrixXcd expected(3, 2);
  expected << 1.0, 4.0, 2.0, 1.0, 3.0, 2.0;
  EXPECT_EQ(s, expected);
  for (Index j = 0; j < 3; ++j)
    for (Index k = 0; k < 2; ++k) EXPECT_EQ(s(j, k), seq.samples(j - k + 1));
}

TEST(PhaseMatrix, Examples) {
  EXPECT_EQ(build_phase_matrix(0.0, 3), MatrixXcd::Identity(3, 3));
  const MatrixXcd q = build_phase_matrix(std::numbers::pi / 2.0, 4);
  const cplx expected[] = {1.0, I1, -1.0, -I1};
  for (Index k = 0; k < 4; ++k) EXPECT_LE(std::abs(q(k, k) - expected[k]), 1e-15);
  EXPECT_EQ(q(0, 1), cplx(0.0));
  const MatrixXcd r = build_phase_matrix(1.2345, 9);
  for (Index k = 0; k < 9; ++k) EXPECT_NEAR(std::abs(r(k, k)), 1.0, 1e-15);
}

TEST(SignalMean, Examples) {
  const TrainingSequence seq = seq_of({0.5, 1.0, -2.0, I1}, 3, 2);
  const ChannelSpec a(seq, {0.0, taps({1.0, 0.0})}, white_circular(3));
  EXPECT_EQ(signal_mean(a), VectorXcd(build_toeplitz_S(seq).col(0)));

  const ChannelSpec b(ones(2, 1), {0.0, taps({1.0})}, white_circular(2));
  EXPECT_EQ(signal_mean(b), taps({1.0, 1.0}));

  RandomSpecs rs;
  ChannelSpec c = rs.make(9, 3, false);
  const double norm = signal_mean(c).norm();
  for (double w : {-2.0, 0.1, 3.0}) {
    c.params.omega = w;
    EXPECT_NEAR(signal_mean(c).norm(), norm, 1e-12);
    EXPECT_LE((signal_mean(c) - build_phase_matrix(w, 9) * build_toeplitz_S(c.seq) * c.params.h).norm(), 1e-12);
  }
}

TEST(ChannelSpec, RejectsMismatch) {
  EXPECT_THROW(ChannelSpec(ones(3, 2), {0.0, taps({1.0})}, white_circular(3)), std::invalid_argument);
  EXPECT_THROW(ChannelSpec(ones(3, 1), {0.0, taps({1.0})}, white_circular(2)), std::invalid_argument);
}

TEST(Jacobian, HandExample) {
  const ChannelSpec spec(ones(2, 1), {0.0, taps({1.0})}, white_circular(2));
  const MatrixXcd g = jacobian(spec);
  MatrixXcd expected(3, 2);
  expected << 0.0, I1, 1.0, 1.0, I1, I1;
  EXPECT_LE((g - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((g - numeric_jacobian(spec, 1e-6)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Jacobian, ZeroTapsKillOmegaRow) {
  RandomSpecs rs;
  ChannelSpec spec = rs.make(6, 2, false);
  spec.params.h.setZero();
  EXPECT_EQ(VectorXcd(jacobian(spec).row(0).transpose()), VectorXcd::Zero(6));
}

TEST(Jacobian, FiniteDifferenceAtRandomSpecs) {
  RandomSpecs rs;
  for (int i = 0; i < 20; ++i) {
    const ChannelSpec spec = rs.make(2 + i % 14, 1 + i % 3, false);
    EXPECT_LE((jacobian(spec) - numeric_jacobian(spec, 1e-6)).cwiseAbs().maxCoeff(), 1e-6) << "spec " << i;
  }
}

TEST(FimTheta, HandExample) {
  const ChannelSpec spec(ones(2, 1), {0.0, taps({1.0})}, white_circular(2));
  const MatrixXcd j = circular_gaussian_fim(MatrixXcd::Identity(2, 2));
  const CrlbReport r = fim_theta(spec, j);
  MatrixXd shape(3, 3);
  shape << 1, 0, 1, 0, 2, 0, 1, 0, 2;
  EXPECT_EQ(r.method, CrlbMethod::paper_complex_form);
  EXPECT_LE((r.fim - kComplexFimScale * shape).cwiseAbs().maxCoeff(), 1e-12);
  ASSERT_FALSE(r.singular());
  const VectorXd ratio = r.crlb * kComplexFimScale;
  EXPECT_NEAR(ratio(0), 2.0, 1e-9);
  EXPECT_NEAR(ratio(1), 0.5, 1e-9);
  EXPECT_NEAR(ratio(2), 1.0, 1e-9);
}

TEST(FimTheta, ZeroTapsSingular) {
  ChannelSpec spec(ones(4, 2), {0.3, taps({0.0, 0.0})}, white_circular(4));
  const CrlbReport r = fim_theta(spec, MatrixXcd::Identity(4, 4));
  EXPECT_TRUE(r.singular());
  ASSERT_GE(r.nullspace.cols(), 1);
  // omega direction must lie in the reported nullspace.
  VectorXd e0 = VectorXd::Unit(5, 0);
  const MatrixXd q = r.nullspace;
  EXPECT_NEAR((q * (q.transpose() * e0)).norm(), 1.0, 1e-9);
}

TEST(FimTheta, ComplexFormMatchesRealCompositeForCircularNoise) {
  RandomSpecs rs;
  for (int i = 0; i < 10; ++i) {
    const ChannelSpec spec = rs.make(3 + i, 1 + i % 3, true);
    const MatrixXd sigma = spec.noise.covariance();
    const MatrixXd real_form = fim_theta_real(spec, sigma.inverse()).fim;
    const MatrixXd complex_form = fim_theta(spec, circular_gaussian_fim(complex_covariance(sigma))).fim;
    EXPECT_LE((real_form - complex_form).norm(), 1e-9 * real_form.norm()) << "spec " << i;
  }
}

TEST(FimOracle, CalibratesScaleTwo) {
  RandomSpecs rs;
  for (int i = 0; i < 20; ++i) {
    const Index n = 2 + (i * 7) % 15, m = 1 + i % 3;
    const ChannelSpec spec = rs.make(std::max(n, m), m, i % 2 == 1);
    const MatrixXd j = fim_theta(spec, circular_gaussian_fim(complex_covariance(spec.noise.covariance()))).fim;
    const CrlbReport oracle = fim_theta_oracle(spec, 100 + static_cast<std::uint64_t>(i), 20000);
    const double rel = (oracle.fim - j).norm() / j.norm();
    const double rel_se = oracle.aggregate_stderr() / j.norm();
    EXPECT_LE(rel, 3.0 * rel_se) << "spec " << i;
  }
  const ScaleCalibration c = calibrate_complex_scale(rs.make(8, 2, true), 7, 20000);
  EXPECT_EQ(c.scale, 2.0);
  EXPECT_NEAR(c.fitted, 2.0, 4.0 * c.fitted_std_error);
}

TEST(FimOracle, StderrShrinksWithCount) {
  RandomSpecs rs;
  const ChannelSpec spec = rs.make(6, 2, false);
  const double small = fim_theta_oracle(spec, 1, 1000).aggregate_stderr();
  const double large = fim_theta_oracle(spec, 1, 100000).aggregate_stderr();
  EXPECT_NEAR(small / large, 10.0, 1.5);
}

TEST(FimOracle, LaplaceDominatesGaussian) {
  RandomSpecs rs;
  const ChannelSpec g = rs.make(8, 2, true);
  const MatrixXd sigma = g.noise.covariance();
  const ChannelSpec l(g.seq, g.params, make_shaped(BaseFamily::laplace(), sigma.llt().matrixL().toDenseMatrix()));
  const CrlbReport oracle = fim_theta_oracle(l, 3, 100000);
  const CrlbReport gauss = fim_theta_real(g, sigma.inverse());
  EXPECT_GE(eigmin(oracle.fim - gauss.fim), -4.0 * oracle.aggregate_stderr());
  for (Index k = 0; k < gauss.crlb.size(); ++k) EXPECT_GE(gauss.crlb(k), oracle.crlb(k) * (1.0 - 0.05)) << k;
}

TEST(FimExpected, PointMassEqualsDeterministic) {
  RandomSpecs rs;
  const ChannelSpec spec = rs.make(7, 2, true);
  const MatrixXd j = spec.noise.covariance().inverse();
  const CrlbReport e = fim_theta_expected(SequenceDistribution::point(spec.seq), spec, j, 1, 1);
  EXPECT_EQ(e.fim, fim_theta_real(spec, j).fim);
}

TEST(FimExpected, RandomBinaryAverage) {
  RandomSpecs rs;
  const ChannelSpec spec = rs.make(8, 2, false);
  const MatrixXd j = spec.noise.covariance().inverse();
  const CrlbReport e = fim_theta_expected(SequenceDistribution::random_binary(8, 2), spec, j, 1000, 5);
  EXPECT_EQ(e.fim, MatrixXd(e.fim.transpose()));
  EXPECT_GT(e.std_error.maxCoeff(), 0.0);
  EXPECT_GE(eigmin(e.fim), -1e-12);
  EXPECT_EQ(e.sample_count, 1000u);
}

TEST(LambdaMin, Examples) {
  MatrixXd j = MatrixXd::Zero(2, 2);
  j.diagonal() << 1.0, 0.25;
  EXPECT_DOUBLE_EQ(lambda_min_bound(j).lambda_min, 0.25);

  RandomSpecs rs;
  const ChannelSpec spec = rs.make(5, 2, false);
  const LambdaMinBound unit = lambda_min_bound(MatrixXd(MatrixXd::Identity(10, 10)));
  const MatrixXcd g = jacobian(spec);
  EXPECT_LE((unit.fim(spec).fim - MatrixXd((g * g.adjoint()).real())).norm(), 1e-12);
}

TEST(LambdaMin, BoundIsDominated) {
  RandomSpecs rs;
  for (int i = 0; i < 10; ++i) {
    const ChannelSpec spec = rs.make(4 + i, 1 + i % 3, true);
    const MatrixXd jr = spec.noise.covariance().inverse();
    const MatrixXd full = fim_theta_real(spec, jr).fim;
    EXPECT_GE(eigmin(full - lambda_min_bound(jr).fim(spec).fim), -1e-9 * full.norm());
    const MatrixXcd jc = circular_gaussian_fim(complex_covariance(spec.noise.covariance()));
    const MatrixXd cf = fim_theta(spec, jc).fim;
    EXPECT_GE(eigmin(cf - lambda_min_bound(jc).fim(spec).fim), -1e-9 * cf.norm());
  }
}

TEST(Whiten, AlreadyWhiteUnchanged) {
  RandomSpecs rs;
  const ChannelSpec c = rs.make(5, 2, false);
  const ChannelSpec spec(c.seq, c.params, make_gaussian(MatrixXd::Identity(10, 10)));
  const ChannelSpec w = whiten(spec);
  ASSERT_TRUE(w.transform.has_value());
  EXPECT_LE((*w.transform - MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((w.noise.covariance() - spec.noise.covariance()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Whiten, CrlbInvariant) {
  RandomSpecs rs;
  for (int i = 0; i < 5; ++i) {
    const ChannelSpec spec = rs.make(6 + i, 1 + i % 3, true);
    const ChannelSpec w = whiten(spec);
    const MatrixXd& t = *w.transform;
    EXPECT_LE((t * spec.noise.covariance() * t.transpose() - MatrixXd::Identity(t.rows(), t.cols())).cwiseAbs().maxCoeff(),
              1e-12);
    EXPECT_LE((w.noise.covariance() - MatrixXd::Identity(t.rows(), t.cols())).cwiseAbs().maxCoeff(), 1e-12);
    const VectorXd before = fim_theta_real(spec, spec.noise.covariance().inverse()).crlb;
    const VectorXd after = fim_theta_real(w, MatrixXd::Identity(t.rows(), t.cols())).crlb;
    EXPECT_LE(((after - before).array() / before.array()).abs().maxCoeff(), 1e-9);
  }
}

TEST(Whiten, RefusesNonGaussian) {
  const ChannelSpec spec(ones(3, 1), {0.0, taps({1.0})}, make_shaped(BaseFamily::laplace(), MatrixXd::Identity(6, 6)));
  EXPECT_THROW(whiten(spec), std::invalid_argument);
}

TEST(Covariance, CircularRoundTrip) {
  RandomSpecs rs;
  const MatrixXcd c = rs.hermitian_pd(4);
  const MatrixXd s = circular_real_covariance(c);
  EXPECT_TRUE(is_circular(s));
  EXPECT_LE((complex_covariance(s) - c).cwiseAbs().maxCoeff(), 1e-14);
  MatrixXd noncirc = MatrixXd::Identity(8, 8);
  noncirc(0, 0) = 2.0;
  EXPECT_FALSE(is_circular(noncirc));
}

TEST(FinalizeFim, ConditionAndCrlb) {
  MatrixXd f = MatrixXd::Zero(2, 2);
  f.diagonal() << 4.0, 0.5;
  const CrlbReport r = finalize_fim(f, MatrixXd::Zero(2, 2), CrlbMethod::real_composite);
  EXPECT_DOUBLE_EQ(r.condition_number, 8.0);
  EXPECT_DOUBLE_EQ(r.crlb(0), 0.25);
  EXPECT_DOUBLE_EQ(r.crlb(1), 2.0);
  EXPECT_EQ(r.nullspace.cols(), 0);
}
