#include "crbkit/channel_model.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "crbkit/kernels.hpp"
#include "crbkit/rng.hpp"

namespace crbkit {

TrainingSequence TrainingSequence::make(VectorXcd samples, Index n, Index m) {
  if (m < 1 || n < 1) throw std::invalid_argument("TrainingSequence: n and m must be positive");
  if (samples.size() != n + m - 1)
    throw std::invalid_argument("TrainingSequence: expected " + std::to_string(n + m - 1) + " samples (n + m - 1), got " +
                                std::to_string(samples.size()));
  if (!samples.allFinite()) throw std::invalid_argument("TrainingSequence: non-finite sample");
  TrainingSequence s{std::move(samples), n, m};
  if (!(s.power() > 0.0)) throw std::invalid_argument("TrainingSequence: zero power");
  return s;
}

ChannelSpec::ChannelSpec(TrainingSequence s, ChannelParams p, NoiseModel w, std::optional<MatrixXd> t)
    : seq(std::move(s)), params(std::move(p)), noise(std::move(w)), transform(std::move(t)) {
  if (params.h.size() != seq.m)
    throw std::invalid_argument("ChannelSpec: h has " + std::to_string(params.h.size()) + " taps, sequence has m = " +
                                std::to_string(seq.m));
  if (noise.dim() != 2 * seq.n)
    throw std::invalid_argument("ChannelSpec: noise dimension " + std::to_string(noise.dim()) + " != 2n = " +
                                std::to_string(2 * seq.n));
  if (transform && (transform->rows() != 2 * seq.n || transform->cols() != 2 * seq.n))
    throw std::invalid_argument("ChannelSpec: transform must be 2n x 2n");
}

std::string to_string(CrlbMethod m) {
  switch (m) {
    case CrlbMethod::paper_complex_form: return "paper_complex_form";
    case CrlbMethod::real_composite: return "real_composite";
    case CrlbMethod::lambda_min_bound: return "lambda_min_bound";
  }
  return "?";
}

CrlbReport finalize_fim(MatrixXd fim, MatrixXd std_error, CrlbMethod method, std::size_t count) {
  CrlbReport r;
  r.fim = symmetrize(fim);
  r.std_error = std::move(std_error);
  r.method = method;
  r.sample_count = count;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(r.fim);
  const VectorXd& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  const double thr = 1e-12 * top;
  Index null = 0;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev(i) <= thr) ++null;
  if (null > 0 || top == 0.0) {
    r.nullspace = es.eigenvectors().leftCols(std::max<Index>(null, 1));
    r.condition_number = std::numeric_limits<double>::infinity();
    return r;
  }
  r.condition_number = ev(ev.size() - 1) / ev(0);
  r.crlb = r.fim.llt().solve(MatrixXd::Identity(r.fim.rows(), r.fim.cols())).diagonal();
  return r;
}

MatrixXcd build_toeplitz_S(const TrainingSequence& seq) {
  if (seq.samples.size() != seq.n + seq.m - 1) throw std::invalid_argument("build_toeplitz_S: length mismatch");
  MatrixXcd s(seq.n, seq.m);
  for (Index j = 0; j < seq.n; ++j)
    for (Index k = 0; k < seq.m; ++k) s(j, k) = seq.at(j - k);
  return s;
}

MatrixXcd build_phase_matrix(double omega, Index n) {
  MatrixXcd x = MatrixXcd::Zero(n, n);
  for (Index k = 0; k < n; ++k) x(k, k) = std::polar(1.0, omega * static_cast<double>(k));
  return x;
}

namespace {

VectorXcd phases(double omega, Index n) {
  VectorXcd p(n);
  for (Index k = 0; k < n; ++k) p(k) = std::polar(1.0, omega * static_cast<double>(k));
  return p;
}

const MatrixXd& transform_or_identity(const ChannelSpec& spec, MatrixXd& storage) {
  if (spec.transform) return *spec.transform;
  storage = MatrixXd::Identity(2 * spec.n(), 2 * spec.n());
  return storage;
}

}  // namespace

VectorXcd signal_mean(const ChannelSpec& spec) {
  return (phases(spec.params.omega, spec.n()).array() * (build_toeplitz_S(spec.seq) * spec.params.h).array()).matrix();
}

namespace {

MatrixXcd jacobian_of(const TrainingSequence& seq, const ChannelParams& params) {
  const Index n = seq.n, m = seq.m;
  const VectorXcd ph = phases(params.omega, n);
  const MatrixXcd xs = ph.asDiagonal() * build_toeplitz_S(seq);
  const VectorXcd xi = xs * params.h;
  const cplx i1(0.0, 1.0);
  MatrixXcd g(2 * m + 1, n);
  for (Index k = 0; k < n; ++k) g(0, k) = i1 * static_cast<double>(k) * xi(k);
  for (Index k = 0; k < m; ++k) {
    g.row(1 + k) = xs.col(k).transpose();
    g.row(1 + m + k) = i1 * xs.col(k).transpose();
  }
  return g;
}

MatrixXd real_composite(const MatrixXcd& g) {
  MatrixXd gt(g.rows(), 2 * g.cols());
  gt << g.real(), g.imag();
  return gt;
}

}  // namespace

MatrixXcd jacobian(const ChannelSpec& spec) { return jacobian_of(spec.seq, spec.params); }

MatrixXd real_composite_jacobian(const ChannelSpec& spec) { return real_composite(jacobian(spec)); }

CrlbReport fim_theta(const ChannelSpec& spec, const MatrixXcd& j_complex, double scale) {
  if (spec.transform) throw std::invalid_argument("fim_theta: complex form needs an untransformed spec");
  if (j_complex.rows() != spec.n() || j_complex.cols() != spec.n())
    throw std::invalid_argument("fim_theta: J must be n x n complex");
  const MatrixXcd g = jacobian(spec);
  const MatrixXd f = scale * (g * j_complex * g.adjoint()).real();
  const Index p = spec.parameter_count();
  return finalize_fim(f, MatrixXd::Zero(p, p), CrlbMethod::paper_complex_form);
}

CrlbReport fim_theta_real(const ChannelSpec& spec, const MatrixXd& j_real) {
  if (j_real.rows() != 2 * spec.n() || j_real.cols() != 2 * spec.n())
    throw std::invalid_argument("fim_theta_real: J must be 2n x 2n");
  MatrixXd storage;
  const MatrixXd& t = transform_or_identity(spec, storage);
  const MatrixXd a = real_composite_jacobian(spec) * t.transpose();
  const Index p = spec.parameter_count();
  return finalize_fim(a * j_real * a.transpose(), MatrixXd::Zero(p, p), CrlbMethod::real_composite);
}

CrlbReport fim_theta_oracle(const ChannelSpec& spec, std::uint64_t seed, std::size_t count) {
  if (count < kMinFimCount)
    throw std::invalid_argument("fim_theta_oracle: count must be >= " + std::to_string(kMinFimCount));
  MatrixXd storage;
  const MatrixXd& t = transform_or_identity(spec, storage);
  const MatrixXd a = real_composite_jacobian(spec) * t.transpose();
  const SampleBatch batch = sample(spec.noise, seed, count);
  const Index p = spec.parameter_count();
  RowMatrix theta_scores(batch.data.rows(), p);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < batch.data.rows(); ++i)
    theta_scores.row(i) = (-(a * spec.noise.score(batch.data.row(i).transpose()))).transpose();
  for (Index i = 0; i < theta_scores.rows(); ++i)
    if (!theta_scores.row(i).allFinite()) throw NonFiniteScore(static_cast<std::size_t>(i), spec.noise.id());
  const EntryMoments mom = entry_moments(count, p, p, [&](std::size_t i, MatrixXd& out) {
    const auto r = theta_scores.row(static_cast<Index>(i));
    out.noalias() = r.transpose() * r;
  });
  return finalize_fim(mom.mean, mom.std_error, CrlbMethod::real_composite, count);
}

MatrixXcd complex_covariance(const MatrixXd& sigma_real) {
  const Index n = sigma_real.rows() / 2;
  if (sigma_real.rows() != 2 * n || sigma_real.cols() != 2 * n || n == 0)
    throw std::invalid_argument("complex_covariance: expected a 2n x 2n matrix");
  const MatrixXd rr = sigma_real.topLeftCorner(n, n), ii = sigma_real.bottomRightCorner(n, n);
  const MatrixXd ir = sigma_real.bottomLeftCorner(n, n), ri = sigma_real.topRightCorner(n, n);
  MatrixXcd c(n, n);
  c.real() = rr + ii;
  c.imag() = ir - ri;
  return c;
}

MatrixXd circular_real_covariance(const MatrixXcd& sigma_complex) {
  const Index n = sigma_complex.rows();
  MatrixXd s(2 * n, 2 * n);
  s << sigma_complex.real(), -sigma_complex.imag(), sigma_complex.imag(), sigma_complex.real();
  return 0.5 * s;
}

bool is_circular(const MatrixXd& sigma_real, double tol) {
  const Index n = sigma_real.rows() / 2;
  const double scale = std::max(sigma_real.cwiseAbs().maxCoeff(), 1e-300);
  const double d1 = (sigma_real.topLeftCorner(n, n) - sigma_real.bottomRightCorner(n, n)).cwiseAbs().maxCoeff();
  const double d2 = (sigma_real.topRightCorner(n, n) + sigma_real.bottomLeftCorner(n, n)).cwiseAbs().maxCoeff();
  return std::max(d1, d2) <= tol * scale;
}

MatrixXcd circular_gaussian_fim(const MatrixXcd& sigma_complex) {
  const Eigen::LLT<MatrixXcd> llt(sigma_complex);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("circular_gaussian_fim: covariance not Hermitian PD");
  const MatrixXcd inv = llt.solve(MatrixXcd::Identity(sigma_complex.rows(), sigma_complex.cols()));
  return (0.5 * (inv + inv.adjoint())).conjugate();
}

ScaleCalibration calibrate_complex_scale(const ChannelSpec& spec, std::uint64_t seed, std::size_t count) {
  if (spec.noise.family() != Family::gaussian || !is_circular(spec.noise.covariance(), 1e-9))
    throw std::invalid_argument("calibrate_complex_scale: needs circular Gaussian noise");
  const MatrixXcd j = circular_gaussian_fim(complex_covariance(spec.noise.covariance()));
  const MatrixXd f1 = fim_theta(spec, j, 1.0).fim;
  const CrlbReport oracle = fim_theta_oracle(spec, seed, count);
  const double denom = f1.squaredNorm();
  ScaleCalibration c;
  c.fitted = (oracle.fim.array() * f1.array()).sum() / denom;
  c.fitted_std_error = std::sqrt((oracle.std_error.array().square() * f1.array().square()).sum()) / denom;
  c.scale = std::abs(c.fitted - 1.0) <= std::abs(c.fitted - 2.0) ? 1.0 : 2.0;
  return c;
}

CrlbReport LambdaMinBound::fim(const ChannelSpec& spec) const {
  MatrixXd storage;
  const MatrixXd& t = transform_or_identity(spec, storage);
  const MatrixXd a = real_composite_jacobian(spec) * t.transpose();
  const Index p = spec.parameter_count();
  return finalize_fim(scale * lambda_min * (a * a.transpose()), MatrixXd::Zero(p, p), CrlbMethod::lambda_min_bound);
}

LambdaMinBound lambda_min_bound(const MatrixXd& j_real) {
  require_psd(j_real, "lambda_min_bound J");
  return {std::max(0.0, eigmin(j_real)), 1.0};
}

LambdaMinBound lambda_min_bound(const MatrixXcd& j_complex, double scale) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (j_complex + j_complex.adjoint()), Eigen::EigenvaluesOnly);
  const double lm = es.eigenvalues()(0);
  if (lm < -1e-12 * std::abs(es.eigenvalues().maxCoeff()))
    throw std::invalid_argument("lambda_min_bound: J is not positive semidefinite");
  return {std::max(0.0, lm), scale};
}

SequenceDistribution SequenceDistribution::point(TrainingSequence s) {
  SequenceDistribution d;
  d.point_mass = std::move(s);
  return d;
}

SequenceDistribution SequenceDistribution::random_binary(Index n, Index m) {
  SequenceDistribution d;
  d.sampler = [n, m](std::uint64_t seed, std::uint64_t index) {
    Substream gen(seed, StreamDomain::sequence, index);
    VectorXcd s(n + m - 1);
    for (Index k = 0; k < s.size(); ++k) s(k) = (gen() >> 63) ? 1.0 : -1.0;
    return TrainingSequence::make(std::move(s), n, m);
  };
  return d;
}

CrlbReport fim_theta_expected(const SequenceDistribution& dist, const ChannelSpec& spec, const MatrixXd& j_real,
                              std::size_t draws, std::uint64_t seed) {
  if (dist.point_mass) {
    ChannelSpec s = spec;
    s.seq = *dist.point_mass;
    return fim_theta_real(s, j_real);
  }
  if (!dist.sampler) throw std::invalid_argument("fim_theta_expected: empty distribution");
  if (draws < 2) throw std::invalid_argument("fim_theta_expected: need at least 2 draws");
  MatrixXd storage;
  const MatrixXd& t = transform_or_identity(spec, storage);
  const MatrixXd jt = t.transpose() * j_real * t;
  const Index p = spec.parameter_count();
  std::vector<TrainingSequence> seqs;
  seqs.reserve(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    seqs.push_back(dist.sampler(seed, i));
    if (seqs.back().n != spec.n() || seqs.back().m != spec.m())
      throw std::invalid_argument("fim_theta_expected: sampler returned a sequence of the wrong shape");
  }
  const EntryMoments mom = entry_moments(draws, p, p, [&](std::size_t i, MatrixXd& out) {
    const MatrixXd g = real_composite(jacobian_of(seqs[i], spec.params));
    out.noalias() = g * jt * g.transpose();
  });
  return finalize_fim(mom.mean, mom.std_error, CrlbMethod::real_composite, draws);
}

MatrixXd whitening_matrix(const ChannelSpec& spec) {
  if (spec.noise.family() != Family::gaussian)
    throw std::invalid_argument("whiten: refused for non-Gaussian noise (" + spec.noise.id() +
                                "); decorrelation would not make the components independent");
  return inverse_sqrt_spd(spec.noise.covariance());
}

ChannelSpec whiten(const ChannelSpec& spec) {
  const MatrixXd w = whitening_matrix(spec);
  MatrixXd storage;
  const MatrixXd t = w * transform_or_identity(spec, storage);
  const Index d = 2 * spec.n();
  return ChannelSpec(spec.seq, spec.params, make_gaussian(MatrixXd::Identity(d, d)), t);
}

}  // namespace crbkit
