#include "crbkit/estimators.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <string>
#include <vector>

#include "crbkit/kernels.hpp"

namespace crbkit {

double wrap_angle(double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(x, two_pi);  // [-pi, pi]
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

namespace {

VectorXcd derotate(const VectorXcd& y, double omega) {
  VectorXcd z(y.size());
  for (Index k = 0; k < y.size(); ++k) z(k) = y(k) * std::polar(1.0, -omega * static_cast<double>(k));
  return z;
}

}  // namespace

EstimateResult nls_estimate(const VectorXcd& y, const TrainingSequence& seq, const EstimatorConfig& cfg) {
  const Index n = seq.n, m = seq.m;
  if (y.size() != n) throw std::invalid_argument("nls_estimate: y has length " + std::to_string(y.size()) +
                                                 ", expected n = " + std::to_string(n));
  if (n < 2 * m + 1) throw std::invalid_argument("nls_estimate: need n >= 2m + 1");
  if (cfg.grid_size < 32) throw std::invalid_argument("nls_estimate: grid_size must be >= 32");
  const MatrixXcd s = build_toeplitz_S(seq);
  const Eigen::ColPivHouseholderQR<MatrixXcd> qr(s);
  if (qr.rank() < m)
    throw EstimatorFailure("nls_estimate: training matrix S is rank deficient (rank " + std::to_string(qr.rank()) +
                           " < m = " + std::to_string(m) + ")");
  const MatrixXcd q1 = qr.householderQ() * MatrixXcd::Identity(n, m);

  const double pi = std::numbers::pi;
  const double step = 2.0 * pi / static_cast<double>(cfg.grid_size);
  Index best = 0;
  double best_val = -1.0;
  for (Index g = 0; g < cfg.grid_size; ++g) {
    const double w = -pi + step * static_cast<double>(g + 1);
    const double v = (q1.adjoint() * derotate(y, w)).squaredNorm();
    if (v > best_val) {
      best_val = v;
      best = g;
    }
  }

  auto residual = [&](double w) {
    const VectorXcd z = derotate(y, w);
    return (z - s * qr.solve(z)).squaredNorm();
  };
  const double center = -pi + step * static_cast<double>(best + 1);
  double a = center - step, b = center + step;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = residual(c), fd = residual(d);
  for (int it = 0; it < cfg.refine_iters && (b - a) > 1e-8; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = residual(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = residual(d);
    }
  }
  double w_hat = 0.5 * (a + b);
  // Keep the coarse winner if refinement did not improve on it (e.g. y = 0).
  const double f_center = residual(center);
  double f_hat = residual(w_hat);
  if (!(f_hat < f_center)) {
    w_hat = center;
    f_hat = f_center;
  }
  w_hat = wrap_angle(w_hat);
  const VectorXcd h = qr.solve(derotate(y, w_hat));
  EstimateResult r;
  r.theta.resize(2 * m + 1);
  r.theta(0) = w_hat;
  r.theta.segment(1, m) = h.real();
  r.theta.segment(1 + m, m) = h.imag();
  r.residual_norm = std::sqrt(f_hat);
  r.grid_cell = best;
  return r;
}

MseReport mse_monte_carlo(const ChannelSpec& spec, const EstimatorConfig& cfg, std::size_t trials, std::uint64_t seed,
                          std::size_t oracle_count) {
  if (trials < kMinTrials) throw std::invalid_argument("mse_monte_carlo: trials must be >= 100");
  if (spec.transform) throw std::invalid_argument("mse_monte_carlo: transformed specs are not supported");
  const Index n = spec.n(), m = spec.m(), p = spec.parameter_count();
  VectorXd truth(p);
  truth(0) = spec.params.omega;
  truth.segment(1, m) = spec.params.h.real();
  truth.segment(1 + m, m) = spec.params.h.imag();
  const VectorXcd xi = signal_mean(spec);
  const SampleBatch noise = sample(spec.noise, seed, trials);

  RowMatrix err(static_cast<Index>(trials), p);
  std::vector<char> ok(trials, 0);
  std::vector<std::string> why(trials);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(trials); ++i) {
    const auto row = noise.data.row(i);
    VectorXcd y(n);
    for (Index k = 0; k < n; ++k) y(k) = xi(k) + cplx(row(k), row(n + k));
    try {
      const auto est = nls_estimate(y, spec.seq, cfg);
      VectorXd e = est.theta - truth;
      e(0) = wrap_angle(e(0));
      err.row(i) = e.transpose();
      ok[static_cast<std::size_t>(i)] = 1;
    } catch (const std::exception& ex) {
      why[static_cast<std::size_t>(i)] = ex.what();
    }
  }

  std::vector<std::size_t> good;
  for (std::size_t i = 0; i < trials; ++i)
    if (ok[i]) good.push_back(i);
  const std::size_t failures = trials - good.size();
  if (static_cast<double>(failures) > 0.05 * static_cast<double>(trials)) {
    std::string first;
    for (std::size_t i = 0; i < trials && first.empty(); ++i) first = why[i];
    throw EstimatorFailure("mse_monte_carlo: " + std::to_string(failures) + " of " + std::to_string(trials) +
                           " trials failed (> 5%); first: " + first);
  }
  const EntryMoments mom = entry_moments(good.size(), p, 1, [&](std::size_t i, MatrixXd& out) {
    out = err.row(static_cast<Index>(good[i])).transpose().array().square().matrix();
  });

  MseReport r;
  r.mse = mom.mean.col(0);
  r.std_error = mom.std_error.col(0);
  r.trials = trials;
  r.failures = failures;
  const CrlbReport bound = spec.noise.family() == Family::gaussian
                               ? fim_theta_real(spec, [&] {
                                   const MatrixXd& ai = spec.noise.shaping_inverse();
                                   return MatrixXd(symmetrize(ai.transpose() * ai));
                                 }())
                               : fim_theta_oracle(spec, seed, oracle_count);
  r.crlb = bound.crlb;
  return r;
}

}  // namespace crbkit
