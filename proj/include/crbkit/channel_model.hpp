#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "crbkit/info_metrics.hpp"

namespace crbkit {

/// Samples s_{1-m}, ..., s_{n-1}; samples[k + m - 1] holds s_k.
struct TrainingSequence {
  VectorXcd samples;
  Index n = 0;
  Index m = 0;

  /// Validates length n + m - 1, finiteness and positive power.
  static TrainingSequence make(VectorXcd samples, Index n, Index m);
  cplx at(Index k) const { return samples(k + m - 1); }
  double power() const { return samples.squaredNorm() / static_cast<double>(samples.size()); }
};

struct ChannelParams {
  double omega = 0.0;  // radians per sample
  VectorXcd h;         // m taps
};

/// y = X_omega S h + w. Noise lives on the real-composite space [Re; Im] of
/// dimension 2n. When `transform` is set the observation is T [Re y; Im y]
/// and `noise` describes T w.
struct ChannelSpec {
  TrainingSequence seq;
  ChannelParams params;
  NoiseModel noise;
  std::optional<MatrixXd> transform;

  ChannelSpec(TrainingSequence s, ChannelParams p, NoiseModel w, std::optional<MatrixXd> t = std::nullopt);
  Index n() const { return seq.n; }
  Index m() const { return seq.m; }
  Index parameter_count() const { return 2 * seq.m + 1; }
};

enum class CrlbMethod { paper_complex_form, real_composite, lambda_min_bound };
std::string to_string(CrlbMethod m);

struct CrlbReport {
  MatrixXd fim;
  MatrixXd std_error;  // zero unless Monte Carlo
  VectorXd crlb;       // empty when the FIM is singular
  MatrixXd nullspace;  // columns span the unidentifiable directions
  double condition_number = 0.0;
  CrlbMethod method = CrlbMethod::real_composite;
  std::size_t sample_count = 0;

  bool singular() const { return crlb.size() == 0; }
  double aggregate_stderr() const { return crbkit::aggregate_stderr(std_error); }
};

/// Builds the report for a given FIM: singular when eigmin <= 1e-12 eigmax.
CrlbReport finalize_fim(MatrixXd fim, MatrixXd std_error, CrlbMethod method, std::size_t count = 0);

MatrixXcd build_toeplitz_S(const TrainingSequence& seq);
MatrixXcd build_phase_matrix(double omega, Index n);
VectorXcd signal_mean(const ChannelSpec& spec);
/// (2m+1) x n; rows are d xi / d theta_k for theta = [omega, h_R, h_I].
MatrixXcd jacobian(const ChannelSpec& spec);
/// (2m+1) x 2n: [Re G, Im G].
MatrixXd real_composite_jacobian(const ChannelSpec& spec);

/// Scale c in c Re[G J G^H]. Fixed by calibrate_complex_scale against the
/// real-composite oracle; for circular noise J = conj(Sigma_c^{-1}).
constexpr double kComplexFimScale = 2.0;

/// c Re[G J G^H] with J the complex n x n noise FIM. Untransformed specs only.
CrlbReport fim_theta(const ChannelSpec& spec, const MatrixXcd& j_complex, double scale = kComplexFimScale);
/// G~ T^T J~ T G~^T with J~ the 2n x 2n FIM of the (transformed) noise.
CrlbReport fim_theta_real(const ChannelSpec& spec, const MatrixXd& j_real);
/// Monte Carlo E[s(theta) s(theta)^T] with s(theta) = -G~ T^T s_w(w).
CrlbReport fim_theta_oracle(const ChannelSpec& spec, std::uint64_t seed, std::size_t count);

/// E[w w^H] from the real-composite covariance.
MatrixXcd complex_covariance(const MatrixXd& sigma_real);
/// 1/2 [[Re C, -Im C], [Im C, Re C]].
MatrixXd circular_real_covariance(const MatrixXcd& sigma_complex);
bool is_circular(const MatrixXd& sigma_real, double tol = 1e-12);
/// Complex-form FIM conj(Sigma_c^{-1}) of circular Gaussian noise.
MatrixXcd circular_gaussian_fim(const MatrixXcd& sigma_complex);

struct ScaleCalibration {
  double scale = kComplexFimScale;  // chosen from {1, 2}
  double fitted = 0.0;              // least-squares fit <oracle, F1> / <F1, F1>
  double fitted_std_error = 0.0;
};

/// Fits c against the oracle for a spec with circular Gaussian noise.
ScaleCalibration calibrate_complex_scale(const ChannelSpec& spec, std::uint64_t seed, std::size_t count);

struct LambdaMinBound {
  double lambda_min = 0.0;
  double scale = 1.0;
  /// scale * lambda_min * G~ T^T T G~^T.
  CrlbReport fim(const ChannelSpec& spec) const;
};

LambdaMinBound lambda_min_bound(const MatrixXd& j_real);
LambdaMinBound lambda_min_bound(const MatrixXcd& j_complex, double scale = kComplexFimScale);

/// Distribution over training sequences for the random-x_theta case.
struct SequenceDistribution {
  std::optional<TrainingSequence> point_mass;
  std::function<TrainingSequence(std::uint64_t seed, std::uint64_t index)> sampler;

  static SequenceDistribution point(TrainingSequence s);
  /// i.i.d. +-1 samples.
  static SequenceDistribution random_binary(Index n, Index m);
};

/// Average of fim_theta_real over sequence draws (single term for a point mass).
CrlbReport fim_theta_expected(const SequenceDistribution& dist, const ChannelSpec& spec, const MatrixXd& j_real,
                              std::size_t draws, std::uint64_t seed);

/// Gaussian-noise spec rewritten with T = Sigma^{-1/2} T and white noise.
/// Non-Gaussian noise is refused.
ChannelSpec whiten(const ChannelSpec& spec);

/// Sigma^{-1/2} of the spec's (Gaussian) noise.
MatrixXd whitening_matrix(const ChannelSpec& spec);

}  // namespace crbkit
