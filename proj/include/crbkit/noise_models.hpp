#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "crbkit/linalg.hpp"

namespace crbkit {

enum class Family { gaussian, laplace, student_t, gauss_mixture };

std::string to_string(Family f);

/// Scalar Gaussian mixture used as an i.i.d. base. Must have zero overall mean
/// and unit overall variance.
struct MixtureComponents {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;

  /// Rescales arbitrary positive-weight components to zero mean / unit
  /// variance (weights are normalised, the overall mean is subtracted).
  static MixtureComponents standardized(std::vector<double> weights, std::vector<double> means,
                                        std::vector<double> variances);
};

/// Base family for make_shaped. Gaussian is not admitted there.
struct BaseFamily {
  Family family = Family::laplace;
  double nu = 0.0;  // student_t degrees of freedom
  MixtureComponents mixture;

  static BaseFamily laplace() { return {Family::laplace, 0.0, {}}; }
  static BaseFamily student_t(double nu) { return {Family::student_t, nu, {}}; }
  static BaseFamily gauss_mixture(MixtureComponents c) { return {Family::gauss_mixture, 0.0, std::move(c)}; }
};

/// Zero-mean noise w = A v, v with i.i.d. unit-variance components.
/// Immutable after construction; safe to share across threads.
class NoiseModel {
 public:
  Family family() const { return base_.family; }
  const BaseFamily& base() const { return base_; }
  Index dim() const { return shaping_.rows(); }
  const MatrixXd& shaping() const { return shaping_; }
  const MatrixXd& shaping_inverse() const { return shaping_inv_; }
  const MatrixXd& covariance() const { return covariance_; }
  double log_abs_det_shaping() const { return log_abs_det_; }

  /// Gradient of log f_w at w (analytic).
  VectorXd score(const VectorXd& w) const;
  double log_density(const VectorXd& w) const;

  /// Maps a standard draw of the base vector v to w = A v.
  VectorXd shape(const VectorXd& v) const { return shaping_ * v; }

  /// Short identifier such as "laplace(n=2)".
  std::string id() const;

 private:
  friend NoiseModel make_gaussian(const MatrixXd& sigma);
  friend NoiseModel make_shaped(const BaseFamily& base, const MatrixXd& a);
  NoiseModel(BaseFamily base, MatrixXd shaping);

  BaseFamily base_;
  MatrixXd shaping_;
  MatrixXd shaping_inv_;
  MatrixXd covariance_;
  double log_abs_det_ = 0.0;
};

/// Gaussian noise with covariance sigma (shaping = Cholesky factor).
NoiseModel make_gaussian(const MatrixXd& sigma);

/// Non-Gaussian noise w = A v with v i.i.d. from the standardized base family.
NoiseModel make_shaped(const BaseFamily& base, const MatrixXd& a);

struct SampleBatch {
  RowMatrix data;  // count x n
  std::uint64_t seed = 0;
  std::string model_id;

  std::size_t count() const { return static_cast<std::size_t>(data.rows()); }
};

/// count i.i.d. draws; draw i depends only on (seed, i).
SampleBatch sample(const NoiseModel& model, std::uint64_t seed, std::size_t count);

/// Single draw i of the base vector v (unit-variance i.i.d. components).
VectorXd sample_base(const NoiseModel& model, std::uint64_t seed, std::uint64_t index);

namespace base1d {

// Standardized scalar base densities (unit variance).
double laplace_scale();  // b = 1/sqrt(2)
double student_t_scale(double nu);  // sqrt((nu-2)/nu)

double log_density(const BaseFamily& base, double v);
double score(const BaseFamily& base, double v);
/// Scalar Fisher information; negative when no closed form exists.
double fisher_information(const BaseFamily& base);
/// Differential entropy in nats; NaN when no closed form exists.
double entropy(const BaseFamily& base);

}  // namespace base1d

namespace serial {
SampleBatch sample(const NoiseModel& model, std::uint64_t seed, std::size_t count);
}

}  // namespace crbkit
