#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "crbkit/noise_models.hpp"

namespace crbkit {

enum class FimMethod { analytic, monte_carlo };
enum class EntropyMethod { closed_form, knn };

std::string to_string(FimMethod m);
std::string to_string(EntropyMethod m);

struct FimEstimate {
  MatrixXd matrix;
  MatrixXd std_error;  // all zero for analytic
  std::size_t sample_count = 0;
  FimMethod method = FimMethod::analytic;

  double aggregate_stderr() const { return crbkit::aggregate_stderr(std_error); }
};

struct EntropyEstimate {
  double value = 0.0;  // nats
  double std_error = 0.0;
  EntropyMethod method = EntropyMethod::closed_form;
};

struct MiEstimate {
  double value = 0.0;  // nats
  double std_error = 0.0;
};

/// A non-finite score showed up while averaging; carries the draw index.
class NonFiniteScore : public std::runtime_error {
 public:
  NonFiniteScore(std::size_t draw, const std::string& model);
  std::size_t draw() const { return draw_; }

 private:
  std::size_t draw_;
};

/// k-NN distances collapsed to zero (duplicated points).
class DegenerateBatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::size_t kMinFimCount = 1000;
constexpr std::size_t kMinKnnCount = 1000;
constexpr int kKnnNeighbours = 4;

/// Symmetrized average of score outer products with per-entry stderr.
FimEstimate fim_monte_carlo(const NoiseModel& model, std::uint64_t seed, std::size_t count);
FimEstimate fim_monte_carlo(const NoiseModel& model, const SampleBatch& batch);

/// Closed-form FIM; absent for mixtures.
std::optional<FimEstimate> fim_analytic(const NoiseModel& model);

std::optional<EntropyEstimate> entropy_closed_form(const NoiseModel& model);

/// Kozachenko–Leonenko estimate (k = 4, Euclidean).
EntropyEstimate entropy_knn(const RowMatrix& points, int k = kKnnNeighbours);
inline EntropyEstimate entropy_knn(const SampleBatch& batch, int k = kKnnNeighbours) {
  return entropy_knn(batch.data, k);
}

/// Closed form when available (unless `method` asks for knn), otherwise knn on
/// a fresh batch of `count` draws.
EntropyEstimate entropy(const NoiseModel& model, std::uint64_t seed, std::size_t count,
                        std::optional<EntropyMethod> method = std::nullopt);

/// Per-point Kozachenko–Leonenko terms; their mean is the entropy estimate.
VectorXd knn_entropy_terms(const RowMatrix& points, int k = kKnnNeighbours);

/// Estimate of h(Y) - h(X) from paired batches; stderr from the per-point
/// term differences.
MiEstimate knn_entropy_difference(const RowMatrix& x, const RowMatrix& y, int k = kKnnNeighbours);

double entropy_power(const EntropyEstimate& h, Index n);
double entropy_power(double h, Index n);

struct MiOptions {
  bool force_knn = false;
};

/// I(w + z; z) = h(w + z) - h(w) with z ~ N(0, sigma_z) independent of w.
MiEstimate mutual_info_additive(const NoiseModel& w_model, const MatrixXd& sigma_z, std::uint64_t seed,
                                std::size_t count, MiOptions options = {});

/// Closed-form I(w_G + z; z) for Gaussian w_G with covariance sigma_w.
double gaussian_additive_mi(const MatrixXd& sigma_w, const MatrixXd& sigma_z);

/// Draws w + L z for the given batch of w, where L L^T = sigma_z and z uses
/// the additive substream of `seed` (shared across calls with the same seed).
RowMatrix add_gaussian(const RowMatrix& w, const MatrixXd& sigma_z, std::uint64_t seed);

}  // namespace crbkit
