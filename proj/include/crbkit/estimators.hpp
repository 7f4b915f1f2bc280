#pragma once

#include <cstdint>
#include <stdexcept>

#include "crbkit/channel_model.hpp"

namespace crbkit {

struct EstimateResult {
  VectorXd theta;  // [omega, h_R, h_I]
  double residual_norm = 0.0;
  Index grid_cell = 0;
};

struct EstimatorConfig {
  Index grid_size = 256;
  int refine_iters = 100;
};

class EstimatorFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Separable least squares: coarse grid over (-pi, pi], h by QR per cell,
/// golden-section refinement of the winning cell.
EstimateResult nls_estimate(const VectorXcd& y, const TrainingSequence& seq, const EstimatorConfig& cfg = {});

/// Wraps an angle to (-pi, pi].
double wrap_angle(double x);

struct MseReport {
  VectorXd mse;
  VectorXd std_error;
  VectorXd crlb;
  std::size_t trials = 0;
  std::size_t failures = 0;
};

constexpr std::size_t kMinTrials = 100;

/// Monte Carlo MSE of nls_estimate on `spec` (untransformed); trial i uses
/// noise draw i of `seed`. CRLB column from the real-composite FIM for
/// Gaussian noise, otherwise from the oracle with `oracle_count` draws.
MseReport mse_monte_carlo(const ChannelSpec& spec, const EstimatorConfig& cfg, std::size_t trials, std::uint64_t seed,
                          std::size_t oracle_count = 100000);

}  // namespace crbkit
