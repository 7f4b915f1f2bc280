#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crbkit/info_metrics.hpp"

namespace crbkit {

enum class Verdict { holds, holds_within_noise, violated };
std::string to_string(Verdict v);

/// holds when margin >= 0, holds_within_noise when -tolerance <= margin < 0.
Verdict classify(double margin, double tolerance);

struct InequalityReport {
  std::string name;
  std::string model;
  MatrixXd lhs;  // 1x1 for scalar checks
  MatrixXd rhs;
  double margin = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::holds;
  std::vector<std::pair<std::string, double>> diagnostics;

  double diagnostic(const std::string& key) const;  // NaN when absent
};

struct CheckOptions {
  double tolerance_scale = 1.0;  // multiplies the 4-sigma tolerance
  bool force_knn = false;        // knn entropies even where closed forms exist
};

constexpr double kSigmas = 4.0;
constexpr std::size_t kMinCheckCount = 10000;

/// eigmin(J(w) - Sigma_w^{-1}) with J(w) estimated by Monte Carlo.
InequalityReport check_cramer_rao(const NoiseModel& model, std::uint64_t seed, std::size_t count,
                                  const CheckOptions& opt = {});

/// E[(s - s_G)(s - s_G)^T] against J(w) - Sigma_w^{-1}, both from one batch.
InequalityReport check_score_gap_identity(const NoiseModel& model, std::uint64_t seed, std::size_t count,
                                          const CheckOptions& opt = {});

/// I(w + z; z) - I(w_G + z; z), z ~ N(0, sigma_z).
InequalityReport check_worst_additive_noise(const NoiseModel& model, const MatrixXd& sigma_z, std::uint64_t seed,
                                            std::size_t count, const CheckOptions& opt = {});

/// N(w) |J(w)|^{1/n} - 1 with knn entropy and Monte Carlo J on one batch.
/// Closed-form and trace-form products go to the diagnostics.
InequalityReport check_isoperimetric(const NoiseModel& model, std::uint64_t seed, std::size_t count,
                                     const CheckOptions& opt = {});

/// Forward difference I(t)/t against tr J / 2 with sigma_z = t I;
/// margin = 0.10 - |relative gap|.
InequalityReport check_de_bruijn(const NoiseModel& model, double t, std::uint64_t seed, std::size_t count,
                                 const CheckOptions& opt = {});

struct GPoint {
  double t = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  double step = 0.0;            // g(t_i) - g(t_{i-1}); g(t_0) for the first point
  double step_std_error = 0.0;
};

/// g(tI) = h(w + z) - h(w_G + z) - h(w) + h(w_G) on an ascending grid, with
/// one shared batch of w and common Gaussian directions across t.
std::vector<GPoint> g_function(const NoiseModel& model, const std::vector<double>& t_grid, std::uint64_t seed,
                               std::size_t count);

/// g >= 0 at every t and nondecreasing between neighbours (3 sigma for steps).
InequalityReport check_g_function(const NoiseModel& model, const std::vector<double>& t_grid, std::uint64_t seed,
                                  std::size_t count, const CheckOptions& opt = {});

}  // namespace crbkit
