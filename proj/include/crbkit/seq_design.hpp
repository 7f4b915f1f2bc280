#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crbkit/channel_model.hpp"

namespace crbkit {

enum class Knowledge { full_distribution, covariance_only, none };
enum class Objective { trace_crlb, max_crlb_entry, min_fim_eigmin };
std::string to_string(Knowledge k);
std::string to_string(Objective o);

struct DesignCriterion {
  Knowledge knowledge = Knowledge::none;
  Objective objective = Objective::trace_crlb;
  // Monte Carlo settings for full_distribution.
  std::uint64_t seed = 1;
  std::size_t count = 20000;
};

/// ||S^H S / n - P I||_F / P with P the mean sample power.
double whiteness_score(const TrainingSequence& seq);

enum class WhiteKind { cazac, random_psk };

struct GeneratedSequence {
  TrainingSequence seq;
  double whiteness = 0.0;
  bool fallback = false;  // cazac requested but the root was not coprime with n
};

/// cazac: cyclic Zadoff-Chu of length n with the last m - 1 samples as prefix.
/// random_psk: uniform phases from the sequence substream of `seed`.
GeneratedSequence generate_white_sequence(Index n, Index m, WhiteKind kind, std::uint64_t seed, Index root = 1);

struct GridPoint {
  double omega = 0.0;
  VectorXcd h;
};

/// omega in {0, +-pi/4, +-pi/2} times `taps_draws` unit-norm h from `seed`.
std::vector<GridPoint> default_grid(Index m, std::uint64_t seed, int taps_draws = 4);

struct SequenceEvaluation {
  bool qualified = true;
  std::string reason;      // why disqualified
  double objective = 0.0;  // worst case over the grid
  std::size_t worst_point = 0;
  VectorXd crlb;           // CRLB diagonal at the worst point
};

/// Worst case over the grid; `noise` is the true real-composite noise (2n).
SequenceEvaluation evaluate_sequence(const TrainingSequence& seq, const std::vector<GridPoint>& grid,
                                     const NoiseModel& noise, const DesignCriterion& criterion);

struct Candidate {
  std::string id;
  TrainingSequence seq;
};

struct RankedCandidate {
  std::string id;
  std::size_t index = 0;  // position in the candidate list
  double objective = 0.0;
  double whiteness = 0.0;
  VectorXd crlb;
};

struct DesignReport {
  DesignCriterion criterion;
  std::vector<RankedCandidate> ranked;
  std::vector<std::pair<std::string, std::string>> disqualified;  // id, reason
  std::string winner;
};

/// Error raised when no candidate survives.
class EmptyDesign : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ranks by objective (lower is better); near ties (1e-12 relative) fall back
/// to whiteness, then to candidate order.
DesignReport compare_designs(const std::vector<Candidate>& candidates, const DesignCriterion& criterion,
                             const std::vector<GridPoint>& grid, const NoiseModel& noise);

}  // namespace crbkit
