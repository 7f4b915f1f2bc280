#include "crbkit/seq_design.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "crbkit/rng.hpp"

namespace crbkit {

std::string to_string(Knowledge k) {
  switch (k) {
    case Knowledge::full_distribution: return "full_distribution";
    case Knowledge::covariance_only: return "covariance_only";
    case Knowledge::none: return "none";
  }
  return "?";
}

std::string to_string(Objective o) {
  switch (o) {
    case Objective::trace_crlb: return "trace_crlb";
    case Objective::max_crlb_entry: return "max_crlb_entry";
    case Objective::min_fim_eigmin: return "min_fim_eigmin";
  }
  return "?";
}

double whiteness_score(const TrainingSequence& seq) {
  const MatrixXcd s = build_toeplitz_S(seq);
  const double p = seq.power();
  const MatrixXcd gram = s.adjoint() * s / static_cast<double>(seq.n);
  return (gram - p * MatrixXcd::Identity(seq.m, seq.m)).norm() / p;
}

namespace {

TrainingSequence random_psk(Index n, Index m, std::uint64_t seed) {
  Substream gen(seed, StreamDomain::sequence, 0);
  VectorXcd s(n + m - 1);
  for (Index k = 0; k < s.size(); ++k) s(k) = std::polar(1.0, 2.0 * std::numbers::pi * gen.uniform());
  return TrainingSequence::make(std::move(s), n, m);
}

TrainingSequence zadoff_chu(Index n, Index m, Index root) {
  VectorXcd base(n);
  const double pi = std::numbers::pi;
  for (Index k = 0; k < n; ++k) {
    // Reduce the integer phase index mod 2n before scaling to keep it exact.
    const long long kk = static_cast<long long>(k);
    const long long num = (n % 2 == 1) ? kk * (kk + 1) : kk * kk;
    const long long r = (static_cast<long long>(root) * (num % (2 * n))) % (2 * n);
    base(k) = std::polar(1.0, -pi * static_cast<double>(r) / static_cast<double>(n));
  }
  VectorXcd s(n + m - 1);
  for (Index k = 1 - m; k < n; ++k) s(k + m - 1) = base(((k % n) + n) % n);
  return TrainingSequence::make(std::move(s), n, m);
}

}  // namespace

GeneratedSequence generate_white_sequence(Index n, Index m, WhiteKind kind, std::uint64_t seed, Index root) {
  if (m < 1 || n < m) throw std::invalid_argument("generate_white_sequence: need 1 <= m <= n");
  GeneratedSequence g{kind == WhiteKind::cazac ? TrainingSequence{} : random_psk(n, m, seed), 0.0, false};
  if (kind == WhiteKind::cazac) {
    if (root >= 1 && std::gcd(root, n) == 1) {
      g.seq = zadoff_chu(n, m, root);
    } else {
      g.seq = random_psk(n, m, seed);
      g.fallback = true;
    }
  }
  g.whiteness = whiteness_score(g.seq);
  return g;
}

std::vector<GridPoint> default_grid(Index m, std::uint64_t seed, int taps_draws) {
  const double pi = std::numbers::pi;
  const double omegas[] = {-pi / 2, -pi / 4, 0.0, pi / 4, pi / 2};
  std::vector<VectorXcd> taps;
  for (int j = 0; j < taps_draws; ++j) {
    Substream gen(seed, StreamDomain::grid, static_cast<std::uint64_t>(j));
    std::normal_distribution<double> nd;
    VectorXcd h(m);
    for (Index k = 0; k < m; ++k) {
      const double re = nd(gen);
      h(k) = cplx(re, nd(gen));
    }
    taps.push_back(h / h.norm());
  }
  std::vector<GridPoint> grid;
  for (double w : omegas)
    for (const auto& h : taps) grid.push_back({w, h});
  return grid;
}

SequenceEvaluation evaluate_sequence(const TrainingSequence& seq, const std::vector<GridPoint>& grid,
                                     const NoiseModel& noise, const DesignCriterion& criterion) {
  if (grid.empty()) throw std::invalid_argument("evaluate_sequence: empty parameter grid");
  if (noise.dim() != 2 * seq.n) throw std::invalid_argument("evaluate_sequence: noise dimension must be 2n");
  MatrixXd j_real;
  LambdaMinBound bound;
  if (criterion.knowledge != Knowledge::full_distribution) {
    const MatrixXd& ai = noise.shaping_inverse();
    j_real = symmetrize(ai.transpose() * ai);
    if (criterion.knowledge == Knowledge::none) bound = lambda_min_bound(j_real);
  }
  SequenceEvaluation ev;
  ev.objective = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const ChannelSpec spec(seq, {grid[g].omega, grid[g].h}, noise);
    CrlbReport r;
    switch (criterion.knowledge) {
      case Knowledge::full_distribution: r = fim_theta_oracle(spec, criterion.seed, criterion.count); break;
      case Knowledge::covariance_only: r = fim_theta_real(spec, j_real); break;
      case Knowledge::none: r = bound.fim(spec); break;
    }
    if (r.singular()) {
      ev.qualified = false;
      ev.reason = "singular FIM at grid point " + std::to_string(g) + " (omega=" + format_double(grid[g].omega) + ")";
      ev.objective = std::numeric_limits<double>::infinity();
      ev.crlb.resize(0);
      return ev;
    }
    double obj = 0.0;
    switch (criterion.objective) {
      case Objective::trace_crlb: obj = r.crlb.sum(); break;
      case Objective::max_crlb_entry: obj = r.crlb.maxCoeff(); break;
      case Objective::min_fim_eigmin: obj = 1.0 / eigmin(r.fim); break;
    }
    if (obj > ev.objective) {
      ev.objective = obj;
      ev.worst_point = g;
      ev.crlb = r.crlb;
    }
  }
  return ev;
}

DesignReport compare_designs(const std::vector<Candidate>& candidates, const DesignCriterion& criterion,
                             const std::vector<GridPoint>& grid, const NoiseModel& noise) {
  if (candidates.size() < 2) throw std::invalid_argument("compare_designs: need at least 2 candidates");
  DesignReport rep;
  rep.criterion = criterion;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto ev = evaluate_sequence(candidates[i].seq, grid, noise, criterion);
    if (!ev.qualified) {
      rep.disqualified.emplace_back(candidates[i].id, ev.reason);
      continue;
    }
    rep.ranked.push_back({candidates[i].id, i, ev.objective, whiteness_score(candidates[i].seq), ev.crlb});
  }
  if (rep.ranked.empty()) throw EmptyDesign("compare_designs: every candidate was disqualified");
  auto& r = rep.ranked;
  std::stable_sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.objective < b.objective; });
  // Group near ties, then order each group by whiteness and candidate index.
  for (std::size_t lo = 0; lo < r.size();) {
    std::size_t hi = lo + 1;
    while (hi < r.size() && r[hi].objective - r[lo].objective <= 1e-12 * std::abs(r[lo].objective)) ++hi;
    std::stable_sort(r.begin() + static_cast<std::ptrdiff_t>(lo), r.begin() + static_cast<std::ptrdiff_t>(hi),
                     [](const auto& a, const auto& b) {
                       if (a.whiteness != b.whiteness) return a.whiteness < b.whiteness;
                       return a.index < b.index;
                     });
    lo = hi;
  }
  rep.winner = r.front().id;
  return rep;
}

}  // namespace crbkit
