#include "crbkit/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "crbkit/kernels.hpp"

namespace crbkit {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::holds_within_noise: return "holds_within_noise";
    case Verdict::violated: return "violated";
  }
  return "?";
}

Verdict classify(double margin, double tolerance) {
  if (!std::isfinite(margin)) return Verdict::violated;
  if (margin >= 0.0) return Verdict::holds;
  if (margin >= -tolerance) return Verdict::holds_within_noise;
  return Verdict::violated;
}

double InequalityReport::diagnostic(const std::string& key) const {
  for (const auto& [k, v] : diagnostics)
    if (k == key) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

void require_count(std::size_t count, const char* what) {
  if (count < kMinCheckCount)
    throw std::invalid_argument(std::string(what) + ": count must be >= " + std::to_string(kMinCheckCount));
}

MatrixXd gaussian_fim(const NoiseModel& model) {
  const MatrixXd& ai = model.shaping_inverse();
  return symmetrize(ai.transpose() * ai);
}

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

InequalityReport make_report(std::string name, const NoiseModel& model, MatrixXd lhs, MatrixXd rhs, double margin,
                             double tolerance) {
  InequalityReport r;
  r.name = std::move(name);
  r.model = model.id();
  r.lhs = std::move(lhs);
  r.rhs = std::move(rhs);
  r.margin = margin;
  r.tolerance = tolerance;
  r.verdict = classify(margin, tolerance);
  return r;
}

double mean_of(const VectorXd& v) { return block_sum(v) / static_cast<double>(v.size()); }

double stderr_of(const VectorXd& v) {
  const double m = mean_of(v);
  const VectorXd sq = (v.array() - m).square().matrix();
  const double n = static_cast<double>(v.size());
  return std::sqrt(block_sum(sq) / (n - 1.0) / n);
}

}  // namespace

InequalityReport check_cramer_rao(const NoiseModel& model, std::uint64_t seed, std::size_t count,
                                  const CheckOptions& opt) {
  require_count(count, "check_cramer_rao");
  const FimEstimate j = fim_monte_carlo(model, seed, count);
  const MatrixXd jg = gaussian_fim(model);
  const MatrixXd gap = j.matrix - jg;
  const double agg = j.aggregate_stderr();
  auto r = make_report("cramer_rao", model, j.matrix, jg, eigmin(gap), opt.tolerance_scale * kSigmas * agg);
  r.diagnostics = {{"eigmax_gap", eigmax(gap)}, {"aggregate_stderr", agg}, {"count", static_cast<double>(count)}};
  if (auto ja = fim_analytic(model)) r.diagnostics.emplace_back("eigmin_gap_analytic", eigmin(ja->matrix - jg));
  return r;
}

InequalityReport check_score_gap_identity(const NoiseModel& model, std::uint64_t seed, std::size_t count,
                                          const CheckOptions& opt) {
  require_count(count, "check_score_gap_identity");
  const SampleBatch batch = sample(model, seed, count);
  const Index n = model.dim();
  const MatrixXd jg = gaussian_fim(model);
  RowMatrix s(batch.data.rows(), n), sg(batch.data.rows(), n);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < batch.data.rows(); ++i) {
    const VectorXd w = batch.data.row(i).transpose();
    s.row(i) = model.score(w).transpose();
    sg.row(i) = (-(jg * w)).transpose();
  }
  for (Index i = 0; i < s.rows(); ++i)
    if (!s.row(i).allFinite()) throw NonFiniteScore(static_cast<std::size_t>(i), model.id());

  const auto route1 = entry_moments(count, n, n, [&](std::size_t i, MatrixXd& out) {
    const VectorXd d = (s.row(static_cast<Index>(i)) - sg.row(static_cast<Index>(i))).transpose();
    out.noalias() = d * d.transpose();
  });
  const auto route2 = entry_moments(count, n, n, [&](std::size_t i, MatrixXd& out) {
    const VectorXd a = s.row(static_cast<Index>(i)).transpose();
    out.noalias() = a * a.transpose();
    out -= jg;
  });
  // Per-draw difference of the two routes; the s s^T terms cancel.
  const auto diff = entry_moments(count, n, n, [&](std::size_t i, MatrixXd& out) {
    const VectorXd a = s.row(static_cast<Index>(i)).transpose();
    const VectorXd g = sg.row(static_cast<Index>(i)).transpose();
    out.noalias() = g * g.transpose() - a * g.transpose() - g * a.transpose();
    out += jg;
  });
  const double gap = symmetrize(diff.mean).norm();
  const double agg = aggregate_stderr(diff.std_error);
  auto r = make_report("score_gap_identity", model, symmetrize(route1.mean), symmetrize(route2.mean), -gap,
                       opt.tolerance_scale * kSigmas * agg);
  r.diagnostics = {{"frobenius_gap", gap},
                   {"aggregate_stderr", agg},
                   {"route1_eigmin", eigmin(route1.mean)},
                   {"route2_eigmin", eigmin(route2.mean)},
                   {"count", static_cast<double>(count)}};
  return r;
}

InequalityReport check_worst_additive_noise(const NoiseModel& model, const MatrixXd& sigma_z, std::uint64_t seed,
                                            std::size_t count, const CheckOptions& opt) {
  require_psd(sigma_z, "check_worst_additive_noise sigma_z");
  if (sigma_z.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("check_worst_additive_noise: sigma_z must be nonzero");
  const MiEstimate mi = mutual_info_additive(model, sigma_z, seed, count, MiOptions{opt.force_knn});
  const double ig = gaussian_additive_mi(model.covariance(), sigma_z);
  auto r = make_report("worst_additive_noise", model, scalar(mi.value), scalar(ig), mi.value - ig,
                       opt.tolerance_scale * kSigmas * mi.std_error);
  r.diagnostics = {{"mi_std_error", mi.std_error},
                   {"sigma_z_trace", sigma_z.trace()},
                   {"knn", (model.family() != Family::gaussian || opt.force_knn) ? 1.0 : 0.0},
                   {"count", static_cast<double>(count)}};
  return r;
}

InequalityReport check_isoperimetric(const NoiseModel& model, std::uint64_t seed, std::size_t count,
                                     const CheckOptions& opt) {
  require_count(count, "check_isoperimetric");
  const SampleBatch batch = sample(model, seed, count);
  const Index n = model.dim();
  const double dn = static_cast<double>(n);
  const FimEstimate j = fim_monte_carlo(model, batch);
  const VectorXd terms = knn_entropy_terms(batch.data);
  const double h = mean_of(terms);
  const double np = entropy_power(h, n);
  const double detj = j.matrix.determinant();
  if (!(detj > 0.0)) throw std::runtime_error("check_isoperimetric: estimated FIM is not positive definite");
  const double product = np * std::pow(detj, 1.0 / dn);

  // Delta method on log(product) = (2/n) h + (1/n) log|J|, per draw.
  const MatrixXd jinv = j.matrix.inverse();
  VectorXd q(batch.data.rows());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < q.size(); ++i) {
    const VectorXd s = model.score(batch.data.row(i).transpose());
    q(i) = (2.0 / dn) * terms(i) + s.dot(jinv * s) / dn;
  }
  const double se = product * stderr_of(q);

  auto r = make_report("isoperimetric", model, scalar(product), scalar(1.0), product - 1.0,
                       opt.tolerance_scale * kSigmas * se);
  r.diagnostics = {{"entropy", h},
                   {"entropy_power", np},
                   {"fim_det_root", std::pow(detj, 1.0 / dn)},
                   {"product_std_error", se},
                   {"trace_form", np * j.matrix.trace()}};
  const auto hc = entropy_closed_form(model);
  const auto jc = fim_analytic(model);
  if (hc && jc)
    r.diagnostics.emplace_back("closed_form_product",
                               entropy_power(*hc, n) * std::pow(jc->matrix.determinant(), 1.0 / dn));
  r.diagnostics.emplace_back("count", static_cast<double>(count));
  return r;
}

InequalityReport check_de_bruijn(const NoiseModel& model, double t, std::uint64_t seed, std::size_t count,
                                 const CheckOptions& opt) {
  const double cap = 0.05 * eigmin(model.covariance());
  if (!(t > 0.0) || t > cap)
    throw std::invalid_argument("check_de_bruijn: t must lie in (0, " + std::to_string(cap) +
                                "], 0.05 times the smallest covariance eigenvalue");
  const Index n = model.dim();
  const MatrixXd sigma_z = t * MatrixXd::Identity(n, n);
  const bool closed = model.family() == Family::gaussian && !opt.force_knn;

  const MiEstimate mi = mutual_info_additive(model, sigma_z, seed, count, MiOptions{opt.force_knn});
  double half_tr = 0.0, half_tr_se = 0.0;
  if (closed) {
    half_tr = 0.5 * gaussian_fim(model).trace();
  } else {
    const FimEstimate j = fim_monte_carlo(model, seed, count);
    half_tr = 0.5 * j.matrix.trace();
    half_tr_se = 0.5 * j.std_error.diagonal().norm();
  }
  const double slope = mi.value / t;
  const double ratio = slope / half_tr;
  const double rel_gap = std::abs(ratio - 1.0);
  const double se = std::abs(ratio) * std::hypot(mi.std_error / std::max(std::abs(mi.value), 1e-300),
                                                  half_tr_se / half_tr);
  auto r = make_report("de_bruijn", model, scalar(slope), scalar(half_tr), 0.10 - rel_gap,
                       closed ? 0.0 : opt.tolerance_scale * kSigmas * se);
  r.diagnostics = {{"t", t},
                   {"relative_gap", rel_gap},
                   {"relative_gap_std_error", se},
                   {"mi", mi.value},
                   {"mi_std_error", mi.std_error},
                   {"knn", closed ? 0.0 : 1.0},
                   {"count", static_cast<double>(count)}};
  return r;
}

std::vector<GPoint> g_function(const NoiseModel& model, const std::vector<double>& t_grid, std::uint64_t seed,
                               std::size_t count) {
  if (t_grid.empty()) throw std::invalid_argument("g_function: empty t grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0)) throw std::invalid_argument("g_function: t values must be positive");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw std::invalid_argument("g_function: t grid must ascend");
  }
  if (count < 10 * kMinKnnCount) throw std::invalid_argument("g_function: count must be >= 10000");
  const Index n = model.dim();
  const SampleBatch w = sample(model, seed, count);
  const VectorXd base_terms = knn_entropy_terms(w.data);
  std::vector<GPoint> out;
  VectorXd prev_terms;
  double prev_ig = 0.0;
  for (double t : t_grid) {
    const MatrixXd sz = t * MatrixXd::Identity(n, n);
    const VectorXd terms = knn_entropy_terms(add_gaussian(w.data, sz, seed));
    const double ig = gaussian_additive_mi(model.covariance(), sz);
    const VectorXd d = terms - base_terms;
    GPoint p;
    p.t = t;
    p.value = mean_of(d) - ig;
    p.std_error = stderr_of(d);
    if (out.empty()) {
      p.step = p.value;
      p.step_std_error = p.std_error;
    } else {
      const VectorXd step = terms - prev_terms;
      p.step = mean_of(step) - (ig - prev_ig);
      p.step_std_error = stderr_of(step);
    }
    out.push_back(p);
    prev_terms = terms;
    prev_ig = ig;
  }
  return out;
}

InequalityReport check_g_function(const NoiseModel& model, const std::vector<double>& t_grid, std::uint64_t seed,
                                  std::size_t count, const CheckOptions& opt) {
  const auto pts = g_function(model, t_grid, seed, count);
  // The binding term is the one with the least slack after its own tolerance.
  double margin = std::numeric_limits<double>::infinity(), tol = 0.0, slack = margin;
  auto consider = [&](double value, double t) {
    if (value + t < slack) {
      slack = value + t;
      margin = value;
      tol = t;
    }
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    consider(pts[i].value, opt.tolerance_scale * kSigmas * pts[i].std_error);
    if (i > 0) consider(pts[i].step, opt.tolerance_scale * 3.0 * pts[i].step_std_error);
  }
  auto r = make_report("g_function", model, MatrixXd(), MatrixXd(), margin, tol);
  r.lhs.resize(static_cast<Index>(pts.size()), 1);
  r.rhs = MatrixXd::Zero(static_cast<Index>(pts.size()), 1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    r.lhs(static_cast<Index>(i), 0) = pts[i].value;
    const std::string tag = "t=" + format_double(pts[i].t);
    r.diagnostics.emplace_back("g[" + tag + "]", pts[i].value);
    r.diagnostics.emplace_back("g_std_error[" + tag + "]", pts[i].std_error);
  }
  r.diagnostics.emplace_back("count", static_cast<double>(count));
  return r;
}

}  // namespace crbkit
