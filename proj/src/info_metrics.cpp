#include "crbkit/info_metrics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/special_functions/digamma.hpp>

#include "crbkit/kernels.hpp"
#include "crbkit/rng.hpp"

namespace crbkit {

std::string to_string(FimMethod m) { return m == FimMethod::analytic ? "analytic" : "monte_carlo"; }
std::string to_string(EntropyMethod m) { return m == EntropyMethod::closed_form ? "closed_form" : "knn"; }

NonFiniteScore::NonFiniteScore(std::size_t draw, const std::string& model)
    : std::runtime_error("non-finite score at draw " + std::to_string(draw) + " of " + model), draw_(draw) {}

namespace {

RowMatrix scores_of(const NoiseModel& model, const RowMatrix& data) {
  RowMatrix s(data.rows(), data.cols());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < data.rows(); ++i) s.row(i) = model.score(data.row(i).transpose()).transpose();
  return s;
}

void require_finite_rows(const RowMatrix& s, const std::string& model) {
  for (Index i = 0; i < s.rows(); ++i)
    if (!s.row(i).allFinite()) throw NonFiniteScore(static_cast<std::size_t>(i), model);
}

}  // namespace

FimEstimate fim_monte_carlo(const NoiseModel& model, const SampleBatch& batch) {
  if (batch.count() < kMinFimCount)
    throw std::invalid_argument("fim_monte_carlo: count must be >= " + std::to_string(kMinFimCount));
  if (batch.data.cols() != model.dim()) throw std::invalid_argument("fim_monte_carlo: batch dimension mismatch");
  const RowMatrix s = scores_of(model, batch.data);
  require_finite_rows(s, model.id());
  const Index n = model.dim();
  const EntryMoments mom = entry_moments(batch.count(), n, n, [&](std::size_t i, MatrixXd& out) {
    const auto r = s.row(static_cast<Index>(i));
    out.noalias() = r.transpose() * r;
  });
  return {symmetrize(mom.mean), mom.std_error, batch.count(), FimMethod::monte_carlo};
}

FimEstimate fim_monte_carlo(const NoiseModel& model, std::uint64_t seed, std::size_t count) {
  if (count < kMinFimCount)
    throw std::invalid_argument("fim_monte_carlo: count must be >= " + std::to_string(kMinFimCount));
  return fim_monte_carlo(model, sample(model, seed, count));
}

std::optional<FimEstimate> fim_analytic(const NoiseModel& model) {
  const double j = base1d::fisher_information(model.base());
  if (j < 0.0) return std::nullopt;
  const MatrixXd& ai = model.shaping_inverse();
  const Index n = model.dim();
  return FimEstimate{symmetrize(j * ai.transpose() * ai), MatrixXd::Zero(n, n), 0, FimMethod::analytic};
}

std::optional<EntropyEstimate> entropy_closed_form(const NoiseModel& model) {
  const double h1 = base1d::entropy(model.base());
  if (std::isnan(h1)) return std::nullopt;
  return EntropyEstimate{static_cast<double>(model.dim()) * h1 + model.log_abs_det_shaping(), 0.0,
                         EntropyMethod::closed_form};
}

VectorXd knn_entropy_terms(const RowMatrix& points, int k) {
  const VectorXd dist = knn_distances(points, k);
  Index zeros = 0;
  for (Index i = 0; i < dist.size(); ++i)
    if (!(dist(i) > 0.0)) ++zeros;
  if (zeros > 0)
    throw DegenerateBatch("knn entropy: " + std::to_string(zeros) +
                          " points have a zero k-th neighbour distance (duplicated samples)");
  const double n = static_cast<double>(points.cols());
  const double count = static_cast<double>(points.rows());
  using boost::math::digamma;
  const double log_unit_ball = 0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n + 1.0);
  const double offset = digamma(count) - digamma(static_cast<double>(k)) + log_unit_ball;
  return (n * dist.array().log() + offset).matrix();
}

namespace {

MiEstimate mean_and_stderr(const VectorXd& terms) {
  const double count = static_cast<double>(terms.size());
  const double mean = block_sum(terms) / count;
  const VectorXd centered = (terms.array() - mean).square().matrix();
  const double var = block_sum(centered) / (count - 1.0);
  return {mean, std::sqrt(var / count)};
}

}  // namespace

EntropyEstimate entropy_knn(const RowMatrix& points, int k) {
  if (static_cast<std::size_t>(points.rows()) < kMinKnnCount)
    throw std::invalid_argument("entropy_knn: need at least " + std::to_string(kMinKnnCount) + " samples");
  const MiEstimate m = mean_and_stderr(knn_entropy_terms(points, k));
  return {m.value, m.std_error, EntropyMethod::knn};
}

MiEstimate knn_entropy_difference(const RowMatrix& x, const RowMatrix& y, int k) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::invalid_argument("knn_entropy_difference: batches must have identical shape");
  if (static_cast<std::size_t>(x.rows()) < kMinKnnCount)
    throw std::invalid_argument("knn_entropy_difference: need at least " + std::to_string(kMinKnnCount) + " samples");
  return mean_and_stderr(knn_entropy_terms(y, k) - knn_entropy_terms(x, k));
}

EntropyEstimate entropy(const NoiseModel& model, std::uint64_t seed, std::size_t count,
                        std::optional<EntropyMethod> method) {
  if (method != EntropyMethod::knn) {
    if (auto h = entropy_closed_form(model)) return *h;
    if (method == EntropyMethod::closed_form)
      throw std::invalid_argument("entropy: no closed form for " + model.id());
  }
  return entropy_knn(sample(model, seed, count));
}

double entropy_power(double h, Index n) {
  return std::exp(2.0 * h / static_cast<double>(n)) / (2.0 * std::numbers::pi * std::numbers::e);
}

double entropy_power(const EntropyEstimate& h, Index n) { return entropy_power(h.value, n); }

double gaussian_additive_mi(const MatrixXd& sigma_w, const MatrixXd& sigma_z) {
  const Eigen::LLT<MatrixXd> a(symmetrize(sigma_w + sigma_z));
  const Eigen::LLT<MatrixXd> b(symmetrize(sigma_w));
  const double logdet_a = 2.0 * a.matrixLLT().diagonal().array().log().sum();
  const double logdet_b = 2.0 * b.matrixLLT().diagonal().array().log().sum();
  return 0.5 * (logdet_a - logdet_b);
}

RowMatrix add_gaussian(const RowMatrix& w, const MatrixXd& sigma_z, std::uint64_t seed) {
  if (sigma_z.rows() != w.cols()) throw std::invalid_argument("add_gaussian: dimension mismatch");
  const MatrixXd root = sqrt_psd(sigma_z);
  RowMatrix y(w.rows(), w.cols());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < w.rows(); ++i) {
    Substream gen(seed, StreamDomain::additive, static_cast<std::uint64_t>(i));
    std::normal_distribution<double> nd(0.0, 1.0);
    VectorXd z(w.cols());
    for (Index j = 0; j < z.size(); ++j) z(j) = nd(gen);
    y.row(i) = w.row(i) + (root * z).transpose();
  }
  return y;
}

MiEstimate mutual_info_additive(const NoiseModel& w_model, const MatrixXd& sigma_z, std::uint64_t seed,
                                std::size_t count, MiOptions options) {
  if (sigma_z.rows() != w_model.dim()) throw std::invalid_argument("mutual_info_additive: dimension mismatch");
  require_psd(sigma_z, "mutual_info_additive sigma_z");
  if (sigma_z.cwiseAbs().maxCoeff() == 0.0) return {0.0, 0.0};
  if (w_model.family() == Family::gaussian && !options.force_knn)
    return {gaussian_additive_mi(w_model.covariance(), sigma_z), 0.0};
  if (count < 10 * kMinKnnCount)
    throw std::invalid_argument("mutual_info_additive: knn path needs count >= 10000");
  const SampleBatch w = sample(w_model, seed, count);
  return knn_entropy_difference(w.data, add_gaussian(w.data, sigma_z, seed));
}

}  // namespace crbkit
