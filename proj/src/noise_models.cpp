#include "crbkit/noise_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>

#include "crbkit/rng.hpp"

namespace crbkit {

std::string to_string(Family f) {
  switch (f) {
    case Family::gaussian:
      return "gaussian";
    case Family::laplace:
      return "laplace";
    case Family::student_t:
      return "student_t";
    case Family::gauss_mixture:
      return "gauss_mixture";
  }
  return "unknown";
}

MixtureComponents MixtureComponents::standardized(std::vector<double> weights,
                                                  std::vector<double> means,
                                                  std::vector<double> variances) {
  if (weights.empty() || weights.size() != means.size() || weights.size() != variances.size())
    throw std::invalid_argument("mixture: weights, means and variances must have equal non-zero length");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("mixture: weights must be positive");
    wsum += w;
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] /= wsum;
    mean += weights[i] * means[i];
  }
  double var = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(variances[i] > 0.0)) throw std::invalid_argument("mixture: variances must be positive");
    means[i] -= mean;
    var += weights[i] * (means[i] * means[i] + variances[i]);
  }
  const double scale = 1.0 / std::sqrt(var);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    means[i] *= scale;
    variances[i] *= scale * scale;
  }
  return {std::move(weights), std::move(means), std::move(variances)};
}

namespace base1d {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)
}

double laplace_scale() { return 1.0 / std::numbers::sqrt2; }

double student_t_scale(double nu) { return std::sqrt((nu - 2.0) / nu); }

double log_density(const BaseFamily& base, double v) {
  switch (base.family) {
    case Family::gaussian:
      return -0.5 * (kLog2Pi + v * v);
    case Family::laplace: {
      const double b = laplace_scale();
      return -std::log(2.0 * b) - std::abs(v) / b;
    }
    case Family::student_t: {
      const double nu = base.nu;
      const double s = student_t_scale(nu);
      const double t = v / s;
      return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
             0.5 * std::log(nu * std::numbers::pi) - 0.5 * (nu + 1.0) * std::log1p(t * t / nu) -
             std::log(s);
    }
    case Family::gauss_mixture: {
      const auto& c = base.mixture;
      double top = -std::numeric_limits<double>::infinity();
      std::vector<double> terms(c.weights.size());
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const double d = v - c.means[i];
        terms[i] = std::log(c.weights[i]) - 0.5 * (kLog2Pi + std::log(c.variances[i]) + d * d / c.variances[i]);
        top = std::max(top, terms[i]);
      }
      double acc = 0.0;
      for (double t : terms) acc += std::exp(t - top);
      return top + std::log(acc);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double score(const BaseFamily& base, double v) {
  switch (base.family) {
    case Family::gaussian:
      return -v;
    case Family::laplace: {
      // sign(0) = 0
      const double sgn = static_cast<double>((v > 0.0) - (v < 0.0));
      return -sgn / laplace_scale();
    }
    case Family::student_t: {
      const double nu = base.nu;
      const double s2 = (nu - 2.0) / nu;
      return -(nu + 1.0) * v / (nu * s2 + v * v);
    }
    case Family::gauss_mixture: {
      const auto& c = base.mixture;
      std::vector<double> logr(c.weights.size());
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < logr.size(); ++i) {
        const double d = v - c.means[i];
        logr[i] = std::log(c.weights[i]) - 0.5 * (std::log(c.variances[i]) + d * d / c.variances[i]);
        top = std::max(top, logr[i]);
      }
      double norm = 0.0, acc = 0.0;
      for (std::size_t i = 0; i < logr.size(); ++i) {
        const double r = std::exp(logr[i] - top);
        norm += r;
        acc += r * (-(v - c.means[i]) / c.variances[i]);
      }
      return acc / norm;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double fisher_information(const BaseFamily& base) {
  switch (base.family) {
    case Family::gaussian:
      return 1.0;
    case Family::laplace: {
      const double b = laplace_scale();
      return 1.0 / (b * b);
    }
    case Family::student_t: {
      const double nu = base.nu;
      return (nu + 1.0) / ((nu + 3.0) * ((nu - 2.0) / nu));
    }
    case Family::gauss_mixture:
      return -1.0;
  }
  return -1.0;
}

double entropy(const BaseFamily& base) {
  switch (base.family) {
    case Family::gaussian:
      return 0.5 * (kLog2Pi + 1.0);
    case Family::laplace:
      return 1.0 + std::log(2.0 * laplace_scale());
    case Family::student_t: {
      const double nu = base.nu;
      using boost::math::digamma;
      const double log_beta = std::lgamma(0.5 * nu) + std::lgamma(0.5) - std::lgamma(0.5 * (nu + 1.0));
      return 0.5 * (nu + 1.0) * (digamma(0.5 * (nu + 1.0)) - digamma(0.5 * nu)) +
             0.5 * std::log(nu) + log_beta + std::log(student_t_scale(nu));
    }
    case Family::gauss_mixture:
      return std::numeric_limits<double>::quiet_NaN();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace base1d

namespace {

void validate_base(const BaseFamily& base) {
  switch (base.family) {
    case Family::gaussian:
      throw std::invalid_argument("make_shaped: Gaussian base is not admitted, use make_gaussian");
    case Family::laplace:
      return;
    case Family::student_t:
      if (!(base.nu > 2.0))
        throw std::invalid_argument("make_shaped: student_t requires nu > 2 for finite variance");
      return;
    case Family::gauss_mixture: {
      const auto& c = base.mixture;
      if (c.weights.empty() || c.weights.size() != c.means.size() || c.weights.size() != c.variances.size())
        throw std::invalid_argument("make_shaped: mixture weights, means and variances must have equal non-zero length");
      double wsum = 0.0, mean = 0.0, var = 0.0;
      for (std::size_t i = 0; i < c.weights.size(); ++i) {
        if (!(c.weights[i] > 0.0)) throw std::invalid_argument("make_shaped: mixture weights must be positive");
        if (!(c.variances[i] > 0.0)) throw std::invalid_argument("make_shaped: mixture variances must be positive");
        wsum += c.weights[i];
        mean += c.weights[i] * c.means[i];
        var += c.weights[i] * (c.means[i] * c.means[i] + c.variances[i]);
      }
      if (std::abs(wsum - 1.0) > 1e-9) throw std::invalid_argument("make_shaped: mixture weights must sum to 1");
      if (std::abs(mean) > 1e-9)
        throw std::invalid_argument("make_shaped: mixture must have zero mean (sum of weight*mean = " +
                                    std::to_string(mean) + ")");
      if (std::abs(var - 1.0) > 1e-9)
        throw std::invalid_argument("make_shaped: mixture must have unit variance (got " + std::to_string(var) +
                                    "); see MixtureComponents::standardized");
      return;
    }
  }
}

}  // namespace

NoiseModel::NoiseModel(BaseFamily base, MatrixXd shaping) : base_(std::move(base)), shaping_(std::move(shaping)) {
  const Eigen::PartialPivLU<MatrixXd> lu(shaping_);
  shaping_inv_ = lu.inverse();
  log_abs_det_ = lu.matrixLU().diagonal().cwiseAbs().array().log().sum();
  covariance_ = symmetrize(shaping_ * shaping_.transpose());
}

VectorXd NoiseModel::score(const VectorXd& w) const {
  const VectorXd v = shaping_inv_ * w;
  VectorXd sv(v.size());
  for (Index i = 0; i < v.size(); ++i) sv(i) = base1d::score(base_, v(i));
  return shaping_inv_.transpose() * sv;
}

double NoiseModel::log_density(const VectorXd& w) const {
  const VectorXd v = shaping_inv_ * w;
  double acc = -log_abs_det_;
  for (Index i = 0; i < v.size(); ++i) acc += base1d::log_density(base_, v(i));
  return acc;
}

std::string NoiseModel::id() const {
  std::ostringstream os;
  os << to_string(family()) << "(";
  if (family() == Family::student_t) os << "nu=" << base_.nu << ",";
  if (family() == Family::gauss_mixture) os << "k=" << base_.mixture.weights.size() << ",";
  os << "n=" << dim() << ")";
  return os.str();
}

NoiseModel make_gaussian(const MatrixXd& sigma) {
  require_spd(sigma, "make_gaussian covariance");
  const Eigen::LLT<MatrixXd> llt(symmetrize(sigma));
  return NoiseModel(BaseFamily{Family::gaussian, 0.0, {}}, llt.matrixL());
}

NoiseModel make_shaped(const BaseFamily& base, const MatrixXd& a) {
  validate_base(base);
  if (a.rows() == 0 || a.rows() != a.cols()) throw std::invalid_argument("make_shaped: A must be square and non-empty");
  if (!a.allFinite()) throw std::invalid_argument("make_shaped: A has non-finite entries");
  const Eigen::JacobiSVD<MatrixXd> svd(a);
  const VectorXd& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-12 * sv(0)))
    throw std::invalid_argument("make_shaped: A is singular, singular values " + format_vector(sv));
  return NoiseModel(base, a);
}

namespace {

double draw_base(const BaseFamily& base, Substream& gen) {
  switch (base.family) {
    case Family::gaussian: {
      std::normal_distribution<double> nd(0.0, 1.0);
      return nd(gen);
    }
    case Family::laplace: {
      const double u = gen.uniform();
      const double e = -std::log1p(-u) * base1d::laplace_scale();
      return (gen() >> 63) ? e : -e;
    }
    case Family::student_t: {
      std::student_t_distribution<double> td(base.nu);
      return td(gen) * base1d::student_t_scale(base.nu);
    }
    case Family::gauss_mixture: {
      const auto& c = base.mixture;
      const double u = gen.uniform();
      std::size_t j = 0;
      double cum = c.weights[0];
      while (u >= cum && j + 1 < c.weights.size()) cum += c.weights[++j];
      std::normal_distribution<double> nd(c.means[j], std::sqrt(c.variances[j]));
      return nd(gen);
    }
  }
  return 0.0;
}

}  // namespace

VectorXd sample_base(const NoiseModel& model, std::uint64_t seed, std::uint64_t index) {
  Substream gen(seed, StreamDomain::noise, index);
  VectorXd v(model.dim());
  for (Index j = 0; j < v.size(); ++j) v(j) = draw_base(model.base(), gen);
  return v;
}

SampleBatch sample(const NoiseModel& model, std::uint64_t seed, std::size_t count) {
  if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
  SampleBatch batch;
  batch.seed = seed;
  batch.model_id = model.id();
  batch.data.resize(static_cast<Index>(count), model.dim());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i)
    batch.data.row(i) = model.shape(sample_base(model, seed, static_cast<std::uint64_t>(i))).transpose();
  return batch;
}

namespace serial {

SampleBatch sample(const NoiseModel& model, std::uint64_t seed, std::size_t count) {
  if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
  SampleBatch batch;
  batch.seed = seed;
  batch.model_id = model.id();
  batch.data.resize(static_cast<Index>(count), model.dim());
  for (std::size_t i = 0; i < count; ++i)
    batch.data.row(static_cast<Index>(i)) = model.shape(sample_base(model, seed, i)).transpose();
  return batch;
}

}  // namespace serial

}  // namespace crbkit
