#include "crbkit/linalg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace crbkit {

MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double eigmin(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double eigmax(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_vector(const VectorXd& v) {
  std::string out = "[";
  for (Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v(i));
  return out + "]";
}

namespace {

void require_square_symmetric(const MatrixXd& m, const std::string& what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw std::invalid_argument(what + ": expected a non-empty square matrix");
  if (!m.allFinite()) throw std::invalid_argument(what + ": non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument(what + ": matrix is not symmetric");
}

}  // namespace

void require_spd(const MatrixXd& m, const std::string& what) {
  require_square_symmetric(m, what);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m), Eigen::EigenvaluesOnly);
  const VectorXd& ev = es.eigenvalues();
  if (!(ev(0) > 1e-14 * std::max(1.0, ev(ev.size() - 1))))
    throw std::invalid_argument(what + ": matrix is not positive definite, eigenvalues " +
                                format_vector(ev));
}

void require_psd(const MatrixXd& m, const std::string& what) {
  require_square_symmetric(m, what);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m), Eigen::EigenvaluesOnly);
  const VectorXd& ev = es.eigenvalues();
  if (ev(0) < -1e-12 * std::max(1.0, std::abs(ev(ev.size() - 1))))
    throw std::invalid_argument(what + ": matrix has a negative eigenvalue, eigenvalues " +
                                format_vector(ev));
}

MatrixXd inverse_sqrt_spd(const MatrixXd& m) {
  require_spd(m, "inverse square root");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m));
  const VectorXd d = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return symmetrize(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose());
}

MatrixXd sqrt_psd(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m));
  const VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace crbkit
