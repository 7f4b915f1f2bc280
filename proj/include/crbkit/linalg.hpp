#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

namespace crbkit {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

MatrixXd symmetrize(const MatrixXd& m);

/// Smallest eigenvalue of the symmetric part of `m`.
double eigmin(const MatrixXd& m);
double eigmax(const MatrixXd& m);

/// Throws std::invalid_argument naming `what` and listing the eigenvalues when
/// `m` is not symmetric (relative 1e-10) or not positive definite.
void require_spd(const MatrixXd& m, const std::string& what);

/// Same, but zero eigenvalues allowed (down to -1e-12 relative).
void require_psd(const MatrixXd& m, const std::string& what);

/// Symmetric inverse square root of an SPD matrix.
MatrixXd inverse_sqrt_spd(const MatrixXd& m);

/// Symmetric square root of a PSD matrix (negative round-off clipped to 0).
MatrixXd sqrt_psd(const MatrixXd& m);

/// Upper bound on spectral-norm noise of an estimate whose entries carry the
/// given standard errors: the Frobenius norm of the stderr matrix.
inline double aggregate_stderr(const MatrixXd& std_error) { return std_error.norm(); }

std::string format_vector(const VectorXd& v);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

}  // namespace crbkit

namespace crbkit {

/// One Monte Carlo draw per row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace crbkit
