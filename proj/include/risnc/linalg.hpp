#pragma once

#include <complex>

#include <Eigen/Dense>

namespace risnc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline constexpr double kMatrixTolerance = 1e-9;

void symmetrize(Mat& m);
void hermitianize(CMat& m);

bool is_symmetric(const Mat& m, double tol = kMatrixTolerance);
/// Symmetric with strictly positive spectrum.
bool is_spd(const Mat& m, double tol = kMatrixTolerance);
/// Symmetric with smallest eigenvalue >= -tol * max(1, |largest|).
bool is_psd(const Mat& m, double tol = kMatrixTolerance);
bool is_hermitian_psd(const CMat& m, double tol = kMatrixTolerance);

/// Loewner order a <= b, i.e. b - a is PSD within tol.
bool loewner_leq(const Mat& a, const Mat& b, double tol = kMatrixTolerance);

/// Square-root factor S with S S^T = cov. Cholesky when it succeeds,
/// otherwise a symmetric eigendecomposition with eigenvalues below 1e-12
/// clipped to zero.
Mat covariance_factor(const Mat& cov);

/// Solve (S) X = rhs for symmetric positive definite S.
Mat spd_solve(const Mat& s, const Mat& rhs);

/// Real symmetric embedding [Re -Im; Im Re] of a Hermitian matrix.
Mat real_embedding(const CMat& h);

/// Inverse of real_embedding, averaging the two copies of each block.
CMat complex_from_embedding(const Mat& x);

/// Euclidean projection of a symmetric matrix onto the PSD cone.
Mat project_psd(const Mat& m);

}  // namespace risnc
