#include "risnc/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "risnc/error.hpp"

namespace risnc {

void symmetrize(Mat& m) { m = 0.5 * (m + m.transpose()).eval(); }

void hermitianize(CMat& m) { m = 0.5 * (m + m.adjoint()).eval(); }

bool is_symmetric(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_spd(const Mat& m, double tol) {
  if (!is_symmetric(m, tol) || m.size() == 0) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}

bool is_psd(const Mat& m, double tol) {
  if (!is_symmetric(m, tol)) return false;
  if (m.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev.minCoeff() >= -tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
}

bool is_hermitian_psd(const CMat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev.minCoeff() >= -tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
}

bool loewner_leq(const Mat& a, const Mat& b, double tol) {
  Mat d = b - a;
  symmetrize(d);
  return is_psd(d, tol);
}

Mat covariance_factor(const Mat& cov) {
  require(cov.rows() == cov.cols(), "covariance_factor: matrix is not square");
  if (cov.size() == 0) return cov;
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() == Eigen::Success) {
    Mat l = llt.matrixL();
    if (l.diagonal().minCoeff() > 0.0 && l.allFinite()) return l;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  Vec root = es.eigenvalues().unaryExpr([](double v) { return v < 1e-12 ? 0.0 : std::sqrt(v); });
  return es.eigenvectors() * root.asDiagonal();
}

Mat spd_solve(const Mat& s, const Mat& rhs) {
  Eigen::LLT<Mat> llt(s);
  if (llt.info() != Eigen::Success) throw Error("spd_solve: matrix is not positive definite");
  return llt.solve(rhs);
}

Mat real_embedding(const CMat& h) {
  const Eigen::Index n = h.rows();
  Mat out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real();
  out.topRightCorner(n, n) = -h.imag();
  out.bottomLeftCorner(n, n) = h.imag();
  out.bottomRightCorner(n, n) = h.real();
  return out;
}

CMat complex_from_embedding(const Mat& x) {
  const Eigen::Index n = x.rows() / 2;
  const Mat re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
  const Mat im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
  CMat out(n, n);
  out.real() = re;
  out.imag() = im;
  return out;
}

Mat project_psd(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  const Vec clipped = es.eigenvalues().cwiseMax(0.0);
  Mat p = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  symmetrize(p);
  return p;
}

}  // namespace risnc
