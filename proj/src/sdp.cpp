#include "risnc/sdp.hpp"

#include <cmath>

#include "risnc/error.hpp"

namespace risnc {

namespace {

// D^-1/2 Y D^-1/2 keeps Y PSD and forces a unit diagonal.
Mat unit_diagonal(const Mat& y) {
  Vec scale = y.diagonal().unaryExpr([](double d) { return d > 1e-300 ? 1.0 / std::sqrt(d) : 0.0; });
  Mat out = scale.asDiagonal() * y * scale.asDiagonal();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    if (scale(i) == 0.0) {
      out.row(i).setZero();
      out.col(i).setZero();
    }
    out(i, i) = 1.0;
  }
  return out;
}

}  // namespace

SdpSolution solve_sdp(const CMat& q, const SdpSettings& settings) {
  require(q.rows() == q.cols() && q.rows() >= 1, "solve_sdp: objective must be square");
  require(q.allFinite(), "solve_sdp: objective has non-finite entries");
  const double herm_scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  require((q - q.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * herm_scale,
          "solve_sdp: objective is not Hermitian");
  require(settings.tolerance > 0.0 && settings.max_iterations >= 1, "solve_sdp: bad settings");

  const Eigen::Index n = q.rows();
  const Eigen::Index dim = 2 * n;
  CMat qh = 0.5 * (q + q.adjoint());
  Mat c = real_embedding(qh);
  const double c_norm = c.norm();

  SdpSolution sol;
  if (c_norm == 0.0) {
    sol.sigma = CMat::Identity(n, n);
    sol.objective = 0.0;
    sol.converged = true;
    return sol;
  }
  c /= c_norm;

  Mat y = Mat::Identity(dim, dim);
  Mat u = Mat::Zero(dim, dim);
  Mat x = y;
  double rho = settings.initial_penalty;
  const double abs_tol = settings.tolerance * static_cast<double>(dim);

  int it = 0;
  for (; it < settings.max_iterations; ++it) {
    x = y - u + c / rho;
    x.diagonal().setOnes();
    const Mat y_prev = y;
    y = project_psd(x + u);
    u += x - y;

    sol.primal_residual = (x - y).norm();
    sol.dual_residual = rho * (y - y_prev).norm();
    const double eps_primal = abs_tol + settings.tolerance * std::max(x.norm(), y.norm());
    const double eps_dual = abs_tol + settings.tolerance * rho * u.norm();
    if (sol.primal_residual <= eps_primal && sol.dual_residual <= eps_dual) {
      sol.converged = true;
      ++it;
      break;
    }
    if (sol.primal_residual > 10.0 * sol.dual_residual) {
      rho *= 2.0;
      u /= 2.0;
    } else if (sol.dual_residual > 10.0 * sol.primal_residual) {
      rho /= 2.0;
      u *= 2.0;
    }
  }
  sol.iterations = it;

  CMat sigma = complex_from_embedding(unit_diagonal(y));
  hermitianize(sigma);
  sigma.diagonal().setOnes();
  sol.sigma = sigma;
  sol.objective = (qh * sigma).trace().real();
  return sol;
}

}  // namespace risnc
