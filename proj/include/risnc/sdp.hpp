#pragma once

#include "risnc/linalg.hpp"

namespace risnc {

struct SdpSettings {
  double tolerance = 1e-6;
  int max_iterations = 5000;
  double initial_penalty = 1.0;
};

/// Solution of  max tr(Q Sigma)  s.t.  Sigma >= 0, diag(Sigma) = 1.
struct SdpSolution {
  CMat sigma;
  double objective = 0.0;  ///< Re tr(Q Sigma) at the returned Sigma
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
};

/// Diagonally constrained complex SDP solved on the real embedding
/// [Re -Im; Im Re] by ADMM: the X step is an affine projection onto unit
/// diagonal, the Y step an eigenvalue projection onto the PSD cone, with
/// residual-balancing penalty updates. The returned Sigma is the PSD iterate
/// rescaled to exactly unit diagonal. Throws Error on non-Hermitian input.
/// Non-convergence within the cap returns the last iterate with converged=false.
SdpSolution solve_sdp(const CMat& q, const SdpSettings& settings = {});

}  // namespace risnc
