#pragma once

#include "risnc/linalg.hpp"
#include "risnc/random.hpp"

namespace risnc {

/// Linear-Gaussian plant x' = A x + B u + w, y = C x + v with LQ cost weights.
/// Construction validates dimensions and definiteness (W, V, D, E positive
/// definite; P0 positive semidefinite) and caches the noise square roots.
class ProcessModel {
 public:
  ProcessModel(Mat a, Mat b, Mat c, Mat w, Mat v, Mat d, Mat e, Mat p0);

  /// Scalar plant with the given coefficients.
  static ProcessModel scalar(double a, double b = 1.0, double c = 1.0, double w = 1.0,
                             double v = 1.0, double d = 1.0, double e = 1.0, double p0 = 1.0);

  const Mat& A() const { return a_; }
  const Mat& B() const { return b_; }
  const Mat& C() const { return c_; }
  const Mat& W() const { return w_; }
  const Mat& V() const { return v_; }
  const Mat& D() const { return d_; }
  const Mat& E() const { return e_; }
  const Mat& P0() const { return p0_; }

  Eigen::Index state_dim() const { return a_.rows(); }
  Eigen::Index input_dim() const { return b_.cols(); }
  Eigen::Index output_dim() const { return c_.rows(); }

  const Mat& process_noise_factor() const { return w_root_; }
  const Mat& measurement_noise_factor() const { return v_root_; }
  const Mat& initial_factor() const { return p0_root_; }

 private:
  Mat a_, b_, c_, w_, v_, d_, e_, p0_;
  Mat w_root_, v_root_, p0_root_;
};

struct PlantState {
  Vec x;
  int t = 0;
};

/// x(0) ~ N(0, P0).
PlantState init_state(const ProcessModel& model, RandomStream& rng);

/// x(t+1) = A x + B u + w, w ~ N(0, W).
PlantState step_process(const PlantState& state, const Vec& u, const ProcessModel& model,
                        RandomStream& rng);

/// y = C x + v, v ~ N(0, V).
Vec measure(const PlantState& state, const ProcessModel& model, RandomStream& rng);

}  // namespace risnc
