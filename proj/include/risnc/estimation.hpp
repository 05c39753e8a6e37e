#pragma once

#include <vector>

#include "risnc/linalg.hpp"
#include "risnc/process.hpp"

namespace risnc {

/// Sensor-side Kalman filter: posterior (x_hat, P) and one-step prediction.
struct SensorFilterState {
  Vec x_hat;
  Mat P;
  Vec x_pred;
  Mat P_pred;
};

/// Filter positioned before the first measurement: prediction = prior N(0, P0).
SensorFilterState initial_filter(const ProcessModel& model);

SensorFilterState kf_predict(const SensorFilterState& filter, const Vec& u,
                             const ProcessModel& model);

/// Gain-form update P = (I - K C) P_pred, K = P_pred C^T (C P_pred C^T + V)^-1.
SensorFilterState kf_update(const SensorFilterState& filter, const Vec& y,
                            const ProcessModel& model);

/// Posterior covariances P_s(t|t) for t = 0..horizon-1. They do not depend on
/// data, so the RIS and the cost accounting can precompute them.
std::vector<Mat> sensor_covariance_schedule(const ProcessModel& model, int horizon);

/// How the controller propagates its estimate in a slot with no delivery.
enum class LossPropagation {
  kWithInput,  ///< x_c <- A x_c + B u_prev (MMSE given the controller's information)
  kStateOnly,  ///< x_c <- A x_c, the literal estimator form
};

struct ControllerEstimate {
  Vec x_hat;
  bool last_delta = false;
};

/// Controller estimate before slot 0: the prior mean.
ControllerEstimate initial_controller_estimate(const ProcessModel& model);

ControllerEstimate controller_update(const ControllerEstimate& prev, bool delta,
                                     const Vec& x_hat_s, const ProcessModel& model,
                                     const Vec& u_prev,
                                     LossPropagation mode = LossPropagation::kWithInput);

/// Sensor-side replica of the controller estimate, advanced from the ack bit.
/// Uses exactly the controller's arithmetic so the two stay bit-identical
/// while ack == delta.
ControllerEstimate replicate_controller_estimate(const ControllerEstimate& replica, bool ack,
                                                 const Vec& x_hat_s, const ProcessModel& model,
                                                 const Vec& u_prev,
                                                 LossPropagation mode = LossPropagation::kWithInput);

/// Expected controller covariance map
///   f(Pbar, p) = P_s + (A Pbar A^T + W - P_s) p.
Mat expected_cov_step(const Mat& p_bar_prev, const Mat& p_s_posterior, double p_err,
                      const ProcessModel& model);

/// Slot-0 variant: a loss leaves the controller with the prior covariance P0.
Mat expected_cov_initial(const Mat& p_s_posterior, double p_err, const ProcessModel& model);

/// Loss-branch prior for slot t given the previous controller covariance
/// (t == 0 uses P0).
Mat loss_branch_covariance(const Mat* p_prev, const ProcessModel& model);

}  // namespace risnc
