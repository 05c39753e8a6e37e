#include "risnc/estimation.hpp"

#include "risnc/error.hpp"

namespace risnc {

SensorFilterState initial_filter(const ProcessModel& model) {
  SensorFilterState f;
  const Eigen::Index n = model.state_dim();
  f.x_pred = Vec::Zero(n);
  f.P_pred = model.P0();
  f.x_hat = f.x_pred;
  f.P = f.P_pred;
  return f;
}

SensorFilterState kf_predict(const SensorFilterState& filter, const Vec& u,
                             const ProcessModel& model) {
  require(u.size() == model.input_dim(), "kf_predict: input dimension mismatch");
  SensorFilterState out = filter;
  out.x_pred = model.A() * filter.x_hat + model.B() * u;
  out.P_pred = model.A() * filter.P * model.A().transpose() + model.W();
  symmetrize(out.P_pred);
  return out;
}

SensorFilterState kf_update(const SensorFilterState& filter, const Vec& y,
                            const ProcessModel& model) {
  require(y.size() == model.output_dim(), "kf_update: measurement dimension mismatch");
  const Mat& c = model.C();
  Mat s = c * filter.P_pred * c.transpose() + model.V();
  symmetrize(s);
  Eigen::LLT<Mat> llt(s);
  if (llt.info() != Eigen::Success) throw Error("kf_update: innovation covariance is singular");
  // K = P_pred C^T S^-1, computed as (S^-1 C P_pred)^T.
  const Mat gain = llt.solve(c * filter.P_pred).transpose();
  SensorFilterState out = filter;
  out.x_hat = filter.x_pred + gain * (y - c * filter.x_pred);
  const Eigen::Index n = model.state_dim();
  out.P = (Mat::Identity(n, n) - gain * c) * filter.P_pred;
  symmetrize(out.P);
  return out;
}

std::vector<Mat> sensor_covariance_schedule(const ProcessModel& model, int horizon) {
  require(horizon >= 1, "sensor_covariance_schedule: horizon must be >= 1");
  std::vector<Mat> out;
  out.reserve(static_cast<std::size_t>(horizon));
  SensorFilterState f = initial_filter(model);
  const Vec y0 = Vec::Zero(model.output_dim());
  const Vec u0 = Vec::Zero(model.input_dim());
  for (int t = 0; t < horizon; ++t) {
    if (t > 0) f = kf_predict(f, u0, model);
    f = kf_update(f, y0, model);
    out.push_back(f.P);
  }
  return out;
}

ControllerEstimate initial_controller_estimate(const ProcessModel& model) {
  return ControllerEstimate{Vec::Zero(model.state_dim()), false};
}

ControllerEstimate controller_update(const ControllerEstimate& prev, bool delta,
                                     const Vec& x_hat_s, const ProcessModel& model,
                                     const Vec& u_prev, LossPropagation mode) {
  ControllerEstimate out;
  out.last_delta = delta;
  if (delta) {
    out.x_hat = x_hat_s;
  } else if (mode == LossPropagation::kWithInput) {
    out.x_hat = model.A() * prev.x_hat + model.B() * u_prev;
  } else {
    out.x_hat = model.A() * prev.x_hat;
  }
  return out;
}

ControllerEstimate replicate_controller_estimate(const ControllerEstimate& replica, bool ack,
                                                 const Vec& x_hat_s, const ProcessModel& model,
                                                 const Vec& u_prev, LossPropagation mode) {
  return controller_update(replica, ack, x_hat_s, model, u_prev, mode);
}

Mat loss_branch_covariance(const Mat* p_prev, const ProcessModel& model) {
  if (p_prev == nullptr) return model.P0();
  Mat out = model.A() * (*p_prev) * model.A().transpose() + model.W();
  symmetrize(out);
  return out;
}

Mat expected_cov_step(const Mat& p_bar_prev, const Mat& p_s_posterior, double p_err,
                      const ProcessModel& model) {
  require(p_err >= 0.0 && p_err <= 1.0, "expected_cov_step: p_err must lie in [0, 1]");
  const Mat lost = loss_branch_covariance(&p_bar_prev, model);
  Mat out = p_s_posterior + (lost - p_s_posterior) * p_err;
  symmetrize(out);
  return out;
}

Mat expected_cov_initial(const Mat& p_s_posterior, double p_err, const ProcessModel& model) {
  require(p_err >= 0.0 && p_err <= 1.0, "expected_cov_initial: p_err must lie in [0, 1]");
  Mat out = p_s_posterior + (model.P0() - p_s_posterior) * p_err;
  symmetrize(out);
  return out;
}

}  // namespace risnc
