#include "risnc/lqr.hpp"

#include "risnc/error.hpp"

namespace risnc {

RiccatiSchedule riccati_backward(const ProcessModel& model, int horizon) {
  require(horizon >= 1, "riccati_backward: horizon must be >= 1");
  const Mat& a = model.A();
  const Mat& b = model.B();
  RiccatiSchedule s;
  const auto T = static_cast<std::size_t>(horizon);
  s.omega.resize(T + 1);
  s.gain.resize(T);
  s.weight.resize(T);
  s.omega[T] = model.D();
  for (std::size_t t = T; t-- > 0;) {
    const Mat& next = s.omega[t + 1];
    Mat curvature = b.transpose() * next * b + model.E();
    symmetrize(curvature);
    const Mat bt_omega_a = b.transpose() * next * a;
    s.gain[t] = -spd_solve(curvature, bt_omega_a);
    Mat omega = a.transpose() * next * a + model.D() + bt_omega_a.transpose() * s.gain[t];
    symmetrize(omega);
    s.omega[t] = omega;
    Mat f = a.transpose() * next * a + model.D() - omega;
    symmetrize(f);
    s.weight[t] = f;
  }
  return s;
}

Vec control_action(const Mat& gain, const Vec& x_hat_c) {
  require(gain.cols() == x_hat_c.size(), "control_action: dimension mismatch");
  return gain * x_hat_c;
}

double realized_cost(const Trajectory& trajectory, const ProcessModel& model) {
  require(trajectory.states.size() == trajectory.controls.size() + 1,
          "realized_cost: need one more state than controls");
  double total = 0.0;
  for (const Vec& x : trajectory.states) total += x.dot(model.D() * x);
  for (const Vec& u : trajectory.controls) total += u.dot(model.E() * u);
  return total;
}

double realized_cost(std::span<const Trajectory> trajectories,
                     std::span<const ProcessModel> models) {
  require(trajectories.size() == models.size(), "realized_cost: plant count mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < models.size(); ++k) total += realized_cost(trajectories[k], models[k]);
  return total;
}

double cost_to_come(const RiccatiSchedule& schedule, std::span<const Mat> p_bar,
                    const ProcessModel& model, int s) {
  require(s >= -1 && s < schedule.horizon(), "cost_to_come: slot out of range");
  require(static_cast<int>(p_bar.size()) >= s + 1, "cost_to_come: missing expected covariances");
  double total = (schedule.omega[0] * model.P0()).trace();
  for (int t = 0; t <= s; ++t) {
    const auto i = static_cast<std::size_t>(t);
    total += (schedule.omega[i + 1] * model.W()).trace();
    total += (schedule.weight[i] * p_bar[i]).trace();
  }
  return total;
}

}  // namespace risnc
