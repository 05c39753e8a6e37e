#pragma once

#include <span>
#include <vector>

#include "risnc/linalg.hpp"
#include "risnc/process.hpp"

namespace risnc {

/// Finite-horizon LQ schedule. omega has horizon+1 entries (omega[T] = D);
/// gain and weight (the F matrices) have horizon entries.
struct RiccatiSchedule {
  std::vector<Mat> omega;
  std::vector<Mat> gain;
  std::vector<Mat> weight;

  int horizon() const { return static_cast<int>(gain.size()); }
};

RiccatiSchedule riccati_backward(const ProcessModel& model, int horizon);

/// u = L x_hat.
Vec control_action(const Mat& gain, const Vec& x_hat_c);

/// States x(0..T) and controls u(0..T-1) of one plant.
struct Trajectory {
  std::vector<Vec> states;
  std::vector<Vec> controls;
};

/// sum_t x^T D x + sum_t u^T E u for one plant.
double realized_cost(const Trajectory& trajectory, const ProcessModel& model);

/// Total over plants.
double realized_cost(std::span<const Trajectory> trajectories,
                     std::span<const ProcessModel> models);

/// Per-plant share of the expected cost decomposition
///   tr(Omega(0) P0) + sum_{t<=s} tr(Omega(t+1) W) + sum_{t<=s} tr(F(t) Pbar(t)).
/// s = -1 keeps only the prior term. p_bar must cover slots 0..s.
double cost_to_come(const RiccatiSchedule& schedule, std::span<const Mat> p_bar,
                    const ProcessModel& model, int s);

}  // namespace risnc
