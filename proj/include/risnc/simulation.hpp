#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "risnc/channel.hpp"
#include "risnc/config.hpp"
#include "risnc/lqr.hpp"
#include "risnc/phase_opt.hpp"

namespace risnc {

/// Concrete instance: plant models, geometry and link statistics.
struct Scenario {
  Config config;
  std::vector<ProcessModel> models;
  ChannelStatistics channel;
  std::vector<double> rates;
  double noise = 1e-5;

  int plants() const { return static_cast<int>(models.size()); }
  int elements() const { return channel.elements; }
  int horizon() const { return config.horizon; }
};

/// Draws plant coefficients and positions from the config's ranges. Sensors
/// lie in the first quadrant, controllers in the second; explicit values in
/// the config take precedence over draws.
Scenario generate_scenario(const Config& config, RandomStream& rng);
Scenario generate_scenario(const Config& config, std::uint64_t seed);

/// Quantities fixed for a scenario: LQ schedules, sensor covariances, channel
/// moments, Markov-bound constants and (for dp_oracle) the phase sequence.
struct ScenarioPrecomputation {
  std::vector<RiccatiSchedule> schedules;
  std::vector<std::vector<Mat>> sensor_covariances;
  MomentSet moments{1, 1};
  std::vector<QuadraticForm> forms;
  std::vector<GammaEstimate> gammas;
  std::optional<ValueTable> oracle;
};

ScenarioPrecomputation precompute(const Scenario& scenario, std::uint64_t seed,
                                  bool with_oracle = false);

/// Oracle problem on the config's grid and oracle horizon.
OracleProblem oracle_problem(const Scenario& scenario, const ScenarioPrecomputation& pre,
                             int horizon, std::uint64_t seed);

struct PlantSlot {
  bool delta = false;
  double sinr = 0.0;
  double predicted_error = 0.0;  ///< Markov bound at the chosen phase
  double estimated_error = 0.0;  ///< Monte-Carlo erasure probability at the chosen phase
  double stage_cost = 0.0;       ///< x^T D x + u^T E u
  double cost_to_come = 0.0;     ///< this plant's share, expected covariance, s = t
  Mat expected_covariance;       ///< Pbar(t) used for cost_to_come
  Vec x;
  Vec x_hat_s;
  Vec x_hat_c;
  Vec u;
};

struct SolverDiagnostics {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  bool converged = true;
  bool fallback = false;
  std::vector<int> floored;
};

struct RunTrace {
  Policy policy = Policy::kSdpLookahead;
  int replication = 0;
  std::vector<std::vector<PlantSlot>> slots;  ///< [t][k], t = 0..T-1
  std::vector<PhaseVector> phases;            ///< per slot
  std::vector<SolverDiagnostics> solver;      ///< per slot (sdp_lookahead only)
  std::vector<Trajectory> trajectories;       ///< per plant
  std::vector<double> terminal_cost;          ///< x(T)^T D x(T) per plant
  std::vector<double> terminal_cost_to_come;  ///< per plant, s = T-1
  double total_realized_cost = 0.0;
  double wall_clock_seconds = 0.0;
  bool diverged = false;  ///< some state left |x| <= 1e150 or became non-finite
  bool ack_consistent = true;

  /// Summed over plants; index t = 0..T, where T repeats the full-horizon value.
  std::vector<double> total_cost_to_come() const;
};

inline constexpr double kDivergenceThreshold = 1e150;

/// One closed-loop run. Per slot: the RIS picks phases from statistics,
/// the channel is drawn, sensors measure and filter, deliveries are decided,
/// controllers update, controls are applied and plants step.
RunTrace run_closed_loop(const Scenario& scenario, const ScenarioPrecomputation& pre,
                         Policy policy, std::uint64_t seed, int replication);

struct SummaryRow {
  Policy policy = Policy::kSdpLookahead;
  int slot = 0;
  double mean_cost_to_come = 0.0;
  double stderr_cost_to_come = 0.0;
};

struct ExperimentResult {
  std::vector<Policy> policies;
  int replications = 0;
  int horizon = 0;
  std::vector<std::vector<RunTrace>> traces;  ///< [policy][replication]
  std::vector<SummaryRow> summary;            ///< policies x (T + 1) rows

  /// Final-horizon total expected cost-to-come per replication.
  std::vector<double> final_cost_to_come(std::size_t policy_index) const;
};

/// Replications in parallel (OpenMP). Every replication r derives its
/// streams from (seed, r, purpose), shared by all policies, and the reduction
/// runs in replication order, so the output matches run_experiment_serial
/// bit for bit.
ExperimentResult run_experiment(const Scenario& scenario, const std::vector<Policy>& policies,
                                int replications, std::uint64_t seed);
ExperimentResult run_experiment_serial(const Scenario& scenario,
                                       const std::vector<Policy>& policies, int replications,
                                       std::uint64_t seed);

std::vector<SummaryRow> summarize(const std::vector<Policy>& policies,
                                  const std::vector<std::vector<RunTrace>>& traces, int horizon);

}  // namespace risnc
