#include "risnc/simulation.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>

#include <omp.h>

#include "risnc/error.hpp"
#include "risnc/estimation.hpp"

namespace risnc {

namespace {

// Stream purposes; each (seed, replication, purpose, ...) path is independent.
enum Purpose : std::uint64_t {
  kPlantNoise = 1,
  kChannel = 2,
  kPolicy = 3,
  kScenario = 4,
  kPrecompute = 5,
  kEvaluation = 6,
  kRisInternal = 7,
};

Point draw_position(RandomStream& rng, const std::array<double, 2>& distance, double angle_lo,
                    double angle_hi) {
  const double r = rng.uniform(distance[0], distance[1]);
  const double a = rng.uniform(angle_lo, angle_hi);
  return {r * std::cos(a), r * std::sin(a)};
}

// Markov bound per plant; 1 where gamma is infeasible.
std::vector<double> markov_predictions(const LookaheadTerms& terms,
                                       const std::vector<GammaEstimate>& gammas,
                                       const PhaseVector& phase) {
  std::vector<double> out(gammas.size(), 1.0);
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (!gammas[k].feasible) continue;
    out[k] = markov_bound_from_margin(expected_margin(terms.forms[k], phase), terms.gammas[k],
                                      terms.rates[k], terms.noise);
  }
  return out;
}

bool exceeds(const Vec& x) {
  return !x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceThreshold;
}

}  // namespace

Scenario generate_scenario(const Config& config, RandomStream& rng) {
  config.validate();
  Scenario s;
  s.config = config;
  const int K = config.plants.count;
  const auto& pc = config.plants;
  if (!pc.models.empty()) {
    s.models = pc.models;
  } else {
    const Eigen::Index n = pc.state_dim;
    const Mat eye = Mat::Identity(n, n);
    for (int k = 0; k < K; ++k) {
      const double a = pc.a_values.empty() ? rng.uniform(pc.a_range[0], pc.a_range[1])
                                           : pc.a_values[static_cast<std::size_t>(k)];
      s.models.emplace_back(a * eye, pc.b * eye, pc.c * eye, pc.w * eye, pc.v * eye, pc.d * eye,
                            pc.e * eye, pc.p0 * eye);
    }
  }
  std::vector<Point> sensors = config.geometry.sensors;
  std::vector<Point> controllers = config.geometry.controllers;
  if (sensors.empty()) {
    constexpr double half_pi = std::numbers::pi / 2.0;
    for (int k = 0; k < K; ++k) {
      sensors.push_back(draw_position(rng, config.geometry.sensor_distance, 0.0, half_pi));
    }
    for (int k = 0; k < K; ++k) {
      controllers.push_back(
          draw_position(rng, config.geometry.controller_distance, half_pi, std::numbers::pi));
    }
  }
  s.channel = ChannelStatistics::from_geometry(std::move(sensors), std::move(controllers),
                                               config.elements, config.channel.direct,
                                               config.channel.sensor_ris,
                                               config.channel.ris_controller);
  s.rates = config.channel.rates.empty()
                ? std::vector<double>(static_cast<std::size_t>(K), config.channel.rate)
                : config.channel.rates;
  s.noise = config.channel.noise;
  return s;
}

Scenario generate_scenario(const Config& config, std::uint64_t seed) {
  RandomStream rng = RandomStream::derive(seed, {kScenario});
  return generate_scenario(config, rng);
}

ScenarioPrecomputation precompute(const Scenario& scenario, std::uint64_t seed, bool with_oracle) {
  ScenarioPrecomputation pre;
  const int T = scenario.horizon();
  for (const ProcessModel& m : scenario.models) {
    pre.schedules.push_back(riccati_backward(m, T));
    pre.sensor_covariances.push_back(sensor_covariance_schedule(m, T));
  }
  const ChannelConfig& cc = scenario.config.channel;
  RandomStream moment_rng = RandomStream::derive(seed, {kPrecompute, 0});
  pre.moments = estimate_moments(scenario.channel, cc.moment_samples, moment_rng);
  pre.forms = assemble_q_all(pre.moments, scenario.rates);
  for (int k = 0; k < scenario.plants(); ++k) {
    RandomStream gamma_rng = RandomStream::derive(seed, {kPrecompute, 1, static_cast<std::uint64_t>(k)});
    pre.gammas.push_back(estimate_gamma(scenario.channel, k, scenario.rates[static_cast<std::size_t>(k)],
                                        scenario.noise, cc.gamma_samples, gamma_rng, cc.gamma_margin));
  }
  if (with_oracle) {
    const OracleProblem problem = oracle_problem(scenario, pre, T, seed);
    pre.oracle = dp_oracle(problem);
  }
  return pre;
}

OracleProblem oracle_problem(const Scenario& scenario, const ScenarioPrecomputation& pre,
                             int horizon, std::uint64_t seed) {
  (void)pre;
  RandomStream rng = RandomStream::derive(seed, {kPrecompute, 2});
  return make_oracle_problem(scenario.models, scenario.channel, scenario.rates, scenario.noise,
                             phase_grid(scenario.elements(), scenario.config.oracle.grid_points),
                             horizon, scenario.config.oracle.outage_samples, rng);
}

std::vector<double> RunTrace::total_cost_to_come() const {
  std::vector<double> out;
  out.reserve(slots.size() + 1);
  for (const auto& slot : slots) {
    double total = 0.0;
    for (const PlantSlot& p : slot) total += p.cost_to_come;
    out.push_back(total);
  }
  double final_total = 0.0;
  for (double c : terminal_cost_to_come) final_total += c;
  out.push_back(final_total);
  return out;
}

RunTrace run_closed_loop(const Scenario& scenario, const ScenarioPrecomputation& pre,
                         Policy policy, std::uint64_t seed, int replication) {
  const auto start = std::chrono::steady_clock::now();
  const int K = scenario.plants();
  const int M = scenario.elements();
  const int T = scenario.horizon();
  const auto Ku = static_cast<std::size_t>(K);
  const Config& cfg = scenario.config;
  const auto rep = static_cast<std::uint64_t>(replication);
  require(static_cast<int>(pre.schedules.size()) == K && static_cast<int>(pre.gammas.size()) == K,
          "run_closed_loop: precomputation does not match scenario");
  if (policy == Policy::kDpOracle) {
    require(pre.oracle.has_value() && pre.oracle->horizon >= T,
            "run_closed_loop: dp_oracle policy needs an oracle sequence covering the horizon");
  }

  std::vector<RandomStream> plant_rng;
  for (int k = 0; k < K; ++k) {
    plant_rng.push_back(RandomStream::derive(seed, {rep, kPlantNoise, static_cast<std::uint64_t>(k)}));
  }
  RandomStream channel_rng = RandomStream::derive(seed, {rep, kChannel});
  RandomStream policy_rng = RandomStream::derive(seed, {rep, kPolicy});

  RunTrace trace;
  trace.policy = policy;
  trace.replication = replication;
  trace.slots.assign(static_cast<std::size_t>(T), std::vector<PlantSlot>(Ku));
  trace.trajectories.resize(Ku);
  trace.terminal_cost.assign(Ku, 0.0);
  trace.terminal_cost_to_come.assign(Ku, 0.0);

  std::vector<PlantState> states;
  std::vector<SensorFilterState> filters;
  std::vector<ControllerEstimate> controllers;
  std::vector<ControllerEstimate> replicas;
  std::vector<Vec> last_u;
  for (int k = 0; k < K; ++k) {
    const ProcessModel& m = scenario.models[static_cast<std::size_t>(k)];
    states.push_back(init_state(m, plant_rng[static_cast<std::size_t>(k)]));
    filters.push_back(initial_filter(m));
    controllers.push_back(initial_controller_estimate(m));
    replicas.push_back(initial_controller_estimate(m));
    last_u.push_back(Vec::Zero(m.input_dim()));
    trace.trajectories[static_cast<std::size_t>(k)].states.push_back(states.back().x);
  }

  std::vector<Mat> ris_p_bar(Ku);   // the RIS's internal expected covariance
  std::vector<std::vector<Mat>> eval_p_bar(Ku);  // evaluation, Monte-Carlo erasure rates

  LookaheadTerms terms;
  terms.forms = pre.forms;
  terms.rates = scenario.rates;
  terms.noise = scenario.noise;
  terms.trace_fg.assign(Ku, 0.0);
  for (const GammaEstimate& g : pre.gammas) terms.gammas.push_back(g.value);

  for (int t = 0; t < T; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    auto& slot = trace.slots[ti];

    // 1. RIS phase decision from statistics only.
    PhaseVector phase;
    SolverDiagnostics diag;
    std::vector<double> predicted(Ku, std::numeric_limits<double>::quiet_NaN());
    switch (policy) {
      case Policy::kSdpLookahead: {
        // Plants whose gamma cannot exceed the noise floor never decode; they
        // sit out of the SDP with erasure probability 1.
        LookaheadTerms active;
        active.noise = terms.noise;
        std::vector<std::size_t> members;
        for (std::size_t k = 0; k < Ku; ++k) {
          if (!pre.gammas[k].feasible) continue;
          const Mat g = g_matrix(scenario.models[k], t == 0 ? nullptr : &ris_p_bar[k],
                                 pre.sensor_covariances[k][ti]);
          members.push_back(k);
          active.trace_fg.push_back((pre.schedules[k].weight[ti] * g).trace());
          active.forms.push_back(terms.forms[k]);
          active.gammas.push_back(terms.gammas[k]);
          active.rates.push_back(terms.rates[k]);
        }
        predicted.assign(Ku, 1.0);
        if (members.empty()) {
          phase = random_phase_baseline(M, policy_rng);
          diag.fallback = true;
        } else {
          const PhaseDecision d = choose_phase_sdp(active, cfg.policy.solver,
                                                   cfg.policy.randomization_trials, policy_rng);
          phase = d.phase;
          for (std::size_t i = 0; i < members.size(); ++i) predicted[members[i]] = d.predicted_error[i];
          diag.iterations = d.solver.iterations;
          diag.primal_residual = d.solver.primal_residual;
          diag.dual_residual = d.solver.dual_residual;
          diag.objective = d.solver.objective;
          diag.converged = d.solver.converged || d.fallback;
          diag.fallback = d.fallback;
          for (int i : d.floored) diag.floored.push_back(static_cast<int>(members[static_cast<std::size_t>(i)]));
        }
        std::vector<double> pe = predicted;
        if (cfg.policy.propagation == ErrorPropagation::kMonteCarlo) {
          RandomStream internal = RandomStream::derive(seed, {rep, kRisInternal, ti});
          pe = estimate_outage(scenario.channel, phase, scenario.rates, scenario.noise,
                               cfg.channel.outage_samples, internal);
        }
        for (std::size_t k = 0; k < Ku; ++k) {
          const Mat& ps = pre.sensor_covariances[k][ti];
          ris_p_bar[k] = t == 0 ? expected_cov_initial(ps, pe[k], scenario.models[k])
                                : expected_cov_step(ris_p_bar[k], ps, pe[k], scenario.models[k]);
        }
        break;
      }
      case Policy::kRandomPhase:
        phase = random_phase_baseline(M, policy_rng);
        predicted = markov_predictions(terms, pre.gammas, phase);
        break;
      case Policy::kDpOracle:
        phase = pre.oracle->phases[ti];
        predicted = markov_predictions(terms, pre.gammas, phase);
        break;
    }
    trace.phases.push_back(phase);
    trace.solver.push_back(diag);

    // 2. Channel draw for this slot.
    ChannelRealization realization = sample_realization(scenario.channel, channel_rng);
    realization.slot = t;

    // Erasure probabilities at the chosen phase, common to all policies.
    RandomStream eval_rng = RandomStream::derive(seed, {rep, kEvaluation, ti});
    const std::vector<double> estimated = estimate_outage(
        scenario.channel, phase, scenario.rates, scenario.noise, cfg.channel.outage_samples, eval_rng);

    for (std::size_t k = 0; k < Ku; ++k) {
      const ProcessModel& m = scenario.models[k];
      const RiccatiSchedule& sched = pre.schedules[k];
      PlantSlot& rec = slot[k];

      // 3. Sensor: predict with u(t-1) rebuilt from the ack-driven replica, then update.
      Vec u_prev_sensor = Vec::Zero(m.input_dim());
      if (t > 0) {
        u_prev_sensor = control_action(sched.gain[ti - 1], replicas[k].x_hat);
        filters[k] = kf_predict(filters[k], u_prev_sensor, m);
      }
      const Vec y = measure(states[k], m, plant_rng[k]);
      filters[k] = kf_update(filters[k], y, m);

      // 4. Delivery.
      const LinkOutcome outcome = sinr_and_outcome(realization, phase, static_cast<int>(k),
                                                   scenario.rates[k], scenario.noise);

      // 5. Controller and the sensor's replica.
      controllers[k] = controller_update(controllers[k], outcome.delivered, filters[k].x_hat, m,
                                         last_u[k], cfg.policy.loss_update);
      replicas[k] = replicate_controller_estimate(replicas[k], outcome.delivered, filters[k].x_hat,
                                                  m, u_prev_sensor, cfg.policy.loss_update);
      if (!(replicas[k].x_hat.array() == controllers[k].x_hat.array()).all()) {
        trace.ack_consistent = false;
      }

      // 6. Control and 7. plant step.
      const Vec u = control_action(sched.gain[ti], controllers[k].x_hat);
      rec.delta = outcome.delivered;
      rec.sinr = outcome.sinr;
      rec.predicted_error = predicted[k];
      rec.estimated_error = estimated[k];
      rec.x = states[k].x;
      rec.x_hat_s = filters[k].x_hat;
      rec.x_hat_c = controllers[k].x_hat;
      rec.u = u;
      rec.stage_cost = states[k].x.dot(m.D() * states[k].x) + u.dot(m.E() * u);

      states[k] = step_process(states[k], u, m, plant_rng[k]);
      last_u[k] = u;
      trace.trajectories[k].controls.push_back(u);
      trace.trajectories[k].states.push_back(states[k].x);
      if (exceeds(states[k].x)) trace.diverged = true;

      // Expected cost-to-come through slot t.
      const Mat& ps = pre.sensor_covariances[k][ti];
      eval_p_bar[k].push_back(t == 0 ? expected_cov_initial(ps, estimated[k], m)
                                     : expected_cov_step(eval_p_bar[k].back(), ps, estimated[k], m));
      rec.expected_covariance = eval_p_bar[k].back();
      rec.cost_to_come = cost_to_come(sched, eval_p_bar[k], m, t);
    }
  }

  for (std::size_t k = 0; k < Ku; ++k) {
    const Vec& xT = states[k].x;
    trace.terminal_cost[k] = xT.dot(scenario.models[k].D() * xT);
    trace.terminal_cost_to_come[k] = trace.slots.back()[k].cost_to_come;
  }
  trace.total_realized_cost = realized_cost(trace.trajectories, scenario.models);
  trace.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

std::vector<double> ExperimentResult::final_cost_to_come(std::size_t policy_index) const {
  std::vector<double> out;
  for (const RunTrace& tr : traces.at(policy_index)) out.push_back(tr.total_cost_to_come().back());
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<Policy>& policies,
                                  const std::vector<std::vector<RunTrace>>& traces, int horizon) {
  std::vector<SummaryRow> rows;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    const auto& runs = traces[p];
    if (runs.empty()) continue;
    std::vector<std::vector<double>> curves;
    for (const RunTrace& tr : runs) curves.push_back(tr.total_cost_to_come());
    const double n = static_cast<double>(runs.size());
    for (int t = 0; t <= horizon; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      double mean = 0.0;
      for (const auto& c : curves) mean += c[ti];
      mean /= n;
      double var = 0.0;
      for (const auto& c : curves) var += (c[ti] - mean) * (c[ti] - mean);
      const double se = runs.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
      rows.push_back({policies[p], t, mean, se});
    }
  }
  return rows;
}

namespace {

bool needs_oracle(const std::vector<Policy>& policies) {
  for (Policy p : policies) {
    if (p == Policy::kDpOracle) return true;
  }
  return false;
}

ExperimentResult run_experiment_impl(const Scenario& scenario, const std::vector<Policy>& policies,
                                     int replications, std::uint64_t seed, bool parallel) {
  require(replications >= 0, "run_experiment: replications must be >= 0");
  require(!policies.empty(), "run_experiment: no policies");
  ExperimentResult result;
  result.policies = policies;
  result.replications = replications;
  result.horizon = scenario.horizon();
  result.traces.assign(policies.size(), std::vector<RunTrace>(static_cast<std::size_t>(replications)));

  const bool resample = scenario.config.experiment.resample_scenario;
  const bool oracle = needs_oracle(policies);
  std::optional<ScenarioPrecomputation> shared;
  if (!resample && replications > 0) shared = precompute(scenario, mix_seed(seed, {kPrecompute}), oracle);

  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(replications));
  auto one = [&](int r) {
    try {
      const auto ru = static_cast<std::uint64_t>(r);
      if (resample) {
        RandomStream scenario_rng = RandomStream::derive(seed, {ru, kScenario});
        const Scenario local = generate_scenario(scenario.config, scenario_rng);
        const ScenarioPrecomputation pre = precompute(local, mix_seed(seed, {ru, kPrecompute}), oracle);
        for (std::size_t p = 0; p < policies.size(); ++p) {
          result.traces[p][static_cast<std::size_t>(r)] = run_closed_loop(local, pre, policies[p], seed, r);
        }
      } else {
        for (std::size_t p = 0; p < policies.size(); ++p) {
          result.traces[p][static_cast<std::size_t>(r)] =
              run_closed_loop(scenario, *shared, policies[p], seed, r);
        }
      }
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  };

  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < replications; ++r) one(r);
  } else {
    for (int r = 0; r < replications; ++r) one(r);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  result.summary = summarize(policies, result.traces, result.horizon);
  return result;
}

}  // namespace

ExperimentResult run_experiment(const Scenario& scenario, const std::vector<Policy>& policies,
                                int replications, std::uint64_t seed) {
  return run_experiment_impl(scenario, policies, replications, seed, true);
}

ExperimentResult run_experiment_serial(const Scenario& scenario,
                                       const std::vector<Policy>& policies, int replications,
                                       std::uint64_t seed) {
  return run_experiment_impl(scenario, policies, replications, seed, false);
}

}  // namespace risnc
