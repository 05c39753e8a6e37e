#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "risnc/error.hpp"
#include "risnc/simulation.hpp"
#include "test_support.hpp"

using namespace risnc;

namespace {

Config small_config() {
  Config c;
  c.horizon = 10;
  c.elements = 2;
  c.plants.count = 2;
  c.channel.moment_samples = 2000;
  c.channel.gamma_samples = 2000;
  c.channel.outage_samples = 200;
  c.policy.randomization_trials = 20;
  c.experiment.replications = 6;
  c.experiment.seed = 9;
  return c;
}

// One plant, pure LOS, a single element and a strong direct link: every packet decodes.
Config always_delivered() {
  Config c = small_config();
  c.elements = 1;
  c.plants.count = 1;
  c.plants.a_values = {1.3};
  c.geometry.sensors = {{1.0, 1.0}};
  c.geometry.controllers = {{-2.0, 2.0}};
  const double inf = std::numeric_limits<double>::infinity();
  c.channel.direct.kappa = inf;
  c.channel.sensor_ris.kappa = inf;
  c.channel.ris_controller.kappa = inf;
  c.experiment.resample_scenario = false;
  return c;
}

// Noise far above any received power: nothing decodes.
Config never_delivered() {
  Config c = small_config();
  c.plants.count = 1;
  c.plants.a_values = {2.0};
  c.geometry.sensors = {{5.0, 5.0}};
  c.geometry.controllers = {{-30.0, 30.0}};
  c.channel.noise = 1e6;
  c.experiment.resample_scenario = false;
  return c;
}

}  // namespace

TEST_CASE("scenario defaults") {
  Config c;
  const Scenario s = generate_scenario(c, 3);
  CHECK(s.plants() == 2);
  CHECK(s.horizon() == 30);
  CHECK(s.elements() == 8);
  for (int k = 0; k < 2; ++k) {
    const ProcessModel& m = s.models[static_cast<std::size_t>(k)];
    CHECK(m.state_dim() == 1);
    CHECK(m.A()(0, 0) >= 0.5);
    CHECK(m.A()(0, 0) <= 10.0);
    const Point& p = s.channel.sensors[static_cast<std::size_t>(k)];
    const Point& q = s.channel.controllers[static_cast<std::size_t>(k)];
    CHECK(p.x >= 0.0);
    CHECK(p.y >= 0.0);
    CHECK(q.x <= 0.0);
    CHECK(q.y >= 0.0);
    CHECK(std::hypot(p.x, p.y) >= 5.0);
    CHECK(std::hypot(p.x, p.y) <= 20.0);
    CHECK(std::hypot(q.x, q.y) >= 30.0);
    CHECK(std::hypot(q.x, q.y) <= 70.0);
  }
}

TEST_CASE("scenario honours state dimension and is seed-deterministic") {
  Config c;
  c.plants.state_dim = 2;
  const Scenario s = generate_scenario(c, 4);
  CHECK(s.models[0].state_dim() == 2);
  CHECK(s.models[0].A().isDiagonal());
  const Scenario t = generate_scenario(c, 4);
  CHECK(s.models[1].A() == t.models[1].A());
  CHECK(s.channel.sensors[0].x == t.channel.sensors[0].x);
  const Scenario u = generate_scenario(c, 5);
  CHECK(s.models[1].A() != u.models[1].A());
}

TEST_CASE("guaranteed delivery keeps the controller on the sensor estimate") {
  const Config c = always_delivered();
  const Scenario s = generate_scenario(c, 1);
  const ScenarioPrecomputation pre = precompute(s, 2);
  for (Policy p : {Policy::kSdpLookahead, Policy::kRandomPhase}) {
    const RunTrace tr = run_closed_loop(s, pre, p, 3, 0);
    for (int t = 0; t < c.horizon; ++t) {
      const PlantSlot& slot = tr.slots[static_cast<std::size_t>(t)][0];
      CHECK(slot.delta);
      CHECK(slot.estimated_error == 0.0);
      CHECK((slot.x_hat_c - slot.x_hat_s).norm() == 0.0);
      CHECK((slot.expected_covariance - pre.sensor_covariances[0][static_cast<std::size_t>(t)]).norm() < 1e-15);
    }
    CHECK(tr.ack_consistent);
  }
}

TEST_CASE("certain erasure leaves the controller open loop") {
  const Config c = never_delivered();
  const Scenario s = generate_scenario(c, 1);
  const ScenarioPrecomputation pre = precompute(s, 2);
  CHECK_FALSE(pre.gammas[0].feasible);
  for (Policy p : {Policy::kSdpLookahead, Policy::kRandomPhase}) {
    const RunTrace tr = run_closed_loop(s, pre, p, 3, 0);
    double expect = 0.0;
    double power = 1.0;
    for (int t = 0; t < c.horizon; ++t) {
      const PlantSlot& slot = tr.slots[static_cast<std::size_t>(t)][0];
      expect += power;  // Pbar(t) = sum_{s<=t} 4^s with P0 = W = 1
      power *= 4.0;
      CHECK_FALSE(slot.delta);
      CHECK(slot.estimated_error == 1.0);
      CHECK(slot.x_hat_c(0) == 0.0);
      CHECK(slot.u(0) == 0.0);
      CHECK(slot.expected_covariance(0, 0) == doctest::Approx(expect).epsilon(1e-12));
    }
    if (p == Policy::kSdpLookahead) CHECK(tr.solver.front().fallback);
  }
}

TEST_CASE("run trace accounting") {
  Config c = small_config();
  c.experiment.resample_scenario = false;
  const Scenario s = generate_scenario(c, 7);
  const ScenarioPrecomputation pre = precompute(s, 8);
  const RunTrace tr = run_closed_loop(s, pre, Policy::kSdpLookahead, 11, 2);
  CHECK(tr.slots.size() == 10);
  CHECK(tr.phases.size() == 10);
  CHECK(tr.trajectories[0].states.size() == 11);
  CHECK(tr.trajectories[0].controls.size() == 10);
  double sum = 0.0;
  for (const auto& slot : tr.slots) {
    for (const PlantSlot& p : slot) sum += p.stage_cost;
  }
  for (double t : tr.terminal_cost) sum += t;
  CHECK(tr.total_realized_cost == doctest::Approx(sum).epsilon(1e-10));
  CHECK(tr.ack_consistent);
  const auto ctc = tr.total_cost_to_come();
  CHECK(ctc.size() == 11);
  for (std::size_t t = 1; t < ctc.size(); ++t) CHECK(ctc[t] >= ctc[t - 1]);
  CHECK(ctc[10] == ctc[9]);
  for (const auto& slot : tr.slots) {
    for (const PlantSlot& p : slot) {
      CHECK(p.predicted_error >= 0.0);
      CHECK(p.predicted_error <= 1.0);
    }
  }
}

TEST_CASE("cost-to-come increments follow the expected covariance") {
  Config c = small_config();
  c.experiment.resample_scenario = false;
  const Scenario s = generate_scenario(c, 12);
  const ScenarioPrecomputation pre = precompute(s, 13);
  const RunTrace tr = run_closed_loop(s, pre, Policy::kRandomPhase, 14, 0);
  for (std::size_t k = 0; k < 2; ++k) {
    const ProcessModel& m = s.models[k];
    const RiccatiSchedule& sch = pre.schedules[k];
    double acc = (sch.omega[0] * m.P0()).trace();
    for (std::size_t t = 0; t < 10; ++t) {
      acc += (sch.omega[t + 1] * m.W()).trace() + (sch.weight[t] * tr.slots[t][k].expected_covariance).trace();
      CHECK(tr.slots[t][k].cost_to_come == doctest::Approx(acc).epsilon(1e-12));
    }
  }
}

TEST_CASE("identical seeds reproduce runs and policies share randomness") {
  Config c = small_config();
  c.experiment.resample_scenario = false;
  const Scenario s = generate_scenario(c, 21);
  const ScenarioPrecomputation pre = precompute(s, 22);
  const RunTrace a = run_closed_loop(s, pre, Policy::kSdpLookahead, 5, 1);
  const RunTrace b = run_closed_loop(s, pre, Policy::kSdpLookahead, 5, 1);
  CHECK(a.total_realized_cost == b.total_realized_cost);
  CHECK(a.total_cost_to_come() == b.total_cost_to_come());
  // Same plant noise for both policies: the initial states agree.
  const RunTrace r = run_closed_loop(s, pre, Policy::kRandomPhase, 5, 1);
  CHECK(r.slots[0][0].x(0) == a.slots[0][0].x(0));
  CHECK(r.slots[0][1].x(0) == a.slots[0][1].x(0));
}

TEST_CASE("parallel experiment matches the serial reference bit for bit") {
  Config c = small_config();
  const Scenario s = generate_scenario(c, 31);
  const std::vector<Policy> pols{Policy::kSdpLookahead, Policy::kRandomPhase};
  const ExperimentResult par = run_experiment(s, pols, 6, 32);
  const ExperimentResult ser = run_experiment_serial(s, pols, 6, 32);
  REQUIRE(par.summary.size() == ser.summary.size());
  for (std::size_t i = 0; i < par.summary.size(); ++i) {
    CHECK(par.summary[i].mean_cost_to_come == ser.summary[i].mean_cost_to_come);
    CHECK(par.summary[i].stderr_cost_to_come == ser.summary[i].stderr_cost_to_come);
  }
  for (std::size_t p = 0; p < 2; ++p) {
    for (int r = 0; r < 6; ++r) {
      CHECK(par.traces[p][static_cast<std::size_t>(r)].total_realized_cost ==
            ser.traces[p][static_cast<std::size_t>(r)].total_realized_cost);
    }
  }
}

TEST_CASE("summary of one replication is that trace") {
  Config c = small_config();
  const Scenario s = generate_scenario(c, 41);
  const ExperimentResult res = run_experiment(s, {Policy::kRandomPhase}, 1, 42);
  REQUIRE(res.summary.size() == 11);
  const auto ctc = res.traces[0][0].total_cost_to_come();
  for (std::size_t t = 0; t <= 10; ++t) {
    CHECK(res.summary[t].slot == static_cast<int>(t));
    CHECK(res.summary[t].mean_cost_to_come == ctc[t]);
    CHECK(res.summary[t].stderr_cost_to_come == 0.0);
  }
}

TEST_CASE("the same policy listed twice gives identical summaries") {
  Config c = small_config();
  const Scenario s = generate_scenario(c, 51);
  const ExperimentResult res = run_experiment(s, {Policy::kSdpLookahead, Policy::kSdpLookahead}, 3, 52);
  for (int t = 0; t <= 10; ++t) {
    CHECK(res.summary[static_cast<std::size_t>(t)].mean_cost_to_come ==
          res.summary[static_cast<std::size_t>(11 + t)].mean_cost_to_come);
  }
}

TEST_CASE("pairing policies by replication reduces the variance of the difference") {
  Config c = small_config();
  c.horizon = 8;
  const Scenario s = generate_scenario(c, 61);
  const ExperimentResult res = run_experiment(s, {Policy::kSdpLookahead, Policy::kRandomPhase}, 24, 62);
  const auto a = res.final_cost_to_come(0);
  const auto b = res.final_cost_to_come(1);
  std::vector<double> paired, unpaired;
  for (std::size_t i = 0; i < a.size(); ++i) {
    paired.push_back(std::log(a[i]) - std::log(b[i]));
    unpaired.push_back(std::log(a[i]) - std::log(b[(i + 1) % b.size()]));
  }
  CHECK(risnc::testing::sample_stats(paired).variance < risnc::testing::sample_stats(unpaired).variance);
}

TEST_CASE("zero replications give empty traces") {
  Config c = small_config();
  const Scenario s = generate_scenario(c, 71);
  const ExperimentResult res = run_experiment(s, {Policy::kRandomPhase}, 0, 1);
  CHECK(res.summary.empty());
  CHECK(res.traces[0].empty());
  CHECK_THROWS_AS(run_experiment(s, {}, 1, 1), Error);
}

TEST_CASE("oracle policy follows the precomputed sequence") {
  Config c = small_config();
  c.horizon = 3;
  c.elements = 1;
  c.plants.count = 1;
  c.oracle.horizon = 3;
  c.oracle.outage_samples = 2000;
  c.experiment.resample_scenario = false;
  const Scenario s = generate_scenario(c, 81);
  const ScenarioPrecomputation pre = precompute(s, 82, true);
  REQUIRE(pre.oracle.has_value());
  const RunTrace tr = run_closed_loop(s, pre, Policy::kDpOracle, 83, 0);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(tr.phases[t].phases()(0) == pre.oracle->phases[t].phases()(0));
  }
  const ScenarioPrecomputation plain = precompute(s, 82, false);
  CHECK_THROWS_AS(run_closed_loop(s, plain, Policy::kDpOracle, 83, 0), Error);
}
