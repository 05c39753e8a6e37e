// Command-line front end: simulate, oracle, validate.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "risnc/config.hpp"
#include "risnc/error.hpp"
#include "risnc/outputs.hpp"
#include "risnc/simulation.hpp"

namespace {

enum ExitCode { kOk = 0, kRuntimeError = 1, kConfigError = 2 };

int report(const std::string& kind, const std::string& message, int code) {
  nlohmann::json doc{{"status", "error"}, {"kind", kind}, {"message", message}};
  std::cerr << doc.dump() << '\n';
  return code;
}

risnc::Config load(const std::string& path) {
  return risnc::load_config(std::filesystem::path(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS-assisted networked control simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> policies;
  int replications = -1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = "out";
  bool plot = false;

  auto* simulate = app.add_subcommand("simulate", "Run closed-loop replications and write CSV outputs");
  simulate->add_option("config", config_path, "Scenario config (JSON) or run manifest")->required();
  simulate->add_option("--policy", policies, "sdp_lookahead | random_phase | dp_oracle (repeatable)");
  simulate->add_option("--replications", replications, "Number of replications")->check(CLI::NonNegativeNumber);
  simulate->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) {
    seed = s;
    seed_given = true;
  }, "Master seed");
  simulate->add_option("--out", out_dir, "Output directory");
  simulate->add_flag("--plot", plot, "Also write plot.dat (slot vs mean cost-to-come)");

  auto* oracle = app.add_subcommand("oracle", "Exhaustive phase-sequence oracle on a small instance");
  oracle->add_option("config", config_path, "Scenario config (JSON)")->required();

  auto* validate = app.add_subcommand("validate", "Check a config against the schema");
  validate->add_option("config", config_path, "Scenario config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  risnc::Config config;
  try {
    config = load(config_path);
    if (!policies.empty()) {
      config.experiment.policies.clear();
      for (const auto& p : policies) config.experiment.policies.push_back(risnc::parse_policy(p));
    }
    if (replications >= 0) config.experiment.replications = replications;
    if (seed_given) config.experiment.seed = seed;
    config.validate();
  } catch (const std::exception& e) {
    return report("config", e.what(), kConfigError);
  }

  try {
    if (*validate) {
      std::cout << nlohmann::json{{"status", "ok"}, {"config", config_path}}.dump() << '\n';
      return kOk;
    }

    const std::uint64_t master = config.experiment.seed;
    const risnc::Scenario scenario = risnc::generate_scenario(config, master);

    if (*oracle) {
      const risnc::ScenarioPrecomputation pre = risnc::precompute(scenario, master);
      const risnc::OracleProblem problem =
          risnc::oracle_problem(scenario, pre, config.oracle.horizon, master);
      const risnc::ValueTable best = risnc::dp_oracle(problem);
      const risnc::ValueTable greedy = risnc::greedy_lookahead(problem);
      nlohmann::json phases = nlohmann::json::array();
      for (const auto& p : best.phases) {
        phases.push_back(std::vector<double>(p.phases().data(), p.phases().data() + p.size()));
      }
      nlohmann::json doc{{"status", "ok"},
                         {"horizon", best.horizon},
                         {"grid_size", problem.grid.size()},
                         {"sequences_evaluated", best.sequences_evaluated},
                         {"oracle_value", best.value},
                         {"oracle_sequence", best.sequence},
                         {"oracle_phases", phases},
                         {"lookahead_value", greedy.value},
                         {"lookahead_sequence", greedy.sequence},
                         {"gap", greedy.value - best.value}};
      std::cout << doc.dump(2) << '\n';
      return kOk;
    }

    const risnc::ExperimentResult result = risnc::run_experiment(
        scenario, config.experiment.policies, config.experiment.replications, master);
    const risnc::OutputPaths paths = risnc::emit_outputs(result, config, out_dir, plot);

    int diverged = 0;
    int inconsistent = 0;
    for (const auto& runs : result.traces) {
      for (const auto& tr : runs) {
        diverged += tr.diverged ? 1 : 0;
        inconsistent += tr.ack_consistent ? 0 : 1;
      }
    }
    nlohmann::json finals = nlohmann::json::object();
    for (const auto& row : result.summary) {
      if (row.slot == result.horizon) {
        finals[risnc::to_string(row.policy)] = {{"mean_cost_to_come", row.mean_cost_to_come},
                                                {"stderr", row.stderr_cost_to_come}};
      }
    }
    nlohmann::json doc{{"status", "ok"},
                       {"replications", result.replications},
                       {"final_slot", finals},
                       {"diverged_traces", diverged},
                       {"ack_inconsistent_traces", inconsistent},
                       {"slots_csv", paths.slots.string()},
                       {"summary_csv", paths.summary.string()},
                       {"manifest", paths.manifest.string()}};
    std::cout << doc.dump(2) << '\n';
    return kOk;
  } catch (const risnc::Error& e) {
    return report("runtime", e.what(), kRuntimeError);
  } catch (const std::exception& e) {
    return report("internal", e.what(), kRuntimeError);
  }
}
