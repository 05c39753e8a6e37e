#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "risnc/channel.hpp"
#include "risnc/estimation.hpp"
#include "risnc/process.hpp"
#include "risnc/sdp.hpp"

namespace risnc {

enum class Policy { kSdpLookahead, kRandomPhase, kDpOracle };

std::string to_string(Policy policy);
Policy parse_policy(const std::string& name);

/// Erasure probability the RIS feeds into its internal expected-covariance
/// recursion under the lookahead policy.
enum class ErrorPropagation { kMarkovBound, kMonteCarlo };

struct PlantConfig {
  int count = 2;
  int state_dim = 1;
  std::array<double, 2> a_range{0.5, 10.0};
  std::vector<double> a_values;  ///< explicit per-plant A = a I; empty draws from a_range
  // Remaining matrices are these scalars times the identity.
  double b = 1.0, c = 1.0, w = 1.0, v = 1.0, d = 1.0, e = 1.0, p0 = 1.0;
  std::vector<ProcessModel> models;  ///< explicit matrices; overrides everything above
};

struct GeometryConfig {
  std::array<double, 2> sensor_distance{5.0, 20.0};
  std::array<double, 2> controller_distance{30.0, 70.0};
  std::vector<Point> sensors;  ///< explicit positions; empty draws them
  std::vector<Point> controllers;
};

struct ChannelConfig {
  LinkParameters direct{2.0, 3.5};
  LinkParameters sensor_ris{2.0, 2.2};
  LinkParameters ris_controller{2.0, 2.2};
  double noise = 1e-5;
  double rate = 1.0;
  std::vector<double> rates;  ///< per-plant override of `rate`
  std::int64_t moment_samples = kDefaultMomentSamples;
  std::int64_t gamma_samples = kDefaultMomentSamples;
  double gamma_margin = kDefaultGammaMargin;
  std::int64_t outage_samples = 2000;  ///< Monte-Carlo draws per slot for the expected cost
};

struct PolicyConfig {
  ErrorPropagation propagation = ErrorPropagation::kMarkovBound;
  int randomization_trials = 100;
  LossPropagation loss_update = LossPropagation::kWithInput;
  SdpSettings solver;
};

struct OracleConfig {
  int grid_points = 8;  ///< per RIS element
  int horizon = 3;
  std::int64_t outage_samples = 20000;
};

struct ExperimentConfig {
  std::vector<Policy> policies{Policy::kSdpLookahead, Policy::kRandomPhase};
  int replications = 200;
  std::uint64_t seed = 1;
  bool resample_scenario = true;  ///< fresh plants and geometry per replication
};

struct Config {
  int horizon = 30;
  int elements = 8;
  PlantConfig plants;
  GeometryConfig geometry;
  ChannelConfig channel;
  PolicyConfig policy;
  OracleConfig oracle;
  ExperimentConfig experiment;

  /// Throws Error describing the first violated constraint.
  void validate() const;
};

/// Strict parse: unknown keys and out-of-range values are errors. Missing
/// keys keep their defaults.
Config parse_config(const nlohmann::json& doc);
nlohmann::json to_json(const Config& config);

/// Reads a config file, or the "config" member of a run manifest.
Config load_config(const std::filesystem::path& path);

}  // namespace risnc
