#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace risnc {

/// Seeded pseudo-random stream. Each simulation component owns its own
/// stream so that runs are reproducible and replications are independent.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Stream keyed by a seed and a path of integers, e.g. (seed, replication,
  /// purpose, plant). Distinct paths give statistically independent streams.
  static RandomStream derive(std::uint64_t seed,
                             std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64() { return engine_(); }
  double uniform(double lo = 0.0, double hi = 1.0);
  double normal();
  /// Circularly-symmetric CN(0, 1): real and imaginary parts each N(0, 1/2).
  std::complex<double> complex_normal();
  Eigen::VectorXd normal_vector(Eigen::Index n);
  Eigen::VectorXcd complex_normal_vector(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

}  // namespace risnc
