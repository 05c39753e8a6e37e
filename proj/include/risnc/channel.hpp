#pragma once

#include <cstdint>
#include <vector>

#include "risnc/linalg.hpp"
#include "risnc/random.hpp"

namespace risnc {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Rician parameters of one link class.
struct LinkParameters {
  double kappa = 2.0;     ///< Rician K-factor (linear); +inf gives a pure LOS link
  double exponent = 2.2;  ///< path-loss exponent alpha, amplitude gain d^(-alpha/2)
};

/// Second-order description of every link. Each coefficient is
///   gain * (sqrt(kappa/(kappa+1)) * los + sqrt(1/(kappa+1)) * CN(0,1)),
/// with unit-modulus los terms. The RIS sits at the origin and is modelled
/// as a half-wavelength uniform linear array along the x axis, so element i
/// of a link towards direction psi has LOS phase pi * i * cos(psi). Direct
/// links take their LOS phase from the direction angle sensor -> controller.
struct ChannelStatistics {
  int plants = 0;    ///< K
  int elements = 0;  ///< M
  LinkParameters direct{2.0, 3.5};
  LinkParameters sensor_ris{2.0, 2.2};
  LinkParameters ris_controller{2.0, 2.2};

  Mat direct_gain;   ///< K x K, (l, k) = sensor l -> controller k
  CMat direct_los;   ///< K x K unit modulus
  Vec sr_gain;       ///< K
  CMat sr_los;       ///< K x M, row k = sensor k -> RIS
  Vec rc_gain;       ///< K
  CMat rc_los;       ///< K x M, row k = RIS -> controller k

  std::vector<Point> sensors;
  std::vector<Point> controllers;

  /// Derives gains and LOS terms from positions (RIS at the origin).
  static ChannelStatistics from_geometry(std::vector<Point> sensors,
                                         std::vector<Point> controllers, int elements,
                                         LinkParameters direct, LinkParameters sensor_ris,
                                         LinkParameters ris_controller);

  void validate() const;
};

/// One block-fading slot. h_sr and h_rc hold column vectors as rows; the
/// reflected path of sensor l to controller k is h_sr_l^H Theta h_rc_k.
struct ChannelRealization {
  CMat h_sc;  ///< K x K
  CMat h_sr;  ///< K x M
  CMat h_rc;  ///< K x M
  int slot = 0;
};

/// RIS configuration: phases phi in [0, 2pi) and theta_i = exp(j phi_i).
class PhaseVector {
 public:
  PhaseVector() = default;
  static PhaseVector from_phases(const Vec& phi);
  /// Takes the argument of each entry; magnitudes are discarded.
  static PhaseVector from_complex(const CVec& z);

  const Vec& phases() const { return phi_; }
  const CVec& theta() const { return theta_; }
  Eigen::Index size() const { return phi_.size(); }

  /// [theta; 1], the lifted vector used by the quadratic forms.
  CVec lifted() const;

 private:
  Vec phi_;
  CVec theta_;
};

double wrap_phase(double phi);

ChannelRealization sample_realization(const ChannelStatistics& stats, RandomStream& rng);

/// H[i] = conj(h_sr[i]) * h_rc[i].
CVec cascade(const CVec& h_sr_l, const CVec& h_rc_k);

/// h_sc + sum_i theta_i H[i].
Complex effective_gain(Complex h_sc_lk, const CVec& cascade_lk, const PhaseVector& theta);

struct LinkOutcome {
  double signal = 0.0;
  double interference = 0.0;
  double sinr = 0.0;
  bool delivered = false;
};

/// SINR at controller k with unit transmit powers; delivered iff
/// log2(1 + sinr) >= rate (equality counts as success).
LinkOutcome sinr_and_outcome(const ChannelRealization& realization, const PhaseVector& theta,
                             int k, double rate, double noise);

bool decodes(double sinr, double rate);

/// Sample second-order moments per (l, k) pair:
///   E_HH = E[H H^H], E_Hh = E[H conj(h_sc)], E_hh = E[|h_sc|^2].
class MomentSet {
 public:
  MomentSet(int plants, int elements);

  int plants() const { return plants_; }
  int elements() const { return elements_; }
  std::int64_t sample_count = 0;

  CMat& HH(int l, int k) { return hh_[index(l, k)]; }
  const CMat& HH(int l, int k) const { return hh_[index(l, k)]; }
  CVec& Hh(int l, int k) { return h_cross_[index(l, k)]; }
  const CVec& Hh(int l, int k) const { return h_cross_[index(l, k)]; }
  double& hh(int l, int k) { return direct_power_[index(l, k)]; }
  double hh(int l, int k) const { return direct_power_[index(l, k)]; }

  /// Adds one realization's products (unnormalized).
  void accumulate(const ChannelRealization& r);
  void merge(const MomentSet& other);
  /// Divides accumulated sums by sample_count and Hermitianizes E_HH.
  void finalize();

 private:
  std::size_t index(int l, int k) const { return static_cast<std::size_t>(l * plants_ + k); }
  int plants_;
  int elements_;
  std::vector<CMat> hh_;
  std::vector<CVec> h_cross_;
  std::vector<double> direct_power_;
};

inline constexpr std::int64_t kDefaultMomentSamples = 20000;
inline constexpr std::int64_t kMomentBlock = 1024;

/// Monte-Carlo moments, OpenMP-parallel over fixed blocks of samples. Block b
/// draws from a stream keyed by (seed, b) and partial sums are reduced in
/// block order, so the result is bit-identical to the serial reference.
MomentSet estimate_moments(const ChannelStatistics& stats, std::int64_t samples,
                           RandomStream& rng);
MomentSet estimate_moments_serial(const ChannelStatistics& stats, std::int64_t samples,
                                  RandomStream& rng);

struct GammaEstimate {
  double value = 0.0;
  bool feasible = false;  ///< value > noise * (2^rate - 1)
};

inline constexpr double kDefaultGammaMargin = 0.1;

/// (1 + margin) * max over samples of (|h_sc_kk| + sum_i |H_kk[i]|)^2, a
/// phase-free upper bound on S_k - (2^R - 1) I_k.
GammaEstimate estimate_gamma(const ChannelStatistics& stats, int k, double rate, double noise,
                             std::int64_t samples, RandomStream& rng,
                             double margin = kDefaultGammaMargin);

/// Monte-Carlo estimate of the erasure probability of every plant at a fixed
/// phase configuration.
std::vector<double> estimate_outage(const ChannelStatistics& stats, const PhaseVector& theta,
                                    const std::vector<double>& rates, double noise,
                                    std::int64_t samples, RandomStream& rng);

}  // namespace risnc
