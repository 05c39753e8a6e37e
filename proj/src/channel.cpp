#include "risnc/channel.hpp"

#include <cmath>
#include <numbers>

#include <omp.h>

#include "risnc/error.hpp"

namespace risnc {

namespace {

struct RicianWeights {
  double los;
  double scatter;
};

RicianWeights rician_weights(double kappa) {
  if (std::isinf(kappa)) return {1.0, 0.0};
  return {std::sqrt(kappa / (kappa + 1.0)), std::sqrt(1.0 / (kappa + 1.0))};
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

CVec steering(const Point& p, int elements) {
  const double psi = std::atan2(p.y, p.x);
  CVec a(elements);
  for (int i = 0; i < elements; ++i) a(i) = std::polar(1.0, std::numbers::pi * i * std::cos(psi));
  return a;
}

}  // namespace

double wrap_phase(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(phi, two_pi);
  if (w < 0.0) w += two_pi;
  if (w >= two_pi) w = 0.0;
  return w;
}

PhaseVector PhaseVector::from_phases(const Vec& phi) {
  PhaseVector p;
  p.phi_ = phi.unaryExpr([](double v) { return wrap_phase(v); });
  p.theta_.resize(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) p.theta_(i) = std::polar(1.0, p.phi_(i));
  return p;
}

PhaseVector PhaseVector::from_complex(const CVec& z) {
  Vec phi(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) phi(i) = std::arg(z(i));
  return from_phases(phi);
}

CVec PhaseVector::lifted() const {
  CVec v(theta_.size() + 1);
  v.head(theta_.size()) = theta_;
  v(theta_.size()) = 1.0;
  return v;
}

ChannelStatistics ChannelStatistics::from_geometry(std::vector<Point> sensors,
                                                   std::vector<Point> controllers, int elements,
                                                   LinkParameters direct,
                                                   LinkParameters sensor_ris,
                                                   LinkParameters ris_controller) {
  require(!sensors.empty() && sensors.size() == controllers.size(),
          "ChannelStatistics: need one sensor per controller");
  require(elements >= 1, "ChannelStatistics: RIS needs at least one element");
  ChannelStatistics s;
  const int K = static_cast<int>(sensors.size());
  s.plants = K;
  s.elements = elements;
  s.direct = direct;
  s.sensor_ris = sensor_ris;
  s.ris_controller = ris_controller;
  s.direct_gain.resize(K, K);
  s.direct_los.resize(K, K);
  s.sr_gain.resize(K);
  s.rc_gain.resize(K);
  s.sr_los.resize(K, elements);
  s.rc_los.resize(K, elements);
  const Point origin{};
  for (int k = 0; k < K; ++k) {
    const double ds = distance(sensors[k], origin);
    const double dc = distance(controllers[k], origin);
    require(ds > 0.0 && dc > 0.0, "ChannelStatistics: positions must differ from the RIS origin");
    s.sr_gain(k) = std::pow(ds, -sensor_ris.exponent / 2.0);
    s.rc_gain(k) = std::pow(dc, -ris_controller.exponent / 2.0);
    s.sr_los.row(k) = steering(sensors[k], elements).transpose();
    s.rc_los.row(k) = steering(controllers[k], elements).transpose();
    for (int l = 0; l < K; ++l) {
      const double d = distance(sensors[l], controllers[k]);
      require(d > 0.0, "ChannelStatistics: sensor and controller coincide");
      s.direct_gain(l, k) = std::pow(d, -direct.exponent / 2.0);
      s.direct_los(l, k) = std::polar(
          1.0, std::atan2(controllers[k].y - sensors[l].y, controllers[k].x - sensors[l].x));
    }
  }
  s.sensors = std::move(sensors);
  s.controllers = std::move(controllers);
  s.validate();
  return s;
}

void ChannelStatistics::validate() const {
  require(plants >= 1 && elements >= 1, "ChannelStatistics: K and M must be >= 1");
  require(direct_gain.rows() == plants && direct_gain.cols() == plants &&
              direct_los.rows() == plants && direct_los.cols() == plants,
          "ChannelStatistics: direct link tables must be K x K");
  require(sr_gain.size() == plants && rc_gain.size() == plants,
          "ChannelStatistics: RIS gain tables must have K entries");
  require(sr_los.rows() == plants && sr_los.cols() == elements && rc_los.rows() == plants &&
              rc_los.cols() == elements,
          "ChannelStatistics: RIS LOS tables must be K x M");
  for (const auto* link : {&direct, &sensor_ris, &ris_controller}) {
    require(link->kappa >= 0.0, "ChannelStatistics: K-factor must be >= 0");
  }
  require((direct_gain.array() >= 0.0).all() && (sr_gain.array() >= 0.0).all() &&
              (rc_gain.array() >= 0.0).all(),
          "ChannelStatistics: path gains must be non-negative");
}

ChannelRealization sample_realization(const ChannelStatistics& stats, RandomStream& rng) {
  const int K = stats.plants;
  const int M = stats.elements;
  const RicianWeights wd = rician_weights(stats.direct.kappa);
  const RicianWeights ws = rician_weights(stats.sensor_ris.kappa);
  const RicianWeights wr = rician_weights(stats.ris_controller.kappa);
  ChannelRealization r;
  r.h_sc.resize(K, K);
  r.h_sr.resize(K, M);
  r.h_rc.resize(K, M);
  for (int l = 0; l < K; ++l) {
    for (int k = 0; k < K; ++k) {
      r.h_sc(l, k) = stats.direct_gain(l, k) *
                     (wd.los * stats.direct_los(l, k) + wd.scatter * rng.complex_normal());
    }
  }
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < M; ++i) {
      r.h_sr(k, i) = stats.sr_gain(k) * (ws.los * stats.sr_los(k, i) + ws.scatter * rng.complex_normal());
    }
    for (int i = 0; i < M; ++i) {
      r.h_rc(k, i) = stats.rc_gain(k) * (wr.los * stats.rc_los(k, i) + wr.scatter * rng.complex_normal());
    }
  }
  return r;
}

CVec cascade(const CVec& h_sr_l, const CVec& h_rc_k) {
  require(h_sr_l.size() == h_rc_k.size(), "cascade: length mismatch");
  return h_sr_l.conjugate().cwiseProduct(h_rc_k);
}

Complex effective_gain(Complex h_sc_lk, const CVec& cascade_lk, const PhaseVector& theta) {
  require(cascade_lk.size() == theta.size(), "effective_gain: length mismatch");
  return h_sc_lk + theta.theta().cwiseProduct(cascade_lk).sum();
}

bool decodes(double sinr, double rate) { return std::log2(1.0 + sinr) >= rate; }

LinkOutcome sinr_and_outcome(const ChannelRealization& realization, const PhaseVector& theta,
                             int k, double rate, double noise) {
  require(noise > 0.0, "sinr_and_outcome: noise power must be positive");
  const int K = static_cast<int>(realization.h_sc.rows());
  require(k >= 0 && k < K, "sinr_and_outcome: plant index out of range");
  const CVec h_rc_k = realization.h_rc.row(k).transpose();
  LinkOutcome out;
  for (int l = 0; l < K; ++l) {
    const CVec h_sr_l = realization.h_sr.row(l).transpose();
    const double power = std::norm(effective_gain(realization.h_sc(l, k), cascade(h_sr_l, h_rc_k), theta));
    if (l == k) {
      out.signal = power;
    } else {
      out.interference += power;
    }
  }
  out.sinr = out.signal / (out.interference + noise);
  out.delivered = decodes(out.sinr, rate);
  return out;
}

MomentSet::MomentSet(int plants, int elements)
    : plants_(plants), elements_(elements),
      hh_(static_cast<std::size_t>(plants * plants), CMat::Zero(elements, elements)),
      h_cross_(static_cast<std::size_t>(plants * plants), CVec::Zero(elements)),
      direct_power_(static_cast<std::size_t>(plants * plants), 0.0) {}

void MomentSet::accumulate(const ChannelRealization& r) {
  for (int l = 0; l < plants_; ++l) {
    const CVec h_sr_l = r.h_sr.row(l).transpose();
    for (int k = 0; k < plants_; ++k) {
      const CVec H = cascade(h_sr_l, r.h_rc.row(k).transpose());
      const Complex h = r.h_sc(l, k);
      const std::size_t i = index(l, k);
      hh_[i].noalias() += H * H.adjoint();
      h_cross_[i] += H * std::conj(h);
      direct_power_[i] += std::norm(h);
    }
  }
  ++sample_count;
}

void MomentSet::merge(const MomentSet& other) {
  require(other.plants_ == plants_ && other.elements_ == elements_, "MomentSet::merge: shape mismatch");
  for (std::size_t i = 0; i < hh_.size(); ++i) {
    hh_[i] += other.hh_[i];
    h_cross_[i] += other.h_cross_[i];
    direct_power_[i] += other.direct_power_[i];
  }
  sample_count += other.sample_count;
}

void MomentSet::finalize() {
  require(sample_count >= 1, "MomentSet::finalize: no samples");
  const double inv = 1.0 / static_cast<double>(sample_count);
  for (std::size_t i = 0; i < hh_.size(); ++i) {
    hh_[i] *= inv;
    hermitianize(hh_[i]);
    h_cross_[i] *= inv;
    direct_power_[i] *= inv;
  }
}

namespace {

MomentSet moment_block(const ChannelStatistics& stats, std::uint64_t seed, std::int64_t block,
                       std::int64_t count) {
  RandomStream rng = RandomStream::derive(seed, {static_cast<std::uint64_t>(block)});
  MomentSet partial(stats.plants, stats.elements);
  for (std::int64_t s = 0; s < count; ++s) partial.accumulate(sample_realization(stats, rng));
  return partial;
}

std::int64_t block_size(std::int64_t samples, std::int64_t b) {
  return std::min(kMomentBlock, samples - b * kMomentBlock);
}

}  // namespace

MomentSet estimate_moments_serial(const ChannelStatistics& stats, std::int64_t samples,
                                  RandomStream& rng) {
  require(samples >= 1, "estimate_moments: samples must be >= 1");
  stats.validate();
  const std::uint64_t seed = rng.next_u64();
  const std::int64_t blocks = (samples + kMomentBlock - 1) / kMomentBlock;
  MomentSet total(stats.plants, stats.elements);
  for (std::int64_t b = 0; b < blocks; ++b) total.merge(moment_block(stats, seed, b, block_size(samples, b)));
  total.finalize();
  return total;
}

MomentSet estimate_moments(const ChannelStatistics& stats, std::int64_t samples,
                           RandomStream& rng) {
  require(samples >= 1, "estimate_moments: samples must be >= 1");
  stats.validate();
  const std::uint64_t seed = rng.next_u64();
  const std::int64_t blocks = (samples + kMomentBlock - 1) / kMomentBlock;
  std::vector<MomentSet> partials(static_cast<std::size_t>(blocks),
                                  MomentSet(stats.plants, stats.elements));
#pragma omp parallel for schedule(static) if (blocks > 1 && !omp_in_parallel())
  for (std::int64_t b = 0; b < blocks; ++b) {
    partials[static_cast<std::size_t>(b)] = moment_block(stats, seed, b, block_size(samples, b));
  }
  MomentSet total(stats.plants, stats.elements);
  for (const MomentSet& p : partials) total.merge(p);
  total.finalize();
  return total;
}

GammaEstimate estimate_gamma(const ChannelStatistics& stats, int k, double rate, double noise,
                             std::int64_t samples, RandomStream& rng, double margin) {
  require(samples >= 1, "estimate_gamma: samples must be >= 1");
  require(k >= 0 && k < stats.plants, "estimate_gamma: plant index out of range");
  double worst = 0.0;
  for (std::int64_t s = 0; s < samples; ++s) {
    const ChannelRealization r = sample_realization(stats, rng);
    const CVec H = cascade(r.h_sr.row(k).transpose(), r.h_rc.row(k).transpose());
    const double amplitude = std::abs(r.h_sc(k, k)) + H.cwiseAbs().sum();
    worst = std::max(worst, amplitude * amplitude);
  }
  GammaEstimate g;
  g.value = (1.0 + margin) * worst;
  g.feasible = g.value > noise * (std::exp2(rate) - 1.0);
  return g;
}

std::vector<double> estimate_outage(const ChannelStatistics& stats, const PhaseVector& theta,
                                    const std::vector<double>& rates, double noise,
                                    std::int64_t samples, RandomStream& rng) {
  require(samples >= 1, "estimate_outage: samples must be >= 1");
  require(static_cast<int>(rates.size()) == stats.plants, "estimate_outage: one rate per plant");
  std::vector<double> lost(rates.size(), 0.0);
  for (std::int64_t s = 0; s < samples; ++s) {
    const ChannelRealization r = sample_realization(stats, rng);
    for (int k = 0; k < stats.plants; ++k) {
      if (!sinr_and_outcome(r, theta, k, rates[static_cast<std::size_t>(k)], noise).delivered) {
        lost[static_cast<std::size_t>(k)] += 1.0;
      }
    }
  }
  for (double& v : lost) v /= static_cast<double>(samples);
  return lost;
}

}  // namespace risnc
