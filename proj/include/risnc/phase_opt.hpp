#pragma once

#include <cstdint>
#include <vector>

#include "risnc/channel.hpp"
#include "risnc/linalg.hpp"
#include "risnc/lqr.hpp"
#include "risnc/process.hpp"
#include "risnc/random.hpp"
#include "risnc/sdp.hpp"

namespace risnc {

/// E[S_k - (2^R_k - 1) I_k] = v^H q v + delta with v = [theta; 1].
///
/// The top-left block is conj(E[H_kk H_kk^H]) - c sum_{l!=k} conj(E[H_lk H_lk^H]),
/// the last column holds the matching conj(E[H conj(h_sc)]) terms and the last
/// row is its adjoint, c = 2^R_k - 1. Conjugating the moment blocks lets the
/// RIS phases theta enter the lifted vector directly.
struct QuadraticForm {
  CMat q;
  double delta = 0.0;
};

double rate_threshold(double rate);  ///< 2^R - 1

QuadraticForm assemble_q(const MomentSet& moments, int k, double rate);
std::vector<QuadraticForm> assemble_q_all(const MomentSet& moments, const std::vector<double>& rates);

/// Re(v^H q v) for v = [theta; 1].
double lifted_objective(const CMat& q, const PhaseVector& theta);

/// v^H q v + delta.
double expected_margin(const QuadraticForm& form, const PhaseVector& theta);

/// clamp((gamma - margin) / (gamma - noise (2^R - 1)), 0, 1). Throws when the
/// denominator is not positive.
double markov_bound_from_margin(double margin, double gamma, double rate, double noise);

double markov_error_bound(const MomentSet& moments, const PhaseVector& theta, int k,
                          double gamma, double rate, double noise);

/// G = (A Pbar(t-1) A^T + W) - P_s(t|t); p_bar_prev == nullptr means slot 0
/// where the loss branch is the prior P0.
Mat g_matrix(const ProcessModel& model, const Mat* p_bar_prev, const Mat& p_s_posterior);

/// Per-slot inputs to the RIS decision, one entry per plant.
struct LookaheadTerms {
  std::vector<double> trace_fg;  ///< tr(F_k(t) G_k(t))
  std::vector<QuadraticForm> forms;
  std::vector<double> gammas;
  std::vector<double> rates;
  double noise = 1e-5;
};

/// Markov-bound error estimate of every plant at theta.
std::vector<double> predicted_errors(const LookaheadTerms& terms, const PhaseVector& theta);

/// sum_k tr(F_k G_k) * Pe_k(theta) with Pe the Markov bound.
double lookahead_objective(const LookaheadTerms& terms, const PhaseVector& theta);

/// sum_k c_k (gamma_k - delta_k - tr(Q_k Sigma)) = offset - tr(q_bar Sigma),
/// c_k = max(tr(F_k G_k), 0) / (gamma_k - noise (2^R_k - 1)).
struct SdpInstance {
  CMat q_bar;
  std::vector<double> weights;
  double offset = 0.0;
  std::vector<int> floored;  ///< plants whose negative tr(F G) was floored at 0
};

SdpInstance build_sdp_instance(const LookaheadTerms& terms);

/// Best of `trials` Gaussian draws g ~ CN(0, Sigma); each candidate takes
/// theta_i = exp(j (arg g_i - arg g_{M+1})), i.e. the first M entries with
/// the global phase referenced to the auxiliary entry, and is scored by
/// v^H q_bar v.
PhaseVector gaussian_randomization(const SdpSolution& solution, const SdpInstance& instance,
                                   int trials, RandomStream& rng);

inline constexpr int kDefaultRandomizationTrials = 100;

struct PhaseDecision {
  PhaseVector phase;
  std::vector<double> predicted_error;
  SdpSolution solver;
  std::vector<int> floored;
  bool fallback = false;  ///< all weights zero, random phase returned
};

/// One-step lookahead via SDP relaxation and Gaussian randomization.
PhaseDecision choose_phase_sdp(const LookaheadTerms& terms, const SdpSettings& settings,
                               int trials, RandomStream& rng);

/// I.i.d. uniform phases on [0, 2pi).
PhaseVector random_phase_baseline(int elements, RandomStream& rng);

// ---------------------------------------------------------------------------
// Exhaustive oracle for the optimal phase sequence on a finite grid.

/// All phase vectors whose entries lie on the uniform grid 2 pi j / points.
std::vector<PhaseVector> phase_grid(int elements, int points_per_element);

inline constexpr std::int64_t kOracleBudget = 1'000'000;

struct OracleProblem {
  std::vector<ProcessModel> models;
  std::vector<RiccatiSchedule> schedules;
  std::vector<std::vector<Mat>> sensor_covariances;  ///< [k][t] = P_s(t|t)
  std::vector<PhaseVector> grid;
  std::vector<std::vector<double>> outage;  ///< [grid index][k] true erasure probability
  int horizon = 1;
};

/// Builds an oracle problem, estimating each grid point's erasure
/// probabilities by Monte Carlo.
OracleProblem make_oracle_problem(std::vector<ProcessModel> models,
                                  const ChannelStatistics& channel,
                                  const std::vector<double>& rates, double noise,
                                  std::vector<PhaseVector> grid, int horizon,
                                  std::int64_t outage_samples, RandomStream& rng);

struct ValueTable {
  int horizon = 0;
  std::vector<int> sequence;  ///< grid indices per slot
  std::vector<PhaseVector> phases;
  double value = 0.0;  ///< sum_t sum_k tr(F_k(t) Pbar_k(t))
  std::int64_t sequences_evaluated = 0;
};

/// Exact minimization over all grid sequences. Throws when grid^T exceeds
/// kOracleBudget.
ValueTable dp_oracle(const OracleProblem& problem);

/// Greedy one-step lookahead on the grid using the true erasure probabilities.
ValueTable greedy_lookahead(const OracleProblem& problem);

double sequence_value(const OracleProblem& problem, const std::vector<int>& sequence);

}  // namespace risnc
