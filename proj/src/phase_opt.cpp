#include "risnc/phase_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "risnc/error.hpp"
#include "risnc/estimation.hpp"

namespace risnc {

double rate_threshold(double rate) { return std::exp2(rate) - 1.0; }

QuadraticForm assemble_q(const MomentSet& moments, int k, double rate) {
  const int K = moments.plants();
  const int M = moments.elements();
  require(k >= 0 && k < K, "assemble_q: plant index out of range");
  const double c = rate_threshold(rate);
  CMat q1 = moments.HH(k, k).conjugate();
  CVec q2 = moments.Hh(k, k).conjugate();
  double delta = moments.hh(k, k);
  for (int l = 0; l < K; ++l) {
    if (l == k) continue;
    q1 -= c * moments.HH(l, k).conjugate();
    q2 -= c * moments.Hh(l, k).conjugate();
    delta -= c * moments.hh(l, k);
  }
  QuadraticForm form;
  form.q = CMat::Zero(M + 1, M + 1);
  form.q.topLeftCorner(M, M) = q1;
  form.q.topRightCorner(M, 1) = q2;
  form.q.bottomLeftCorner(1, M) = q2.adjoint();
  hermitianize(form.q);
  form.delta = delta;
  return form;
}

std::vector<QuadraticForm> assemble_q_all(const MomentSet& moments, const std::vector<double>& rates) {
  require(static_cast<int>(rates.size()) == moments.plants(), "assemble_q_all: one rate per plant");
  std::vector<QuadraticForm> out;
  out.reserve(rates.size());
  for (int k = 0; k < moments.plants(); ++k) out.push_back(assemble_q(moments, k, rates[static_cast<std::size_t>(k)]));
  return out;
}

double lifted_objective(const CMat& q, const PhaseVector& theta) {
  require(q.rows() == theta.size() + 1, "lifted_objective: dimension mismatch");
  const CVec v = theta.lifted();
  return (v.adjoint() * q * v)(0).real();
}

double expected_margin(const QuadraticForm& form, const PhaseVector& theta) {
  return lifted_objective(form.q, theta) + form.delta;
}

double markov_bound_from_margin(double margin, double gamma, double rate, double noise) {
  const double denom = gamma - noise * rate_threshold(rate);
  if (!(denom > 0.0)) throw Error("markov bound: gamma does not exceed noise * (2^R - 1)");
  return std::clamp((gamma - margin) / denom, 0.0, 1.0);
}

double markov_error_bound(const MomentSet& moments, const PhaseVector& theta, int k,
                          double gamma, double rate, double noise) {
  const QuadraticForm form = assemble_q(moments, k, rate);
  return markov_bound_from_margin(expected_margin(form, theta), gamma, rate, noise);
}

Mat g_matrix(const ProcessModel& model, const Mat* p_bar_prev, const Mat& p_s_posterior) {
  Mat g = loss_branch_covariance(p_bar_prev, model) - p_s_posterior;
  symmetrize(g);
  return g;
}

namespace {

void check_terms(const LookaheadTerms& terms) {
  const std::size_t K = terms.forms.size();
  require(K >= 1 && terms.trace_fg.size() == K && terms.gammas.size() == K &&
              terms.rates.size() == K,
          "lookahead: inconsistent per-plant inputs");
}

}  // namespace

std::vector<double> predicted_errors(const LookaheadTerms& terms, const PhaseVector& theta) {
  check_terms(terms);
  std::vector<double> out(terms.forms.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = markov_bound_from_margin(expected_margin(terms.forms[k], theta), terms.gammas[k],
                                      terms.rates[k], terms.noise);
  }
  return out;
}

double lookahead_objective(const LookaheadTerms& terms, const PhaseVector& theta) {
  const std::vector<double> pe = predicted_errors(terms, theta);
  double total = 0.0;
  for (std::size_t k = 0; k < pe.size(); ++k) total += terms.trace_fg[k] * pe[k];
  return total;
}

SdpInstance build_sdp_instance(const LookaheadTerms& terms) {
  check_terms(terms);
  const Eigen::Index dim = terms.forms.front().q.rows();
  SdpInstance inst;
  inst.q_bar = CMat::Zero(dim, dim);
  inst.weights.resize(terms.forms.size());
  for (std::size_t k = 0; k < terms.forms.size(); ++k) {
    const double denom = terms.gammas[k] - terms.noise * rate_threshold(terms.rates[k]);
    if (!(denom > 0.0)) throw Error("build_sdp_instance: infeasible gamma for plant " + std::to_string(k));
    double w = terms.trace_fg[k];
    if (w < 0.0) {
      inst.floored.push_back(static_cast<int>(k));
      w = 0.0;
    }
    w /= denom;
    inst.weights[k] = w;
    inst.q_bar += w * terms.forms[k].q;
    inst.offset += w * (terms.gammas[k] - terms.forms[k].delta);
  }
  hermitianize(inst.q_bar);
  return inst;
}

PhaseVector gaussian_randomization(const SdpSolution& solution, const SdpInstance& instance,
                                   int trials, RandomStream& rng) {
  require(trials >= 1, "gaussian_randomization: trials must be >= 1");
  const Eigen::Index dim = solution.sigma.rows();
  require(dim >= 2 && instance.q_bar.rows() == dim, "gaussian_randomization: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<CMat> es(solution.sigma);
  const Vec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMat factor = es.eigenvectors() * root.asDiagonal();
  const Eigen::Index M = dim - 1;

  PhaseVector best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const CVec g = factor * rng.complex_normal_vector(dim);
    const Complex ref = std::polar(1.0, -std::arg(g(M)));
    const PhaseVector candidate = PhaseVector::from_complex(g.head(M) * ref);
    const double value = lifted_objective(instance.q_bar, candidate);
    if (value > best_value) {
      best_value = value;
      best = candidate;
    }
  }
  return best;
}

PhaseVector random_phase_baseline(int elements, RandomStream& rng) {
  require(elements >= 1, "random_phase_baseline: need at least one element");
  Vec phi(elements);
  for (int i = 0; i < elements; ++i) phi(i) = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return PhaseVector::from_phases(phi);
}

PhaseDecision choose_phase_sdp(const LookaheadTerms& terms, const SdpSettings& settings,
                               int trials, RandomStream& rng) {
  const SdpInstance inst = build_sdp_instance(terms);
  PhaseDecision d;
  d.floored = inst.floored;
  const Eigen::Index M = inst.q_bar.rows() - 1;
  const bool any_weight = std::any_of(inst.weights.begin(), inst.weights.end(),
                                      [](double w) { return w > 0.0; });
  if (!any_weight) {
    d.fallback = true;
    d.phase = random_phase_baseline(static_cast<int>(M), rng);
  } else {
    d.solver = solve_sdp(inst.q_bar, settings);
    d.phase = gaussian_randomization(d.solver, inst, trials, rng);
  }
  d.predicted_error = predicted_errors(terms, d.phase);
  return d;
}

std::vector<PhaseVector> phase_grid(int elements, int points_per_element) {
  require(elements >= 1 && points_per_element >= 1, "phase_grid: bad grid size");
  double total = std::pow(static_cast<double>(points_per_element), elements);
  require(total <= static_cast<double>(kOracleBudget), "phase_grid: grid too large");
  const auto count = static_cast<std::int64_t>(total);
  const double step = 2.0 * std::numbers::pi / points_per_element;
  std::vector<PhaseVector> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (std::int64_t idx = 0; idx < count; ++idx) {
    Vec phi(elements);
    std::int64_t rest = idx;
    for (int i = 0; i < elements; ++i) {
      phi(i) = step * static_cast<double>(rest % points_per_element);
      rest /= points_per_element;
    }
    grid.push_back(PhaseVector::from_phases(phi));
  }
  return grid;
}

OracleProblem make_oracle_problem(std::vector<ProcessModel> models,
                                  const ChannelStatistics& channel,
                                  const std::vector<double>& rates, double noise,
                                  std::vector<PhaseVector> grid, int horizon,
                                  std::int64_t outage_samples, RandomStream& rng) {
  require(static_cast<int>(models.size()) == channel.plants, "make_oracle_problem: plant count mismatch");
  require(!grid.empty(), "make_oracle_problem: empty grid");
  OracleProblem p;
  p.horizon = horizon;
  for (const ProcessModel& m : models) {
    p.schedules.push_back(riccati_backward(m, horizon));
    p.sensor_covariances.push_back(sensor_covariance_schedule(m, horizon));
  }
  p.models = std::move(models);
  const std::uint64_t seed = rng.next_u64();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    // Common random numbers across grid points.
    RandomStream stream = RandomStream::derive(seed, {0});
    p.outage.push_back(estimate_outage(channel, grid[g], rates, noise, outage_samples, stream));
  }
  p.grid = std::move(grid);
  return p;
}

namespace {

struct OracleState {
  std::vector<Mat> p_bar;  // per plant
  double value = 0.0;
};

// Advances all plants one slot with grid point g; returns stage value.
double advance(const OracleProblem& p, int t, std::size_t g, const std::vector<Mat>* prev,
               std::vector<Mat>& next) {
  double stage = 0.0;
  const auto ti = static_cast<std::size_t>(t);
  for (std::size_t k = 0; k < p.models.size(); ++k) {
    const double pe = p.outage[g][k];
    const Mat& ps = p.sensor_covariances[k][ti];
    next[k] = prev == nullptr ? expected_cov_initial(ps, pe, p.models[k])
                              : expected_cov_step((*prev)[k], ps, pe, p.models[k]);
    stage += (p.schedules[k].weight[ti] * next[k]).trace();
  }
  return stage;
}

void check_problem(const OracleProblem& p) {
  require(p.horizon >= 1, "oracle: horizon must be >= 1");
  require(!p.grid.empty() && p.outage.size() == p.grid.size(), "oracle: outage table does not match grid");
  require(p.schedules.size() == p.models.size() && p.sensor_covariances.size() == p.models.size(),
          "oracle: per-plant tables incomplete");
  for (const auto& row : p.outage) {
    require(row.size() == p.models.size(), "oracle: outage row needs one entry per plant");
  }
}

struct Search {
  const OracleProblem& p;
  std::vector<int> current;
  std::vector<int> best;
  double best_value = std::numeric_limits<double>::infinity();
  std::int64_t leaves = 0;

  void run(int t, const std::vector<Mat>* prev, double acc) {
    if (t == p.horizon) {
      ++leaves;
      if (acc < best_value) {
        best_value = acc;
        best = current;
      }
      return;
    }
    std::vector<Mat> next(p.models.size());
    for (std::size_t g = 0; g < p.grid.size(); ++g) {
      const double stage = advance(p, t, g, prev, next);
      current[static_cast<std::size_t>(t)] = static_cast<int>(g);
      run(t + 1, &next, acc + stage);
    }
  }
};

ValueTable make_table(const OracleProblem& p, std::vector<int> sequence, double value,
                      std::int64_t evaluated) {
  ValueTable table;
  table.horizon = p.horizon;
  table.value = value;
  table.sequences_evaluated = evaluated;
  for (int g : sequence) table.phases.push_back(p.grid[static_cast<std::size_t>(g)]);
  table.sequence = std::move(sequence);
  return table;
}

}  // namespace

ValueTable dp_oracle(const OracleProblem& problem) {
  check_problem(problem);
  const double size = std::pow(static_cast<double>(problem.grid.size()), problem.horizon);
  if (size > static_cast<double>(kOracleBudget)) {
    throw Error("dp_oracle: grid^T = " + std::to_string(size) + " exceeds budget " +
                std::to_string(kOracleBudget));
  }
  Search search{problem, std::vector<int>(static_cast<std::size_t>(problem.horizon), 0), {}};
  search.run(0, nullptr, 0.0);
  return make_table(problem, search.best, search.best_value, search.leaves);
}

ValueTable greedy_lookahead(const OracleProblem& problem) {
  check_problem(problem);
  std::vector<int> sequence;
  std::vector<Mat> prev(problem.models.size());
  std::vector<Mat> next(problem.models.size());
  bool first = true;
  double total = 0.0;
  for (int t = 0; t < problem.horizon; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < problem.grid.size(); ++g) {
      double score = 0.0;
      for (std::size_t k = 0; k < problem.models.size(); ++k) {
        const Mat G = g_matrix(problem.models[k], first ? nullptr : &prev[k],
                               problem.sensor_covariances[k][ti]);
        score += (problem.schedules[k].weight[ti] * G).trace() * problem.outage[g][k];
      }
      if (score < best_score) {
        best_score = score;
        best = g;
      }
    }
    total += advance(problem, t, best, first ? nullptr : &prev, next);
    prev.swap(next);
    first = false;
    sequence.push_back(static_cast<int>(best));
  }
  return make_table(problem, std::move(sequence), total, 1);
}

double sequence_value(const OracleProblem& problem, const std::vector<int>& sequence) {
  check_problem(problem);
  require(static_cast<int>(sequence.size()) == problem.horizon, "sequence_value: wrong length");
  std::vector<Mat> prev(problem.models.size());
  std::vector<Mat> next(problem.models.size());
  double total = 0.0;
  for (int t = 0; t < problem.horizon; ++t) {
    const int g = sequence[static_cast<std::size_t>(t)];
    require(g >= 0 && static_cast<std::size_t>(g) < problem.grid.size(), "sequence_value: bad grid index");
    total += advance(problem, t, static_cast<std::size_t>(g), t == 0 ? nullptr : &prev, next);
    prev.swap(next);
  }
  return total;
}

}  // namespace risnc
