#include "risnc/process.hpp"

#include <string>

#include "risnc/error.hpp"

namespace risnc {

namespace {

void check_definite(const Mat& m, const char* name, bool strict) {
  const bool ok = strict ? is_spd(m) : is_psd(m);
  if (!ok) {
    throw Error(std::string("ProcessModel: ") + name + " must be symmetric positive " +
                (strict ? "definite" : "semidefinite"));
  }
}

}  // namespace

ProcessModel::ProcessModel(Mat a, Mat b, Mat c, Mat w, Mat v, Mat d, Mat e, Mat p0)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), w_(std::move(w)),
      v_(std::move(v)), d_(std::move(d)), e_(std::move(e)), p0_(std::move(p0)) {
  const Eigen::Index n = a_.rows();
  require(n >= 1 && a_.cols() == n, "ProcessModel: A must be square and non-empty");
  require(b_.rows() == n && b_.cols() >= 1, "ProcessModel: B must be n x m");
  require(c_.cols() == n && c_.rows() >= 1, "ProcessModel: C must be p x n");
  const Eigen::Index m = b_.cols();
  const Eigen::Index p = c_.rows();
  require(w_.rows() == n && w_.cols() == n, "ProcessModel: W must be n x n");
  require(v_.rows() == p && v_.cols() == p, "ProcessModel: V must be p x p");
  require(d_.rows() == n && d_.cols() == n, "ProcessModel: D must be n x n");
  require(e_.rows() == m && e_.cols() == m, "ProcessModel: E must be m x m");
  require(p0_.rows() == n && p0_.cols() == n, "ProcessModel: P0 must be n x n");
  require(a_.allFinite() && b_.allFinite() && c_.allFinite(),
          "ProcessModel: system matrices must be finite");
  check_definite(w_, "W", true);
  check_definite(v_, "V", true);
  check_definite(d_, "D", true);
  check_definite(e_, "E", true);
  check_definite(p0_, "P0", false);
  w_root_ = covariance_factor(w_);
  v_root_ = covariance_factor(v_);
  p0_root_ = covariance_factor(p0_);
}

ProcessModel ProcessModel::scalar(double a, double b, double c, double w, double v, double d,
                                  double e, double p0) {
  auto one = [](double x) { return Mat::Constant(1, 1, x); };
  return ProcessModel(one(a), one(b), one(c), one(w), one(v), one(d), one(e), one(p0));
}

PlantState init_state(const ProcessModel& model, RandomStream& rng) {
  PlantState s;
  s.x = model.initial_factor() * rng.normal_vector(model.state_dim());
  s.t = 0;
  return s;
}

PlantState step_process(const PlantState& state, const Vec& u, const ProcessModel& model,
                        RandomStream& rng) {
  require(state.x.size() == model.state_dim(), "step_process: state dimension mismatch");
  require(u.size() == model.input_dim(), "step_process: input dimension mismatch");
  PlantState next;
  next.x = model.A() * state.x + model.B() * u +
           model.process_noise_factor() * rng.normal_vector(model.state_dim());
  next.t = state.t + 1;
  return next;
}

Vec measure(const PlantState& state, const ProcessModel& model, RandomStream& rng) {
  require(state.x.size() == model.state_dim(), "measure: state dimension mismatch");
  return model.C() * state.x +
         model.measurement_noise_factor() * rng.normal_vector(model.output_dim());
}

}  // namespace risnc
