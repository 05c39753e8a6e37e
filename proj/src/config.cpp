#include "risnc/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "risnc/error.hpp"

namespace risnc {

using nlohmann::json;

std::string to_string(Policy policy) {
  switch (policy) {
    case Policy::kSdpLookahead: return "sdp_lookahead";
    case Policy::kRandomPhase: return "random_phase";
    case Policy::kDpOracle: return "dp_oracle";
  }
  return "unknown";
}

Policy parse_policy(const std::string& name) {
  if (name == "sdp_lookahead") return Policy::kSdpLookahead;
  if (name == "random_phase") return Policy::kRandomPhase;
  if (name == "dp_oracle") return Policy::kDpOracle;
  throw Error("unknown policy '" + name + "' (expected sdp_lookahead, random_phase or dp_oracle)");
}

namespace {

// Reads members of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw Error(path_ + ": expected an object");
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw Error(path_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_number(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
  }
  throw Error(where + ": expected a number");
}

json number_to_json(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  return v;
}

std::int64_t as_integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw Error(where + ": expected an integer");
  return v.get<std::int64_t>();
}

bool as_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw Error(where + ": expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw Error(where + ": expected a string");
  return v.get<std::string>();
}

template <typename T>
void read(ObjectReader& r, const std::string& key, T& out) {
  const json* v = r.get(key);
  if (v == nullptr) return;
  const std::string where = r.where(key);
  if constexpr (std::is_same_v<T, double>) {
    out = as_number(*v, where);
  } else if constexpr (std::is_same_v<T, bool>) {
    out = as_bool(*v, where);
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
      throw Error(where + ": expected a non-negative integer");
    }
    out = v->get<std::uint64_t>();
  } else if constexpr (std::is_integral_v<T>) {
    const std::int64_t i = as_integer(*v, where);
    if (i < std::numeric_limits<T>::min() || i > std::numeric_limits<T>::max()) {
      throw Error(where + ": integer out of range");
    }
    out = static_cast<T>(i);
  }
}

void read_range(ObjectReader& r, const std::string& key, std::array<double, 2>& out) {
  const json* v = r.get(key);
  if (v == nullptr) return;
  if (!v->is_array() || v->size() != 2) throw Error(r.where(key) + ": expected [lo, hi]");
  out = {as_number((*v)[0], r.where(key)), as_number((*v)[1], r.where(key))};
}

std::vector<double> read_numbers(const json& v, const std::string& where) {
  if (!v.is_array()) throw Error(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(as_number(x, where));
  return out;
}

Mat read_matrix(const json& v, const std::string& where) {
  if (v.is_number()) return Mat::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty()) throw Error(where + ": expected a matrix (array of rows)");
  const std::size_t rows = v.size();
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  if (cols == 0) throw Error(where + ": matrix rows must be non-empty arrays");
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols) throw Error(where + ": ragged matrix");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = as_number(v[i][j], where);
  }
  return m;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

std::vector<Point> read_points(const json& v, const std::string& where) {
  if (!v.is_array()) throw Error(where + ": expected an array of [x, y] points");
  std::vector<Point> out;
  for (const auto& p : v) {
    if (!p.is_array() || p.size() != 2) throw Error(where + ": points are [x, y]");
    out.push_back({as_number(p[0], where), as_number(p[1], where)});
  }
  return out;
}

json points_to_json(const std::vector<Point>& pts) {
  json out = json::array();
  for (const Point& p : pts) out.push_back({p.x, p.y});
  return out;
}

ProcessModel read_model(const json& v, const std::string& where) {
  ObjectReader r(v, where);
  auto need = [&](const char* key) {
    const json* m = r.get(key);
    if (m == nullptr) throw Error(where + ": missing matrix '" + key + "'");
    return read_matrix(*m, r.where(key));
  };
  Mat a = need("A"), b = need("B"), c = need("C"), w = need("W"), vv = need("V"), d = need("D"),
      e = need("E"), p0 = need("P0");
  r.finish();
  try {
    return ProcessModel(a, b, c, w, vv, d, e, p0);
  } catch (const Error& err) {
    throw Error(where + ": " + err.what());
  }
}

void read_link(ObjectReader& parent, const std::string& key, LinkParameters& link) {
  const json* v = parent.get(key);
  if (v == nullptr) return;
  ObjectReader r(*v, parent.where(key));
  read(r, "kappa", link.kappa);
  read(r, "exponent", link.exponent);
  r.finish();
}

json link_to_json(const LinkParameters& l) {
  return json{{"kappa", number_to_json(l.kappa)}, {"exponent", l.exponent}};
}

}  // namespace

void Config::validate() const {
  require(horizon >= 1, "horizon must be >= 1");
  require(elements >= 1, "elements must be >= 1");
  require(plants.count >= 1, "plants.count must be >= 1");
  require(plants.state_dim >= 1, "plants.state_dim must be >= 1");
  require(plants.a_range[0] <= plants.a_range[1], "plants.a_range must be [lo, hi] with lo <= hi");
  require(plants.a_values.empty() || static_cast<int>(plants.a_values.size()) == plants.count,
          "plants.a_values needs one entry per plant");
  require(plants.models.empty() || static_cast<int>(plants.models.size()) == plants.count,
          "plants.models needs one entry per plant");
  for (double x : {plants.w, plants.v, plants.d, plants.e}) {
    require(x > 0.0, "plants: w, v, d, e must be positive");
  }
  require(plants.p0 >= 0.0, "plants.p0 must be non-negative");
  auto check_range = [](const std::array<double, 2>& r, const char* name) {
    require(r[0] > 0.0 && r[0] <= r[1], std::string("geometry.") + name + " must satisfy 0 < lo <= hi");
  };
  check_range(geometry.sensor_distance, "sensor_distance");
  check_range(geometry.controller_distance, "controller_distance");
  require(geometry.sensors.size() == geometry.controllers.size(),
          "geometry: sensors and controllers must be given together");
  require(geometry.sensors.empty() || static_cast<int>(geometry.sensors.size()) == plants.count,
          "geometry: one position per plant");
  for (const auto* pts : {&geometry.sensors, &geometry.controllers}) {
    for (const Point& p : *pts) require(p.x != 0.0 || p.y != 0.0, "geometry: positions must differ from the RIS origin");
  }
  for (const auto* link : {&channel.direct, &channel.sensor_ris, &channel.ris_controller}) {
    require(link->kappa >= 0.0, "channel: kappa must be >= 0");
    require(link->exponent > 0.0, "channel: path-loss exponent must be positive");
  }
  require(channel.noise > 0.0, "channel.noise must be positive");
  require(channel.rate > 0.0, "channel.rate must be positive");
  require(channel.rates.empty() || static_cast<int>(channel.rates.size()) == plants.count,
          "channel.rates needs one entry per plant");
  for (double r : channel.rates) require(r > 0.0, "channel.rates must be positive");
  require(channel.moment_samples >= 1 && channel.gamma_samples >= 1 && channel.outage_samples >= 1,
          "channel sample counts must be >= 1");
  require(channel.gamma_margin >= 0.0, "channel.gamma_margin must be >= 0");
  require(policy.randomization_trials >= 1, "policy.randomization_trials must be >= 1");
  require(policy.solver.tolerance > 0.0 && policy.solver.max_iterations >= 1,
          "policy.solver needs tolerance > 0 and max_iterations >= 1");
  require(oracle.grid_points >= 1 && oracle.horizon >= 1 && oracle.outage_samples >= 1,
          "oracle settings must be >= 1");
  require(!experiment.policies.empty(), "experiment.policies must not be empty");
  require(experiment.replications >= 0, "experiment.replications must be >= 0");
}

Config parse_config(const json& doc) {
  Config cfg;
  ObjectReader root(doc, "config");
  read(root, "horizon", cfg.horizon);
  read(root, "elements", cfg.elements);

  if (const json* v = root.get("plants")) {
    ObjectReader r(*v, root.where("plants"));
    read(r, "count", cfg.plants.count);
    read(r, "state_dim", cfg.plants.state_dim);
    read_range(r, "a_range", cfg.plants.a_range);
    if (const json* a = r.get("a_values")) cfg.plants.a_values = read_numbers(*a, r.where("a_values"));
    read(r, "b", cfg.plants.b);
    read(r, "c", cfg.plants.c);
    read(r, "w", cfg.plants.w);
    read(r, "v", cfg.plants.v);
    read(r, "d", cfg.plants.d);
    read(r, "e", cfg.plants.e);
    read(r, "p0", cfg.plants.p0);
    if (const json* m = r.get("models")) {
      if (!m->is_array()) throw Error(r.where("models") + ": expected an array");
      for (std::size_t i = 0; i < m->size(); ++i) {
        cfg.plants.models.push_back(read_model((*m)[i], r.where("models") + "[" + std::to_string(i) + "]"));
      }
    }
    r.finish();
  }

  if (const json* v = root.get("geometry")) {
    ObjectReader r(*v, root.where("geometry"));
    read_range(r, "sensor_distance", cfg.geometry.sensor_distance);
    read_range(r, "controller_distance", cfg.geometry.controller_distance);
    if (const json* p = r.get("sensors")) cfg.geometry.sensors = read_points(*p, r.where("sensors"));
    if (const json* p = r.get("controllers")) cfg.geometry.controllers = read_points(*p, r.where("controllers"));
    r.finish();
  }

  if (const json* v = root.get("channel")) {
    ObjectReader r(*v, root.where("channel"));
    read_link(r, "direct", cfg.channel.direct);
    read_link(r, "sensor_ris", cfg.channel.sensor_ris);
    read_link(r, "ris_controller", cfg.channel.ris_controller);
    read(r, "noise", cfg.channel.noise);
    read(r, "rate", cfg.channel.rate);
    if (const json* x = r.get("rates")) cfg.channel.rates = read_numbers(*x, r.where("rates"));
    read(r, "moment_samples", cfg.channel.moment_samples);
    read(r, "gamma_samples", cfg.channel.gamma_samples);
    read(r, "gamma_margin", cfg.channel.gamma_margin);
    read(r, "outage_samples", cfg.channel.outage_samples);
    r.finish();
  }

  if (const json* v = root.get("policy")) {
    ObjectReader r(*v, root.where("policy"));
    if (const json* p = r.get("error_propagation")) {
      const std::string s = as_string(*p, r.where("error_propagation"));
      if (s == "markov_bound") {
        cfg.policy.propagation = ErrorPropagation::kMarkovBound;
      } else if (s == "monte_carlo") {
        cfg.policy.propagation = ErrorPropagation::kMonteCarlo;
      } else {
        throw Error(r.where("error_propagation") + ": expected markov_bound or monte_carlo");
      }
    }
    read(r, "randomization_trials", cfg.policy.randomization_trials);
    if (const json* p = r.get("loss_update")) {
      const std::string s = as_string(*p, r.where("loss_update"));
      if (s == "with_input") {
        cfg.policy.loss_update = LossPropagation::kWithInput;
      } else if (s == "state_only") {
        cfg.policy.loss_update = LossPropagation::kStateOnly;
      } else {
        throw Error(r.where("loss_update") + ": expected with_input or state_only");
      }
    }
    if (const json* s = r.get("solver")) {
      ObjectReader sr(*s, r.where("solver"));
      read(sr, "tolerance", cfg.policy.solver.tolerance);
      read(sr, "max_iterations", cfg.policy.solver.max_iterations);
      read(sr, "initial_penalty", cfg.policy.solver.initial_penalty);
      sr.finish();
    }
    r.finish();
  }

  if (const json* v = root.get("oracle")) {
    ObjectReader r(*v, root.where("oracle"));
    read(r, "grid_points", cfg.oracle.grid_points);
    read(r, "horizon", cfg.oracle.horizon);
    read(r, "outage_samples", cfg.oracle.outage_samples);
    r.finish();
  }

  if (const json* v = root.get("experiment")) {
    ObjectReader r(*v, root.where("experiment"));
    if (const json* p = r.get("policies")) {
      if (!p->is_array()) throw Error(r.where("policies") + ": expected an array of names");
      cfg.experiment.policies.clear();
      for (const auto& name : *p) cfg.experiment.policies.push_back(parse_policy(as_string(name, r.where("policies"))));
    }
    read(r, "replications", cfg.experiment.replications);
    read(r, "seed", cfg.experiment.seed);
    read(r, "resample_scenario", cfg.experiment.resample_scenario);
    r.finish();
  }
  root.finish();
  cfg.validate();
  return cfg;
}

json to_json(const Config& cfg) {
  json plants{{"count", cfg.plants.count},
              {"state_dim", cfg.plants.state_dim},
              {"a_range", {cfg.plants.a_range[0], cfg.plants.a_range[1]}},
              {"a_values", cfg.plants.a_values},
              {"b", cfg.plants.b},
              {"c", cfg.plants.c},
              {"w", cfg.plants.w},
              {"v", cfg.plants.v},
              {"d", cfg.plants.d},
              {"e", cfg.plants.e},
              {"p0", cfg.plants.p0}};
  json models = json::array();
  for (const ProcessModel& m : cfg.plants.models) {
    models.push_back({{"A", matrix_to_json(m.A())}, {"B", matrix_to_json(m.B())},
                      {"C", matrix_to_json(m.C())}, {"W", matrix_to_json(m.W())},
                      {"V", matrix_to_json(m.V())}, {"D", matrix_to_json(m.D())},
                      {"E", matrix_to_json(m.E())}, {"P0", matrix_to_json(m.P0())}});
  }
  plants["models"] = models;

  json policies = json::array();
  for (Policy p : cfg.experiment.policies) policies.push_back(to_string(p));

  return json{
      {"horizon", cfg.horizon},
      {"elements", cfg.elements},
      {"plants", plants},
      {"geometry",
       {{"sensor_distance", {cfg.geometry.sensor_distance[0], cfg.geometry.sensor_distance[1]}},
        {"controller_distance", {cfg.geometry.controller_distance[0], cfg.geometry.controller_distance[1]}},
        {"sensors", points_to_json(cfg.geometry.sensors)},
        {"controllers", points_to_json(cfg.geometry.controllers)}}},
      {"channel",
       {{"direct", link_to_json(cfg.channel.direct)},
        {"sensor_ris", link_to_json(cfg.channel.sensor_ris)},
        {"ris_controller", link_to_json(cfg.channel.ris_controller)},
        {"noise", cfg.channel.noise},
        {"rate", cfg.channel.rate},
        {"rates", cfg.channel.rates},
        {"moment_samples", cfg.channel.moment_samples},
        {"gamma_samples", cfg.channel.gamma_samples},
        {"gamma_margin", cfg.channel.gamma_margin},
        {"outage_samples", cfg.channel.outage_samples}}},
      {"policy",
       {{"error_propagation",
         cfg.policy.propagation == ErrorPropagation::kMarkovBound ? "markov_bound" : "monte_carlo"},
        {"randomization_trials", cfg.policy.randomization_trials},
        {"loss_update", cfg.policy.loss_update == LossPropagation::kWithInput ? "with_input" : "state_only"},
        {"solver",
         {{"tolerance", cfg.policy.solver.tolerance},
          {"max_iterations", cfg.policy.solver.max_iterations},
          {"initial_penalty", cfg.policy.solver.initial_penalty}}}}},
      {"oracle",
       {{"grid_points", cfg.oracle.grid_points},
        {"horizon", cfg.oracle.horizon},
        {"outage_samples", cfg.oracle.outage_samples}}},
      {"experiment",
       {{"policies", policies},
        {"replications", cfg.experiment.replications},
        {"seed", cfg.experiment.seed},
        {"resample_scenario", cfg.experiment.resample_scenario}}}};
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": malformed JSON: " + e.what());
  }
  if (doc.is_object() && doc.contains("manifest_version")) {
    if (!doc.contains("config")) throw Error(path.string() + ": manifest has no config member");
    return parse_config(doc.at("config"));
  }
  return parse_config(doc);
}

}  // namespace risnc
