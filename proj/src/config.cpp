// Copyright 2026 The omav-mpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "omav/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "omav/errors.hpp"

namespace omav {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Mat6x10 = Eigen::Matrix<double, 6, kNumFeatures + 1>;

constexpr const char* kPaper = "paper";
constexpr const char* kNonPaper = "non-paper";
constexpr const char* kConfig = "config";
constexpr const char* kCli = "cli";

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::kConfigInvalid, path + ": " + msg);
}

// Resolved configs wrap every leaf as {value, source}.
YAML::Node unwrap(const YAML::Node& n) {
  if (n.IsMap() && n.size() == 2 && n["value"] && n["source"]) return n["value"];
  return n;
}

template <class T>
T scalar(const YAML::Node& n, const std::string& path, const char* what) {
  if (!n.IsScalar()) fail(path, std::string("expected ") + what);
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(path, std::string("expected ") + what + ", got '" + n.Scalar() + "'");
  }
}

void read(const YAML::Node& n, const std::string& path, double& v) { v = scalar<double>(n, path, "a number"); }
void read(const YAML::Node& n, const std::string& path, int& v) { v = scalar<int>(n, path, "an integer"); }
void read(const YAML::Node& n, const std::string& path, bool& v) { v = scalar<bool>(n, path, "true or false"); }
void read(const YAML::Node& n, const std::string& path, std::string& v) { v = scalar<std::string>(n, path, "a string"); }
void read(const YAML::Node& n, const std::string& path, std::uint64_t& v) {
  v = scalar<std::uint64_t>(n, path, "a non-negative integer");
}

template <int N>
void read(const YAML::Node& n, const std::string& path, Eigen::Matrix<double, N, 1>& v) {
  if (n.IsScalar()) {
    v.setConstant(scalar<double>(n, path, "a number or a list"));
    return;
  }
  if (!n.IsSequence() || n.size() != static_cast<std::size_t>(N)) {
    fail(path, "expected a list of " + std::to_string(N) + " numbers");
  }
  for (int i = 0; i < N; ++i) v(i) = scalar<double>(n[i], path + "[" + std::to_string(i) + "]", "a number");
}

void read(const YAML::Node& n, const std::string& path, Mat6x10& m) {
  if (!n.IsSequence() || n.size() != 6) fail(path, "expected 6 rows");
  for (int r = 0; r < 6; ++r) {
    const YAML::Node row = n[r];
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!row.IsSequence() || row.size() != static_cast<std::size_t>(kNumFeatures + 1)) {
      fail(rp, "expected " + std::to_string(kNumFeatures + 1) + " numbers");
    }
    for (int c = 0; c <= kNumFeatures; ++c) m(r, c) = scalar<double>(row[c], rp, "a number");
  }
}

json to_json_value(double v) { return v; }
json to_json_value(int v) { return v; }
json to_json_value(bool v) { return v; }
json to_json_value(std::uint64_t v) { return v; }
json to_json_value(const std::string& v) { return v; }
template <int N>
json to_json_value(const Eigen::Matrix<double, N, 1>& v) {
  return std::vector<double>(v.data(), v.data() + N);
}
json to_json_value(const Mat6x10& m) {
  json rows = json::array();
  for (int r = 0; r < 6; ++r) {
    json row = json::array();
    for (int c = 0; c <= kNumFeatures; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

// A map in the config tree. Records which keys were read so leftovers can be
// reported, and mirrors every value into the resolved tree.
class Section {
 public:
  Section(YAML::Node node, std::string path, json* out) : node_(std::move(node)), path_(std::move(path)), out_(out) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(path_, "expected a map");
    if (!out_->is_object()) *out_ = json::object();
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  template <class T>
  void get(const std::string& key, T& v, const char* default_source) {
    const char* source = default_source;
    if (const YAML::Node n = lookup(key)) {
      read(n, at(key), v);
      source = kConfig;
    }
    (*out_)[key] = {{"value", to_json_value(v)}, {"source", source}};
  }

  template <class T>
  void require(const std::string& key, T& v) {
    if (!lookup(key)) fail(at(key), "required field missing");
    get(key, v, kConfig);
  }

  /// Records a value derived from the file, such as an absolute path.
  void set(const std::string& key, const json& value, const char* source) {
    (*out_)[key] = {{"value", value}, {"source", source}};
  }

  Section child(const std::string& key) {
    YAML::Node n = lookup(key);
    return Section(n ? n : YAML::Node(), at(key), &(*out_)[key]);
  }

  void done() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      if (!used_.count(k)) fail(at(k), "unknown key");
    }
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  YAML::Node lookup(const std::string& key) {
    used_.insert(key);
    if (!node_ || !node_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& cn = node_;
    const YAML::Node n = cn[key];
    if (!n) return n;
    return unwrap(n);
  }

  YAML::Node node_;
  std::string path_;
  json* out_;
  std::set<std::string> used_;
};

// Paths in error messages and in the resolved tree stay relative to the
// config file's directory unless absolute.
std::string resolve_path(const std::string& p, const std::string& base_dir) {
  if (p.empty()) return p;
  const fs::path path(p);
  return (path.is_absolute() ? path : fs::path(base_dir) / path).lexically_normal().string();
}

template <class E, class F>
E enum_field(Section& s, const std::string& key, std::string& text, const char* source, F parse) {
  s.get(key, text, source);
  try {
    return parse(text);
  } catch (const Error& e) {
    fail(s.at(key), e.what());
  }
}

void parse_platform(Section s, SimConfig& c) {
  s.require("mass", c.params.mass);
  Vec3 inertia = c.params.inertia.diagonal();
  s.get("inertia", inertia, kNonPaper);
  c.params.inertia = inertia.asDiagonal();
  s.get("gravity", c.params.gravity, kNonPaper);

  Section g = s.child("geometry");
  int arms = 6, rotors_per_arm = 2;
  double arm_length = 0.3, drag = 0.016;
  std::string layout = "alternating_arms";
  g.get("arms", arms, kPaper);
  g.get("rotors_per_arm", rotors_per_arm, kPaper);
  g.get("arm_length", arm_length, kNonPaper);
  g.get("drag_coefficient", drag, kNonPaper);
  g.get("spin_layout", layout, kNonPaper);
  g.done();
  SpinLayout sl;
  if (layout == "alternating_arms") sl = SpinLayout::kAlternatingArms;
  else if (layout == "counter_rotating_pairs") sl = SpinLayout::kCounterRotatingPairs;
  else fail(g.at("spin_layout"), "expected alternating_arms or counter_rotating_pairs");
  if (arms < 1 || rotors_per_arm < 1) fail(g.at("arms"), "arms and rotors_per_arm must be >= 1");
  try {
    c.geometry = PlatformGeometry::regular(arms, rotors_per_arm, arm_length, drag, sl);
  } catch (const Error& e) {
    fail(g.at("arm_length"), e.what());
  }
  s.done();
}

void parse_weights(Section s, TrackingWeights& w) {
  s.get("position", w.position, kNonPaper);
  s.get("velocity", w.velocity, kNonPaper);
  s.get("attitude", w.attitude, kNonPaper);
  s.get("rate", w.rate, kNonPaper);
  s.get("terminal_scale", w.terminal_scale, kNonPaper);
  s.done();
}

void parse_sqp(Section s, nmpc::SqpSettings& q) {
  s.get("max_iterations", q.max_iterations, kNonPaper);
  s.get("kkt_tolerance", q.kkt_tolerance, kNonPaper);
  s.get("qp_max_iterations", q.qp.max_iterations, kNonPaper);
  s.get("qp_feasibility_tolerance", q.qp.feasibility_tolerance, kNonPaper);
  s.done();
}

void parse_controller(Section s, SimConfig& c) {
  std::string kind = "wmpc";
  c.controller = enum_field<ControllerKind>(s, "kind", kind, kNonPaper, controller_kind_from_string);
  s.get("control_period", c.control_period, kNonPaper);
  s.get("max_consecutive_fallbacks", c.max_consecutive_fallbacks, kNonPaper);
  std::string state = "ekf";
  s.get("state_source", state, kNonPaper);
  if (state != "ekf" && state != "truth") fail(s.at("state_source"), "expected ekf or truth");
  c.controller_uses_truth = state == "truth";

  Section w = s.child("wmpc");
  w.get("horizon", c.wmpc.horizon, kPaper);
  w.get("dt", c.wmpc.dt, kPaper);
  w.get("force_max", c.wmpc.force_max, kPaper);
  w.get("torque_max", c.wmpc.torque_max, kPaper);
  w.get("force_rate_max", c.wmpc.force_rate_max, kNonPaper);
  w.get("torque_rate_max", c.wmpc.torque_rate_max, kNonPaper);
  w.get("wrench_rate_weight", c.wmpc.wrench_rate_weight, kNonPaper);
  parse_weights(w.child("weights"), c.wmpc.weights);
  parse_sqp(w.child("sqp"), c.wmpc.sqp);
  w.done();

  Section a = s.child("ampc");
  a.get("horizon", c.ampc.horizon, kPaper);
  a.get("dt", c.ampc.dt, kPaper);
  a.get("thrust_min", c.ampc.thrust_min, kPaper);
  a.get("thrust_max", c.ampc.thrust_max, kPaper);
  a.get("thrust_rate_max", c.ampc.thrust_rate_max, kPaper);
  a.get("tilt_rate_max", c.ampc.tilt_rate_max, kPaper);
  a.get("w_thrust", c.ampc.w_thrust, kPaper);
  a.get("w_tilt", c.ampc.w_tilt, kPaper);
  a.get("w_tilt_rate", c.ampc.w_tilt_rate, kPaper);
  a.get("w_thrust_rate", c.ampc.w_thrust_rate, kNonPaper);
  parse_weights(a.child("weights"), c.ampc.weights);
  parse_sqp(a.child("sqp"), c.ampc.sqp);
  a.done();
  s.done();
}

void parse_residual(Section s, ExperimentConfig& e, const std::string& base_dir) {
  std::string mode = "N/c";
  e.sim.residual_mode = enum_field<ResidualMode>(s, "mode", mode, kNonPaper, residual_mode_from_string);
  s.get("lambda", e.lambda, kPaper);
  std::string model;
  if (s.has("model")) {
    s.get("model", model, kConfig);
    e.model_path = resolve_path(model, base_dir);
    s.set("model", e.model_path, kConfig);
    try {
      e.sim.residual_model = load_model(e.model_path);
    } catch (const Error& err) {
      fail(s.at("model"), err.what());
    }
  }
  const bool needs_model = e.sim.residual_mode == ResidualMode::kInMpc || e.sim.residual_mode == ResidualMode::kPostMpc;
  if (needs_model && e.model_path.empty()) fail(s.at("model"), "required for mode " + mode);
  s.done();
}

void parse_estimator(Section s, SimConfig& c) {
  s.get("force_noise", c.ekf.force, kNonPaper);
  s.get("torque_noise", c.ekf.torque, kNonPaper);
  s.get("position_noise", c.ekf.position, kNonPaper);
  s.get("velocity_noise", c.ekf.velocity, kNonPaper);
  s.get("attitude_noise", c.ekf.attitude, kNonPaper);
  s.get("rate_noise", c.ekf.rate, kNonPaper);
  s.get("sigma_p", c.ekf.sigma_p, kNonPaper);
  s.get("sigma_theta", c.ekf.sigma_theta, kNonPaper);
  s.get("initial_sigma_force", c.ekf_sigma_force, kNonPaper);
  s.get("initial_sigma_torque", c.ekf_sigma_torque, kNonPaper);
  s.done();
}

void parse_sensors(Section s, SensorConfig& c) {
  s.get("pose_rate", c.pose_rate, kNonPaper);
  s.get("sigma_p", c.sigma_p, kNonPaper);
  s.get("sigma_theta", c.sigma_theta, kNonPaper);
  s.get("pose_latency", c.pose_latency, kNonPaper);
  s.get("imu_rate", c.imu_rate, kNonPaper);
  s.get("accel_noise_density", c.accel_noise_density, kNonPaper);
  s.get("gyro_noise_density", c.gyro_noise_density, kNonPaper);
  s.get("accel_bias", c.accel_bias, kNonPaper);
  s.done();
}

void parse_actuators(Section s, ActuatorPlantConfig& c) {
  s.get("servo_tau", c.servo_tau, kNonPaper);
  s.get("servo_rate_max", c.servo_rate_max, kNonPaper);
  s.get("thrust_tau", c.thrust_tau, kNonPaper);
  s.get("thrust_rate_max", c.thrust_rate_max, kNonPaper);
  s.get("thrust_min", c.thrust_min, kNonPaper);
  s.get("thrust_max", c.thrust_max, kPaper);
  s.done();
}

void parse_disturbance(Section s, DisturbanceConfig& d) {
  std::string preset = "none";
  s.get("preset", preset, kNonPaper);
  if (preset == "synthetic_linear") d = synthetic_linear_disturbance();
  else if (preset != "none") fail(s.at("preset"), "expected none or synthetic_linear");
  std::string mode(to_string(d.mode));
  d.mode = enum_field<DisturbanceConfig::Mode>(s, "mode", mode, kNonPaper, disturbance_mode_from_string);
  s.get("force", d.wrench.force, kNonPaper);
  s.get("torque", d.wrench.torque, kNonPaper);
  s.get("C", d.C, kNonPaper);
  s.get("noise_sigma", d.noise_sigma, kNonPaper);
  s.get("noise_rate", d.noise_rate, kNonPaper);
  s.done();
}

template <class F>
TrajectoryPtr build(const Section& s, F make) {
  try {
    return make();
  } catch (const Error& e) {
    fail(s.at("type"), e.what());
  }
}

TrajectoryPtr parse_trajectory(Section s, std::string& type, const std::string& base_dir) {
  s.require("type", type);
  if (type == "hover") {
    double duration = 10.0;
    Vec3 p = Vec3::Zero();
    s.get("duration", duration, kNonPaper);
    s.get("position", p, kNonPaper);
    s.done();
    return build(s, [&] { return hover(duration, p); });
  }
  if (type == "square") {
    SquareOptions o;
    s.get("leg", o.leg, kPaper);
    s.get("v_max", o.v_max, kNonPaper);
    s.get("accel", o.accel, kNonPaper);
    s.get("altitude", o.altitude, kNonPaper);
    s.get("corner_dwell", o.corner_dwell, kNonPaper);
    s.get("start_dwell", o.start_dwell, kNonPaper);
    s.get("laps", o.laps, kNonPaper);
    s.done();
    return build(s, [&] { return square(o); });
  }
  if (type == "attitude") {
    double max_angle = std::numbers::pi / 4, duration = 27.0;
    s.get("max_angle", max_angle, kPaper);
    s.get("duration", duration, kPaper);
    s.done();
    return build(s, [&] { return attitude_profile(max_angle, duration); });
  }
  if (type == "lemniscate" || type == "lemniscate_fast") {
    LemniscateOptions o = type == "lemniscate" ? lemniscate_slow() : lemniscate_fast();
    s.get("period", o.period, kPaper);
    s.get("peak_speed", o.peak_speed, kPaper);
    s.get("bend_ratio", o.bend_ratio, kNonPaper);
    s.get("pitch_max", o.pitch_max, kNonPaper);
    s.get("start_dwell", o.start_dwell, kNonPaper);
    s.get("laps", o.laps, kNonPaper);
    s.done();
    return build(s, [&] { return lemniscate(o); });
  }
  if (type == "step_x") {
    StepOptions o;
    s.get("length", o.length, kPaper);
    s.get("dwell", o.dwell, kNonPaper);
    s.get("lead", o.lead, kNonPaper);
    s.get("repeats", o.repeats, kNonPaper);
    s.get("preview", o.preview, kNonPaper);
    s.done();
    return build(s, [&] { return step_x(o); });
  }
  if (type == "csv") {
    std::string path;
    s.require("path", path);
    path = resolve_path(path, base_dir);
    s.set("path", path, kConfig);
    s.done();
    return build(s, [&] { return load_csv_trajectory(path); });
  }
  fail(s.at("type"), "unknown trajectory '" + type + "' (hover, square, attitude, lemniscate, lemniscate_fast, step_x, csv)");
}

void parse_simulation(Section s, SimConfig& c) {
  s.get("plant_dt", c.plant_dt, kNonPaper);
  s.get("duration", c.duration, kNonPaper);
  s.get("seed", c.seed, kNonPaper);
  s.get("log_imu", c.log_imu, kNonPaper);
  s.done();
}

void parse_output(Section s, ExperimentConfig& e) {
  s.get("dir", e.out_dir, kNonPaper);
  s.get("name", e.name, kNonPaper);
  s.done();
}

void apply_overrides(ExperimentConfig& e, const ConfigOverrides& o) {
  json& r = e.resolved;
  if (o.seed) {
    e.sim.seed = *o.seed;
    r["simulation"]["seed"] = {{"value", *o.seed}, {"source", kCli}};
  }
  if (o.log_imu) {
    e.sim.log_imu = *o.log_imu;
    r["simulation"]["log_imu"] = {{"value", *o.log_imu}, {"source", kCli}};
  }
  if (o.out_dir) {
    e.out_dir = *o.out_dir;
    r["output"]["dir"] = {{"value", *o.out_dir}, {"source", kCli}};
  }
}

ExperimentConfig parse_root(const YAML::Node& root, const std::string& base_dir, const ConfigOverrides& overrides) {
  if (!root.IsMap()) fail("<root>", "expected a map of sections");
  ExperimentConfig e;
  e.resolved = json::object();
  Section s(root, "", &e.resolved);
  parse_platform(s.child("platform"), e.sim);
  parse_controller(s.child("controller"), e.sim);
  parse_residual(s.child("residual"), e, base_dir);
  parse_estimator(s.child("estimator"), e.sim);
  parse_sensors(s.child("sensors"), e.sim.sensors);
  parse_actuators(s.child("actuators"), e.sim.actuators);
  parse_disturbance(s.child("disturbance"), e.sim.disturbance);
  e.sim.trajectory = parse_trajectory(s.child("trajectory"), e.trajectory_type, base_dir);
  parse_simulation(s.child("simulation"), e.sim);
  parse_output(s.child("output"), e);
  s.done();
  apply_overrides(e, overrides);
  try {
    e.sim.validate();
  } catch (const Error& err) {
    fail("<config>", err.what());
  }
  return e;
}

YAML::Node parse_yaml(const std::string& text, const std::string& origin) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& ex) {
    fail(origin, std::string("parse error: ") + ex.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Maps are merged key by key; anything else in the overlay replaces the base.
YAML::Node merge(const YAML::Node& base, const YAML::Node& overlay) {
  if (!base || !base.IsMap() || !overlay.IsMap()) return YAML::Clone(overlay);
  YAML::Node out = YAML::Clone(base);
  for (const auto& kv : overlay) {
    const std::string k = kv.first.as<std::string>();
    const YAML::Node& cb = base;
    out[k] = merge(cb[k], kv.second);
  }
  return out;
}

std::string base_dir_of(const std::string& path) {
  const fs::path parent = fs::absolute(path).parent_path();
  return parent.string();
}

}  // namespace

DisturbanceConfig synthetic_linear_disturbance() {
  DisturbanceConfig d;
  d.mode = DisturbanceConfig::Mode::kLinearFeatures;
  const double thrust_loss = 0.05, mass_error = 0.2, g = 9.81;
  const Vec3 com(0.003, -0.0021, 0.0);
  d.C.setZero();
  d.C.block<3, 3>(0, 0) = -thrust_loss * Mat3::Identity();
  d.C.block<3, 3>(0, 6) = -mass_error * g * Mat3::Identity();
  Mat3 com_x;
  com_x << 0, -com.z(), com.y(), com.z(), 0, -com.x(), -com.y(), com.x(), 0;
  d.C.block<3, 3>(3, 0) = -com_x;
  d.C.col(kNumFeatures) << 0.3, -0.2, 0.0, 0.02, -0.02, 0.01;
  d.noise_sigma << 0.3, 0.3, 0.3, 0.01, 0.01, 0.01;
  return d;
}

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir, const ConfigOverrides& overrides) {
  return parse_root(parse_yaml(text, "<config>"), base_dir, overrides);
}

ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  return parse_root(parse_yaml(read_file(path), path), base_dir_of(path), overrides);
}

bool is_matrix_config(const std::string& path) {
  const YAML::Node root = parse_yaml(read_file(path), path);
  return root.IsMap() && root["base"];
}

MatrixConfig load_matrix(const std::string& path, const ConfigOverrides& overrides) {
  const std::string dir = base_dir_of(path);
  const YAML::Node root = parse_yaml(read_file(path), path);
  if (!root.IsMap()) fail("<root>", "expected a map");
  for (const auto& kv : root) {
    const std::string k = kv.first.as<std::string>();
    if (k != "base" && k != "rows" && k != "columns" && k != "output") fail(k, "unknown key");
  }
  YAML::Node base = root["base"];
  if (!base) fail("base", "required field missing");
  std::string base_dir = dir;
  if (base.IsScalar()) {
    const std::string p = resolve_path(base.as<std::string>(), dir);
    base = parse_yaml(read_file(p), p);
    base_dir = base_dir_of(p);
  }
  const auto named_list = [&](const char* key, const char* body) {
    const YAML::Node list = root[key];
    if (!list || !list.IsSequence() || list.size() == 0) fail(key, "expected a non-empty list");
    std::vector<std::pair<std::string, YAML::Node>> items;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = std::string(key) + "[" + std::to_string(i) + "]";
      const YAML::Node item = list[i];
      if (!item.IsMap() || !item["name"]) fail(p, "expected a map with a name");
      for (const auto& kv : item) {
        const std::string k = kv.first.as<std::string>();
        if (k != "name" && k != body) fail(p + "." + k, "unknown key");
      }
      items.emplace_back(item["name"].as<std::string>(), item[body] ? item[body] : YAML::Node(YAML::NodeType::Map));
    }
    return items;
  };
  const auto rows = named_list("rows", "trajectory");
  const auto cols = named_list("columns", "set");

  MatrixConfig m;
  if (const YAML::Node out = root["output"]) {
    if (!out.IsMap()) fail("output", "expected a map");
    for (const auto& kv : out) {
      if (kv.first.as<std::string>() != "dir") fail("output." + kv.first.as<std::string>(), "unknown key");
    }
    m.out_dir = out["dir"].as<std::string>();
  }
  if (overrides.out_dir) m.out_dir = *overrides.out_dir;
  for (const auto& r : rows) m.rows.push_back(r.first);
  for (const auto& c : cols) m.columns.push_back(c.first);
  for (const auto& r : rows) {
    for (const auto& c : cols) {
      YAML::Node cell = merge(base, c.second);
      YAML::Node traj(YAML::NodeType::Map);
      traj["trajectory"] = r.second;
      cell = merge(cell, traj);
      try {
        MatrixCell mc{r.first, c.first, parse_root(cell, base_dir, overrides)};
        m.cells.push_back(std::move(mc));
      } catch (const Error& e) {
        throw Error(ErrorCode::kConfigInvalid, "cell (" + r.first + ", " + c.first + "): " + e.what());
      }
    }
  }
  return m;
}

}  // namespace omav
