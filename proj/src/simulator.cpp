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

#include "omav/simulator.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <sstream>

#include <spdlog/spdlog.h>

#include "omav/errors.hpp"

namespace omav {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kConfigInvalid, what);
}

// Independent generator per named stream.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x6f6d6176u};
  return std::mt19937_64(seq);
}

enum Stream : std::uint64_t { kPoseStream = 1, kImuStream = 2, kDisturbanceStream = 3 };

Vec3 gauss3(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double a = n(rng), b = n(rng), c = n(rng);
  return sigma * Vec3(a, b, c);
}

double wrap_towards(double a, double target) {
  return a + 2.0 * std::numbers::pi * std::round((target - a) / (2.0 * std::numbers::pi));
}

int ratio(double period, double dt, const char* what) {
  const double r = period / dt;
  const long n = std::lround(r);
  require(n >= 1 && std::abs(r - n) < 1e-9 * r, std::string(what) + " must be a multiple of plant_dt");
  return static_cast<int>(n);
}

}  // namespace

std::string_view to_string(ControllerKind k) { return k == ControllerKind::kWmpc ? "wmpc" : "ampc"; }

ControllerKind controller_kind_from_string(std::string_view s) {
  if (s == "wmpc" || s == "WMPC") return ControllerKind::kWmpc;
  if (s == "ampc" || s == "AMPC") return ControllerKind::kAmpc;
  throw Error(ErrorCode::kConfigInvalid, "unknown controller '" + std::string(s) + "' (wmpc, ampc)");
}

std::string_view to_string(DisturbanceConfig::Mode m) {
  switch (m) {
    case DisturbanceConfig::Mode::kZero: return "zero";
    case DisturbanceConfig::Mode::kConstantLocal: return "constant_local";
    case DisturbanceConfig::Mode::kLinearFeatures: return "linear_features";
    case DisturbanceConfig::Mode::kConstantPlusNoise: return "constant_plus_noise";
  }
  return "zero";
}

DisturbanceConfig::Mode disturbance_mode_from_string(std::string_view s) {
  for (auto m : {DisturbanceConfig::Mode::kZero, DisturbanceConfig::Mode::kConstantLocal,
                 DisturbanceConfig::Mode::kLinearFeatures, DisturbanceConfig::Mode::kConstantPlusNoise}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown disturbance mode '" + std::string(s) + "'");
}

// ---------------------------------------------------------------- actuators

void ActuatorPlantConfig::validate() const {
  require(servo_tau > 0.0 && thrust_tau > 0.0, "actuator time constants must be > 0");
  require(servo_rate_max > 0.0 && thrust_rate_max > 0.0, "actuator rate limits must be > 0");
  require(thrust_min >= 0.0 && thrust_max > thrust_min, "actuator thrust range must satisfy 0 <= min < max");
}

ActuatorPlant::ActuatorPlant(ActuatorPlantConfig cfg, ActuatorCommand initial)
    : cfg_(std::move(cfg)), x_(std::move(initial)) {
  cfg_.validate();
  x_.thrust = x_.thrust.cwiseMax(cfg_.thrust_min).cwiseMin(cfg_.thrust_max);
}

void ActuatorPlant::step(const ActuatorCommand& cmd, double dt) {
  const double ks = 1.0 - std::exp(-dt / cfg_.servo_tau);
  const double kt = 1.0 - std::exp(-dt / cfg_.thrust_tau);
  const double ds = cfg_.servo_rate_max * dt, dtt = cfg_.thrust_rate_max * dt;
  for (int i = 0; i < x_.alpha.size(); ++i) {
    x_.alpha(i) += std::clamp(ks * (cmd.alpha(i) - x_.alpha(i)), -ds, ds);
  }
  for (int i = 0; i < x_.thrust.size(); ++i) {
    const double n = x_.thrust(i) + std::clamp(kt * (cmd.thrust(i) - x_.thrust(i)), -dtt, dtt);
    x_.thrust(i) = std::clamp(n, cfg_.thrust_min, cfg_.thrust_max);
  }
}

// ---------------------------------------------------------------- disturbance

void DisturbanceConfig::validate() const {
  require((noise_sigma.array() >= 0.0).all(), "disturbance noise_sigma must be >= 0");
  require(noise_rate > 0.0, "disturbance noise_rate must be > 0");
  require(wrench.vector().allFinite() && C.allFinite(), "disturbance values must be finite");
}

DisturbanceGenerator::DisturbanceGenerator(DisturbanceConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), rng_(make_stream(seed, kDisturbanceStream)) {
  cfg_.validate();
}

Wrench DisturbanceGenerator::evaluate(double t, const UnitQuaternion& q, const Wrench& applied) {
  using Mode = DisturbanceConfig::Mode;
  Wrench w;
  switch (cfg_.mode) {
    case Mode::kZero:
      return w;
    case Mode::kConstantLocal:
    case Mode::kConstantPlusNoise:
      w = ResidualSource::local(cfg_.wrench).evaluate(q, applied);
      break;
    case Mode::kLinearFeatures: {
      Eigen::Matrix<double, kNumFeatures + 1, 1> x;
      x << build_features(applied, q), 1.0;
      w = Wrench::from_vector(cfg_.C * x);
      break;
    }
  }
  if (cfg_.mode != Mode::kConstantLocal && (cfg_.noise_sigma.array() > 0.0).any()) {
    const long slot = static_cast<long>(std::floor(t * cfg_.noise_rate + 1e-9));
    if (slot != last_slot_) {
      std::normal_distribution<double> n(0.0, 1.0);
      for (int i = 0; i < 6; ++i) noise_(i) = cfg_.noise_sigma(i) * n(rng_);
      last_slot_ = slot;
    }
    w = w + Wrench::from_vector(noise_);
  }
  return w;
}

// ---------------------------------------------------------------- config

void SensorConfig::validate(double plant_rate, double control_rate) const {
  require(pose_rate >= control_rate && pose_rate <= plant_rate,
          "sensors.pose_rate must lie between the control and plant rates");
  require(imu_rate >= control_rate && imu_rate <= plant_rate,
          "sensors.imu_rate must lie between the control and plant rates");
  require(sigma_p >= 0.0 && sigma_theta >= 0.0 && pose_latency >= 0.0, "pose noise and latency must be >= 0");
  require(accel_noise_density >= 0.0 && gyro_noise_density >= 0.0, "IMU noise densities must be >= 0");
}

void SimConfig::validate() const {
  params.validate();
  geometry.validate();
  require(trajectory != nullptr, "trajectory is required");
  require(plant_dt > 0.0 && control_period >= plant_dt, "plant_dt > 0 and control_period >= plant_dt");
  ratio(control_period, plant_dt, "control_period");
  ratio(1.0 / sensors.pose_rate, plant_dt, "1 / sensors.pose_rate");
  ratio(1.0 / sensors.imu_rate, plant_dt, "1 / sensors.imu_rate");
  require(duration >= 0.0, "duration must be >= 0");
  sensors.validate(1.0 / plant_dt, 1.0 / control_period);
  actuators.validate();
  disturbance.validate();
  ekf.validate();
  require(max_consecutive_fallbacks >= 1, "max_consecutive_fallbacks must be >= 1");
  if (controller == ControllerKind::kWmpc) {
    wmpc.validate();
  } else {
    ampc.validate();
    require(residual_mode == ResidualMode::kNone || residual_mode == ResidualMode::kObserver,
            "AMPC accepts residual modes N/c and D/o only");
  }
  if (residual_mode == ResidualMode::kInMpc || residual_mode == ResidualMode::kPostMpc) {
    require(residual_model.C.cols() == kNumFeatures + 1,
            "residual model must have 6 x 10 coefficients for In-MPC / Post-MPC");
  }
}

// ---------------------------------------------------------------- episode

SimLog run_episode(const SimConfig& cfg_in) {
  cfg_in.validate();
  SimConfig cfg = cfg_in;
  cfg.wmpc.control_period = cfg.control_period;
  cfg.ampc.control_period = cfg.control_period;

  const auto alloc = std::make_shared<const Allocator>(cfg.geometry);
  const int na = cfg.geometry.arms, nr = cfg.geometry.rotors();
  const double dt = cfg.plant_dt;
  const int ctrl_div = ratio(cfg.control_period, dt, "control_period");
  const int pose_div = ratio(1.0 / cfg.sensors.pose_rate, dt, "pose period");
  const int imu_div = ratio(1.0 / cfg.sensors.imu_rate, dt, "imu period");
  const double duration = cfg.duration > 0.0 ? cfg.duration : cfg.trajectory->duration();
  const long ticks = std::lround(duration / dt);
  const double latency_ticks = cfg.sensors.pose_latency / dt;

  std::mt19937_64 pose_rng = make_stream(cfg.seed, kPoseStream);
  std::mt19937_64 imu_rng = make_stream(cfg.seed, kImuStream);
  DisturbanceGenerator disturbance(cfg.disturbance, cfg.seed);

  const ReferencePoint r0 = cfg.trajectory->sample(0.0);
  RigidState x;
  x.p = r0.p;
  x.q = r0.q;

  const ActuatorCommand hover_cmd = hover_allocation(x.q, cfg.params, *alloc);
  ActuatorPlant plant(cfg.actuators, hover_cmd);
  ActuatorCommand cmd = hover_cmd;
  Eigen::VectorXd tilt_rate_cmd = Eigen::VectorXd::Zero(na);
  Eigen::VectorXd thrust_rate_cmd = Eigen::VectorXd::Zero(nr);
  Eigen::VectorXd alpha_ref = hover_cmd.alpha;

  DisturbanceEkf ekf(cfg.ekf, cfg.params);
  ekf.reset(x, 0.01, cfg.ekf_sigma_force, cfg.ekf_sigma_torque);

  std::unique_ptr<WrenchMpc> wmpc;
  std::unique_ptr<ActuatorMpc> ampc;
  if (cfg.controller == ControllerKind::kWmpc) {
    wmpc = std::make_unique<WrenchMpc>(cfg.wmpc, cfg.params);
  } else {
    ampc = std::make_unique<ActuatorMpc>(cfg.ampc, cfg.params, alloc);
  }
  const int horizon = wmpc ? cfg.wmpc.horizon : cfg.ampc.horizon;
  const double mpc_dt = wmpc ? cfg.wmpc.dt : cfg.ampc.dt;
  const ResidualSource model_src = (cfg.residual_mode == ResidualMode::kInMpc ||
                                    cfg.residual_mode == ResidualMode::kPostMpc)
                                       ? ResidualSource::linear(cfg.residual_model)
                                       : ResidualSource::zero();

  Wrench wbar;
  Wrench commanded = hover_wrench(x.q, cfg.params);
  Wrench dist_est;
  Wrench offset_rate;
  Wrench wbar_logged;

  SimLog log;
  log.controller = std::string(to_string(cfg.controller));
  log.residual_mode = std::string(to_string(cfg.residual_mode));
  log.trajectory = cfg.trajectory->name();
  log.seed = cfg.seed;
  log.arms = na;
  log.rotors = nr;
  log.plant_dt = dt;
  log.accel_bias = cfg.sensors.accel_bias;
  log.rows.reserve(ticks);

  std::deque<std::pair<long, PoseMeasurement>> pose_queue;
  int consecutive_fallbacks = 0;

  for (long k = 0; k < ticks; ++k) {
    const double t = k * dt;
    SimRow row;
    row.t = t;

    if (k % pose_div == 0) {
      PoseMeasurement z;
      z.t = t;
      z.p = x.p + gauss3(pose_rng, cfg.sensors.sigma_p);
      z.q = x.q * UnitQuaternion::from_rotation_vector(gauss3(pose_rng, cfg.sensors.sigma_theta));
      pose_queue.emplace_back(k + std::lround(latency_ticks), z);
    }
    while (!pose_queue.empty() && pose_queue.front().first <= k) {
      ekf.update(pose_queue.front().second);
      pose_queue.pop_front();
    }

    if (k % ctrl_div == 0) {
      row.control_tick = true;
      const RigidState xh = cfg.controller_uses_truth ? x : ekf.state().rigid();
      const std::vector<ReferencePoint> refs = cfg.trajectory->window(t, mpc_dt, horizon + 1);
      ResidualSource src = model_src;
      if (cfg.residual_mode == ResidualMode::kObserver) {
        src = ResidualSource::local(ekf.disturbance_local());
      }
      bool fallback = false;
      if (wmpc) {
        const ResidualSource in_mpc =
            cfg.residual_mode == ResidualMode::kPostMpc ? ResidualSource::zero() : src;
        const WmpcOutput out = wmpc->step(xh, wbar, refs, in_mpc);
        wbar = out.offset;
        commanded = out.actuator;
        dist_est = in_mpc.evaluate(xh.q, out.actuator);
        if (cfg.residual_mode == ResidualMode::kPostMpc) {
          dist_est = model_src.evaluate(xh.q, out.actuator);
          const PostMpcResult pc = post_mpc_correct(out.offset, dist_est, cfg.wmpc);
          if (pc.saturated) ++log.post_mpc_saturations;
          commanded = pc.offset + hover_wrench(xh.q, cfg.params);
        }
        if (cfg.residual_mode == ResidualMode::kPostMpc) wbar_logged = commanded - hover_wrench(xh.q, cfg.params);
        else wbar_logged = wbar;
        offset_rate = out.rate;
        ActuatorCommand next = alloc->allocate(commanded).command;
        alpha_ref = hover_allocation(xh.q, cfg.params, *alloc).alpha;
        for (int j = 0; j < na; ++j) {
          next.alpha(j) = wrap_towards(next.alpha(j), cmd.alpha(j));
          alpha_ref(j) = wrap_towards(alpha_ref(j), next.alpha(j));
        }
        tilt_rate_cmd = (next.alpha - cmd.alpha) / cfg.control_period;
        thrust_rate_cmd = (next.thrust - cmd.thrust) / cfg.control_period;
        cmd = next;
        fallback = out.fallback;
        row.qp_iterations = out.qp_iterations;
        row.kkt_residual = out.kkt_residual;
        log.solve_times.push_back(out.solve_time);
      } else {
        const AmpcOutput out = ampc->step(xh, cmd, refs, src);
        cmd = out.command;
        tilt_rate_cmd = out.tilt_rate;
        thrust_rate_cmd = out.thrust_rate;
        alpha_ref = out.reference.alpha;
        commanded = alloc->forward_wrench(cmd);
        wbar_logged = commanded - hover_wrench(xh.q, cfg.params);
        dist_est = src.evaluate(xh.q, commanded);
        fallback = out.fallback;
        row.qp_iterations = out.qp_iterations;
        row.kkt_residual = out.kkt_residual;
        log.solve_times.push_back(out.solve_time);
      }
      row.fallback = fallback;
      if (fallback) {
        ++log.fallbacks;
        if (++consecutive_fallbacks >= cfg.max_consecutive_fallbacks) {
          throw Error(ErrorCode::kSolverFailure,
                      std::to_string(consecutive_fallbacks) + " consecutive solver failures at t = " +
                          std::to_string(t) + " s");
        }
      } else {
        consecutive_fallbacks = 0;
      }
    }

    const Wrench applied = alloc->forward_wrench(plant.state());
    const Wrench dist = disturbance.evaluate(t, x.q, applied);

    if (cfg.log_imu && k % imu_div == 0) {
      const double sa = cfg.sensors.accel_noise_density * std::sqrt(cfg.sensors.imu_rate);
      const double sg = cfg.sensors.gyro_noise_density * std::sqrt(cfg.sensors.imu_rate);
      row.imu_valid = true;
      row.imu_accel = (applied.force + dist.force) / cfg.params.mass + cfg.sensors.accel_bias +
                      gauss3(imu_rng, sa);
      row.imu_gyro = x.w + gauss3(imu_rng, sg);
    }

    row.x = x;
    row.ref = cfg.trajectory->sample(t);
    row.commanded = commanded;
    row.applied = applied;
    row.dist_true = dist;
    row.dist_est = dist_est;
    row.offset = wbar_logged;
    row.offset_rate = offset_rate;
    row.alpha_cmd = cmd.alpha;
    row.alpha = plant.state().alpha;
    row.alpha_ref = alpha_ref;
    row.tilt_rate_cmd = tilt_rate_cmd;
    row.thrust_cmd = cmd.thrust;
    row.thrust = plant.state().thrust;
    row.thrust_rate_cmd = thrust_rate_cmd;
    log.rows.push_back(std::move(row));

    x = rk4_step(x, applied, dist, cfg.params, dt);
    ekf.predict(applied, dt);
    plant.step(cmd, dt);

    if (!x.p.allFinite() || !x.v.allFinite() || x.p.norm() > 1e3) {
      throw Error(ErrorCode::kSolverFailure, "plant state diverged at t = " + std::to_string(t) + " s");
    }
  }
  log.ekf_rejected = ekf.rejected();
  return log;
}

// ---------------------------------------------------------------- CSV

std::vector<std::string> csv_header(int arms, int rotors) {
  std::vector<std::string> h = {"t"};
  auto add = [&](const std::string& base, std::initializer_list<const char*> sfx) {
    for (const char* s : sfx) h.push_back(base + s);
  };
  add("p_", {"x", "y", "z"});
  add("q_", {"w", "x", "y", "z"});
  add("v_", {"x", "y", "z"});
  add("w_", {"x", "y", "z"});
  add("ref_p_", {"x", "y", "z"});
  add("ref_q_", {"w", "x", "y", "z"});
  add("ref_v_", {"x", "y", "z"});
  add("ref_w_", {"x", "y", "z"});
  for (const char* b : {"cmd_", "applied_", "dist_true_", "dist_est_", "offset_", "offset_rate_"}) {
    add(b, {"fx", "fy", "fz", "tx", "ty", "tz"});
  }
  for (const char* b : {"alpha_cmd_", "alpha_", "alpha_ref_", "tilt_rate_cmd_"}) {
    for (int i = 0; i < arms; ++i) h.push_back(b + std::to_string(i));
  }
  for (const char* b : {"thrust_cmd_", "thrust_", "thrust_rate_cmd_"}) {
    for (int i = 0; i < rotors; ++i) h.push_back(b + std::to_string(i));
  }
  add("imu_", {"valid", "ax", "ay", "az", "gx", "gy", "gz"});
  h.insert(h.end(), {"control_tick", "qp_iterations", "kkt_residual", "fallback"});
  return h;
}

namespace {

void put(std::string& out, double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

template <class V>
void put_all(std::string& out, const V& v) {
  for (int i = 0; i < v.size(); ++i) {
    out.push_back(',');
    put(out, v(i));
  }
}

}  // namespace

void write_csv(const SimLog& log, std::ostream& os) {
  os << "# controller=" << log.controller << "\n"
     << "# residual_mode=" << log.residual_mode << "\n"
     << "# trajectory=" << log.trajectory << "\n"
     << "# seed=" << log.seed << "\n";
  std::string line;
  line = "# plant_dt=";
  put(line, log.plant_dt);
  line += "\n# accel_bias=";
  put(line, log.accel_bias.x());
  line += ' ';
  put(line, log.accel_bias.y());
  line += ' ';
  put(line, log.accel_bias.z());
  os << line << "\n# arms=" << log.arms << "\n# rotors=" << log.rotors << "\n";
  const auto header = csv_header(log.arms, log.rotors);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const SimRow& r : log.rows) {
    line.clear();
    put(line, r.t);
    put_all(line, r.x.p);
    put_all(line, r.x.q.wxyz());
    put_all(line, r.x.v);
    put_all(line, r.x.w);
    put_all(line, r.ref.p);
    put_all(line, r.ref.q.wxyz());
    put_all(line, r.ref.v);
    put_all(line, r.ref.w);
    put_all(line, r.commanded.vector());
    put_all(line, r.applied.vector());
    put_all(line, r.dist_true.vector());
    put_all(line, r.dist_est.vector());
    put_all(line, r.offset.vector());
    put_all(line, r.offset_rate.vector());
    put_all(line, r.alpha_cmd);
    put_all(line, r.alpha);
    put_all(line, r.alpha_ref);
    put_all(line, r.tilt_rate_cmd);
    put_all(line, r.thrust_cmd);
    put_all(line, r.thrust);
    put_all(line, r.thrust_rate_cmd);
    line += r.imu_valid ? ",1" : ",0";
    put_all(line, r.imu_accel);
    put_all(line, r.imu_gyro);
    line += r.control_tick ? ",1," : ",0,";
    line += std::to_string(r.qp_iterations);
    line.push_back(',');
    put(line, r.kkt_residual);
    line += r.fallback ? ",1\n" : ",0\n";
    os << line;
  }
}

void write_csv(const SimLog& log, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_csv(log, f);
  if (!f) throw Error(ErrorCode::kIo, "write failed: " + path);
}

SimLog read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot read " + path);
  SimLog log;
  std::string line;
  bool header_seen = false;
  std::size_t ncols = 0;
  long lineno = 0;
  std::vector<double> v;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), val = line.substr(eq + 1);
      if (key == "controller") log.controller = val;
      else if (key == "residual_mode") log.residual_mode = val;
      else if (key == "trajectory") log.trajectory = val;
      else if (key == "seed") log.seed = std::stoull(val);
      else if (key == "plant_dt") log.plant_dt = std::stod(val);
      else if (key == "arms") log.arms = std::stoi(val);
      else if (key == "rotors") log.rotors = std::stoi(val);
      else if (key == "accel_bias") {
        std::istringstream ss(val);
        ss >> log.accel_bias.x() >> log.accel_bias.y() >> log.accel_bias.z();
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      ncols = csv_header(log.arms, log.rotors).size();
      continue;
    }
    v.clear();
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      double d = 0.0;
      const auto r = std::from_chars(p, end, d);
      if (r.ec != std::errc()) throw Error(ErrorCode::kIo, path + ":" + std::to_string(lineno) + ": bad number");
      v.push_back(d);
      p = r.ptr;
      if (p < end && *p == ',') ++p;
    }
    if (v.size() != ncols) {
      throw Error(ErrorCode::kIo, path + ":" + std::to_string(lineno) + ": expected " +
                                      std::to_string(ncols) + " columns");
    }
    const int na = log.arms, nr = log.rotors;
    std::size_t i = 0;
    auto vec3 = [&] { Vec3 a(v[i], v[i + 1], v[i + 2]); i += 3; return a; };
    auto vec4 = [&] { Vec4 a(v[i], v[i + 1], v[i + 2], v[i + 3]); i += 4; return a; };
    auto vecn = [&](int n) { Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(&v[i], n); i += n; return a; };
    auto wrench = [&] { Wrench w; w.force = vec3(); w.torque = vec3(); return w; };
    SimRow r;
    r.t = v[i++];
    r.x.p = vec3();
    r.x.q = UnitQuaternion(vec4());
    r.x.v = vec3();
    r.x.w = vec3();
    r.ref.t = r.t;
    r.ref.p = vec3();
    r.ref.q = UnitQuaternion(vec4());
    r.ref.v = vec3();
    r.ref.w = vec3();
    r.commanded = wrench();
    r.applied = wrench();
    r.dist_true = wrench();
    r.dist_est = wrench();
    r.offset = wrench();
    r.offset_rate = wrench();
    r.alpha_cmd = vecn(na);
    r.alpha = vecn(na);
    r.alpha_ref = vecn(na);
    r.tilt_rate_cmd = vecn(na);
    r.thrust_cmd = vecn(nr);
    r.thrust = vecn(nr);
    r.thrust_rate_cmd = vecn(nr);
    r.imu_valid = v[i++] != 0.0;
    r.imu_accel = vec3();
    r.imu_gyro = vec3();
    r.control_tick = v[i++] != 0.0;
    r.qp_iterations = static_cast<int>(v[i++]);
    r.kkt_residual = v[i++];
    r.fallback = v[i++] != 0.0;
    log.rows.push_back(std::move(r));
  }
  if (log.rows.empty()) throw Error(ErrorCode::kEmptyLog, path + ": no rows");
  return log;
}

TrainingLog training_log(const SimLog& log) {
  TrainingLog out;
  for (const SimRow& r : log.rows) {
    if (!r.imu_valid) continue;
    TrainingSample s;
    s.t = r.t;
    s.command = r.applied;
    s.q = r.x.q;
    s.specific_force = r.imu_accel - log.accel_bias;
    s.gyro = r.imu_gyro;
    out.push_back(s);
  }
  if (out.empty()) throw Error(ErrorCode::kEmptyLog, "log has no IMU samples (run with IMU logging)");
  return out;
}

}  // namespace omav
