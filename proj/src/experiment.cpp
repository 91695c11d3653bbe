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

#include "omav/experiment.hpp"

#include <atomic>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include <spdlog/spdlog.h>

#include "omav/errors.hpp"

namespace omav {
namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path);
  return f;
}

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Cell names become file names.
std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
  return out;
}

}  // namespace

ConstraintLimits limits_of(const SimConfig& cfg) { return ConstraintLimits::from(cfg.wmpc, cfg.ampc); }

RunResult run_experiment(const ExperimentConfig& cfg) {
  RunResult r;
  r.log = run_episode(cfg.sim);
  r.report = evaluate(r.log, limits_of(cfg.sim));
  return r;
}

RunOutputs write_outputs(const ExperimentConfig& cfg, const RunResult& result) {
  fs::create_directories(cfg.out_dir);
  const fs::path stem = fs::path(cfg.out_dir) / cfg.name;
  RunOutputs o;
  o.csv = stem.string() + ".csv";
  o.report = stem.string() + ".report.json";
  o.config = stem.string() + ".config.json";
  o.solve_times = solve_times_path(o.csv);

  write_csv(result.log, o.csv);
  nlohmann::json report = result.report;
  open_out(o.report) << report.dump(2) << "\n";
  open_out(o.config) << cfg.resolved.dump(2) << "\n";
  std::ofstream st = open_out(o.solve_times);
  st << "tick,solve_time\n";
  for (std::size_t k = 0; k < result.log.solve_times.size(); ++k) {
    st << k << ',' << num(result.log.solve_times[k]) << '\n';
  }
  return o;
}

std::string summary_line(const TrackingReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %s %s seed=%llu pos_rmse=%.4f m att_rmse=%.4f rad violations=%d p50=%.2f ms",
                r.controller.c_str(), r.trajectory.c_str(), r.residual_mode.c_str(),
                static_cast<unsigned long long>(r.seed), r.position_rmse, r.attitude_rmse,
                r.constraints.violations, 1e3 * r.solver.p50);
  return buf;
}

int MatrixResult::failed() const {
  int n = 0;
  for (const std::string& e : errors) n += !e.empty();
  return n;
}

MatrixResult run_matrix(const MatrixConfig& m, int jobs, bool write_cells) {
  const std::size_t n = m.cells.size();
  MatrixResult res;
  res.reports.resize(n);
  res.errors.resize(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const MatrixCell& cell = m.cells[i];
      ExperimentConfig cfg = cell.config;
      cfg.out_dir = (fs::path(m.out_dir) / "cells").string();
      cfg.name = slug(cell.row) + "__" + slug(cell.column);
      try {
        RunResult r = run_experiment(cfg);
        if (write_cells) write_outputs(cfg, r);
        spdlog::info("[{}/{}] {} | {}: {}", i + 1, n, cell.row, cell.column, summary_line(r.report));
        res.reports[i] = std::move(r.report);
      } catch (const std::exception& e) {
        spdlog::error("[{}/{}] {} | {} failed: {}", i + 1, n, cell.row, cell.column, e.what());
        res.errors[i] = e.what();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return res;
}

void write_comparison_csv(const MatrixConfig& m, const MatrixResult& r, std::ostream& os) {
  struct Metric {
    const char* name;
    double (*get)(const TrackingReport&);
  };
  static const Metric metrics[] = {
      {"position_rmse", [](const TrackingReport& t) { return t.position_rmse; }},
      {"attitude_rmse", [](const TrackingReport& t) { return t.attitude_rmse; }},
      {"max_tilt_rate", [](const TrackingReport& t) { return t.constraints.max_tilt_rate; }},
      {"max_alpha_deviation", [](const TrackingReport& t) { return t.constraints.max_alpha_deviation; }},
      {"alpha_drift", [](const TrackingReport& t) { return t.constraints.alpha_drift; }},
      {"violations", [](const TrackingReport& t) { return double(t.constraints.violations); }},
      {"solve_time_p50", [](const TrackingReport& t) { return t.solver.p50; }},
  };
  os << "metric,trajectory";
  for (const std::string& c : m.columns) os << ',' << c;
  os << '\n';
  const std::size_t nc = m.columns.size();
  for (const Metric& metric : metrics) {
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      os << metric.name << ',' << m.rows[i];
      for (std::size_t j = 0; j < nc; ++j) {
        const auto& rep = r.reports[i * nc + j];
        os << ',' << (rep ? num(metric.get(*rep)) : std::string("FAILED"));
      }
      os << '\n';
    }
  }
}

TrainReport train_residual_model(const std::vector<SimLog>& logs, const InertialParams& params,
                                 const std::vector<double>& lambdas, double cutoff_hz) {
  if (logs.empty()) throw Error(ErrorCode::kEmptyLog, "no training logs");
  if (lambdas.empty()) throw Error(ErrorCode::kConfigInvalid, "no lambda given");
  std::vector<Eigen::VectorXd> features;
  std::vector<Wrench> residuals;
  // Residuals are computed per log so the derivative filter never spans two episodes.
  for (const SimLog& log : logs) {
    const TrainingLog tl = training_log(log);
    const std::vector<Wrench> dw = compute_residuals(tl, params, cutoff_hz);
    for (std::size_t i = 0; i < tl.size(); ++i) {
      features.push_back(build_features(tl[i].command, tl[i].q));
      residuals.push_back(dw[i]);
    }
  }
  const Eigen::MatrixXd X = design_matrix(features);
  Eigen::MatrixXd Y(residuals.size(), 6);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    Y.row(i).head<3>() = residuals[i].force.transpose();
    Y.row(i).tail<3>() = residuals[i].torque.transpose();
  }
  TrainReport r;
  r.samples = static_cast<int>(X.rows());
  r.raw = training_rmse(ResidualModel{}, X, Y);
  for (double lambda : lambdas) {
    r.models.push_back(ridge_fit(X, Y, lambda));
    r.fits.push_back(training_rmse(r.models.back(), X, Y));
  }
  return r;
}

void print_fit_table(const TrainReport& r, std::ostream& os) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-24s %-22s %-22s\n", "", "Force RMSE [N]", "Torque RMSE [N m]");
  os << buf;
  const auto row = [&](const std::string& label, const FitReport& f) {
    std::snprintf(buf, sizeof buf, "%-24s %8.3f +- %-10.3f %8.3f +- %-10.3f\n", label.c_str(), f.force_rmse,
                  f.force_std, f.torque_rmse, f.torque_std);
    os << buf;
  };
  row("Raw", r.raw);
  for (std::size_t i = 0; i < r.fits.size(); ++i) {
    std::snprintf(buf, sizeof buf, "Model (lambda=%g)", r.models[i].lambda);
    row(buf, r.fits[i]);
  }
  os << "samples: " << r.samples << "\n";
}

std::string solve_times_path(const std::string& csv_path) {
  fs::path p(csv_path);
  p.replace_extension(".solve_times.csv");
  return p.string();
}

std::vector<double> read_solve_times(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::string line;
  std::getline(f, line);
  std::vector<double> out;
  while (std::getline(f, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::kIo, path + ": malformed row '" + line + "'");
    double v = 0.0;
    const auto r = std::from_chars(line.data() + comma + 1, line.data() + line.size(), v);
    if (r.ec != std::errc()) throw Error(ErrorCode::kIo, path + ": malformed row '" + line + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> plot_channels(const SimLog& log, bool with_solve_times) {
  std::vector<std::string> ch = {"err_px", "err_py", "err_pz", "err_roll", "err_pitch", "err_yaw"};
  for (const char* b : {"alpha_", "alpha_cmd_", "tilt_rate_cmd_"}) {
    for (int i = 0; i < log.arms; ++i) ch.push_back(b + std::to_string(i));
  }
  if (with_solve_times) ch.push_back("solve_time");
  return ch;
}

void write_plotdata(const SimLog& log, const std::vector<double>* solve_times, std::ostream& os) {
  if (log.rows.empty()) throw Error(ErrorCode::kEmptyLog, "log has no rows");
  const std::vector<std::string> ch = plot_channels(log, solve_times != nullptr);
  os << "t,channel,value\n";
  std::string out;
  int tick = -1;
  double solve = 0.0;
  for (const SimRow& r : log.rows) {
    if (r.control_tick) {
      ++tick;
      if (solve_times && tick < static_cast<int>(solve_times->size())) solve = (*solve_times)[tick];
    }
    std::vector<double> v;
    v.reserve(ch.size());
    const Vec3 ep = r.x.p - r.ref.p;
    const Vec3 ea = error_euler(r.x.q, r.ref.q);
    v.insert(v.end(), {ep.x(), ep.y(), ep.z(), ea.x(), ea.y(), ea.z()});
    for (const Eigen::VectorXd* vec : {&r.alpha, &r.alpha_cmd, &r.tilt_rate_cmd}) {
      for (int i = 0; i < log.arms; ++i) v.push_back(i < vec->size() ? (*vec)(i) : 0.0);
    }
    if (solve_times) v.push_back(solve);
    const std::string t = num(r.t);
    out.clear();
    for (std::size_t i = 0; i < ch.size(); ++i) {
      out += t;
      out += ',';
      out += ch[i];
      out += ',';
      out += num(v[i]);
      out += '\n';
    }
    os << out;
  }
}

}  // namespace omav
