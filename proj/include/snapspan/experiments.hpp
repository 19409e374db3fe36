#pragma once
// Declarative experiment runner: six numbered pipelines plus a custom table
// mode, every run emitting CSV artifacts, a canonical report.json (byte
// stable across reruns) and a separate timing.json.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "grids.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "snapshot.hpp"
#include "spectral.hpp"
#include "subspace.hpp"

namespace snapspan {

struct ExperimentConfig {
  int experiment = 0;  // 1..6, or 0 for a fully custom table run
  std::string family = "dirichlet1d";
  std::string coefficients = "alternating";
  std::vector<double> coefficient_values;  // for coefficients = "explicit"
  int nodes_x = 0, nodes_y = 0;
  int time_count = 0;
  double t0 = 0.0, t1 = 0.0;
  std::string time_spacing = "logarithmic";
  double threshold = 1e-12;
  std::vector<double> taus;
  std::vector<std::vector<int>> validation_modes;
  int sensor_count = 50;
  double delta = 1e-3;
  int window_s = -1;  // -1: derive S = ceil(0.1 / dt)
  std::vector<double> dt_list;
  int realizations = 100;
  int n_omega = 1000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool paper_scale = false;
  std::string out_dir = "out";

  static ExperimentConfig defaults_for(int experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    const std::vector<std::vector<int>> modes_1d = {{1}, {2}, {3}, {4},
                                                    {5}, {6}, {7}, {8}};
    const std::vector<std::vector<int>> modes_2d = {{1, 1}, {2, 1}, {1, 2}, {2, 2},
                                                    {3, 1}, {1, 3}, {3, 2}, {2, 3}};
    switch (experiment) {
      case 1:
        c.family = "dirichlet1d";
        c.coefficients = "alternating";
        c.nodes_x = 1001;
        c.time_count = 2000;
        c.t0 = 1e-6;
        c.t1 = 1.0;
        c.time_spacing = "logarithmic";
        c.validation_modes = modes_1d;
        c.taus = {0.1};
        break;
      case 2:
        c.family = "periodic1d";
        c.coefficients = "branch-pair";
        c.nodes_x = 1001;
        c.time_count = 30;
        c.t0 = 1e-6;
        c.t1 = 1.0;
        c.time_spacing = "logarithmic";
        c.validation_modes = modes_1d;
        c.taus = {0.1};
        break;
      case 3:
        c.family = "rect2d";
        c.coefficients = "product";
        c.nodes_x = 101;
        c.nodes_y = 101;
        c.time_count = 3500;
        c.t0 = 1e-6;
        c.t1 = 1.0;
        c.time_spacing = "uniform";
        c.validation_modes = modes_2d;
        c.taus = {0.1};
        break;
      case 4:
        c.family = "fourthorder2d";
        c.coefficients = "product";
        c.nodes_x = 101;
        c.nodes_y = 101;
        c.time_count = 1000;
        c.t0 = 1e-5;
        c.t1 = 0.1;
        c.time_spacing = "uniform";
        c.validation_modes = modes_2d;
        c.taus = {0.1};
        break;
      case 5:
        c.family = "dirichlet1d";
        c.coefficients = "alternating";  // snapshot source, as in experiment 1
        c.nodes_x = 1001;
        c.time_count = 2000;
        c.t0 = 1e-6;
        c.t1 = 1.0;
        c.time_spacing = "logarithmic";
        c.taus = {1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
        c.sensor_count = 50;
        c.n_omega = 1000;
        c.delta = 1e-3;
        c.realizations = 100;
        break;
      case 6:
        c.family = "dirichlet1d";
        c.coefficients = "alternating";
        c.nodes_x = 1001;
        c.dt_list = {1e-3, 1e-4};
        c.time_count = 200;  // coarse output times
        c.t0 = 1e-3;
        c.t1 = 1.0;
        c.time_spacing = "logarithmic";
        c.delta = 1e-3;
        break;
      case 0:
        break;
      default:
        throw config_error("experiment id must be 1..6 or custom");
    }
    return c;
  }

  void apply_paper_scale() {
    paper_scale = true;
    if (experiment == 5) realizations = 1000;
    if (experiment == 6) dt_list = {1e-3, 1e-4, 1e-5};
  }

  void apply_json(const nlohmann::json& j) {
    for (const auto& [key, val] : j.items()) {
      if (key == "experiment") continue;  // fixed before overlay
      else if (key == "family") family = val.get<std::string>();
      else if (key == "coefficients") coefficients = val.get<std::string>();
      else if (key == "coefficient_values")
        coefficient_values = val.get<std::vector<double>>();
      else if (key == "nodes_x") nodes_x = val.get<int>();
      else if (key == "nodes_y") nodes_y = val.get<int>();
      else if (key == "time_count") time_count = val.get<int>();
      else if (key == "t0") t0 = val.get<double>();
      else if (key == "t1") t1 = val.get<double>();
      else if (key == "time_spacing") time_spacing = val.get<std::string>();
      else if (key == "threshold") threshold = val.get<double>();
      else if (key == "taus") taus = val.get<std::vector<double>>();
      else if (key == "validation_modes")
        validation_modes = val.get<std::vector<std::vector<int>>>();
      else if (key == "sensor_count") sensor_count = val.get<int>();
      else if (key == "delta") delta = val.get<double>();
      else if (key == "window_s") window_s = val.get<int>();
      else if (key == "dt_list") dt_list = val.get<std::vector<double>>();
      else if (key == "realizations") realizations = val.get<int>();
      else if (key == "n_omega") n_omega = val.get<int>();
      else if (key == "seed") {
        seed = val.get<std::uint64_t>();
        seed_set = true;
      } else if (key == "paper_scale") {
        if (val.get<bool>()) apply_paper_scale();
      } else if (key == "out_dir") out_dir = val.get<std::string>();
      else throw config_error("unknown config key: " + key);
    }
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    int id = 0;
    if (j.contains("experiment")) {
      if (j["experiment"].is_string()) {
        const auto s = j["experiment"].get<std::string>();
        if (s != "custom") throw config_error("experiment must be 1..6 or \"custom\"");
      } else {
        id = j["experiment"].get<int>();
      }
    }
    ExperimentConfig c = defaults_for(id);
    c.apply_json(j);
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = {{"experiment", experiment},
                        {"family", family},
                        {"coefficients", coefficients},
                        {"nodes_x", nodes_x},
                        {"nodes_y", nodes_y},
                        {"time_count", time_count},
                        {"t0", t0},
                        {"t1", t1},
                        {"time_spacing", time_spacing},
                        {"threshold", threshold},
                        {"taus", taus},
                        {"validation_modes", validation_modes},
                        {"sensor_count", sensor_count},
                        {"delta", delta},
                        {"window_s", window_s},
                        {"dt_list", dt_list},
                        {"realizations", realizations},
                        {"n_omega", n_omega},
                        {"paper_scale", paper_scale},
                        {"out_dir", out_dir}};
    if (!coefficient_values.empty()) j["coefficient_values"] = coefficient_values;
    if (seed_set) j["seed"] = seed;
    return j;
  }
};

struct Report {
  nlohmann::json config_echo;
  int v = 0;
  std::vector<double> singular_values;
  nlohmann::json tables;
  std::map<std::string, std::string> file_hashes;
  std::map<std::string, double> timing;

  nlohmann::json to_json(bool include_timing = false) const {
    nlohmann::json j = {{"config", config_echo},
                        {"v", v},
                        {"singular_values", singular_values},
                        {"tables", tables},
                        {"file_hashes", file_hashes}};
    if (include_timing) j["timing"] = timing;
    return j;
  }
};

namespace detail {

inline EigenFamily family_from_string(const std::string& name) {
  if (name == "dirichlet1d") return EigenFamily::dirichlet_1d();
  if (name == "periodic1d") return EigenFamily::periodic_1d();
  if (name == "rect2d") return EigenFamily::rect_2d();
  if (name == "fourthorder2d") return EigenFamily::fourth_order_2d();
  throw config_error("unknown family: " + name);
}

inline CoefficientFamily coefficients_from_config(const ExperimentConfig& cfg) {
  const std::string& name = cfg.coefficients;
  if (name == "alternating") return CoefficientFamily::alternating_inverse_square();
  if (name == "product") return CoefficientFamily::product_inverse_square();
  if (name == "explicit") return CoefficientFamily::explicit_list(cfg.coefficient_values);
  if (name == "random") {
    if (!cfg.seed_set) throw config_error("random coefficients need a seed");
    return CoefficientFamily::random_uniform(cfg.seed, cfg.n_omega);
  }
  if (name == "branch-sin") return CoefficientFamily::branch_alternating(true, false);
  if (name == "branch-cos-const") return CoefficientFamily::branch_alternating(false, true);
  throw config_error("unknown coefficient rule: " + name);
}

inline SpaceGrid grid_from_config(const ExperimentConfig& cfg, const EigenFamily& fam) {
  if (cfg.nodes_x < 2) throw config_error("nodes_x must be at least 2");
  if (fam.dimension() == 1) return SpaceGrid::uniform_1d(0.0, 1.0, cfg.nodes_x);
  if (cfg.nodes_y < 2) throw config_error("nodes_y must be at least 2");
  return SpaceGrid::uniform_2d(1.0, cfg.nodes_x, fam.domain_length_y(), cfg.nodes_y);
}

inline TimeGrid times_from_config(const ExperimentConfig& cfg) {
  if (cfg.time_count < 2) throw config_error("time_count must be at least 2");
  if (cfg.time_spacing == "uniform")
    return TimeGrid::uniform(cfg.t0, cfg.t1, cfg.time_count);
  if (cfg.time_spacing == "logarithmic" || cfg.time_spacing == "log")
    return TimeGrid::logarithmic(cfg.t0, cfg.t1, cfg.time_count);
  throw config_error("time_spacing must be uniform or logarithmic");
}

inline ModeIndex mode_from_ints(const std::vector<int>& v, const EigenFamily& fam) {
  if (fam.dimension() == 2) {
    if (v.size() != 2) throw config_error("2D validation modes need two indices");
    return ModeIndex::d2(v[0], v[1]);
  }
  if (v.size() != 1) throw config_error("1D validation modes need one index");
  return ModeIndex::d1(v[0]);
}

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw io_error("write failed: " + path);
}

class StageClock {
 public:
  explicit StageClock(Report& rep) : rep_(rep) {}
  template <class Fn>
  auto operator()(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
      rep_.timing[name] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
    };
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        finish();
        return;
      } else {
        auto r = fn();
        finish();
        return r;
      }
    } catch (const config_error& e) {
      throw config_error(name + ": " + e.what());
    } catch (const io_error& e) {
      throw io_error(name + ": " + e.what());
    } catch (const numeric_error& e) {
      throw numeric_error(name + ": " + e.what());
    }
  }

 private:
  Report& rep_;
};

inline void finalize_report(Report& rep, const ExperimentConfig& cfg,
                            const std::vector<std::string>& artifacts) {
  for (const auto& path : artifacts)
    rep.file_hashes[std::filesystem::path(path).filename().string()] =
        hex64(hash_file(path));
  const std::string dir = cfg.out_dir;
  write_text(dir + "/report.json", rep.to_json(false).dump(2) + "\n");
  write_text(dir + "/timing.json",
             nlohmann::json{{"timing", rep.timing}}.dump(2) + "\n");
}

}  // namespace detail

// Experiments 1, 3, 4 and the custom mode: assemble one snapshot matrix,
// build the subspace, report the relative projection error of each listed
// eigenmode (eta is scale invariant, so the mode field stands for the
// trajectory snapshot at any tau).
inline Report run_table_experiment(const ExperimentConfig& cfg) {
  Report rep;
  rep.config_echo = cfg.to_json();
  detail::StageClock stage(rep);
  const EigenFamily fam = detail::family_from_string(cfg.family);
  const CoefficientFamily co = detail::coefficients_from_config(cfg);
  const SpaceGrid grid = detail::grid_from_config(cfg, fam);
  const TimeGrid times = detail::times_from_config(cfg);

  SnapshotMatrix snap =
      stage("assemble", [&] { return assemble(fam, co, grid, times); });
  Subspace v = stage("svd", [&] { return build_subspace({snap}, cfg.threshold); });
  rep.v = v.rank();
  rep.singular_values.assign(v.singular_values.data(),
                             v.singular_values.data() + v.singular_values.size());

  nlohmann::json rows = nlohmann::json::array();
  std::string csv = "mode,eta\n";
  stage("validate", [&] {
    for (const auto& mv : cfg.validation_modes) {
      const ModeIndex idx = detail::mode_from_ints(mv, fam);
      const double eta = relative_error(v, mode_field(fam, idx, grid));
      rows.push_back({{"mode", idx.label()}, {"eta", eta}});
      csv += idx.label() + "," + format_double(eta) + "\n";
    }
  });
  rep.tables = {{"rows", rows}};

  std::vector<std::string> artifacts;
  stage("write", [&] {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string table = cfg.out_dir + "/table.csv";
    detail::write_text(table, csv);
    artifacts.push_back(table);
    const std::string sub = cfg.out_dir + "/subspace.csv";
    save_subspace(v, sub);
    artifacts.push_back(sub);
    detail::finalize_report(rep, cfg, artifacts);
  });
  return rep;
}

// Experiment 2: two periodic trajectories with linearly independent branch
// coefficients, union subspace, complex-pair mode errors, and the
// per-eigenvalue coefficient-block rank diagnostic.
inline Report run_experiment_2(const ExperimentConfig& cfg) {
  Report rep;
  rep.config_echo = cfg.to_json();
  detail::StageClock stage(rep);
  const EigenFamily fam = detail::family_from_string(cfg.family);
  if (fam.kind() != FamilyKind::periodic_1d)
    throw config_error("experiment 2 runs on the periodic family");
  const CoefficientFamily co1 = CoefficientFamily::branch_alternating(true, false);
  const CoefficientFamily co2 = CoefficientFamily::branch_alternating(false, true);
  const SpaceGrid grid = detail::grid_from_config(cfg, fam);
  const TimeGrid times = detail::times_from_config(cfg);

  SnapshotMatrix s1 = stage("assemble", [&] { return assemble(fam, co1, grid, times); });
  SnapshotMatrix s2 =
      stage("assemble-second", [&] { return assemble(fam, co2, grid, times); });
  Subspace v =
      stage("svd", [&] { return build_subspace({s1, s2}, cfg.threshold); });
  rep.v = v.rank();
  rep.singular_values.assign(v.singular_values.data(),
                             v.singular_values.data() + v.singular_values.size());

  nlohmann::json rows = nlohmann::json::array();
  std::string csv = "mode,eta\n";
  std::vector<Eigen::MatrixXd> blocks;
  stage("validate", [&] {
    for (const auto& mv : cfg.validation_modes) {
      if (mv.size() != 1) throw config_error("experiment 2 modes carry one index");
      const int n = mv[0];
      const Eigen::VectorXd re = mode_field(fam, ModeIndex::periodic_cosine(n), grid);
      const Eigen::VectorXd im = mode_field(fam, ModeIndex::periodic_sine(n), grid);
      const double eta = relative_error_pair(v, re, im);
      rows.push_back({{"mode", "n=" + std::to_string(n)}, {"eta", eta}});
      csv += "n=" + std::to_string(n) + "," + format_double(eta) + "\n";

      Eigen::MatrixXd b(2, 2);  // rows: trajectories, columns: sin/cos branch
      b(0, 0) = co1.coefficient(ModeIndex::periodic_sine(n));
      b(0, 1) = co1.coefficient(ModeIndex::periodic_cosine(n));
      b(1, 0) = co2.coefficient(ModeIndex::periodic_sine(n));
      b(1, 1) = co2.coefficient(ModeIndex::periodic_cosine(n));
      blocks.push_back(b);
    }
  });
  const MultiplicityRank mrank = multiplicity_rank(blocks);
  rep.tables = {{"rows", rows}, {"multiplicity", mrank.to_json()}};

  std::vector<std::string> artifacts;
  stage("write", [&] {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string table = cfg.out_dir + "/table.csv";
    detail::write_text(table, csv);
    artifacts.push_back(table);
    const std::string sub = cfg.out_dir + "/subspace.csv";
    save_subspace(v, sub);
    artifacts.push_back(sub);
    detail::finalize_report(rep, cfg, artifacts);
  });
  return rep;
}

// Experiment 5: sensor least-squares reconstruction of random eigen-sums
// against the experiment-1 subspace, clean and noisy readings side by side.
// Per realization r the coefficients come from sub_seed(seed, r) at counters
// 1..n_omega; reading noise for tau index t, sensor i sits at counter
// n_omega + t*sensors + i, applied antithetically (+e and -e averaged in
// squared error).
inline Report run_experiment_5(const ExperimentConfig& cfg) {
  if (!cfg.seed_set) throw config_error("experiment 5 draws realizations: set a seed");
  if (cfg.realizations < 1) throw config_error("realizations must be positive");
  Report rep;
  rep.config_echo = cfg.to_json();
  detail::StageClock stage(rep);
  const EigenFamily fam = detail::family_from_string(cfg.family);
  if (fam.dimension() != 1) throw config_error("experiment 5 is one-dimensional");
  const CoefficientFamily co = detail::coefficients_from_config(cfg);
  const SpaceGrid grid = detail::grid_from_config(cfg, fam);
  const TimeGrid times = detail::times_from_config(cfg);

  SnapshotMatrix snap =
      stage("assemble", [&] { return assemble(fam, co, grid, times); });
  Subspace v = stage("svd", [&] { return build_subspace({snap}, cfg.threshold); });
  rep.v = v.rank();
  rep.singular_values.assign(v.singular_values.data(),
                             v.singular_values.data() + v.singular_values.size());

  const SensorSet sensors = SensorSet::uniform_interior(cfg.sensor_count);
  const int ns = cfg.sensor_count;
  const int nw = cfg.n_omega;
  const int nt = static_cast<int>(cfg.taus.size());
  if (nt == 0) throw config_error("experiment 5 needs a tau list");
  const int runs = cfg.realizations;

  // mode values at sensors and at grid nodes, shared by all realizations
  Eigen::MatrixXd phi_s(ns, nw), phi_g(grid.weights.size(), nw);
  Eigen::MatrixXd decay(nw, nt);
  stage("prepare", [&] {
    for (int n = 1; n <= nw; ++n) {
      const ModeIndex idx = ModeIndex::d1(n);
      const double mu = fam.eigenvalue(idx);
      for (int i = 0; i < ns; ++i)
        phi_s(i, n - 1) = fam.eigenfunction_eval(idx, sensors.positions[i]);
      phi_g.col(n - 1) = mode_field(fam, idx, grid);
      for (int t = 0; t < nt; ++t) decay(n - 1, t) = std::exp(-mu * cfg.taus[t]);
    }
  });

  Eigen::MatrixXd err2_clean(runs, nt), err2_noisy(runs, nt);
  const ReconstructOptions opt{1e-6, true};
  stage("reconstruct", [&] {
    parallel_for(runs, [&](int r) {
      const std::uint64_t rs = sub_seed(cfg.seed, static_cast<std::uint64_t>(r));
      Eigen::VectorXd omega(nw);
      for (int n = 1; n <= nw; ++n)
        omega[n - 1] = uniform_symmetric(rs, static_cast<std::uint64_t>(n), 1.0);
      for (int t = 0; t < nt; ++t) {
        const Eigen::VectorXd w = omega.cwiseProduct(decay.col(t));
        const Eigen::VectorXd truth = phi_g * w;
        const double truth_norm = w_norm(grid, truth);
        const Eigen::VectorXd readings = phi_s * w;
        const auto rel2 = [&](const Eigen::VectorXd& y) {
          const Reconstruction rec = reconstruct_from_sensors(v, sensors, y, opt);
          const double e = w_norm(grid, rec.field - truth) / truth_norm;
          return e * e;
        };
        err2_clean(r, t) = rel2(readings);
        Eigen::VectorXd eps(ns);
        for (int i = 0; i < ns; ++i)
          eps[i] = uniform_symmetric(
              rs, static_cast<std::uint64_t>(nw) + static_cast<std::uint64_t>(t) * ns + i,
              cfg.delta);
        err2_noisy(r, t) = 0.5 * (rel2(readings + eps) + rel2(readings - eps));
      }
    });
  });

  nlohmann::json curve = nlohmann::json::array();
  std::string csv = "tau,mean_error_clean,mean_error_noisy\n";
  std::vector<double> mean_clean(nt), mean_noisy(nt);
  for (int t = 0; t < nt; ++t) {
    mean_clean[t] = std::sqrt(err2_clean.col(t).mean());
    mean_noisy[t] = std::sqrt(err2_noisy.col(t).mean());
    curve.push_back({{"tau", cfg.taus[t]},
                     {"mean_error_clean", mean_clean[t]},
                     {"mean_error_noisy", mean_noisy[t]}});
    csv += format_double(cfg.taus[t]) + "," + format_double(mean_clean[t]) + "," +
           format_double(mean_noisy[t]) + "\n";
  }
  rep.tables = {{"curve", curve}};

  std::vector<std::string> artifacts;
  stage("write", [&] {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string path = cfg.out_dir + "/curve.csv";
    detail::write_text(path, csv);
    artifacts.push_back(path);
    detail::finalize_report(rep, cfg, artifacts);
  });
  return rep;
}

// Experiment 6: noisy fine-grid snapshots, streamed window averages on a
// log-spaced coarse grid, a subspace per dt, and the projection error of the
// clean solution at each coarse time.
inline Report run_experiment_6(const ExperimentConfig& cfg) {
  if (!cfg.seed_set) throw config_error("experiment 6 draws noise: set a seed");
  if (cfg.dt_list.empty()) throw config_error("experiment 6 needs a dt list");
  Report rep;
  rep.config_echo = cfg.to_json();
  detail::StageClock stage(rep);
  const EigenFamily fam = detail::family_from_string(cfg.family);
  if (fam.dimension() != 1) throw config_error("experiment 6 is one-dimensional");
  const CoefficientFamily co = detail::coefficients_from_config(cfg);
  const SpaceGrid grid = detail::grid_from_config(cfg, fam);
  const Eigen::Index nodes = grid.weights.size();

  // log-spaced coarse targets, later snapped per dt onto fine-grid nodes
  const TimeGrid targets = detail::times_from_config(cfg);

  nlohmann::json per_dt = nlohmann::json::array();
  std::string csv = "dt,tau,eta\n";
  for (std::size_t d = 0; d < cfg.dt_list.size(); ++d) {
    const double dt = cfg.dt_list[d];
    if (!(dt > 0.0)) throw config_error("dt must be positive");
    if (dt < 1e-5 && !cfg.paper_scale)
      throw config_error("dt below 1e-5 needs --paper-scale");
    const int s_window =
        cfg.window_s >= 0 ? cfg.window_s : static_cast<int>(std::ceil(0.1 / dt));
    const long last = std::lround(cfg.t1 / dt);
    const int fine_count = static_cast<int>(last) + s_window + 1;

    TimeGrid fine;
    fine.spacing = TimeGrid::Spacing::uniform;
    fine.count = fine_count;
    fine.times.resize(static_cast<std::size_t>(fine_count));
    for (int j = 0; j < fine_count; ++j)
      fine.times[static_cast<std::size_t>(j)] = static_cast<double>(j + 1) * dt;
    fine.t0 = fine.times.front();
    fine.t1 = fine.times.back();

    // snap each coarse target to its nearest fine index, deduplicated
    std::vector<int> idx;
    for (double tau : targets.times) {
      long j = std::lround(tau / dt) - 1;
      j = std::clamp(j, 0L, last - 1);
      if (idx.empty() || j > idx.back()) idx.push_back(static_cast<int>(j));
    }
    TimeGrid coarse;
    coarse.spacing = TimeGrid::Spacing::explicit_list;
    coarse.count = static_cast<int>(idx.size());
    for (int j : idx) coarse.times.push_back(fine.times[static_cast<std::size_t>(j)]);
    coarse.t0 = coarse.times.front();
    coarse.t1 = coarse.times.back();

    const std::uint64_t dt_seed = sub_seed(cfg.seed, static_cast<std::uint64_t>(d));
    const std::string tag = "dt=" + format_double(dt);

    // per-column clean values via one mode-basis GEMV, noise by the same
    // counter layout add_noise uses on materialized matrices
    const int M = truncation_index_1d(fam, co, fine.times.front(), 1e-12);
    Eigen::MatrixXd phi(nodes, M);
    Eigen::VectorXd mu(M), cvec(M);
    for (int n = 1; n <= M; ++n) {
      const ModeIndex mi = ModeIndex::d1(n);
      phi.col(n - 1) = mode_field(fam, mi, grid);
      mu[n - 1] = fam.eigenvalue(mi);
      cvec[n - 1] = co.coefficient(mi);
    }
    const ColumnFn column = [&](int j, Eigen::Ref<Eigen::VectorXd> col) {
      const double t = fine.times[static_cast<std::size_t>(j)];
      col.noalias() = phi * (cvec.array() * (-mu.array() * t).exp()).matrix();
      const std::uint64_t base = static_cast<std::uint64_t>(j) *
                                 static_cast<std::uint64_t>(nodes);
      for (Eigen::Index i = 0; i < nodes; ++i)
        col[i] += uniform_symmetric(dt_seed, base + static_cast<std::uint64_t>(i),
                                    cfg.delta);
    };

    SnapshotMatrix averaged = stage("average " + tag, [&] {
      return window_average_stream(grid, fine, column, s_window, coarse, "noisy",
                                   dt_seed);
    });
    Subspace v =
        stage("svd " + tag, [&] { return build_subspace({averaged}, cfg.threshold); });
    SnapshotMatrix clean =
        stage("clean " + tag, [&] { return assemble(fam, co, grid, coarse); });

    nlohmann::json rows = nlohmann::json::array();
    stage("validate " + tag, [&] {
      for (Eigen::Index j = 0; j < clean.values.cols(); ++j) {
        const double eta = relative_error(v, clean.values.col(j));
        rows.push_back({{"tau", coarse.times[static_cast<std::size_t>(j)]},
                        {"eta", eta}});
        csv += format_double(dt) + "," +
               format_double(coarse.times[static_cast<std::size_t>(j)]) + "," +
               format_double(eta) + "\n";
      }
    });
    per_dt.push_back({{"dt", dt},
                      {"S", s_window},
                      {"v", v.rank()},
                      {"rows", rows}});
    if (d == 0) {
      rep.v = v.rank();
      rep.singular_values.assign(
          v.singular_values.data(),
          v.singular_values.data() + v.singular_values.size());
    }
  }
  rep.tables = {{"per_dt", per_dt}};

  std::vector<std::string> artifacts;
  stage("write", [&] {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string path = cfg.out_dir + "/curve.csv";
    detail::write_text(path, csv);
    artifacts.push_back(path);
    detail::finalize_report(rep, cfg, artifacts);
  });
  return rep;
}

inline Report run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case 0:
    case 1:
    case 3:
    case 4:
      return run_table_experiment(cfg);
    case 2:
      return run_experiment_2(cfg);
    case 5:
      return run_experiment_5(cfg);
    case 6:
      return run_experiment_6(cfg);
    default:
      throw config_error("experiment id must be 1..6 or custom");
  }
}

}  // namespace snapspan
