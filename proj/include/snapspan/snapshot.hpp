#pragma once
// Snapshot matrices: eigen-expansion assembly on space/time grids, additive
// uniform noise, sliding-window time averaging, CSV + JSON-metadata IO.

#include <Eigen/Dense>

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "grids.hpp"
#include "rng.hpp"
#include "spectral.hpp"

namespace snapspan {

struct SnapshotMatrix {
  SpaceGrid grid;
  TimeGrid times;
  Eigen::MatrixXd values;  // node_count x time_count, grid-flattened rows
  std::string provenance = "clean";
  std::uint64_t seed = 0;
  int truncation_x = 0;  // modes kept along the (only or first) axis
  int truncation_y = 0;  // second axis, 2D assemblies only

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

inline double w_inner(const SpaceGrid& g, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b) {
  if (a.size() != g.weights.size() || b.size() != g.weights.size())
    throw config_error("vector length does not match grid");
  return (g.weights.array() * a.array() * b.array()).sum();
}

inline double w_norm(const SpaceGrid& g, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, w_inner(g, v, v)));
}

// u(x_i, t_j) = sum_n c_n e^{-mu_n t_j} phi_n(x_i), truncated via the
// coefficient tail majorant so the dropped remainder stays below tol at
// every requested time. One dense mode basis x decay GEMM per axis.
inline SnapshotMatrix assemble(const EigenFamily& fam, const CoefficientFamily& co,
                               const SpaceGrid& grid, const TimeGrid& times,
                               double tol = 1e-12) {
  if (fam.dimension() != grid.dimension)
    throw config_error("family/grid dimension mismatch");
  if (!fam.has_point_evaluation())
    throw config_error("custom eigenvalue lists cannot be sampled in space");
  if (tol < 0.0) throw config_error("negative assembly tolerance");
  if (tol == 0.0 && !co.finitely_supported())
    throw config_error("zero tolerance needs finitely supported coefficients");

  const double t_min = times.times.front();
  const int K = static_cast<int>(times.times.size());
  SnapshotMatrix out;
  out.grid = grid;
  out.times = times;

  if (grid.dimension == 1) {
    const int M = truncation_index_1d(fam, co, t_min, tol);
    out.truncation_x = M;
    std::vector<ModeIndex> modes;
    detail::for_each_1d_mode(fam, M, [&](const ModeIndex& idx) {
      if (co.coefficient(idx) != 0.0) modes.push_back(idx);
    });
    const int P = static_cast<int>(modes.size());
    const Eigen::Index N = static_cast<Eigen::Index>(grid.node_count());
    Eigen::MatrixXd phi(N, P);
    Eigen::MatrixXd decay(P, K);
    for (int p = 0; p < P; ++p) {
      phi.col(p) = mode_field(fam, modes[p], grid);
      const double c = co.coefficient(modes[p]);
      const double mu = fam.eigenvalue(modes[p]);
      for (int j = 0; j < K; ++j) decay(p, j) = c * std::exp(-mu * times.times[j]);
    }
    out.values.noalias() = phi * decay;
    return out;
  }

  // 2D: either the separable product rule (per-axis sums, pointwise column
  // product) or a sparse explicit mode set (rank-|modes| GEMM).
  const Eigen::Index nx = static_cast<Eigen::Index>(grid.axis_nodes[0].size());
  const Eigen::Index ny = static_cast<Eigen::Index>(grid.axis_nodes[1].size());
  if (co.rule() == CoefficientFamily::Rule::product_inverse_square) {
    const double axis_tol = tol / 4.0;
    Eigen::MatrixXd axis_sum[2];
    int trunc[2] = {0, 0};
    for (int axis = 0; axis < 2; ++axis) {
      const int M = truncation_index([&](int k) { return fam.axis_rate(axis, k); },
                                     [](int M2) { return 1.0 / M2; }, t_min, axis_tol);
      trunc[axis] = M;
      const auto& nodes = grid.axis_nodes[axis];
      const double freq = axis == 0 ? pi : fam.y_frequency() * pi;
      Eigen::MatrixXd phi(static_cast<Eigen::Index>(nodes.size()), M);
      Eigen::MatrixXd decay(M, K);
      for (int k = 1; k <= M; ++k) {
        for (std::size_t i = 0; i < nodes.size(); ++i)
          phi(static_cast<Eigen::Index>(i), k - 1) = std::sin(freq * k * nodes[i]);
        const double c = co.axis_coefficient(k);
        const double r = fam.axis_rate(axis, k);
        for (int j = 0; j < K; ++j) decay(k - 1, j) = c * std::exp(-r * times.times[j]);
      }
      axis_sum[axis].noalias() = phi * decay;
    }
    out.truncation_x = trunc[0];
    out.truncation_y = trunc[1];
    out.values.resize(nx * ny, K);
    for (int j = 0; j < K; ++j)
      for (Eigen::Index ix = 0; ix < nx; ++ix)
        out.values.col(j).segment(ix * ny, ny) =
            axis_sum[0](ix, j) * axis_sum[1].col(j);
    return out;
  }
  if (co.rule() == CoefficientFamily::Rule::explicit_modes) {
    std::vector<ModeIndex> modes;
    for (const auto& [idx, c] : co.mode_map())
      if (c != 0.0) modes.push_back(idx);
    const int P = static_cast<int>(modes.size());
    Eigen::MatrixXd phi(nx * ny, P);
    Eigen::MatrixXd decay(P, K);
    int bx = 0, by = 0;
    for (int p = 0; p < P; ++p) {
      phi.col(p) = mode_field(fam, modes[p], grid);
      const double c = co.coefficient(modes[p]);
      const double lam = fam.eigenvalue(modes[p]);
      for (int j = 0; j < K; ++j) decay(p, j) = c * std::exp(-lam * times.times[j]);
      bx = std::max(bx, modes[p].m);
      by = std::max(by, modes[p].n);
    }
    out.truncation_x = bx;
    out.truncation_y = by;
    out.values.noalias() = phi * decay;
    return out;
  }
  throw config_error("2D assembly needs product or explicit coefficients");
}

// Adds i.i.d. uniform [-delta, delta] noise. Deterministic in (seed, shape):
// entry (i,j) uses counter j*rows+i regardless of evaluation order.
inline SnapshotMatrix add_noise(const SnapshotMatrix& src, double delta,
                                std::uint64_t seed) {
  if (src.provenance != "clean")
    throw config_error("noise is added to clean snapshots only");
  if (delta < 0.0) throw config_error("negative noise amplitude");
  SnapshotMatrix out = src;
  out.provenance = "noisy";
  out.seed = seed;
  if (delta == 0.0) return out;
  const std::uint64_t rows = static_cast<std::uint64_t>(src.values.rows());
  for (Eigen::Index j = 0; j < src.values.cols(); ++j)
    for (Eigen::Index i = 0; i < src.values.rows(); ++i)
      out.values(i, j) += uniform_symmetric(
          seed, static_cast<std::uint64_t>(j) * rows + static_cast<std::uint64_t>(i),
          delta);
  return out;
}

using ColumnFn = std::function<void(int, Eigen::Ref<Eigen::VectorXd>)>;

// Sliding-window mean over S+1 consecutive fine-grid columns starting at
// each output time: v(tau) = (1/(S+1)) sum_{s=0..S} u(tau_{j0+s}). The fine
// source is visited once, in time order, whether it is a stored matrix or a
// column generator.
inline SnapshotMatrix window_average_stream(const SpaceGrid& grid,
                                            const TimeGrid& fine, const ColumnFn& column,
                                            int S, const TimeGrid& output_times,
                                            const std::string& provenance,
                                            std::uint64_t seed) {
  if (S < 0) throw config_error("window length must be nonnegative");
  const auto& ft = fine.times;
  const int K = static_cast<int>(ft.size());
  const int n_out = static_cast<int>(output_times.times.size());
  std::vector<int> start(n_out);
  for (int o = 0; o < n_out; ++o) {
    const double tau = output_times.times[o];
    auto it = std::lower_bound(ft.begin(), ft.end(), tau);
    int j = static_cast<int>(it - ft.begin());
    if (j > 0 && (j == K || std::abs(ft[j - 1] - tau) < std::abs(ft[j] - tau))) --j;
    if (j >= K || std::abs(ft[j] - tau) > 1e-9 * std::max(std::abs(tau), std::abs(ft[j])))
      throw config_error("output time is not a fine-grid node");
    if (j + S >= K) throw config_error("averaging window leaves the fine time span");
    start[o] = j;
    if (o > 0 && start[o] <= start[o - 1])
      throw config_error("output times must map to increasing fine nodes");
  }

  const Eigen::Index N = static_cast<Eigen::Index>(grid.node_count());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(N, n_out);
  Eigen::VectorXd buf(N);
  int lo = 0, hi = 0;
  const int j_max = n_out > 0 ? start[n_out - 1] + S : -1;
  for (int j = 0; j <= j_max; ++j) {
    while (hi < n_out && start[hi] == j) ++hi;
    if (lo == hi) continue;
    column(j, buf);
    for (int o = lo; o < hi; ++o) acc.col(o) += buf;
    while (lo < hi && start[lo] + S == j) ++lo;
  }

  SnapshotMatrix out;
  out.grid = grid;
  out.times = output_times;
  out.values = acc / static_cast<double>(S + 1);
  out.provenance = provenance == "clean" ? "averaged" : "averaged-" + provenance;
  out.seed = seed;
  return out;
}

inline SnapshotMatrix window_average(const SnapshotMatrix& src, int S,
                                     const TimeGrid& output_times) {
  return window_average_stream(
      src.grid, src.times,
      [&](int j, Eigen::Ref<Eigen::VectorXd> col) { col = src.values.col(j); }, S,
      output_times, src.provenance, src.seed);
}

namespace detail {

inline nlohmann::json grid_meta(const SpaceGrid& g) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& a : g.axis_nodes) axes.push_back(a);
  std::vector<double> w(g.weights.data(), g.weights.data() + g.weights.size());
  return {{"dimension", g.dimension}, {"axis_nodes", axes}, {"weights", w}};
}

inline const char* spacing_tag(TimeGrid::Spacing s) {
  switch (s) {
    case TimeGrid::Spacing::uniform: return "uniform";
    case TimeGrid::Spacing::logarithmic: return "logarithmic";
    case TimeGrid::Spacing::explicit_list: return "explicit";
  }
  return "explicit";
}

inline TimeGrid::Spacing spacing_from_tag(const std::string& tag) {
  if (tag == "uniform") return TimeGrid::Spacing::uniform;
  if (tag == "logarithmic") return TimeGrid::Spacing::logarithmic;
  if (tag == "explicit") return TimeGrid::Spacing::explicit_list;
  throw io_error("unknown time spacing tag: " + tag);
}

inline SpaceGrid grid_from_meta(const nlohmann::json& j) {
  std::vector<std::vector<double>> axes;
  for (const auto& a : j.at("axis_nodes")) axes.push_back(a.get<std::vector<double>>());
  SpaceGrid g = SpaceGrid::from_axes(axes);
  const auto w = j.at("weights").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(w.size()) != g.weights.size())
    throw io_error("metadata weights do not match the grid");
  for (Eigen::Index i = 0; i < g.weights.size(); ++i)
    if (w[static_cast<std::size_t>(i)] != g.weights[i])
      throw io_error("metadata weights do not match the grid");
  return g;
}

}  // namespace detail

// Row-major CSV (one row per grid node, one column per time), values printed
// with shortest round-trip precision, plus <path>.meta.json carrying the
// grids, provenance and seed. Save then load reproduces the struct exactly.
inline void save_matrix(const SnapshotMatrix& m, const std::string& path) {
  std::string body;
  body.reserve(static_cast<std::size_t>(m.values.size()) * 20);
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      if (j) body += ',';
      body += format_double(m.values(i, j));
    }
    body += '\n';
  }
  {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open for writing: " + path);
    f << body;
    if (!f) throw io_error("write failed: " + path);
  }
  nlohmann::json meta = detail::grid_meta(m.grid);
  meta["times"] = m.times.times;
  meta["spacing"] = detail::spacing_tag(m.times.spacing);
  meta["provenance"] = m.provenance;
  meta["seed"] = m.seed;
  meta["truncation"] = {m.truncation_x, m.truncation_y};
  std::ofstream f(path + ".meta.json", std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path + ".meta.json");
  f << meta.dump(2) << '\n';
  if (!f) throw io_error("write failed: " + path + ".meta.json");
}

inline SnapshotMatrix load_matrix(const std::string& path) {
  std::ifstream mf(path + ".meta.json", std::ios::binary);
  if (!mf) throw io_error("cannot open: " + path + ".meta.json");
  nlohmann::json meta;
  try {
    mf >> meta;
  } catch (const std::exception& e) {
    throw io_error("bad metadata JSON: " + std::string(e.what()));
  }
  SnapshotMatrix out;
  try {
    out.grid = detail::grid_from_meta(meta);
    out.times.times = meta.at("times").get<std::vector<double>>();
    out.times.spacing = detail::spacing_from_tag(meta.at("spacing").get<std::string>());
    out.times.t0 = out.times.times.front();
    out.times.t1 = out.times.times.back();
    out.times.count = static_cast<int>(out.times.times.size());
    out.provenance = meta.at("provenance").get<std::string>();
    out.seed = meta.at("seed").get<std::uint64_t>();
    const auto tr = meta.at("truncation").get<std::vector<int>>();
    out.truncation_x = tr.size() > 0 ? tr[0] : 0;
    out.truncation_y = tr.size() > 1 ? tr[1] : 0;
  } catch (const error&) {
    throw;
  } catch (const std::exception& e) {
    throw io_error("bad metadata fields: " + std::string(e.what()));
  }

  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open: " + path);
  const Eigen::Index N = static_cast<Eigen::Index>(out.grid.node_count());
  const Eigen::Index K = static_cast<Eigen::Index>(out.times.times.size());
  out.values.resize(N, K);
  std::string line;
  for (Eigen::Index i = 0; i < N; ++i) {
    if (!std::getline(f, line)) throw io_error("CSV has too few rows: " + path);
    const char* p = line.c_str();
    for (Eigen::Index j = 0; j < K; ++j) {
      char* end = nullptr;
      out.values(i, j) = std::strtod(p, &end);
      if (end == p) throw io_error("CSV parse failure at row " + std::to_string(i));
      p = end;
      if (*p == ',') ++p;
      else if (j + 1 < K) throw io_error("CSV has too few columns at row " + std::to_string(i));
    }
  }
  return out;
}

inline std::uint64_t hash_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string s = ss.str();
  return fnv1a64(std::string_view(s));
}

}  // namespace snapspan
