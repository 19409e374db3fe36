#pragma once
// Space grids with trapezoid quadrature weights and time grids with uniform
// or logarithmic spacing. The flattened weight vector defines the discrete
// L2 inner product used by every downstream norm and SVD.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace snapspan {

inline std::vector<double> trapezoid_weights(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  if (n < 2) throw config_error("axis needs at least two nodes");
  for (std::size_t i = 1; i < n; ++i)
    if (!(nodes[i] > nodes[i - 1]))
      throw config_error("axis nodes must be strictly increasing");
  std::vector<double> w(n);
  w[0] = 0.5 * (nodes[1] - nodes[0]);
  w[n - 1] = 0.5 * (nodes[n - 1] - nodes[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) w[i] = 0.5 * (nodes[i + 1] - nodes[i - 1]);
  return w;
}

// Flattening convention in 2D: node (ix, iy) lives at index ix*ny + iy.
struct SpaceGrid {
  int dimension = 1;
  std::vector<std::vector<double>> axis_nodes;
  Eigen::VectorXd weights;
  Eigen::VectorXd sqrt_weights;

  std::size_t node_count() const { return static_cast<std::size_t>(weights.size()); }

  double measure() const {
    double m = 1.0;
    for (const auto& ax : axis_nodes) m *= ax.back() - ax.front();
    return m;
  }

  bool matches(const SpaceGrid& o) const {
    if (dimension != o.dimension || axis_nodes.size() != o.axis_nodes.size()) return false;
    for (std::size_t a = 0; a < axis_nodes.size(); ++a)
      if (axis_nodes[a] != o.axis_nodes[a]) return false;
    return weights.size() == o.weights.size() && weights == o.weights;
  }

  static SpaceGrid from_axes(std::vector<std::vector<double>> axes) {
    if (axes.empty() || axes.size() > 2)
      throw config_error("grids are one- or two-dimensional");
    SpaceGrid g;
    g.dimension = static_cast<int>(axes.size());
    g.axis_nodes = std::move(axes);
    std::vector<std::vector<double>> aw;
    aw.reserve(g.axis_nodes.size());
    for (const auto& ax : g.axis_nodes) aw.push_back(trapezoid_weights(ax));
    if (g.dimension == 1) {
      g.weights = Eigen::Map<const Eigen::VectorXd>(aw[0].data(),
                                                    static_cast<Eigen::Index>(aw[0].size()));
    } else {
      const std::size_t nx = aw[0].size(), ny = aw[1].size();
      g.weights.resize(static_cast<Eigen::Index>(nx * ny));
      for (std::size_t ix = 0; ix < nx; ++ix)
        for (std::size_t iy = 0; iy < ny; ++iy)
          g.weights[static_cast<Eigen::Index>(ix * ny + iy)] = aw[0][ix] * aw[1][iy];
    }
    if ((g.weights.array() <= 0.0).any())
      throw config_error("quadrature weights must be positive");
    double total = g.weights.sum();
    if (std::abs(total - g.measure()) > 1e-12 * g.measure())
      throw numeric_error("quadrature weights do not sum to the domain measure");
    g.sqrt_weights = g.weights.cwiseSqrt();
    return g;
  }

  static SpaceGrid uniform_1d(double a, double b, int n) {
    return from_axes({uniform_axis(a, b, n)});
  }

  static SpaceGrid uniform_2d(double bx, int nx, double by, int ny) {
    return from_axes({uniform_axis(0.0, bx, nx), uniform_axis(0.0, by, ny)});
  }

  static std::vector<double> uniform_axis(double a, double b, int n) {
    if (n < 2) throw config_error("axis needs at least two nodes");
    if (!(b > a)) throw config_error("axis endpoints must be increasing");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    v.front() = a;
    v.back() = b;
    return v;
  }
};

struct TimeGrid {
  enum class Spacing { uniform, logarithmic, explicit_list };

  double t0 = 0.0;
  double t1 = 0.0;
  int count = 0;
  Spacing spacing = Spacing::uniform;
  std::vector<double> times;

  static TimeGrid uniform(double t0, double t1, int count) {
    return build(t0, t1, count, Spacing::uniform);
  }

  static TimeGrid logarithmic(double t0, double t1, int count) {
    return build(t0, t1, count, Spacing::logarithmic);
  }

  static TimeGrid explicit_list(std::vector<double> ts) {
    if (ts.empty()) throw config_error("time grid is empty");
    TimeGrid g;
    g.t0 = ts.front();
    g.t1 = ts.back();
    g.count = static_cast<int>(ts.size());
    g.spacing = Spacing::explicit_list;
    g.times = std::move(ts);
    g.validate();
    return g;
  }

  double dt() const {
    if (spacing != Spacing::uniform || count < 2)
      throw config_error("dt is defined for uniform grids only");
    return (t1 - t0) / (count - 1);
  }

  bool is_uniform() const {
    if (spacing == Spacing::uniform) return true;
    if (count < 3) return true;
    double h = times[1] - times[0];
    for (int j = 1; j + 1 < count; ++j)
      if (std::abs(times[static_cast<std::size_t>(j) + 1] - times[static_cast<std::size_t>(j)] - h) >
          1e-9 * h)
        return false;
    return true;
  }

 private:
  static TimeGrid build(double t0, double t1, int count, Spacing sp) {
    TimeGrid g;
    g.t0 = t0;
    g.t1 = t1;
    g.count = count;
    g.spacing = sp;
    if (count < 1) throw config_error("time grid needs at least one sample");
    if (count == 1) {
      if (t0 != t1) throw config_error("single-sample grid needs t0 = t1");
      g.times = {t0};
      return g;
    }
    g.times.resize(static_cast<std::size_t>(count));
    if (sp == Spacing::uniform) {
      for (int j = 0; j < count; ++j)
        g.times[static_cast<std::size_t>(j)] = t0 + (t1 - t0) * j / (count - 1);
    } else {
      const double la = std::log(t0), lb = std::log(t1);
      for (int j = 0; j < count; ++j)
        g.times[static_cast<std::size_t>(j)] = std::exp(la + (lb - la) * j / (count - 1));
    }
    g.times.front() = t0;
    g.times.back() = t1;
    g.validate();
    return g;
  }

  void validate() const {
    if (!(t0 > 0.0)) throw config_error("time grid requires t0 > 0");
    if (count > 1 && !(t1 > t0)) throw config_error("time grid requires t1 > t0");
    for (std::size_t j = 1; j < times.size(); ++j)
      if (!(times[j] > times[j - 1]))
        throw config_error("time samples must be strictly increasing");
  }
};

}  // namespace snapspan
