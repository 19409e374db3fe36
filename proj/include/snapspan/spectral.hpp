#pragma once
// Closed-form eigenvalue/eigenfunction families and eigen-expansion
// evaluation. Four operator families plus a custom eigenvalue list; all
// spectra are closed-form, nothing is solved numerically.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "grids.hpp"
#include "rng.hpp"

namespace snapspan {

inline constexpr double pi = std::numbers::pi;
inline constexpr double pi2 = pi * pi;

enum class FamilyKind {
  dirichlet_1d,
  periodic_1d,
  rect_2d,
  fourth_order_2d,
  custom_list,
};

inline std::string family_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::dirichlet_1d: return "dirichlet1d";
    case FamilyKind::periodic_1d: return "periodic1d";
    case FamilyKind::rect_2d: return "rect2d";
    case FamilyKind::fourth_order_2d: return "fourthorder2d";
    case FamilyKind::custom_list: return "custom";
  }
  return "?";
}

struct ModeIndex {
  enum class Branch { none, sine, cosine, constant };

  int m = 0;  // first 2D index; 0 in 1D
  int n = 0;  // 1D index or second 2D index; 0 only for the constant branch
  Branch branch = Branch::none;

  static ModeIndex d1(int n) { return {0, n, Branch::none}; }
  static ModeIndex d2(int m, int n) { return {m, n, Branch::none}; }
  static ModeIndex periodic_sine(int n) { return {0, n, Branch::sine}; }
  static ModeIndex periodic_cosine(int n) { return {0, n, Branch::cosine}; }
  static ModeIndex periodic_constant() { return {0, 0, Branch::constant}; }

  friend bool operator==(const ModeIndex& a, const ModeIndex& b) {
    return a.m == b.m && a.n == b.n && a.branch == b.branch;
  }
  friend bool operator<(const ModeIndex& a, const ModeIndex& b) {
    if (a.m != b.m) return a.m < b.m;
    if (a.n != b.n) return a.n < b.n;
    return static_cast<int>(a.branch) < static_cast<int>(b.branch);
  }

  std::string label() const {
    switch (branch) {
      case Branch::constant: return "const";
      case Branch::sine: return "sin n=" + std::to_string(n);
      case Branch::cosine: return "cos n=" + std::to_string(n);
      case Branch::none: break;
    }
    if (m > 0) return "m=" + std::to_string(m) + ",n=" + std::to_string(n);
    return "n=" + std::to_string(n);
  }
};

struct SpectrumEntry {
  double value = 0.0;
  std::vector<ModeIndex> modes;
  int multiplicity = 0;
};

class EigenFamily {
 public:
  static EigenFamily dirichlet_1d() { return EigenFamily(FamilyKind::dirichlet_1d); }
  static EigenFamily periodic_1d() { return EigenFamily(FamilyKind::periodic_1d); }
  static EigenFamily rect_2d() { return EigenFamily(FamilyKind::rect_2d); }
  static EigenFamily fourth_order_2d() { return EigenFamily(FamilyKind::fourth_order_2d); }

  static EigenFamily custom_list(std::vector<double> values) {
    if (values.empty()) throw config_error("custom eigenvalue list is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0)) throw config_error("eigenvalues must be positive");
      if (i > 0 && values[i] < values[i - 1])
        throw config_error("custom eigenvalues must be ascending");
    }
    EigenFamily f(FamilyKind::custom_list);
    f.custom_ = std::move(values);
    return f;
  }

  // {"eigenvalues": [...]} ascending positive reals.
  static EigenFamily custom_from_json(const nlohmann::json& j) {
    if (!j.contains("eigenvalues") || !j["eigenvalues"].is_array())
      throw config_error("custom family JSON needs an \"eigenvalues\" array");
    return custom_list(j["eigenvalues"].get<std::vector<double>>());
  }

  FamilyKind kind() const { return kind_; }

  int dimension() const {
    return (kind_ == FamilyKind::rect_2d || kind_ == FamilyKind::fourth_order_2d) ? 2 : 1;
  }

  bool has_point_evaluation() const { return kind_ != FamilyKind::custom_list; }

  // Domain is [0,1] x [0, 2^{-1/4}] (second order) or [0,1] x [0, 2^{-1/8}].
  double domain_length_y() const {
    switch (kind_) {
      case FamilyKind::rect_2d: return std::pow(2.0, -0.25);
      case FamilyKind::fourth_order_2d: return std::pow(2.0, -0.125);
      default: throw config_error("domain_length_y on a one-dimensional family");
    }
  }

  double y_frequency() const { return 1.0 / domain_length_y(); }

  int axis_exponent() const {
    switch (kind_) {
      case FamilyKind::rect_2d: return 2;
      case FamilyKind::fourth_order_2d: return 4;
      default: throw config_error("axis_exponent on a one-dimensional family");
    }
  }

  // Separable per-axis decay rate; eigenvalue(m,n) = axis_rate(0,m) + axis_rate(1,n).
  double axis_rate(int axis, int k) const {
    const double p = std::pow(static_cast<double>(k), axis_exponent());
    return axis == 0 ? pi2 * p : std::numbers::sqrt2 * pi2 * p;
  }

  double eigenvalue(const ModeIndex& idx) const {
    switch (kind_) {
      case FamilyKind::dirichlet_1d:
        require_1d_index(idx);
        return pi2 * static_cast<double>(idx.n) * idx.n;
      case FamilyKind::periodic_1d:
        require_periodic_index(idx);
        if (idx.branch == ModeIndex::Branch::constant) return 1.0;
        return pi2 * static_cast<double>(idx.n) * idx.n + 1.0;
      case FamilyKind::rect_2d:
      case FamilyKind::fourth_order_2d:
        require_2d_index(idx);
        return axis_rate(0, idx.m) + axis_rate(1, idx.n);
      case FamilyKind::custom_list:
        require_1d_index(idx);
        if (static_cast<std::size_t>(idx.n) > custom_.size())
          throw config_error("mode index beyond the custom eigenvalue list");
        return custom_[static_cast<std::size_t>(idx.n) - 1];
    }
    throw config_error("unknown family");
  }

  double eigenfunction_eval(const ModeIndex& idx, double x) const {
    if (dimension() != 1) throw config_error("1D evaluation on a 2D family");
    if (!has_point_evaluation())
      throw config_error("custom eigenvalue lists have no eigenfunctions");
    if (x < 0.0 || x > 1.0) throw config_error("point outside domain");
    switch (kind_) {
      case FamilyKind::dirichlet_1d:
        require_1d_index(idx);
        return std::sin(idx.n * pi * x);
      case FamilyKind::periodic_1d:
        require_periodic_index(idx);
        switch (idx.branch) {
          case ModeIndex::Branch::constant: return 1.0;
          case ModeIndex::Branch::sine: return std::sin(idx.n * pi * x);
          case ModeIndex::Branch::cosine: return std::cos(idx.n * pi * x);
          default: break;
        }
        throw config_error("invalid branch");
      default:
        throw config_error("unreachable");
    }
  }

  double eigenfunction_eval(const ModeIndex& idx, double x, double y) const {
    if (dimension() != 2) throw config_error("2D evaluation on a 1D family");
    require_2d_index(idx);
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > domain_length_y())
      throw config_error("point outside domain");
    return std::sin(idx.m * pi * x) * std::sin(y_frequency() * idx.n * pi * y);
  }

  std::vector<SpectrumEntry> sorted_spectrum(double cutoff) const {
    std::vector<SpectrumEntry> out;
    switch (kind_) {
      case FamilyKind::dirichlet_1d: {
        for (int n = 1;; ++n) {
          double v = pi2 * static_cast<double>(n) * n;
          if (v > cutoff) break;
          out.push_back({v, {ModeIndex::d1(n)}, 1});
        }
        return out;
      }
      case FamilyKind::periodic_1d: {
        if (1.0 <= cutoff) out.push_back({1.0, {ModeIndex::periodic_constant()}, 1});
        for (int n = 1;; ++n) {
          double v = pi2 * static_cast<double>(n) * n + 1.0;
          if (v > cutoff) break;
          out.push_back({v, {ModeIndex::periodic_sine(n), ModeIndex::periodic_cosine(n)}, 2});
        }
        return out;
      }
      case FamilyKind::rect_2d:
      case FamilyKind::fourth_order_2d: {
        std::vector<std::pair<double, ModeIndex>> all;
        for (int m = 1; axis_rate(0, m) + axis_rate(1, 1) <= cutoff; ++m)
          for (int n = 1;; ++n) {
            double v = axis_rate(0, m) + axis_rate(1, n);
            if (v > cutoff) break;
            all.emplace_back(v, ModeIndex::d2(m, n));
          }
        std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
          if (a.first != b.first) return a.first < b.first;
          return a.second < b.second;
        });
        for (const auto& [v, idx] : all) {
          if (!out.empty() && out.back().value == v) {
            out.back().modes.push_back(idx);
            ++out.back().multiplicity;
          } else {
            out.push_back({v, {idx}, 1});
          }
        }
        return out;
      }
      case FamilyKind::custom_list: {
        for (std::size_t i = 0; i < custom_.size() && custom_[i] <= cutoff; ++i) {
          int n = static_cast<int>(i) + 1;
          if (!out.empty() && out.back().value == custom_[i]) {
            out.back().modes.push_back(ModeIndex::d1(n));
            ++out.back().multiplicity;
          } else {
            out.push_back({custom_[i], {ModeIndex::d1(n)}, 1});
          }
        }
        return out;
      }
    }
    throw config_error("unknown family");
  }

  const std::vector<double>& custom_values() const { return custom_; }

 private:
  explicit EigenFamily(FamilyKind k) : kind_(k) {}

  void require_1d_index(const ModeIndex& idx) const {
    if (idx.branch != ModeIndex::Branch::none || idx.m != 0 || idx.n < 1)
      throw config_error("invalid mode index for a simple 1D family");
  }
  void require_periodic_index(const ModeIndex& idx) const {
    if (idx.m != 0) throw config_error("invalid mode index for the periodic family");
    if (idx.branch == ModeIndex::Branch::constant) {
      if (idx.n != 0) throw config_error("constant branch carries index 0");
    } else if (idx.branch == ModeIndex::Branch::sine ||
               idx.branch == ModeIndex::Branch::cosine) {
      if (idx.n < 1) throw config_error("oscillatory branch needs n >= 1");
    } else {
      throw config_error("periodic modes carry a branch flag");
    }
  }
  void require_2d_index(const ModeIndex& idx) const {
    if (idx.branch != ModeIndex::Branch::none || idx.m < 1 || idx.n < 1)
      throw config_error("invalid mode index for a 2D family");
  }

  FamilyKind kind_;
  std::vector<double> custom_;
};

class CoefficientFamily {
 public:
  enum class Rule {
    alternating_inverse_square,  // c_n = (-1)^n / n^2
    product_inverse_square,      // c_{m,n} = 1 / (m^2 n^2)
    random_uniform,              // c_n ~ U(-1,1) for n <= n_omega, else 0
    explicit_list,               // 1D list by index
    explicit_modes,              // sparse (mode -> value) map
    branch_alternating,          // (-1)^n/n^2 on one periodic branch
  };

  static CoefficientFamily alternating_inverse_square() {
    return CoefficientFamily(Rule::alternating_inverse_square);
  }
  static CoefficientFamily product_inverse_square() {
    return CoefficientFamily(Rule::product_inverse_square);
  }
  static CoefficientFamily random_uniform(std::uint64_t seed, int n_omega) {
    if (n_omega < 1) throw config_error("random family needs n_omega >= 1");
    CoefficientFamily f(Rule::random_uniform);
    f.seed_ = seed;
    f.n_omega_ = n_omega;
    return f;
  }
  static CoefficientFamily explicit_list(std::vector<double> c) {
    CoefficientFamily f(Rule::explicit_list);
    f.list_ = std::move(c);
    return f;
  }
  static CoefficientFamily explicit_modes(std::vector<std::pair<ModeIndex, double>> entries) {
    CoefficientFamily f(Rule::explicit_modes);
    for (auto& [idx, v] : entries) f.modes_[idx] = v;
    return f;
  }
  static CoefficientFamily branch_alternating(bool sine_branch, bool include_constant) {
    CoefficientFamily f(Rule::branch_alternating);
    f.sine_branch_ = sine_branch;
    f.include_constant_ = include_constant;
    return f;
  }

  // {"coefficients": [...]} by 1D mode index.
  static CoefficientFamily explicit_from_json(const nlohmann::json& j) {
    if (!j.contains("coefficients") || !j["coefficients"].is_array())
      throw config_error("coefficient JSON needs a \"coefficients\" array");
    return explicit_list(j["coefficients"].get<std::vector<double>>());
  }

  Rule rule() const { return rule_; }

  double coefficient(const ModeIndex& idx) const {
    switch (rule_) {
      case Rule::alternating_inverse_square:
        if (idx.branch != ModeIndex::Branch::none || idx.m != 0 || idx.n < 1)
          throw config_error("alternating family indexes simple 1D modes");
        return parity(idx.n) / (static_cast<double>(idx.n) * idx.n);
      case Rule::product_inverse_square:
        if (idx.branch != ModeIndex::Branch::none || idx.m < 1 || idx.n < 1)
          throw config_error("product family indexes 2D modes");
        return 1.0 / (static_cast<double>(idx.m) * idx.m * idx.n * idx.n);
      case Rule::random_uniform:
        if (idx.branch != ModeIndex::Branch::none || idx.m != 0 || idx.n < 1)
          throw config_error("random family indexes simple 1D modes");
        if (idx.n > n_omega_) return 0.0;
        return uniform_symmetric(seed_, static_cast<std::uint64_t>(idx.n), 1.0);
      case Rule::explicit_list:
        if (idx.branch != ModeIndex::Branch::none || idx.m != 0 || idx.n < 1)
          throw config_error("explicit list indexes simple 1D modes");
        if (static_cast<std::size_t>(idx.n) > list_.size()) return 0.0;
        return list_[static_cast<std::size_t>(idx.n) - 1];
      case Rule::explicit_modes: {
        auto it = modes_.find(idx);
        return it == modes_.end() ? 0.0 : it->second;
      }
      case Rule::branch_alternating:
        if (idx.branch == ModeIndex::Branch::constant)
          return include_constant_ ? 1.0 : 0.0;
        if (idx.branch == ModeIndex::Branch::sine && sine_branch_)
          return parity(idx.n) / (static_cast<double>(idx.n) * idx.n);
        if (idx.branch == ModeIndex::Branch::cosine && !sine_branch_)
          return parity(idx.n) / (static_cast<double>(idx.n) * idx.n);
        return 0.0;
    }
    throw config_error("unknown coefficient rule");
  }

  // Per-axis coefficient of the separable product rule.
  double axis_coefficient(int k) const {
    if (rule_ != Rule::product_inverse_square)
      throw config_error("axis coefficients exist for the product rule only");
    return 1.0 / (static_cast<double>(k) * k);
  }

  // Upper bound on the absolute coefficient tail beyond index M along one
  // 1D enumeration (per axis for the product rule): sum_{n>M} n^{-2} < 1/M.
  double tail_majorant(int M) const {
    if (M < 1) throw config_error("tail majorant needs M >= 1");
    switch (rule_) {
      case Rule::alternating_inverse_square:
      case Rule::product_inverse_square:
      case Rule::branch_alternating:
        return 1.0 / M;
      case Rule::random_uniform:
        return M >= n_omega_ ? 0.0 : static_cast<double>(n_omega_ - M);
      case Rule::explicit_list: {
        double s = 0.0;
        for (std::size_t i = static_cast<std::size_t>(M); i < list_.size(); ++i)
          s += std::abs(list_[i]);
        return s;
      }
      case Rule::explicit_modes: {
        double s = 0.0;
        for (const auto& [idx, v] : modes_)
          if (std::max(idx.m, idx.n) > M) s += std::abs(v);
        return s;
      }
    }
    throw config_error("unknown coefficient rule");
  }

  bool finitely_supported() const {
    return rule_ == Rule::random_uniform || rule_ == Rule::explicit_list ||
           rule_ == Rule::explicit_modes;
  }

  int support_bound() const {
    switch (rule_) {
      case Rule::random_uniform: return n_omega_;
      case Rule::explicit_list: return static_cast<int>(list_.size());
      case Rule::explicit_modes: {
        int b = 0;
        for (const auto& [idx, v] : modes_) b = std::max({b, idx.m, idx.n});
        return std::max(b, 1);
      }
      default: return -1;
    }
  }

  std::uint64_t seed() const { return seed_; }
  int n_omega() const { return n_omega_; }
  const std::map<ModeIndex, double>& mode_map() const { return modes_; }

 private:
  explicit CoefficientFamily(Rule r) : rule_(r) {}
  static double parity(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

  Rule rule_;
  std::uint64_t seed_ = 0;
  int n_omega_ = 0;
  std::vector<double> list_;
  std::map<ModeIndex, double> modes_;
  bool sine_branch_ = true;
  bool include_constant_ = false;
};

inline constexpr int mode_ceiling = 4096;  // hard per-dimension truncation cap

// Smallest M with tail(M) * exp(-rate(M+1) * t) <= tol. The tail callable
// bounds the absolute coefficient sum beyond M, so the product majorizes the
// dropped series remainder (eigenfunctions are bounded by 1).
template <class RateFn, class TailFn>
int truncation_index(RateFn&& rate, TailFn&& tail, double t, double tol) {
  if (t < 0.0) throw config_error("negative time");
  for (int M = 1; M <= mode_ceiling; ++M) {
    double bound = tail(M);
    if (bound > 0.0 && t > 0.0) bound *= std::exp(-rate(M + 1) * t);
    if (bound <= tol) return M;
  }
  throw numeric_error("series truncation exceeds the 4096-mode ceiling");
}

namespace detail {

// Enumeration of a 1D family's modes: the constant branch first (periodic
// only), then index n covering every branch at that n.
inline void for_each_1d_mode(const EigenFamily& fam, int M,
                             const std::function<void(const ModeIndex&)>& fn) {
  if (fam.kind() == FamilyKind::periodic_1d) {
    fn(ModeIndex::periodic_constant());
    for (int n = 1; n <= M; ++n) {
      fn(ModeIndex::periodic_sine(n));
      fn(ModeIndex::periodic_cosine(n));
    }
  } else {
    for (int n = 1; n <= M; ++n) fn(ModeIndex::d1(n));
  }
}

inline double rate_1d(const EigenFamily& fam, int n) {
  if (fam.kind() == FamilyKind::periodic_1d)
    return pi2 * static_cast<double>(n) * n + 1.0;
  return pi2 * static_cast<double>(n) * n;
}

}  // namespace detail

inline int truncation_index_1d(const EigenFamily& fam, const CoefficientFamily& co,
                               double t, double tol) {
  return truncation_index([&](int k) { return detail::rate_1d(fam, k); },
                          [&](int M) { return co.tail_majorant(M); }, t, tol);
}

// Pointwise eigen-expansion sum_n c_n e^{-mu_n t} phi_n(x).
inline double trajectory_eval(const EigenFamily& fam, const CoefficientFamily& co,
                              double x, double t, double tol, int* modes_used = nullptr) {
  if (fam.dimension() != 1) throw config_error("1D evaluation on a 2D family");
  if (!fam.has_point_evaluation())
    throw config_error("custom eigenvalue lists have no eigenfunctions");
  const int M = truncation_index_1d(fam, co, t, tol);
  if (modes_used) *modes_used = M;
  CompensatedSum acc;
  detail::for_each_1d_mode(fam, M, [&](const ModeIndex& idx) {
    double c = co.coefficient(idx);
    if (c == 0.0) return;
    acc.add(c * std::exp(-fam.eigenvalue(idx) * t) * fam.eigenfunction_eval(idx, x));
  });
  return acc.value();
}

// 2D version. The product rule factors into per-axis sums; sparse explicit
// modes are summed directly.
inline double trajectory_eval(const EigenFamily& fam, const CoefficientFamily& co,
                              double x, double y, double t, double tol,
                              int* modes_x = nullptr, int* modes_y = nullptr) {
  if (fam.dimension() != 2) throw config_error("2D evaluation on a 1D family");
  if (co.rule() == CoefficientFamily::Rule::explicit_modes) {
    CompensatedSum acc;
    for (const auto& [idx, c] : co.mode_map()) {
      if (c == 0.0) continue;
      acc.add(c * std::exp(-fam.eigenvalue(idx) * t) * fam.eigenfunction_eval(idx, x, y));
    }
    if (modes_x) *modes_x = co.support_bound();
    if (modes_y) *modes_y = co.support_bound();
    return acc.value();
  }
  if (co.rule() != CoefficientFamily::Rule::product_inverse_square)
    throw config_error("2D trajectories need product or explicit coefficients");
  // |axis sum| <= zeta(2) < 1.7, so per-axis tolerance tol/4 bounds the
  // combined truncation error by tol.
  const double axis_tol = tol / 4.0;
  const double fy = fam.y_frequency();
  double value = 1.0;
  for (int axis = 0; axis < 2; ++axis) {
    const int M = truncation_index([&](int k) { return fam.axis_rate(axis, k); },
                                   [&](int M2) { return 1.0 / M2; }, t, axis_tol);
    if (axis == 0 && modes_x) *modes_x = M;
    if (axis == 1 && modes_y) *modes_y = M;
    CompensatedSum acc;
    for (int k = 1; k <= M; ++k) {
      double phi = axis == 0 ? std::sin(k * pi * x) : std::sin(fy * k * pi * y);
      acc.add(co.axis_coefficient(k) * std::exp(-fam.axis_rate(axis, k) * t) * phi);
    }
    value *= acc.value();
  }
  return value;
}

// Eigenmode sampled on a grid, flattened with the grid's convention.
inline Eigen::VectorXd mode_field(const EigenFamily& fam, const ModeIndex& idx,
                                  const SpaceGrid& grid) {
  if (fam.dimension() != grid.dimension)
    throw config_error("mode/grid dimension mismatch");
  if (grid.dimension == 1) {
    const auto& xs = grid.axis_nodes[0];
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i)
      v[static_cast<Eigen::Index>(i)] = fam.eigenfunction_eval(idx, xs[i]);
    return v;
  }
  const auto& xs = grid.axis_nodes[0];
  const auto& ys = grid.axis_nodes[1];
  const double fy = fam.y_frequency();
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size() * ys.size()));
  for (std::size_t ix = 0; ix < xs.size(); ++ix) {
    double sx = std::sin(idx.m * pi * xs[ix]);
    for (std::size_t iy = 0; iy < ys.size(); ++iy)
      v[static_cast<Eigen::Index>(ix * ys.size() + iy)] =
          sx * std::sin(fy * idx.n * pi * ys[iy]);
  }
  return v;
}

}  // namespace snapspan
