#pragma once
// Hausdorff/Widder feasibility: the binomial-transform table lambda_{k,k'}
// and the boundedness check of (k+1) sum lambda^2, in exact rational
// arithmetic whenever the moments are rational (the alternating sums lose
// about k bits in floating point).

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "common.hpp"

namespace snapspan {

using rational = boost::multiprecision::cpp_rational;

struct MomentSequence {
  std::vector<double> values;
  std::vector<rational> exact;  // parallel to values when is_rational
  bool is_rational = false;

  int size() const { return static_cast<int>(values.size()); }

  static MomentSequence from_doubles(std::vector<double> v) {
    for (double x : v)
      if (!std::isfinite(x)) throw config_error("moments must be finite");
    MomentSequence m;
    m.values = std::move(v);
    return m;
  }

  static MomentSequence from_rationals(std::vector<rational> v) {
    MomentSequence m;
    m.exact = std::move(v);
    m.is_rational = true;
    for (const auto& r : m.exact) m.values.push_back(static_cast<double>(r));
    return m;
  }

  static MomentSequence harmonic(int count) {  // m_n = 1/n
    if (count < 1) throw config_error("count must be positive");
    std::vector<rational> v;
    for (int n = 1; n <= count; ++n) v.emplace_back(1, n);
    return from_rationals(std::move(v));
  }

  // m_n = e^{-(n-1/2) tau} e^{p n^alpha} f_n with f the first unit sequence:
  // a single surviving moment m_1 = e^{-tau/2 + p}.
  static MomentSequence witness(double tau, double p, int count) {
    if (count < 1) throw config_error("count must be positive");
    std::vector<double> v(static_cast<std::size_t>(count), 0.0);
    v[0] = std::exp(-tau / 2.0 + p);
    return from_doubles(std::move(v));
  }

  // {"moments": [...]}
  static MomentSequence from_json(const nlohmann::json& j) {
    if (!j.contains("moments") || !j["moments"].is_array())
      throw config_error("moment JSON needs a \"moments\" array");
    return from_doubles(j["moments"].get<std::vector<double>>());
  }
};

struct WidderTable {
  int kmax = 0;
  bool exact = false;
  std::vector<std::vector<double>> rows;          // row k: lambda_{k,0..k}
  std::vector<std::vector<rational>> rows_exact;  // filled on the exact path
  std::vector<double> sum_scaled;                 // (k+1) sum_{k'} lambda^2
  std::vector<rational> sum_scaled_exact;
  double bound_estimate = 0.0;      // max_k (k+1) sum lambda^2
  bool uniform_bound_holds = true;  // no growth in the upper half of k

  nlohmann::json to_json() const {
    nlohmann::json j = {{"kmax", kmax},
                        {"exact", exact},
                        {"rows", rows},
                        {"sum_scaled", sum_scaled},
                        {"bound_estimate", bound_estimate},
                        {"uniform_bound_holds", uniform_bound_holds}};
    if (exact) {
      std::vector<std::string> s;
      for (const auto& r : sum_scaled_exact) {
        s.push_back(boost::multiprecision::numerator(r).str() + "/" +
                    boost::multiprecision::denominator(r).str());
      }
      j["sum_scaled_exact"] = s;
    }
    return j;
  }
};

// lambda_{k,k'} = C(k,k') sum_{l=0}^{k-k'} (-1)^{k-k'+l} C(k-k',l) m_{k-l+1};
// the Widder criterion tracks (k+1) sum_{k'} lambda_{k,k'}^2.
inline WidderTable widder_table(const MomentSequence& m, int kmax,
                                bool force_fp = false) {
  if (kmax < 0) throw config_error("kmax must be nonnegative");
  if (m.size() < kmax + 1) throw config_error("kmax exceeds the available moments");
  if (!m.is_rational && kmax > 12 && !force_fp)
    throw config_error(
        "floating-point moments above k = 12 need the force flag "
        "(alternating binomial sums lose about k bits)");

  using boost::multiprecision::cpp_int;
  std::vector<std::vector<cpp_int>> binom(static_cast<std::size_t>(kmax) + 1);
  for (int i = 0; i <= kmax; ++i) {
    binom[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(i) + 1);
    binom[static_cast<std::size_t>(i)][0] = 1;
    binom[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    for (int j = 1; j < i; ++j)
      binom[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          binom[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(j) - 1] +
          binom[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(j)];
  }

  WidderTable table;
  table.kmax = kmax;
  table.exact = m.is_rational;
  for (int k = 0; k <= kmax; ++k) {
    std::vector<double> row(static_cast<std::size_t>(k) + 1, 0.0);
    std::vector<rational> row_exact;
    if (table.exact) row_exact.resize(static_cast<std::size_t>(k) + 1);
    for (int kp = 0; kp <= k; ++kp) {
      const int d = k - kp;
      if (table.exact) {
        rational s = 0;
        for (int l = 0; l <= d; ++l) {
          rational term = rational(binom[static_cast<std::size_t>(d)]
                                        [static_cast<std::size_t>(l)]) *
                          m.exact[static_cast<std::size_t>(k - l)];
          if ((d + l) % 2) s -= term;
          else s += term;
        }
        rational lam = rational(binom[static_cast<std::size_t>(k)]
                                     [static_cast<std::size_t>(kp)]) * s;
        row_exact[static_cast<std::size_t>(kp)] = lam;
        row[static_cast<std::size_t>(kp)] = static_cast<double>(lam);
      } else {
        CompensatedSum s;
        for (int l = 0; l <= d; ++l) {
          const double term = static_cast<double>(binom[static_cast<std::size_t>(d)]
                                                       [static_cast<std::size_t>(l)]) *
                              m.values[static_cast<std::size_t>(k - l)];
          s.add((d + l) % 2 ? -term : term);
        }
        row[static_cast<std::size_t>(kp)] =
            static_cast<double>(binom[static_cast<std::size_t>(k)]
                                     [static_cast<std::size_t>(kp)]) * s.value();
      }
    }
    if (table.exact) {
      rational q = 0;
      for (const auto& lam : row_exact) q += lam * lam;
      q *= k + 1;
      table.sum_scaled_exact.push_back(q);
      table.sum_scaled.push_back(static_cast<double>(q));
      table.rows_exact.push_back(std::move(row_exact));
    } else {
      CompensatedSum q;
      for (double lam : row) q.add(lam * lam);
      table.sum_scaled.push_back((k + 1) * q.value());
    }
    table.rows.push_back(std::move(row));
  }

  double max_all = 0.0, max_lower = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    max_all = std::max(max_all, table.sum_scaled[static_cast<std::size_t>(k)]);
    if (k <= kmax / 2)
      max_lower = std::max(max_lower, table.sum_scaled[static_cast<std::size_t>(k)]);
  }
  table.bound_estimate = max_all;
  table.uniform_bound_holds = max_all <= max_lower * (1.0 + 1e-9);
  return table;
}

}  // namespace snapspan
