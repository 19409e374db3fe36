#pragma once
// Exponential-moment toolkit: Muntz distances d_n (infinite-product and
// extended-precision Gram forms), finite bi-orthogonal norms with the
// beta <= 1 divergence demonstration, the zeta_0 integral, and the
// eigenvalue-gap check.

#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "spectral.hpp"

namespace snapspan {

struct ExponentSequence {
  std::vector<double> mu;  // strictly increasing positive prefix

  // exact extension rule beyond the stored prefix
  enum class Rule { none, power_law, shifted_half } rule = Rule::none;
  double rule_m = 0.0, rule_beta = 0.0;  // mu_n = rule_m * n^rule_beta

  // asymptotic growth metadata: mu_n ~ growth_m * n^growth_beta (1 + o(n^-sigma))
  bool has_growth = false;
  double growth_m = 0.0, growth_beta = 0.0, growth_sigma = 0.0;
  // gap metadata: mu_{n+1} - mu_n >= gap_theta * n^{-gap_s}
  bool has_gap = false;
  double gap_theta = 0.0, gap_s = 0.0;

  int prefix_length() const { return static_cast<int>(mu.size()); }

  double at(int n) const {  // 1-based
    if (n < 1) throw config_error("exponent index starts at 1");
    if (n <= prefix_length()) return mu[static_cast<std::size_t>(n) - 1];
    switch (rule) {
      case Rule::power_law: return rule_m * std::pow(static_cast<double>(n), rule_beta);
      case Rule::shifted_half: return static_cast<double>(n) - 0.5;
      case Rule::none: break;
    }
    throw config_error("exponent index beyond the stored prefix");
  }

  ExponentSequence prefix(int N) const {
    if (N < 1 || N > prefix_length()) throw config_error("invalid prefix length");
    ExponentSequence e = *this;
    e.mu.assign(mu.begin(), mu.begin() + N);
    return e;
  }

  // sum_{j>J} 1/mu_j from the growth metadata, Euler-Maclaurin corrected:
  // (1/M) [ J^{1-b}/(b-1) - J^{-b}/2 + (b/12) J^{-b-1} ].
  double tail_sum_inverse(int J) const {
    double m = 0.0, b = 0.0;
    if (rule == Rule::power_law) {
      m = rule_m;
      b = rule_beta;
    } else if (has_growth) {
      m = growth_m;
      b = growth_beta;
    } else {
      throw config_error("no growth metadata for the tail sum");
    }
    if (!(b > 1.0)) throw config_error("inverse-exponent tail diverges for beta <= 1");
    const double j = static_cast<double>(J);
    return (std::pow(j, 1.0 - b) / (b - 1.0) - std::pow(j, -b) / 2.0 +
            b / 12.0 * std::pow(j, -b - 1.0)) /
           m;
  }

  static ExponentSequence from_values(std::vector<double> values) {
    if (values.empty()) throw config_error("empty exponent sequence");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0)) throw config_error("exponents must be positive");
      if (i > 0 && !(values[i] > values[i - 1]))
        throw config_error("exponents must be strictly increasing");
    }
    ExponentSequence e;
    e.mu = std::move(values);
    return e;
  }

  // {"eigenvalues": [...]} -- the custom-family format
  static ExponentSequence from_json(const nlohmann::json& j) {
    if (!j.contains("eigenvalues") || !j["eigenvalues"].is_array())
      throw config_error("exponent JSON needs an \"eigenvalues\" array");
    return from_values(j["eigenvalues"].get<std::vector<double>>());
  }

  static ExponentSequence power_law(double m, double beta, int count) {
    if (!(m > 0.0) || !(beta > 0.0)) throw config_error("power law needs m, beta > 0");
    if (count < 1) throw config_error("count must be positive");
    ExponentSequence e;
    for (int n = 1; n <= count; ++n)
      e.mu.push_back(m * std::pow(static_cast<double>(n), beta));
    e.rule = Rule::power_law;
    e.rule_m = m;
    e.rule_beta = beta;
    e.has_growth = true;
    e.growth_m = m;
    e.growth_beta = beta;
    return e;
  }

  static ExponentSequence shifted_integers(int count) {  // mu_n = n - 1/2
    if (count < 1) throw config_error("count must be positive");
    ExponentSequence e;
    for (int n = 1; n <= count; ++n) e.mu.push_back(n - 0.5);
    e.rule = Rule::shifted_half;
    e.has_growth = true;
    e.growth_m = 1.0;
    e.growth_beta = 1.0;
    return e;
  }

  // Distinct sorted eigenvalues of a family. Dirichlet keeps its exact
  // power-law rule; 2D families carry Weyl-rate growth metadata only.
  static ExponentSequence from_family(const EigenFamily& fam, int count) {
    if (count < 1) throw config_error("count must be positive");
    if (fam.kind() == FamilyKind::dirichlet_1d) return power_law(pi2, 2.0, count);
    double cutoff = 64.0;
    std::vector<SpectrumEntry> entries;
    for (int tries = 0; tries < 60; ++tries) {
      entries = fam.sorted_spectrum(cutoff);
      if (static_cast<int>(entries.size()) >= count) break;
      cutoff *= 4.0;
    }
    if (static_cast<int>(entries.size()) < count)
      throw config_error("could not enumerate enough eigenvalues");
    ExponentSequence e;
    for (int i = 0; i < count; ++i) e.mu.push_back(entries[static_cast<std::size_t>(i)].value);
    e.has_growth = true;
    switch (fam.kind()) {
      case FamilyKind::periodic_1d:
      case FamilyKind::fourth_order_2d: e.growth_beta = 2.0; break;
      case FamilyKind::rect_2d: e.growth_beta = 1.0; break;
      default: e.has_growth = false; break;
    }
    if (e.has_growth)
      e.growth_m = e.mu.back() / std::pow(static_cast<double>(count), e.growth_beta);
    return e;
  }
};

struct SeriesClassReport {
  bool convergent = false;
  bool used_metadata = false;
  double beta = 0.0;                 // metadata path: growth exponent
  double fitted_exponent = 0.0;      // numeric path: log-log slope of mu_n
  std::vector<double> partial_sums;  // quartile checkpoints of sum 1/mu_j
  double total_estimate = 0.0;       // partial + analytic tail when convergent

  nlohmann::json to_json() const {
    return {{"convergent", convergent},
            {"used_metadata", used_metadata},
            {"beta", beta},
            {"fitted_exponent", fitted_exponent},
            {"partial_sums", partial_sums},
            {"total_estimate", total_estimate}};
  }
};

// Muntz dichotomy by the growth exponent: sum 1/mu_n converges iff beta > 1.
// Without metadata a long prefix is fitted log-log instead.
inline SeriesClassReport series_class(const ExponentSequence& e) {
  SeriesClassReport rep;
  const int N = e.prefix_length();
  CompensatedSum acc;
  for (int n = 1; n <= N; ++n) {
    acc.add(1.0 / e.at(n));
    if (n == N / 4 || n == N / 2 || n == 3 * N / 4 || n == N)
      rep.partial_sums.push_back(acc.value());
  }
  double beta = 0.0;
  if (e.has_growth || e.rule == ExponentSequence::Rule::power_law) {
    rep.used_metadata = true;
    beta = e.rule == ExponentSequence::Rule::power_law ? e.rule_beta : e.growth_beta;
    rep.beta = beta;
  } else {
    if (N < 16)
      throw config_error("series_class needs growth metadata or at least 16 exponents");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int n = N / 2; n <= N; ++n) {
      const double x = std::log(static_cast<double>(n));
      const double y = std::log(e.at(n));
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++cnt;
    }
    beta = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    rep.fitted_exponent = beta;
  }
  rep.convergent = beta > 1.0;
  rep.total_estimate = acc.value();
  if (rep.convergent) {
    try {
      rep.total_estimate += e.tail_sum_inverse(N);
    } catch (const error&) {
      // no tail metadata: the partial sum stands as the estimate
    }
  }
  return rep;
}

enum class TailMode { none, analytic };

// d_n(inf) = sqrt(2/mu_n) |prod_{j!=n,j<=J}(1 - mu_n/mu_j)| / prod_{j<=J}(1 + mu_n/mu_j),
// all products as compensated log sums; the analytic tail multiplies by
// exp(-2 mu_n sum_{j>J} 1/mu_j) to stand in for the untruncated product.
inline double dn_infinity_product(const ExponentSequence& e, int n, long J,
                                  TailMode tail = TailMode::none) {
  if (n < 1) throw config_error("n starts at 1");
  if (J < n + 1) throw config_error("J must be at least n + 1");
  const double mun = e.at(n);
  CompensatedSum log_num, log_den;
  for (long j = 1; j <= J; ++j) {
    const double muj = e.at(static_cast<int>(j));
    const double r = mun / muj;
    log_den.add(std::log1p(r));
    if (j == n) continue;
    if (muj == mun) throw numeric_error("exponent collision");
    log_num.add(std::log(std::abs(1.0 - r)));
  }
  double lg = 0.5 * std::log(2.0 / mun) + log_num.value() - log_den.value();
  if (tail == TailMode::analytic)
    lg -= 2.0 * mun * e.tail_sum_inverse(static_cast<int>(J));
  return std::exp(lg);
}

namespace detail {

struct PrecisionGuard {
  unsigned old;
  explicit PrecisionGuard(unsigned digits)
      : old(boost::multiprecision::mpfr_float::default_precision()) {
    boost::multiprecision::mpfr_float::default_precision(digits);
  }
  ~PrecisionGuard() {
    boost::multiprecision::mpfr_float::default_precision(old);
  }
};

// Partial-pivot LU solve, in place; written out because the extended-
// precision type has no packaged dense solver here.
inline void mp_solve(std::vector<std::vector<boost::multiprecision::mpfr_float>>& a,
                     std::vector<boost::multiprecision::mpfr_float>& b) {
  using mp = boost::multiprecision::mpfr_float;
  const int n = static_cast<int>(a.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (abs(a[r][col]) > abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0)
      throw numeric_error("Gram matrix singular at the requested precision");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < n; ++r) {
      mp f = a[r][col] / a[col][col];
      if (f == 0) continue;
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    mp s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r][c] * b[c];
    b[r] = s / a[r][r];
  }
}

}  // namespace detail

// Exact-quadratic-form oracle: Gram G_ij = (1 - e^{-(mu_i+mu_j)T})/(mu_i+mu_j)
// (the exponential drops at T = inf); d_n^2 is the Schur complement of the
// n-th diagonal entry after eliminating every other exponent. Extended
// precision because the T = inf Gram is Cauchy-type with condition number
// exponential in N.
inline double dn_gram(const ExponentSequence& e, int n,
                      double horizon = std::numeric_limits<double>::infinity(),
                      int digits = 80) {
  using mp = boost::multiprecision::mpfr_float;
  const int N = e.prefix_length();
  if (n < 1 || n > N) throw config_error("n beyond the stored prefix");
  if (N > 30) throw config_error("Gram solve capped at 30 exponents");
  if (digits < 50) throw config_error("at least 50 decimal digits required");
  const bool infinite = std::isinf(horizon);
  if (!infinite && !(horizon > 0.0)) throw config_error("horizon must be positive");

  detail::PrecisionGuard guard(static_cast<unsigned>(digits));
  auto gram = [&](int i, int j) {
    mp s = mp(e.mu[static_cast<std::size_t>(i)]) + mp(e.mu[static_cast<std::size_t>(j)]);
    if (infinite) return mp(1) / s;
    return (mp(1) - exp(-s * mp(horizon))) / s;
  };

  std::vector<int> others;
  for (int i = 0; i < N; ++i)
    if (i != n - 1) others.push_back(i);
  const int m = static_cast<int>(others.size());
  mp d2 = gram(n - 1, n - 1);
  if (m > 0) {
    std::vector<std::vector<mp>> a(static_cast<std::size_t>(m),
                                   std::vector<mp>(static_cast<std::size_t>(m)));
    std::vector<mp> g(static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r) {
      g[static_cast<std::size_t>(r)] = gram(others[static_cast<std::size_t>(r)], n - 1);
      for (int c = 0; c < m; ++c)
        a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
            gram(others[static_cast<std::size_t>(r)], others[static_cast<std::size_t>(c)]);
    }
    std::vector<mp> x = g;
    detail::mp_solve(a, x);
    mp dot = 0;
    for (int r = 0; r < m; ++r)
      dot += g[static_cast<std::size_t>(r)] * x[static_cast<std::size_t>(r)];
    d2 -= dot;
  }
  if (d2 < 0) {
    if (-d2 < mp(1e-30) * gram(n - 1, n - 1))
      d2 = 0;
    else
      throw numeric_error("Gram matrix singular at the requested precision");
  }
  return sqrt(d2).convert_to<double>();
}

struct BiorthNorm {
  double value = 0.0;      // may overflow to inf; log_value stays finite
  double log_value = 0.0;
};

// ||phi~_n|| over the N-prefix: sqrt(2 mu_n) prod_{j!=n,j<=N}
// (1 + mu_n/mu_j)/|1 - mu_n/mu_j|, evaluated as a log sum.
inline BiorthNorm finite_biorth_norm(const ExponentSequence& e, int n, int N = -1) {
  if (N < 0) N = e.prefix_length();
  if (n < 1 || n > N) throw config_error("n beyond the requested prefix");
  const double mun = e.at(n);
  CompensatedSum lg;
  lg.add(0.5 * std::log(2.0 * mun));
  for (int j = 1; j <= N; ++j) {
    if (j == n) continue;
    const double muj = e.at(j);
    if (muj == mun) throw numeric_error("exponent collision");
    const double r = mun / muj;
    lg.add(std::log1p(r) - std::log(std::abs(1.0 - r)));
  }
  BiorthNorm out;
  out.log_value = lg.value();
  out.value = std::exp(out.log_value);
  return out;
}

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double fa, double fm, double fb, double whole,
                               double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) throw numeric_error("quadrature failed to converge");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 60);
}

}  // namespace detail

// zeta_{0,beta} = int_0^inf dy / (y^{1-1/beta} (1+y)). Substituting y = v^beta
// on [0,1] and y = w^{-beta/(beta-1)} on [1,inf) gives two smooth unit-interval
// integrals: beta int_0^1 dv/(1+v^beta) + beta' int_0^1 dw/(1+w^{beta'}),
// beta' = beta/(beta-1). Equals pi/sin(pi/beta).
inline double zeta0(double beta) {
  if (!(beta > 1.0)) throw config_error("zeta0 diverges for beta <= 1");
  const double bp = beta / (beta - 1.0);
  const double tol = 1e-10;
  const double part1 =
      detail::integrate([beta](double v) { return 1.0 / (1.0 + std::pow(v, beta)); },
                        0.0, 1.0, tol);
  const double part2 =
      detail::integrate([bp](double w) { return 1.0 / (1.0 + std::pow(w, bp)); }, 0.0,
                        1.0, tol);
  return beta * part1 + bp * part2;
}

struct GapReport {
  int eigenvalue_count = 0;
  double min_gap = 0.0;          // min mu_{k+1} - mu_k
  double min_gap_product = 0.0;  // min (mu_{k+1} - mu_k) mu_{k+1}
  double min_scaled_gap = 0.0;   // min_gap_product / pi^4
  double empirical_c = 0.0;      // sqrt(2) pi^2 min_scaled_gap
  double at_mu = 0.0;            // mu_{k+1} achieving the minimum product

  nlohmann::json to_json() const {
    return {{"eigenvalue_count", eigenvalue_count},
            {"min_gap", min_gap},
            {"min_gap_product", min_gap_product},
            {"min_scaled_gap", min_scaled_gap},
            {"empirical_c", empirical_c},
            {"at_mu", at_mu}};
  }
};

// Enumerates the spectrum up to the cutoff, asserts strict simplicity, and
// reports the worst scaled gap: gap * mu_{k+1} / pi^4, with the implied
// constant c = sqrt(2) pi^2 * min_scaled_gap.
inline GapReport gap_check(const EigenFamily& fam, double cutoff) {
  const auto entries = fam.sorted_spectrum(cutoff);
  if (static_cast<int>(entries.size()) < 10)
    throw config_error("cutoff admits fewer than 10 eigenvalues");
  GapReport rep;
  rep.eigenvalue_count = static_cast<int>(entries.size());
  rep.min_gap_product = std::numeric_limits<double>::infinity();
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (const auto& entry : entries)
    if (entry.multiplicity > 1)
      throw numeric_error("eigenvalue collision: multiplicity above 1");
  for (std::size_t k = 0; k + 1 < entries.size(); ++k) {
    const double lo = entries[k].value, hi = entries[k + 1].value;
    const double gap = hi - lo;
    if (gap <= 64.0 * std::numeric_limits<double>::epsilon() * hi)
      throw numeric_error("eigenvalue collision: gap at rounding level");
    rep.min_gap = std::min(rep.min_gap, gap);
    if (gap * hi < rep.min_gap_product) {
      rep.min_gap_product = gap * hi;
      rep.at_mu = hi;
    }
  }
  rep.min_scaled_gap = rep.min_gap_product / (pi2 * pi2);
  rep.empirical_c = std::numbers::sqrt2 * pi2 * rep.min_scaled_gap;
  return rep;
}

}  // namespace snapspan
