#pragma once
// Weighted-SVD subspace extraction and validation: threshold truncation,
// multi-matrix unions, projection errors, canonical angles, the sin-theta
// perturbation bound, multiplicity-rank diagnostics, and sensor least-squares
// reconstruction.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "grids.hpp"
#include "linalg.hpp"
#include "snapshot.hpp"

namespace snapspan {

inline constexpr double union_drop_tol = 1e-13;  // rank reveal in unions

struct Subspace {
  SpaceGrid grid;
  Eigen::MatrixXd basis;  // node_count x v, orthonormal w.r.t. the W inner product
  Eigen::VectorXd singular_values;  // retained sigma, descending
  double threshold = 0.0;

  int rank() const { return static_cast<int>(basis.cols()); }
};

namespace detail {

// Reproducibility convention: flip each column so its largest-magnitude
// entry is positive.
inline void sign_normalize(Eigen::MatrixXd& basis) {
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    Eigen::Index at = 0;
    basis.col(k).cwiseAbs().maxCoeff(&at);
    if (basis(at, k) < 0.0) basis.col(k) = -basis.col(k);
  }
}

}  // namespace detail

// Per matrix: SVD of W^{1/2} * values, keep sigma_i >= threshold * sigma_max
// of that matrix. One source uses its kept vectors directly; several sources
// concatenate kept vectors and re-orthonormalize rank-revealingly.
inline Subspace build_subspace(const std::vector<SnapshotMatrix>& matrices,
                               double threshold = 1e-12) {
  if (matrices.empty()) throw config_error("build_subspace needs at least one matrix");
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw config_error("threshold must lie in (0, 1]");
  const SpaceGrid& grid = matrices.front().grid;
  for (const auto& m : matrices)
    if (!grid.matches(m.grid)) throw config_error("snapshot matrices on different grids");

  std::vector<Eigen::MatrixXd> kept;
  Eigen::VectorXd kept_sv;
  for (const auto& m : matrices) {
    Eigen::MatrixXd scaled = grid.sqrt_weights.asDiagonal() * m.values;
    ThinSvd svd = svd_thin(std::move(scaled));
    if (svd.s.size() == 0 || !(svd.s[0] > 0.0))
      throw numeric_error("zero snapshot matrix has no subspace");
    int k = 0;
    while (k < svd.s.size() && svd.s[k] >= threshold * svd.s[0]) ++k;
    kept.push_back(svd.u.leftCols(k));
    if (matrices.size() == 1) kept_sv = svd.s.head(k);
  }

  Subspace out;
  out.grid = grid;
  out.threshold = threshold;
  Eigen::MatrixXd scaled_basis;
  if (kept.size() == 1) {
    scaled_basis = std::move(kept.front());
    out.singular_values = std::move(kept_sv);
  } else {
    Eigen::Index total = 0;
    for (const auto& b : kept) total += b.cols();
    Eigen::MatrixXd stack(grid.weights.size(), total);
    Eigen::Index at = 0;
    for (const auto& b : kept) {
      stack.middleCols(at, b.cols()) = b;
      at += b.cols();
    }
    ThinSvd svd = svd_thin(std::move(stack));
    int k = 0;
    while (k < svd.s.size() && svd.s[k] >= union_drop_tol * svd.s[0]) ++k;
    scaled_basis = svd.u.leftCols(k);
    out.singular_values = svd.s.head(k);
  }
  out.basis = grid.sqrt_weights.cwiseInverse().asDiagonal() * scaled_basis;
  detail::sign_normalize(out.basis);
  return out;
}

struct Projection {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd field;
};

inline Projection project(const Subspace& s, const Eigen::VectorXd& w) {
  if (w.size() != s.basis.rows()) throw config_error("field length does not match grid");
  Projection p;
  p.coefficients.noalias() = s.basis.transpose() * (s.grid.weights.asDiagonal() * w);
  p.field.noalias() = s.basis * p.coefficients;
  return p;
}

// Residual w - P_V w with one reorthogonalization pass, so tiny residuals
// are not swamped by the first pass's rounding.
inline Eigen::VectorXd projection_residual(const Subspace& s, const Eigen::VectorXd& w) {
  if (w.size() != s.basis.rows()) throw config_error("field length does not match grid");
  const auto wdiag = s.grid.weights.asDiagonal();
  Eigen::VectorXd r = w - s.basis * (s.basis.transpose() * (wdiag * w));
  r -= s.basis * (s.basis.transpose() * (wdiag * r));
  return r;
}

inline double relative_error(const Subspace& s, const Eigen::VectorXd& w) {
  const double denom = w_norm(s.grid, w);
  if (!(denom > 0.0)) throw config_error("relative error of the zero field");
  return w_norm(s.grid, projection_residual(s, w)) / denom;
}

// Real/imaginary parts of a complex mode measured together.
inline double relative_error_pair(const Subspace& s, const Eigen::VectorXd& re,
                                  const Eigen::VectorXd& im) {
  const double denom = std::hypot(w_norm(s.grid, re), w_norm(s.grid, im));
  if (!(denom > 0.0)) throw config_error("relative error of the zero field");
  return std::hypot(w_norm(s.grid, projection_residual(s, re)),
                    w_norm(s.grid, projection_residual(s, im))) /
         denom;
}

struct AngleReport {
  std::vector<double> cosines;  // descending
  std::vector<double> sines;    // ascending
  std::vector<double> angles;   // radians, ascending
  double max_angle = 0.0;
  double sin_frobenius = 0.0;

  nlohmann::json to_json() const {
    return {{"cosines", cosines},
            {"sines", sines},
            {"angles", angles},
            {"max_angle", max_angle},
            {"sin_frobenius", sin_frobenius}};
  }
};

// Principal angles from the singular values s_k of basis_a^T W basis_b:
// cos theta_k = s_k, sin theta_k = sqrt(1 - s_k^2) clamped to [0, 1].
inline AngleReport canonical_angles(const Subspace& a, const Subspace& b) {
  if (!a.grid.matches(b.grid)) throw config_error("subspaces on different grids");
  if (a.rank() != b.rank()) throw config_error("subspace dimension mismatch");
  Eigen::MatrixXd m = a.basis.transpose() * (a.grid.weights.asDiagonal() * b.basis);
  Eigen::VectorXd s = singular_values(std::move(m));
  AngleReport rep;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double c = std::clamp(s[i], 0.0, 1.0);
    const double sn = std::sqrt(std::max(0.0, 1.0 - c * c));
    rep.cosines.push_back(c);
    rep.sines.push_back(sn);
    rep.angles.push_back(std::asin(std::clamp(sn, 0.0, 1.0)));
  }
  rep.max_angle = rep.angles.empty() ? 0.0 : rep.angles.back();
  double q = 0.0;
  for (double sn : rep.sines) q += sn * sn;
  rep.sin_frobenius = std::sqrt(q);
  return rep;
}

struct WedinReport {
  int v = 0;
  double perturbation_frobenius = 0.0;  // ||E||_F in the weighted norm
  double gap = 0.0;                     // spectral separation l
  double bound = 0.0;                   // sqrt(2 v) / l * ||E||_F
  double measured_sin_frobenius = 0.0;
  bool vacuous = false;  // l <= ||E||_F: bound carries no information
  bool holds = false;

  nlohmann::json to_json() const {
    return {{"v", v},
            {"perturbation_frobenius", perturbation_frobenius},
            {"gap", gap},
            {"bound", bound},
            {"measured_sin_frobenius", measured_sin_frobenius},
            {"vacuous", vacuous},
            {"holds", holds}};
  }
};

// Clean-side factorization cached so one reference matrix can be compared
// against many perturbations without repeating its SVD.
struct WedinClean {
  SpaceGrid grid;
  Eigen::MatrixXd scaled;  // W^{1/2} * values
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
};

inline WedinClean wedin_prepare(const SnapshotMatrix& clean) {
  WedinClean w;
  w.grid = clean.grid;
  w.scaled = clean.grid.sqrt_weights.asDiagonal() * clean.values;
  ThinSvd svd = svd_thin(w.scaled);
  w.u = std::move(svd.u);
  w.s = std::move(svd.s);
  return w;
}

inline WedinReport wedin_report(const WedinClean& clean, const SnapshotMatrix& noisy,
                                int v) {
  if (!clean.grid.matches(noisy.grid)) throw config_error("grid mismatch");
  if (noisy.values.rows() != clean.scaled.rows() ||
      noisy.values.cols() != clean.scaled.cols())
    throw config_error("matrix shape mismatch");
  if (v < 1 || v > clean.s.size()) throw config_error("invalid subspace dimension");

  Eigen::MatrixXd scaled_noisy = noisy.grid.sqrt_weights.asDiagonal() * noisy.values;
  const double e_fro = (scaled_noisy - clean.scaled).norm();
  ThinSvd ns = svd_thin(std::move(scaled_noisy));

  // l = min( min_{i<=v} sigma_i, min_{i<=v, j>v} |sigma_i - sigma~_j| )
  double gap = clean.s[v - 1];
  for (int i = 0; i < v; ++i)
    for (Eigen::Index j = v; j < ns.s.size(); ++j)
      gap = std::min(gap, std::abs(clean.s[i] - ns.s[j]));

  WedinReport rep;
  rep.v = v;
  rep.perturbation_frobenius = e_fro;
  rep.gap = gap;
  rep.bound = gap > 0.0 ? std::sqrt(2.0 * v) / gap * e_fro
                        : std::numeric_limits<double>::infinity();
  rep.vacuous = !(gap > e_fro);

  Eigen::MatrixXd cross = clean.u.leftCols(v).transpose() * ns.u.leftCols(v);
  Eigen::VectorXd s = singular_values(std::move(cross));
  double q = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double c = std::clamp(s[i], 0.0, 1.0);
    q += std::max(0.0, 1.0 - c * c);
  }
  rep.measured_sin_frobenius = std::sqrt(q);
  rep.holds = rep.measured_sin_frobenius <= rep.bound;
  return rep;
}

inline WedinReport wedin_report(const SnapshotMatrix& clean, const SnapshotMatrix& noisy,
                                int v) {
  return wedin_report(wedin_prepare(clean), noisy, v);
}

struct MultiplicityRank {
  std::vector<double> sigma_min;
  std::vector<double> pinv_norm;  // 1/sigma_min; +inf marks rank deficiency
  bool rank_deficient = false;
  double fit_p = 0.0;      // log||B_n^+|| ~ p * n^alpha
  double fit_alpha = 0.0;

  nlohmann::json to_json() const {
    return {{"sigma_min", sigma_min},
            {"pinv_norm", pinv_norm},
            {"rank_deficient", rank_deficient},
            {"fit_p", fit_p},
            {"fit_alpha", fit_alpha}};
  }
};

// Smallest singular value of each per-eigenvalue coefficient block and a
// growth fit of log||B_n^+|| against p * n^alpha (log-log least squares over
// the growing entries; flat sequences report p = alpha = 0).
inline MultiplicityRank multiplicity_rank(const std::vector<Eigen::MatrixXd>& blocks) {
  if (blocks.empty()) throw config_error("multiplicity_rank needs at least one block");
  MultiplicityRank rep;
  for (const auto& b : blocks) {
    if (b.size() == 0 || b.rows() < b.cols())
      throw config_error("each block must be D x d_n with d_n <= D");
    Eigen::VectorXd s = singular_values(b);
    const double smin = s[s.size() - 1];
    rep.sigma_min.push_back(smin);
    rep.pinv_norm.push_back(smin > 0.0 ? 1.0 / smin
                                       : std::numeric_limits<double>::infinity());
    if (!(smin > 0.0)) rep.rank_deficient = true;
  }
  // Fit on entries with genuine growth; log(n^alpha) regression needs
  // positive responses.
  std::vector<double> xs, ys;
  for (std::size_t n = 0; n < rep.pinv_norm.size(); ++n) {
    const double y = std::log(rep.pinv_norm[n]);
    if (std::isfinite(y) && y > 1e-12) {
      xs.push_back(std::log(static_cast<double>(n + 1)));
      ys.push_back(std::log(y));
    }
  }
  if (xs.size() == 1) {
    rep.fit_alpha = 0.0;
    rep.fit_p = std::exp(ys[0]);
  } else if (xs.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double n = static_cast<double>(xs.size());
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) > 1e-300) {
      rep.fit_alpha = (n * sxy - sx * sy) / denom;
      rep.fit_p = std::exp((sy - rep.fit_alpha * sx) / n);
    }
  }
  return rep;
}

struct SensorSet {
  std::vector<double> positions;

  // count sensors at i/(count+1), i = 1..count: uniform, endpoints excluded
  static SensorSet uniform_interior(int count) {
    if (count < 1) throw config_error("sensor count must be positive");
    SensorSet s;
    for (int i = 1; i <= count; ++i)
      s.positions.push_back(static_cast<double>(i) / (count + 1));
    return s;
  }
};

struct ReconstructOptions {
  double rcond = 1e-6;  // relative singular value cutoff in the pseudoinverse
  bool allow_rank_deficient = false;
};

struct Reconstruction {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd field;
  double rms_residual = 0.0;
  int effective_rank = 0;
  bool rank_warning = false;  // fewer sensors than v, or truncated rank < v
};

// Least squares fit of subspace coefficients to point readings, basis values
// at sensors taken by piecewise-linear interpolation between grid nodes. The
// solve is an SVD pseudoinverse truncated at rcond; a truncated rank below v
// is an error unless the caller opted into rank-deficient fits.
inline Reconstruction reconstruct_from_sensors(const Subspace& s,
                                               const SensorSet& sensors,
                                               const Eigen::VectorXd& readings,
                                               const ReconstructOptions& opt = {}) {
  if (s.grid.dimension != 1)
    throw config_error("sensor reconstruction is one-dimensional");
  const auto& nodes = s.grid.axis_nodes[0];
  const int ns = static_cast<int>(sensors.positions.size());
  if (ns < 1) throw config_error("no sensors");
  if (readings.size() != ns) throw config_error("one reading per sensor required");
  for (int i = 0; i < ns; ++i) {
    const double z = sensors.positions[i];
    if (!(z >= nodes.front() && z <= nodes.back()))
      throw config_error("sensor outside the grid domain");
    if (!std::isfinite(readings[i])) throw config_error("non-finite reading");
  }
  const int v = s.rank();

  Eigen::MatrixXd design(ns, v);
  for (int i = 0; i < ns; ++i) {
    const double z = sensors.positions[i];
    auto it = std::upper_bound(nodes.begin(), nodes.end(), z);
    Eigen::Index hi = std::clamp<Eigen::Index>(it - nodes.begin(), 1,
                                               static_cast<Eigen::Index>(nodes.size()) - 1);
    Eigen::Index lo = hi - 1;
    const double frac = (z - nodes[lo]) / (nodes[hi] - nodes[lo]);
    design.row(i) = (1.0 - frac) * s.basis.row(lo) + frac * s.basis.row(hi);
  }

  ThinSvd svd = svd_thin(design, true);
  if (!(svd.s.size() > 0) || !(svd.s[0] > 0.0))
    throw numeric_error("singular fit: zero design matrix");
  int r = 0;
  while (r < svd.s.size() && svd.s[r] >= opt.rcond * svd.s[0]) ++r;
  if (r < v && !opt.allow_rank_deficient)
    throw numeric_error("singular fit: design matrix rank " + std::to_string(r) +
                        " below subspace dimension " + std::to_string(v));

  Eigen::VectorXd uy = svd.u.leftCols(r).transpose() * readings;
  Reconstruction rec;
  rec.coefficients = svd.vt.topRows(r).transpose() * (uy.array() / svd.s.head(r).array()).matrix();
  rec.field.noalias() = s.basis * rec.coefficients;
  rec.rms_residual =
      std::sqrt((design * rec.coefficients - readings).squaredNorm() / ns);
  rec.effective_rank = r;
  rec.rank_warning = ns < v || r < v;
  return rec;
}

// Basis CSV plus JSON sidecar; save then load round-trips exactly.
inline void save_subspace(const Subspace& s, const std::string& path) {
  std::string body;
  body.reserve(static_cast<std::size_t>(s.basis.size()) * 20);
  for (Eigen::Index i = 0; i < s.basis.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.basis.cols(); ++j) {
      if (j) body += ',';
      body += format_double(s.basis(i, j));
    }
    body += '\n';
  }
  {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open for writing: " + path);
    f << body;
    if (!f) throw io_error("write failed: " + path);
  }
  nlohmann::json meta = detail::grid_meta(s.grid);
  meta["singular_values"] =
      std::vector<double>(s.singular_values.data(),
                          s.singular_values.data() + s.singular_values.size());
  meta["threshold"] = s.threshold;
  meta["dim"] = s.rank();
  meta["sign_convention"] = "max-entry-positive";
  std::ofstream f(path + ".meta.json", std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path + ".meta.json");
  f << meta.dump(2) << '\n';
  if (!f) throw io_error("write failed: " + path + ".meta.json");
}

inline Subspace load_subspace(const std::string& path) {
  std::ifstream mf(path + ".meta.json", std::ios::binary);
  if (!mf) throw io_error("cannot open: " + path + ".meta.json");
  nlohmann::json meta;
  try {
    mf >> meta;
  } catch (const std::exception& e) {
    throw io_error("bad metadata JSON: " + std::string(e.what()));
  }
  Subspace out;
  int v = 0;
  try {
    out.grid = detail::grid_from_meta(meta);
    const auto sv = meta.at("singular_values").get<std::vector<double>>();
    out.singular_values =
        Eigen::Map<const Eigen::VectorXd>(sv.data(), static_cast<Eigen::Index>(sv.size()));
    out.threshold = meta.at("threshold").get<double>();
    v = meta.at("dim").get<int>();
  } catch (const error&) {
    throw;
  } catch (const std::exception& e) {
    throw io_error("bad metadata fields: " + std::string(e.what()));
  }

  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open: " + path);
  const Eigen::Index N = static_cast<Eigen::Index>(out.grid.node_count());
  out.basis.resize(N, v);
  std::string line;
  for (Eigen::Index i = 0; i < N; ++i) {
    if (!std::getline(f, line)) throw io_error("basis CSV has too few rows: " + path);
    const char* p = line.c_str();
    for (int j = 0; j < v; ++j) {
      char* end = nullptr;
      out.basis(i, j) = std::strtod(p, &end);
      if (end == p) throw io_error("CSV parse failure at row " + std::to_string(i));
      p = end;
      if (*p == ',') ++p;
      else if (j + 1 < v) throw io_error("basis CSV has too few columns");
    }
  }
  return out;
}

}  // namespace snapspan
