#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "snapspan/subspace.hpp"

using namespace snapspan;

namespace {

SnapshotMatrix dirichlet_snap(const std::vector<double>& coeffs, int nodes,
                              double t0, double t1, int count) {
  return assemble(EigenFamily::dirichlet_1d(), CoefficientFamily::explicit_list(coeffs),
                  SpaceGrid::uniform_1d(0.0, 1.0, nodes),
                  TimeGrid::logarithmic(t0, t1, count));
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("rank one matrix gives a one-dimensional subspace containing it") {
  const SnapshotMatrix m = dirichlet_snap({0.0, 1.0}, 101, 1e-2, 1.0, 20);
  const Subspace v = build_subspace({m}, 1e-12);
  REQUIRE(v.rank() == 1);
  for (int j = 0; j < m.values.cols(); ++j)
    REQUIRE(relative_error(v, m.values.col(j)) < 1e-12);
}

TEST_CASE("basis is W-orthonormal and idempotent under projection") {
  const SnapshotMatrix m = dirichlet_snap({1.0, -0.5, 0.25, 0.1}, 201, 1e-3, 1.0, 30);
  const Subspace v = build_subspace({m}, 1e-12);
  REQUIRE(v.rank() == 4);

  Eigen::MatrixXd gram =
      v.basis.transpose() * v.grid.weights.asDiagonal() * v.basis;
  gram -= Eigen::MatrixXd::Identity(v.rank(), v.rank());
  REQUIRE(gram.cwiseAbs().maxCoeff() < 1e-10);

  Eigen::VectorXd w(m.values.rows());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = std::cos(3.0 * i);
  const Projection p1 = project(v, w);
  const Projection p2 = project(v, p1.field);
  REQUIRE((p1.field - p2.field).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE((p1.coefficients - p2.coefficients).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sign convention: largest entry of every column is positive") {
  const SnapshotMatrix m = dirichlet_snap({1.0, -0.5, 0.25}, 101, 1e-3, 1.0, 25);
  const Subspace v = build_subspace({m}, 1e-12);
  for (int k = 0; k < v.rank(); ++k) {
    Eigen::Index at = 0;
    v.basis.col(k).cwiseAbs().maxCoeff(&at);
    REQUIRE(v.basis(at, k) > 0.0);
  }
}

TEST_CASE("threshold is relative to the largest singular value") {
  SnapshotMatrix m = dirichlet_snap({1.0, 0.5, 0.25}, 101, 1e-3, 1.0, 25);
  const Subspace v1 = build_subspace({m}, 1e-12);
  m.values *= 1e6;
  const Subspace v2 = build_subspace({m}, 1e-12);
  REQUIRE(v1.rank() == v2.rank());
  m.values *= 1e-12;
  const Subspace v3 = build_subspace({m}, 1e-12);
  REQUIRE(v1.rank() == v3.rank());
}

TEST_CASE("union growth is monotone and never hurts any snapshot") {
  const SnapshotMatrix a = dirichlet_snap({1.0, 0.0, 0.3}, 151, 1e-3, 1.0, 20);
  const SnapshotMatrix b = dirichlet_snap({0.0, 1.0, 0.0, 0.2}, 151, 1e-3, 1.0, 20);
  const Subspace va = build_subspace({a}, 1e-12);
  const Subspace vu = build_subspace({a, b}, 1e-12);
  REQUIRE(vu.rank() >= va.rank());
  for (int j = 0; j < a.values.cols(); ++j) {
    const double before = relative_error(va, a.values.col(j));
    const double after = relative_error(vu, a.values.col(j));
    REQUIRE(after <= before + 1e-12);
  }
}

TEST_CASE("every contributing snapshot column is captured within the threshold chain") {
  const double threshold = 1e-10;
  const SnapshotMatrix a = dirichlet_snap({1.0, -0.5, 0.25, 0.125}, 151, 1e-3, 1.0, 18);
  const SnapshotMatrix b = dirichlet_snap({0.2, 0.4, 0.0, 0.0, 0.1}, 151, 1e-3, 1.0, 18);
  // infinite coefficient tail: this source genuinely sheds directions
  const SnapshotMatrix c =
      assemble(EigenFamily::dirichlet_1d(),
               CoefficientFamily::alternating_inverse_square(),
               SpaceGrid::uniform_1d(0.0, 1.0, 151), TimeGrid::logarithmic(1e-3, 1.0, 18));
  const Subspace v = build_subspace({a, b, c}, threshold);
  REQUIRE(v.rank() < 3 * 18);
  const double cap = threshold * std::sqrt(3.0 * 18) * 10.0;
  for (const SnapshotMatrix* m : {&a, &b, &c})
    for (int j = 0; j < m->values.cols(); ++j)
      REQUIRE(relative_error(v, m->values.col(j)) <= cap);
}

TEST_CASE("degenerate inputs are rejected") {
  const SpaceGrid g = SpaceGrid::uniform_1d(0.0, 1.0, 11);
  SnapshotMatrix zero;
  zero.grid = g;
  zero.times = TimeGrid::uniform(0.1, 0.2, 3);
  zero.values = Eigen::MatrixXd::Zero(11, 3);
  REQUIRE_THROWS_AS(build_subspace({zero}, 1e-12), numeric_error);
  REQUIRE_THROWS_AS(build_subspace({}, 1e-12), config_error);

  const SnapshotMatrix a = dirichlet_snap({1.0}, 11, 1e-2, 1.0, 3);
  REQUIRE_THROWS_AS(build_subspace({a}, 0.0), config_error);
  REQUIRE_THROWS_AS(build_subspace({a}, 1.5), config_error);

  SnapshotMatrix other = dirichlet_snap({1.0}, 13, 1e-2, 1.0, 3);
  REQUIRE_THROWS_AS(build_subspace({a, other}, 1e-12), config_error);

  const Subspace v = build_subspace({a}, 1e-12);
  REQUIRE_THROWS_AS(relative_error(v, Eigen::VectorXd::Zero(11)), config_error);
  REQUIRE_THROWS_AS(relative_error(v, Eigen::VectorXd::Ones(13)), config_error);
}

TEST_CASE("complex pair error reduces to the real error when one part vanishes") {
  const SnapshotMatrix m = dirichlet_snap({1.0, 0.5}, 101, 1e-2, 1.0, 15);
  const Subspace v = build_subspace({m}, 1e-12);
  Eigen::VectorXd w(101);
  for (Eigen::Index i = 0; i < 101; ++i) w[i] = std::sin(0.7 * i) + 0.1;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(101);
  REQUIRE(relative_error_pair(v, w, zero) ==
          Catch::Approx(relative_error(v, w)).epsilon(1e-12));
  REQUIRE(relative_error_pair(v, zero, w) ==
          Catch::Approx(relative_error(v, w)).epsilon(1e-12));
}

TEST_CASE("canonical angles: identical, orthogonal, and the projector identity") {
  const SnapshotMatrix a1 = dirichlet_snap({1.0}, 101, 1e-2, 1.0, 12);
  const SnapshotMatrix b = dirichlet_snap({0.0, 0.0, 1.0}, 101, 1e-2, 1.0, 12);
  const Subspace v1 = build_subspace({a1}, 1e-12);
  const Subspace vb = build_subspace({b}, 1e-12);

  // span{sin(1)} vs span{sin(3)}: the single angle is right
  const AngleReport orth = canonical_angles(v1, vb);
  REQUIRE(orth.sines.size() == 1);
  REQUIRE(orth.sines[0] == Catch::Approx(1.0).margin(1e-10));

  const SnapshotMatrix a = dirichlet_snap({1.0, 0.3}, 101, 1e-2, 1.0, 12);
  const Subspace va = build_subspace({a}, 1e-12);
  REQUIRE(va.rank() == 2);

  const AngleReport same = canonical_angles(va, va);
  for (double s : same.sines) REQUIRE(s <= 1e-7);

  // angles are defined between equal-dimensional subspaces only
  REQUIRE_THROWS_AS(canonical_angles(va, vb), config_error);

  const SnapshotMatrix c = dirichlet_snap({0.4, 0.0, 1.0}, 101, 1e-2, 1.0, 12);
  const Subspace vc = build_subspace({c}, 1e-12);
  REQUIRE(vc.rank() == 2);
  const AngleReport mix = canonical_angles(va, vc);
  const auto w_half = va.grid.sqrt_weights.asDiagonal();
  Eigen::MatrixXd qa = w_half * va.basis, qc = w_half * vc.basis;
  const Eigen::MatrixXd pdiff =
      qa * qa.transpose() - qc * qc.transpose();
  REQUIRE(mix.sin_frobenius ==
          Catch::Approx(pdiff.norm() / std::sqrt(2.0)).margin(1e-8));
}

TEST_CASE("wedin bound holds for small perturbations and flags vacuous gaps") {
  const SnapshotMatrix clean = dirichlet_snap({1.0, -0.5, 0.25, -0.125, 0.06, -0.03},
                                              201, 1e-3, 1.0, 40);
  const WedinClean cache = wedin_prepare(clean);
  const int v = 3;

  SnapshotMatrix noisy = add_noise(clean, 1e-9, 17);
  const WedinReport small = wedin_report(cache, noisy, v);
  REQUIRE_FALSE(small.vacuous);
  REQUIRE(small.holds);
  REQUIRE(small.measured_sin_frobenius <= small.bound);
  REQUIRE(small.measured_sin_frobenius >= 0.0);

  // the convenience overload recomputes the same numbers
  const WedinReport direct = wedin_report(clean, noisy, v);
  REQUIRE(direct.bound == Catch::Approx(small.bound).epsilon(1e-12));
  REQUIRE(direct.measured_sin_frobenius ==
          Catch::Approx(small.measured_sin_frobenius).margin(1e-12));

  SnapshotMatrix big = add_noise(clean, 10.0, 18);
  const WedinReport huge = wedin_report(cache, big, v);
  REQUIRE(huge.vacuous);

  REQUIRE_THROWS_AS(wedin_report(cache, noisy, 0), config_error);
  REQUIRE_THROWS_AS(wedin_report(cache, noisy, 10000), config_error);
}

TEST_CASE("multiplicity rank diagnostics") {
  std::vector<Eigen::MatrixXd> ident(6, Eigen::MatrixXd::Identity(2, 2));
  const MultiplicityRank ok = multiplicity_rank(ident);
  REQUIRE_FALSE(ok.rank_deficient);
  REQUIRE(ok.sigma_min.front() == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(ok.fit_alpha == Catch::Approx(0.0).margin(1e-9));

  Eigen::MatrixXd repeated(2, 2);
  repeated << 1.0, 2.0, 1.0, 2.0;
  const MultiplicityRank bad = multiplicity_rank({repeated});
  REQUIRE(bad.rank_deficient);
  REQUIRE(bad.sigma_min.front() == 0.0);
  REQUIRE(std::isinf(bad.pinv_norm.front()));

  // log||B_n^+|| = 0.5 n^2 exactly, so the fit recovers p and alpha
  std::vector<Eigen::MatrixXd> grow;
  for (int n = 1; n <= 8; ++n) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(2, 2);
    b(1, 1) = std::exp(-0.5 * n * n);
    grow.push_back(b);
  }
  const MultiplicityRank g = multiplicity_rank(grow);
  REQUIRE(g.fit_alpha == Catch::Approx(2.0).epsilon(1e-6));
  REQUIRE(g.fit_p == Catch::Approx(0.5).epsilon(1e-6));

  REQUIRE_THROWS_AS(multiplicity_rank({}), config_error);
  REQUIRE_THROWS_AS(multiplicity_rank({Eigen::MatrixXd::Ones(1, 2)}), config_error);
}

TEST_CASE("sensor placement and consistent reconstruction") {
  const SensorSet s3 = SensorSet::uniform_interior(3);
  REQUIRE(s3.positions == std::vector<double>{0.25, 0.5, 0.75});

  const SnapshotMatrix m = dirichlet_snap({1.0, -0.5, 0.25}, 401, 1e-3, 1.0, 25);
  const Subspace v = build_subspace({m}, 1e-12);
  REQUIRE(v.rank() == 3);
  const SensorSet sensors = SensorSet::uniform_interior(12);

  // readings consistent with the discrete basis: piecewise-linear samples of
  // a field already inside the subspace
  Eigen::VectorXd target = v.basis * Eigen::Vector3d(0.8, -0.2, 0.05);
  Eigen::VectorXd readings(12);
  const auto& nodes = v.grid.axis_nodes[0];
  for (int i = 0; i < 12; ++i) {
    const double z = sensors.positions[i];
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), z);
    const std::size_t hi = static_cast<std::size_t>(it - nodes.begin());
    const std::size_t lo = hi - 1;
    const double f = (z - nodes[lo]) / (nodes[hi] - nodes[lo]);
    readings[i] = (1 - f) * target[static_cast<Eigen::Index>(lo)] +
                  f * target[static_cast<Eigen::Index>(hi)];
  }
  const Reconstruction rec = reconstruct_from_sensors(v, sensors, readings);
  REQUIRE_FALSE(rec.rank_warning);
  REQUIRE(rec.effective_rank == 3);
  REQUIRE((rec.field - target).cwiseAbs().maxCoeff() < 1e-10);
  REQUIRE(rec.rms_residual < 1e-12);
}

TEST_CASE("underdetermined and rank-deficient fits") {
  const SnapshotMatrix m = dirichlet_snap({1.0, -0.5, 0.25}, 101, 1e-3, 1.0, 25);
  const Subspace v = build_subspace({m}, 1e-12);

  // one sensor cannot pin down three coefficients
  const SensorSet one = SensorSet::uniform_interior(1);
  Eigen::VectorXd y1(1);
  y1 << 0.3;
  REQUIRE_THROWS_AS(reconstruct_from_sensors(v, one, y1), numeric_error);
  const Reconstruction forced = reconstruct_from_sensors(v, one, y1, {1e-6, true});
  REQUIRE(forced.rank_warning);
  REQUIRE(forced.effective_rank < v.rank());

  REQUIRE_THROWS_AS(
      reconstruct_from_sensors(v, SensorSet{{0.5, 1.5}}, Eigen::VectorXd::Zero(2)),
      config_error);
  REQUIRE_THROWS_AS(
      reconstruct_from_sensors(v, SensorSet::uniform_interior(4), Eigen::VectorXd::Zero(3)),
      config_error);
}

TEST_CASE("subspace save and load round-trips bit-exactly") {
  const SnapshotMatrix m = dirichlet_snap({1.0, -0.4, 0.1}, 101, 1e-3, 1.0, 20);
  const Subspace v = build_subspace({m}, 1e-12);
  const std::string path = tmp_path("snapspan_sub.csv");
  save_subspace(v, path);
  const Subspace back = load_subspace(path);
  REQUIRE(back.basis == v.basis);
  REQUIRE(back.singular_values == v.singular_values);
  REQUIRE(back.threshold == v.threshold);
  REQUIRE(back.grid.matches(v.grid));
  REQUIRE(back.grid.weights == v.grid.weights);
  std::remove(path.c_str());
  std::remove((path + ".meta.json").c_str());
  REQUIRE_THROWS_AS(load_subspace(tmp_path("snapspan_no_sub.csv")), io_error);
}
