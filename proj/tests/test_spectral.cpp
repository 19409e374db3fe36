#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "json.hpp"
#include "snapspan/spectral.hpp"

using namespace snapspan;

TEST_CASE("eigenvalues match the closed forms") {
  const EigenFamily d = EigenFamily::dirichlet_1d();
  REQUIRE(d.eigenvalue(ModeIndex::d1(1)) == Catch::Approx(pi2).epsilon(1e-15));
  REQUIRE(d.eigenvalue(ModeIndex::d1(3)) == Catch::Approx(9 * pi2).epsilon(1e-15));

  const EigenFamily p = EigenFamily::periodic_1d();
  REQUIRE(p.eigenvalue(ModeIndex::periodic_constant()) == 1.0);
  REQUIRE(p.eigenvalue(ModeIndex::periodic_sine(2)) ==
          Catch::Approx(4 * pi2 + 1).epsilon(1e-15));
  REQUIRE(p.eigenvalue(ModeIndex::periodic_cosine(2)) ==
          p.eigenvalue(ModeIndex::periodic_sine(2)));

  const EigenFamily r = EigenFamily::rect_2d();
  REQUIRE(r.eigenvalue(ModeIndex::d2(1, 1)) ==
          Catch::Approx(pi2 * (1 + std::sqrt(2.0))).epsilon(1e-15));
  REQUIRE(r.eigenvalue(ModeIndex::d2(2, 1)) ==
          Catch::Approx(pi2 * (4 + std::sqrt(2.0))).epsilon(1e-15));

  const EigenFamily f = EigenFamily::fourth_order_2d();
  REQUIRE(f.eigenvalue(ModeIndex::d2(1, 1)) ==
          Catch::Approx(pi2 * (1 + std::sqrt(2.0))).epsilon(1e-15));
  REQUIRE(f.eigenvalue(ModeIndex::d2(2, 1)) ==
          Catch::Approx(pi2 * (16 + std::sqrt(2.0))).epsilon(1e-15));
  REQUIRE(f.axis_rate(1, 2) == Catch::Approx(std::sqrt(2.0) * pi2 * 16).epsilon(1e-15));
}

TEST_CASE("sorted spectra are ascending and match brute force") {
  const double cutoff = 500.0;
  for (const EigenFamily& fam :
       {EigenFamily::rect_2d(), EigenFamily::fourth_order_2d()}) {
    const auto spec = fam.sorted_spectrum(cutoff);
    std::vector<double> brute;
    for (int m = 1; m <= 64; ++m)
      for (int n = 1; n <= 64; ++n) {
        const double lam = fam.axis_rate(0, m) + fam.axis_rate(1, n);
        if (lam <= cutoff) brute.push_back(lam);
      }
    std::sort(brute.begin(), brute.end());
    std::vector<double> flat;
    for (const auto& e : spec) {
      REQUIRE(e.multiplicity == static_cast<int>(e.modes.size()));
      for (int k = 0; k < e.multiplicity; ++k) flat.push_back(e.value);
    }
    REQUIRE(flat.size() == brute.size());
    for (std::size_t i = 0; i < flat.size(); ++i)
      REQUIRE(flat[i] == Catch::Approx(brute[i]).epsilon(1e-13));
    REQUIRE(std::is_sorted(flat.begin(), flat.end()));
  }
}

TEST_CASE("periodic spectrum carries multiplicity two above the constant") {
  const auto spec = EigenFamily::periodic_1d().sorted_spectrum(100.0);
  REQUIRE(spec[0].value == 1.0);
  REQUIRE(spec[0].multiplicity == 1);
  REQUIRE(spec[1].value == Catch::Approx(pi2 + 1).epsilon(1e-15));
  REQUIRE(spec[1].multiplicity == 2);
}

TEST_CASE("dirichlet spectrum is simple") {
  // nudge the cutoff off the exact n = 10 boundary; the comparison there
  // hinges on one ulp of multiplication ordering
  const auto spec = EigenFamily::dirichlet_1d().sorted_spectrum(100.5 * pi2);
  REQUIRE(spec.size() == 10);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    REQUIRE(spec[i].multiplicity == 1);
    REQUIRE(spec[i].value ==
            Catch::Approx(pi2 * (i + 1) * (i + 1)).epsilon(1e-15));
  }
}

TEST_CASE("custom eigenvalue lists validate and evaluate") {
  const EigenFamily c = EigenFamily::custom_list({1.0, 2.0, 2.0, 5.0});
  REQUIRE(c.eigenvalue(ModeIndex::d1(2)) == 2.0);
  const auto spec = c.sorted_spectrum(10.0);
  REQUIRE(spec.size() == 3);
  REQUIRE(spec[1].multiplicity == 2);
  REQUIRE_FALSE(c.has_point_evaluation());
  REQUIRE_THROWS_AS(c.eigenfunction_eval(ModeIndex::d1(1), 0.5), config_error);
  REQUIRE_THROWS_AS(EigenFamily::custom_list({2.0, 1.0}), config_error);
  REQUIRE_THROWS_AS(EigenFamily::custom_list({-1.0, 1.0}), config_error);
  REQUIRE_THROWS_AS(EigenFamily::custom_list({}), config_error);

  const nlohmann::json j = {{"eigenvalues", {1.5, 2.5}}};
  REQUIRE(EigenFamily::custom_from_json(j).eigenvalue(ModeIndex::d1(1)) == 1.5);
}

TEST_CASE("coefficient rules") {
  const CoefficientFamily a = CoefficientFamily::alternating_inverse_square();
  REQUIRE(a.coefficient(ModeIndex::d1(1)) == -1.0);
  REQUIRE(a.coefficient(ModeIndex::d1(2)) == 0.25);
  REQUIRE(a.coefficient(ModeIndex::d1(3)) == Catch::Approx(-1.0 / 9).epsilon(1e-15));

  const CoefficientFamily p = CoefficientFamily::product_inverse_square();
  REQUIRE(p.coefficient(ModeIndex::d2(2, 3)) ==
          Catch::Approx(1.0 / 36).epsilon(1e-15));

  const CoefficientFamily r = CoefficientFamily::random_uniform(77, 5);
  REQUIRE(r.coefficient(ModeIndex::d1(3)) == r.coefficient(ModeIndex::d1(3)));
  REQUIRE(std::abs(r.coefficient(ModeIndex::d1(3))) < 1.0);
  REQUIRE(r.coefficient(ModeIndex::d1(6)) == 0.0);
  REQUIRE(r.finitely_supported());
  REQUIRE(r.support_bound() == 5);

  const CoefficientFamily e = CoefficientFamily::explicit_list({0.5, 0.0, 2.0});
  REQUIRE(e.coefficient(ModeIndex::d1(3)) == 2.0);
  REQUIRE(e.coefficient(ModeIndex::d1(4)) == 0.0);

  const CoefficientFamily bs = CoefficientFamily::branch_alternating(true, false);
  REQUIRE(bs.coefficient(ModeIndex::periodic_sine(1)) == -1.0);
  REQUIRE(bs.coefficient(ModeIndex::periodic_cosine(1)) == 0.0);
  REQUIRE(bs.coefficient(ModeIndex::periodic_constant()) == 0.0);
  const CoefficientFamily bc = CoefficientFamily::branch_alternating(false, true);
  REQUIRE(bc.coefficient(ModeIndex::periodic_cosine(2)) == 0.25);
  REQUIRE(bc.coefficient(ModeIndex::periodic_sine(2)) == 0.0);
  REQUIRE(bc.coefficient(ModeIndex::periodic_constant()) == 1.0);
}

TEST_CASE("tail majorants bound the dropped mass") {
  const CoefficientFamily a = CoefficientFamily::alternating_inverse_square();
  for (int M : {1, 10, 100}) {
    double exact = 0.0;
    for (int n = M + 1; n <= 2000000; ++n) exact += 1.0 / (static_cast<double>(n) * n);
    REQUIRE(a.tail_majorant(M) >= exact);
    REQUIRE(a.tail_majorant(M) <= 2.0 * exact);
  }
  const CoefficientFamily r = CoefficientFamily::random_uniform(1, 10);
  REQUIRE(r.tail_majorant(10) == 0.0);
  REQUIRE(r.tail_majorant(3) == 7.0);
  const CoefficientFamily e = CoefficientFamily::explicit_list({1.0, 2.0, 3.0});
  REQUIRE(e.tail_majorant(1) == 5.0);
  REQUIRE(e.tail_majorant(3) == 0.0);
}

TEST_CASE("truncation index balances tail and decay") {
  const EigenFamily fam = EigenFamily::dirichlet_1d();
  const CoefficientFamily co = CoefficientFamily::alternating_inverse_square();
  const int m_small = truncation_index_1d(fam, co, 0.1, 1e-12);
  REQUIRE(m_small <= 6);
  // smallest M with (1/M) exp(-pi^2 (M+1)^2 t) <= tol, recomputed offline;
  // the true dropped remainder there is 2.3e-14, safely under the bound
  const int m_big = truncation_index_1d(fam, co, 1e-6, 1e-12);
  REQUIRE(m_big == 1436);
  // infinite support with a zero tolerance can never terminate
  REQUIRE_THROWS_AS(truncation_index_1d(fam, co, 1e-6, 0.0), numeric_error);
  // finite support reaches an exactly zero tail even at tolerance zero
  const CoefficientFamily r = CoefficientFamily::random_uniform(1, 12);
  REQUIRE(truncation_index_1d(fam, r, 0.0, 0.0) == 12);
}

TEST_CASE("trajectory evaluation agrees with a direct mode sum") {
  const EigenFamily fam = EigenFamily::dirichlet_1d();
  const CoefficientFamily co = CoefficientFamily::explicit_list({1.0, -0.5, 0.25});
  const double x = 0.3, t = 0.05;
  double direct = 0.0;
  for (int n = 1; n <= 3; ++n)
    direct += co.coefficient(ModeIndex::d1(n)) *
              std::exp(-fam.eigenvalue(ModeIndex::d1(n)) * t) *
              std::sin(n * pi * x);
  REQUIRE(trajectory_eval(fam, co, x, t, 1e-14) ==
          Catch::Approx(direct).margin(1e-14));
}

TEST_CASE("2D product trajectory factors into axis sums") {
  const EigenFamily fam = EigenFamily::rect_2d();
  const CoefficientFamily co = CoefficientFamily::product_inverse_square();
  const double x = 0.4, y = 0.3, t = 0.02;
  const double via_product = trajectory_eval(fam, co, x, y, t, 1e-12);
  double direct = 0.0;
  for (int m = 1; m <= 40; ++m)
    for (int n = 1; n <= 40; ++n)
      direct += co.coefficient(ModeIndex::d2(m, n)) *
                std::exp(-fam.eigenvalue(ModeIndex::d2(m, n)) * t) *
                fam.eigenfunction_eval(ModeIndex::d2(m, n), x, y);
  REQUIRE(via_product == Catch::Approx(direct).margin(1e-11));
}

TEST_CASE("explicit 2D modes evaluate exactly") {
  const EigenFamily fam = EigenFamily::fourth_order_2d();
  const CoefficientFamily co = CoefficientFamily::explicit_modes(
      {{ModeIndex::d2(2, 3), 1.5}, {ModeIndex::d2(1, 1), -0.5}});
  const double x = 0.7, y = 0.2, t = 0.01;
  const double expect =
      1.5 * std::exp(-fam.eigenvalue(ModeIndex::d2(2, 3)) * t) *
          fam.eigenfunction_eval(ModeIndex::d2(2, 3), x, y) -
      0.5 * std::exp(-fam.eigenvalue(ModeIndex::d2(1, 1)) * t) *
          fam.eigenfunction_eval(ModeIndex::d2(1, 1), x, y);
  REQUIRE(trajectory_eval(fam, co, x, y, t, 1e-14) ==
          Catch::Approx(expect).margin(1e-15));
}

TEST_CASE("mode fields sample eigenfunctions on the grid") {
  const EigenFamily fam = EigenFamily::dirichlet_1d();
  const SpaceGrid g = SpaceGrid::uniform_1d(0.0, 1.0, 101);
  const Eigen::VectorXd f = mode_field(fam, ModeIndex::d1(2), g);
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double x = static_cast<double>(i) / (f.size() - 1);
    REQUIRE(f[i] == Catch::Approx(std::sin(2 * pi * x)).margin(1e-14));
  }

  const EigenFamily r2 = EigenFamily::rect_2d();
  const SpaceGrid g2 = SpaceGrid::uniform_2d(1.0, 21, r2.domain_length_y(), 11);
  const Eigen::VectorXd f2 = mode_field(r2, ModeIndex::d2(2, 3), g2);
  const double x = g2.axis_nodes[0][7], y = g2.axis_nodes[1][4];
  REQUIRE(f2[7 * 11 + 4] ==
          Catch::Approx(r2.eigenfunction_eval(ModeIndex::d2(2, 3), x, y)).margin(1e-14));
}

TEST_CASE("mode index labels and validation") {
  REQUIRE(ModeIndex::d1(3).label() == "n=3");
  REQUIRE(ModeIndex::d2(2, 3).label() == "m=2,n=3");
  REQUIRE(ModeIndex::periodic_sine(2).label() == "sin n=2");
  REQUIRE(ModeIndex::periodic_cosine(1).label() == "cos n=1");
  REQUIRE(ModeIndex::periodic_constant().label() == "const");

  // index validation fires where a family consumes the index
  const EigenFamily fam = EigenFamily::dirichlet_1d();
  REQUIRE_THROWS_AS(fam.eigenvalue(ModeIndex::d1(0)), config_error);
  REQUIRE_THROWS_AS(fam.eigenvalue(ModeIndex::d2(1, 1)), config_error);
  REQUIRE_THROWS_AS(fam.eigenvalue(ModeIndex::periodic_sine(1)), config_error);
  REQUIRE_THROWS_AS(EigenFamily::rect_2d().eigenvalue(ModeIndex::d2(1, 0)),
                    config_error);
  REQUIRE_THROWS_AS(EigenFamily::periodic_1d().eigenvalue(ModeIndex::periodic_sine(0)),
                    config_error);
}
