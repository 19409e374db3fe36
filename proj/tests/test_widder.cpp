#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "json.hpp"
#include "snapspan/widder.hpp"

using namespace snapspan;

TEST_CASE("moment sequence constructors") {
  const MomentSequence h = MomentSequence::harmonic(5);
  REQUIRE(h.is_rational);
  REQUIRE(h.exact[0] == rational(1));
  REQUIRE(h.exact[2] == rational(1, 3));
  REQUIRE(h.values[2] == Catch::Approx(1.0 / 3.0).epsilon(1e-15));

  const MomentSequence w = MomentSequence::witness(1.0, 1.0, 4);
  REQUIRE_FALSE(w.is_rational);
  REQUIRE(w.values[0] == Catch::Approx(std::exp(0.5)).epsilon(1e-15));
  REQUIRE(w.values[1] == 0.0);
  REQUIRE(w.values[3] == 0.0);

  REQUIRE_THROWS_AS(MomentSequence::from_doubles({1.0, std::nan("")}), config_error);
  REQUIRE_THROWS_AS(MomentSequence::harmonic(0), config_error);

  const nlohmann::json j = {{"moments", {1.0, 0.5, 0.25}}};
  REQUIRE(MomentSequence::from_json(j).values[2] == 0.25);
}

TEST_CASE("first Widder row for harmonic moments") {
  const WidderTable t = widder_table(MomentSequence::harmonic(3), 2);
  REQUIRE(t.exact);
  // lambda_{1,0} = lambda_{1,1} = 1/2
  REQUIRE(t.rows_exact[1][0] == rational(1, 2));
  REQUIRE(t.rows_exact[1][1] == rational(1, 2));
  // lambda_{2,k'} = 1/3 for every k'
  for (int k = 0; k <= 2; ++k) REQUIRE(t.rows_exact[2][k] == rational(1, 3));
}

TEST_CASE("harmonic moments satisfy the scaled identity exactly") {
  const int kmax = 25;
  const WidderTable t = widder_table(MomentSequence::harmonic(kmax + 1), kmax);
  REQUIRE(t.exact);
  for (int k = 0; k <= kmax; ++k) REQUIRE(t.sum_scaled_exact[k] == rational(1));
  REQUIRE(t.uniform_bound_holds);

  // independent accumulation order over the exact rows
  for (int k = 0; k <= kmax; ++k) {
    rational s = 0;
    for (int i = static_cast<int>(t.rows_exact[k].size()) - 1; i >= 0; --i)
      s += t.rows_exact[k][i] * t.rows_exact[k][i];
    REQUIRE(s * (k + 1) == rational(1));
  }
}

TEST_CASE("witness moments blow up at the documented rate") {
  const double tau = 1.0, p = 1.0;
  const int kmax = 20;
  const WidderTable t =
      widder_table(MomentSequence::witness(tau, p, kmax + 1), kmax, true);
  REQUIRE_FALSE(t.exact);
  const double floor_rate = std::exp(-tau + 2 * p);
  for (int k = 0; k <= kmax; ++k)
    REQUIRE(t.sum_scaled[k] >= (k + 1) * floor_rate * (1 - 1e-12));
  REQUIRE_FALSE(t.uniform_bound_holds);
}

TEST_CASE("floating path refuses deep tables unless forced") {
  const MomentSequence m = MomentSequence::from_doubles(
      std::vector<double>(20, 0.5));
  REQUIRE_THROWS_AS(widder_table(m, 15), config_error);
  REQUIRE_NOTHROW(widder_table(m, 15, true));
  REQUIRE_NOTHROW(widder_table(m, 12));

  REQUIRE_THROWS_AS(widder_table(m, -1), config_error);
  REQUIRE_THROWS_AS(widder_table(m, 25), config_error);  // needs 26 moments
}

TEST_CASE("table JSON carries exact sums as fraction strings") {
  const WidderTable t = widder_table(MomentSequence::harmonic(3), 2);
  const nlohmann::json j = t.to_json();
  REQUIRE(j["exact"] == true);
  REQUIRE(j["rows"][1][0] == 0.5);
  REQUIRE(j["sum_scaled_exact"][2] == "1/1");
  REQUIRE(j["uniform_bound_holds"] == true);
}
