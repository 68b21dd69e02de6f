#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "squintlab/baselines.hpp"
#include "support/oracles.hpp"

using namespace squintlab;

namespace {
constexpr double kFc = 100e9;
const double kLambda = kSpeedOfLight / kFc;
const UserGeometry kRefUser{5.0, std::numbers::pi / 3, std::numbers::pi / 6};

LinkScenario small_scenario(int subcarriers, double bandwidth, int n_tiles = 4,
                            int n_elements = 4) {
  LinkScenario s;
  s.layout = nominal_layout(1, 1, n_tiles, n_elements, kLambda);
  s.band = Waveband{kFc, bandwidth, subcarriers, subcarriers / 8};
  s.users = {kRefUser};
  Rng rng(42);
  s.path_gains = draw_path_gains(rng, subcarriers, 1);
  s.noise_power = 0.1;
  return s;
}

}  // namespace

TEST_CASE("branch partition") {
  CHECK(branch_of_tile(8, 8) == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
  CHECK(branch_of_tile(8, 4) == std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3});
  CHECK(branch_of_tile(6, 4) == std::vector<int>{0, 0, 1, 2, 2, 3});
  CHECK(branch_of_tile(3, 8) == std::vector<int>{0, 1, 2});  // caps at the tile count
  CHECK_THROWS_AS(branch_of_tile(0, 4), std::invalid_argument);
}

TEST_CASE("ttd delays") {
  const ArrayLayout layout = nominal_layout(1, 1, 16, 4, kLambda);

  SUBCASE("nonnegative with a zero reference") {
    const std::vector<double> delays = ttd_delays(layout, 0, kRefUser, 8);
    REQUIRE(delays.size() == 8);
    double smallest = delays[0];
    for (const double d : delays) {
      CHECK(d >= 0.0);
      smallest = std::min(smallest, d);
    }
    CHECK(smallest == 0.0);
  }

  SUBCASE("mirror-symmetric branch centroids yield zero delays") {
    // Two tiles mirrored in y, user on the z-symmetric boresight: equal means.
    ArrayLayout mirror = nominal_layout(1, 1, 1, 1, kLambda);
    mirror.tile_translations[0] = {Vec2(-kLambda, 0.0), Vec2(kLambda, 0.0)};
    const UserGeometry boresight{5.0, 0.0, 0.0};
    const std::vector<double> delays = ttd_delays(mirror, 0, boresight, 2);
    CHECK(delays[0] == doctest::Approx(0.0).epsilon(1e-18));
    CHECK(delays[1] == doctest::Approx(0.0).epsilon(1e-18));
  }
}

TEST_CASE("per-element delays cancel squint exactly") {
  // One branch per tile with single-element tiles: residual phases align for
  // every subcarrier, so J_l = N_sub across the band.
  const ArrayLayout layout = nominal_layout(1, 1, 9, 1, kLambda);
  const Waveband band{kFc, 30e9, 16, 2};
  const std::vector<double> tile_delays =
      per_tile_delays(layout, 0, kRefUser, TtdConfig{.branches_per_panel = 9});
  for (int l = 1; l <= band.subcarriers; ++l) {
    CHECK(per_subcarrier_gain_delayed(layout, band, l, kRefUser, 0, tile_delays) ==
          doctest::Approx(9.0).epsilon(1e-9));
  }
}

TEST_CASE("eight TTD branches never trail the fixed layout on the worst subcarrier") {
  const ArrayLayout layout = nominal_layout(1, 1, 16, 4, kLambda);  // N_sub = 64
  const Waveband band{kFc, 20e9, 32, 4};
  const std::vector<double> tile_delays = per_tile_delays(layout, 0, kRefUser, TtdConfig{});
  const std::vector<double> fpa = per_subcarrier_gains(layout, band, kRefUser, 0);
  const std::vector<double> ttd = per_subcarrier_gains(layout, band, kRefUser, 0, &tile_delays);
  const double fpa_min = *std::min_element(fpa.begin(), fpa.end());
  const double ttd_min = *std::min_element(ttd.begin(), ttd.end());
  CHECK(ttd_min >= fpa_min);
}

TEST_CASE("doubling the branch count never hurts the worst subcarrier") {
  const ArrayLayout layout = nominal_layout(1, 1, 16, 4, kLambda);
  const Waveband band{kFc, 20e9, 32, 4};
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const UserGeometry user = testing::random_user(rng);
    double previous = -1.0;
    for (const int branches : {1, 2, 4, 8, 16}) {
      const std::vector<double> delays =
          per_tile_delays(layout, 0, user, TtdConfig{.branches_per_panel = branches});
      const std::vector<double> gains = per_subcarrier_gains(layout, band, user, 0, &delays);
      const double worst = *std::min_element(gains.begin(), gains.end());
      CHECK(worst >= previous - 1e-9);
      previous = worst;
    }
  }
}

TEST_CASE("zero delays reduce the TTD pipeline to the FPA pipeline") {
  LinkScenario scenario = small_scenario(8, 10e9);
  // Single branch: every tile shares one delay, and the reference subtraction
  // makes it exactly zero.
  const SchemeResult fpa = fpa_pipeline(scenario);
  const SchemeResult ttd = ttd_pipeline(scenario, TtdConfig{.branches_per_panel = 1});
  CHECK(fpa.report.total == doctest::Approx(ttd.report.total).epsilon(1e-12));
  for (std::size_t l = 0; l < fpa.precoders.size(); ++l) {
    CHECK((fpa.precoders[l] - ttd.precoders[l]).norm() == 0.0);
  }
}

TEST_CASE("vanishing bandwidth collapses all schemes") {
  LinkScenario scenario = small_scenario(4, 0.0);
  SCAConfig sca;
  sca.inner_budget = 5;
  sca.outer_sweeps = 1;

  const SchemeResult fpa = fpa_pipeline(scenario);
  const SchemeResult ttd = ttd_pipeline(scenario);
  const SchemeResult hsc = hsc_pipeline(scenario, sca);

  CHECK(fpa.report.total == doctest::Approx(ttd.report.total).epsilon(1e-12));
  CHECK(fpa.report.total == doctest::Approx(hsc.report.total).epsilon(1e-12));
}

TEST_CASE("TTD per-subcarrier gain matches FPA at the center frequency") {
  const ArrayLayout layout = nominal_layout(1, 1, 16, 4, kLambda);
  const Waveband band{kFc, 20e9, 9, 1};  // subcarrier 5 at f_c
  const std::vector<double> delays = per_tile_delays(layout, 0, kRefUser, TtdConfig{});
  CHECK(per_subcarrier_gain_delayed(layout, band, 5, kRefUser, 0, delays) ==
        doctest::Approx(per_subcarrier_gain(layout, band, 5, kRefUser, 0)).epsilon(1e-12));
}

TEST_CASE("pipelines emit consistent artifacts") {
  LinkScenario scenario = small_scenario(8, 20e9);
  const SchemeResult result = ttd_pipeline(scenario);
  CHECK(static_cast<int>(result.analog.size()) == scenario.band.subcarriers);
  CHECK(validate_layout(result.layout).ok());
  // TTD rotations keep every analog entry unit modulus.
  for (const AnalogPrecoder& a : result.analog) {
    for (const CVec& col : a.columns) {
      for (int i = 0; i < col.size(); ++i) {
        CHECK(std::abs(col[i]) == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}
