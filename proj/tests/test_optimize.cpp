#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "squintlab/layout_optimizer.hpp"
#include "support/oracles.hpp"

using namespace squintlab;

namespace {
constexpr double kFc = 100e9;
const double kLambda = kSpeedOfLight / kFc;
const UserGeometry kRefUser{5.0, std::numbers::pi / 3, std::numbers::pi / 6};

SCAConfig quick_config() {
  SCAConfig cfg;
  cfg.inner_budget = 8;
  cfg.outer_sweeps = 2;
  cfg.step_tolerance = 1e-5;
  return cfg;
}

double min_band_gain(const ArrayLayout& layout, const Waveband& band, const UserGeometry& user,
                     int panel) {
  const std::vector<double> gains = per_subcarrier_gains(layout, band, user, panel);
  return *std::min_element(gains.begin(), gains.end());
}

}  // namespace

TEST_CASE("zero bandwidth leaves the layout unchanged") {
  const ArrayLayout layout = nominal_layout(1, 1, 1, 4, kLambda);
  const Waveband band{kFc, 0.0, 4, 0};
  const Assignment assignment{{0}};
  const OptimizeResult result =
      optimize_layout(layout, band, {kRefUser}, assignment, quick_config());
  CHECK((result.layout.tile_translations[0][0] - layout.tile_translations[0][0]).norm() <= 1e-12);
  for (const TraceRow& row : result.trace) {
    CHECK(row.min_gain == doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("invalid inputs are rejected") {
  const ArrayLayout layout = nominal_layout(1, 1, 4, 4, kLambda);
  const Waveband band{kFc, 20e9, 8, 1};
  SUBCASE("assignment size mismatch") {
    CHECK_THROWS_AS(optimize_layout(layout, band, {kRefUser}, Assignment{{0, 1}}, quick_config()),
                    std::invalid_argument);
  }
  SUBCASE("infeasible initial layout") {
    ArrayLayout broken = layout;
    broken.tile_translations[0][1] = broken.tile_translations[0][0];
    CHECK_THROWS_AS(optimize_layout(broken, band, {kRefUser}, Assignment{{0}}, quick_config()),
                    std::invalid_argument);
  }
  SUBCASE("negative tolerance") {
    SCAConfig cfg = quick_config();
    cfg.subproblem_tol = 0.0;
    CHECK_THROWS_AS(optimize_layout(layout, band, {kRefUser}, Assignment{{0}}, cfg),
                    std::invalid_argument);
  }
}

TEST_CASE("single-user run: monotone, feasible, deterministic") {
  const ArrayLayout layout = nominal_layout(1, 1, 4, 4, kLambda);
  const Waveband band{kFc, 20e9, 16, 2};
  const Assignment assignment{{0}};
  const SCAConfig cfg = quick_config();

  const OptimizeResult result = optimize_layout(layout, band, {kRefUser}, assignment, cfg);

  SUBCASE("the full-band minimum never decreases along the trace") {
    double previous = min_band_gain(layout, band, kRefUser, 0);
    for (const TraceRow& row : result.trace) {
      CHECK(row.min_gain >= previous - 1e-12);
      previous = row.min_gain;
    }
    CHECK(min_band_gain(result.layout, band, kRefUser, 0) >= previous - 1e-9);
  }

  SUBCASE("optimization improves the worst subcarrier") {
    CHECK(min_band_gain(result.layout, band, kRefUser, 0) >
          min_band_gain(layout, band, kRefUser, 0));
  }

  SUBCASE("the final layout validates") { CHECK(validate_layout(result.layout).ok()); }

  SUBCASE("trace rows carry consistent metadata") {
    for (const TraceRow& row : result.trace) {
      CHECK(row.user == 0);
      CHECK(row.panel == 0);
      CHECK(row.tile >= 0);
      CHECK(row.tile < 4);
      CHECK(row.inner >= 1);
      CHECK(row.inner <= cfg.inner_budget);
      CHECK(row.sum_gain >= row.min_gain);
    }
  }

  SUBCASE("bit-identical rerun") {
    const OptimizeResult again = optimize_layout(layout, band, {kRefUser}, assignment, cfg);
    REQUIRE(again.trace.size() == result.trace.size());
    for (std::size_t i = 0; i < result.trace.size(); ++i) {
      CHECK(again.trace[i].min_gain == result.trace[i].min_gain);
      CHECK(again.trace[i].sum_gain == result.trace[i].sum_gain);
      CHECK(again.trace[i].translation == result.trace[i].translation);
      CHECK(again.trace[i].accepted == result.trace[i].accepted);
    }
    for (int t = 0; t < 4; ++t) {
      CHECK(again.layout.tile_translations[0][t] == result.layout.tile_translations[0][t]);
    }
  }
}

TEST_CASE("zero inner budget performs no steps") {
  const ArrayLayout layout = nominal_layout(1, 1, 4, 4, kLambda);
  const Waveband band{kFc, 20e9, 8, 1};
  SCAConfig cfg = quick_config();
  cfg.inner_budget = 0;
  const OptimizeResult result = optimize_layout(layout, band, {kRefUser}, Assignment{{0}}, cfg);
  CHECK(result.trace.empty());
  for (int t = 0; t < 4; ++t) {
    CHECK(result.layout.tile_translations[0][t] == layout.tile_translations[0][t]);
  }
}

TEST_CASE("spacing constraints hold at every accepted step") {
  const ArrayLayout layout = nominal_layout(1, 1, 9, 1, kLambda);
  const Waveband band{kFc, 30e9, 12, 1};
  SCAConfig cfg = quick_config();
  cfg.outer_sweeps = 3;
  const OptimizeResult result = optimize_layout(layout, band, {kRefUser}, Assignment{{0}}, cfg);
  CHECK(validate_layout(result.layout).ok());
  const auto& tiles = result.layout.tile_translations[0];
  for (std::size_t a = 0; a < tiles.size(); ++a) {
    for (std::size_t b = a + 1; b < tiles.size(); ++b) {
      CHECK((tiles[a] - tiles[b]).norm() >= result.layout.d_min - 1e-12);
    }
  }
}

TEST_CASE("two point tiles approach the joint-grid optimum") {
  // Two single-element tiles and four subcarriers: the full problem is a
  // 4-D grid search, so the block-coordinate result can be checked globally.
  ArrayLayout layout = nominal_layout(1, 1, 1, 1, kLambda);
  const double pitch = tile_pitch(1, kLambda);
  layout.panels[0].side = 2.0 * std::sqrt(2.0) * kLambda;
  layout.d_min = pitch;
  layout.tile_translations[0] = {Vec2(-pitch / 2, 0.0), Vec2(pitch / 2, 0.0)};
  REQUIRE(validate_layout(layout).ok());

  const Waveband band{kFc, 20e9, 4, 0};
  SCAConfig cfg;
  cfg.inner_budget = 20;
  cfg.outer_sweeps = 4;
  cfg.step_tolerance = 1e-6;

  const OptimizeResult result = optimize_layout(layout, band, {kRefUser}, Assignment{{0}}, cfg);
  const double achieved = min_band_gain(result.layout, band, kRefUser, 0);

  // Exhaustive joint grid over both translations (feasibility-checked).
  const Box2 box = feasible_translation_box(layout, 0, 0);
  const int grid = 25;
  double best = -1.0;
  const auto coord = [&](int i) {
    return box.lo.x() + (box.hi.x() - box.lo.x()) * i / (grid - 1);
  };
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      for (int c = 0; c < grid; ++c) {
        for (int d = 0; d < grid; ++d) {
          const Vec2 t0(coord(a), coord(b));
          const Vec2 t1(coord(c), coord(d));
          if ((t0 - t1).norm() < layout.d_min) continue;
          ArrayLayout cand = layout;
          cand.tile_translations[0] = {t0, t1};
          best = std::max(best, min_band_gain(cand, band, kRefUser, 0));
        }
      }
    }
  }
  CHECK(achieved >= 0.98 * best);
}
