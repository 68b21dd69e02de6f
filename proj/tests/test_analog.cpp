#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "squintlab/analog.hpp"
#include "support/oracles.hpp"

using namespace squintlab;

namespace {
constexpr double kFc = 100e9;
const double kLambda = kSpeedOfLight / kFc;

// Odd subcarrier count puts subcarrier (L+1)/2 exactly at f_c.
const Waveband kOddBand{kFc, 20e9, 9, 1};
const int kCenter = 5;

double coherence_score(const ArrayLayout& layout, const Waveband& band, const UserGeometry& user,
                       int panel) {
  cd sum = 0.0;
  const double k = 2.0 * std::numbers::pi * band.center_frequency / kSpeedOfLight;
  for (int t = 0; t < layout.tiles_per_panel(); ++t) {
    for (int i = 0; i < layout.elements_per_tile(); ++i) {
      sum += std::polar(1.0, k * path_length(layout.element_yz(panel, t, i), user));
    }
  }
  return std::abs(sum);
}

}  // namespace

TEST_CASE("user assignment") {
  SUBCASE("single user, single panel") {
    const ArrayLayout layout = nominal_layout(1, 1, 4, 4, kLambda);
    const Assignment a = assign_users(layout, kOddBand, {{5.0, 0.2, 0.1}});
    REQUIRE(a.panel_of_user.size() == 1);
    CHECK(a.panel_of_user[0] == 0);
  }

  SUBCASE("more users than panels is a configuration error") {
    const ArrayLayout layout = nominal_layout(1, 1, 4, 4, kLambda);
    CHECK_THROWS_AS(assign_users(layout, kOddBand, {{5, 0, 0}, {6, 0, 0}}),
                    std::invalid_argument);
  }

  SUBCASE("mirrored users get mirrored panels") {
    const ArrayLayout layout = nominal_layout(2, 1, 4, 4, kLambda);  // panels at -+y
    const std::vector<UserGeometry> users = {{5.0, 0.4, 0.0}, {5.0, -0.4, 0.0}};
    const Assignment a = assign_users(layout, kOddBand, users);
    // +y user prefers the +y panel (panel index 1 has m=2).
    CHECK(a.panel_of_user[0] == 1);
    CHECK(a.panel_of_user[1] == 0);
  }

  SUBCASE("greedy matches the stepwise brute-force criterion") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      const ArrayLayout layout = nominal_layout(2, 2, 4, 1, kLambda);
      std::vector<UserGeometry> users = {testing::random_user(rng), testing::random_user(rng)};
      const Assignment a = assign_users(layout, kOddBand, users);

      std::vector<bool> taken(4, false);
      for (int u = 0; u < 2; ++u) {
        int best = -1;
        double best_score = -1.0;
        for (int p = 0; p < 4; ++p) {
          if (taken[p]) continue;
          const double score = coherence_score(layout, kOddBand, users[u], p);
          if (score > best_score) {
            best_score = score;
            best = p;
          }
        }
        CHECK(a.panel_of_user[u] == best);
        taken[best] = true;
      }
    }
  }
}

TEST_CASE("conjugate steering") {
  const ArrayLayout layout = nominal_layout(2, 1, 4, 4, kLambda);
  const std::vector<UserGeometry> users = {{5.0, 0.3, 0.15}};
  const Assignment assignment = assign_users(layout, kOddBand, users);
  const AnalogPrecoder precoder = conjugate_steering(layout, kOddBand, assignment, users);

  SUBCASE("unit modulus entries") {
    for (const CVec& col : precoder.columns) {
      for (int i = 0; i < col.size(); ++i) {
        CHECK(std::abs(col[i]) == doctest::Approx(1.0).epsilon(1e-15));
      }
    }
  }

  SUBCASE("full coherent gain at the center frequency") {
    const int panel = assignment.panel_of_user[0];
    const cd beta(0.7, -0.4);
    const CVec h = channel_vector(layout, kOddBand, kCenter, users[0], beta);
    const CMat a = precoder.assemble();
    const CVec response = a.adjoint() * h;  // (h^H A)^H
    const cd expected = std::conj(std::conj(beta) * static_cast<double>(16));
    CHECK(std::abs(response[panel] - expected) < 1e-9);
  }

  SUBCASE("A^H A equals N_sub times the identity") {
    const CMat a = precoder.assemble();
    const CMat gram = a.adjoint() * a;
    const CMat expected = 16.0 * CMat::Identity(2, 2);
    CHECK((gram - expected).norm() < 1e-12);
  }

  SUBCASE("unassigned panels carry all-ones columns") {
    const int other = 1 - assignment.panel_of_user[0];
    CHECK((precoder.columns[other] - CVec::Ones(16)).norm() == 0.0);
  }

  SUBCASE("power pass-through: ||A D||_F^2 = N_sub ||D||_F^2") {
    Rng rng(8);
    CMat d(2, 3);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 3; ++c) d(r, c) = rng.cnormal();
    }
    const CMat a = precoder.assemble();
    const double lhs = (a * d).squaredNorm();
    CHECK(lhs == doctest::Approx(16.0 * d.squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("per-subcarrier gain") {
  const ArrayLayout layout = nominal_layout(1, 1, 4, 4, kLambda);
  const UserGeometry user{5.0, std::numbers::pi / 3, std::numbers::pi / 6};

  SUBCASE("center frequency gives the full gain") {
    CHECK(per_subcarrier_gain(layout, kOddBand, kCenter, user, 0) ==
          doctest::Approx(16.0).epsilon(1e-12));
  }

  SUBCASE("a single element cannot squint") {
    const ArrayLayout single = nominal_layout(1, 1, 1, 1, kLambda);
    for (int l = 1; l <= kOddBand.subcarriers; ++l) {
      CHECK(per_subcarrier_gain(single, kOddBand, l, user, 0) ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("matches a direct residual-phase summation") {
    const ArrayLayout toy = nominal_layout(1, 1, 4, 1, kLambda);
    for (int l : {1, 3, 9}) {
      const double omega = 2.0 * std::numbers::pi *
                           (subcarrier_frequency(kOddBand, l) - kFc) / kSpeedOfLight;
      cd sum = 0.0;
      for (int t = 0; t < 4; ++t) {
        sum += std::polar(1.0, omega * path_length(toy.element_yz(0, t, 0), user));
      }
      CHECK(per_subcarrier_gain(toy, kOddBand, l, user, 0) ==
            doctest::Approx(std::abs(sum)).epsilon(1e-12));
    }
  }

  SUBCASE("gain depends only on path-length differences") {
    // A common delay shifts every path length by the same constant.
    const std::vector<double> common(4, 0.37e-9);
    for (int l = 1; l <= kOddBand.subcarriers; ++l) {
      const double plain = per_subcarrier_gain(layout, kOddBand, l, user, 0);
      const double shifted = per_subcarrier_gain_delayed(layout, kOddBand, l, user, 0, common);
      CHECK(plain == doctest::Approx(shifted).epsilon(1e-12));
    }
  }

  SUBCASE("band symmetry about the center frequency") {
    const std::vector<double> gains = per_subcarrier_gains(layout, kOddBand, user, 0);
    for (int l = 0; l < kOddBand.subcarriers; ++l) {
      CHECK(gains[l] ==
            doctest::Approx(gains[kOddBand.subcarriers - 1 - l]).epsilon(1e-12));
    }
  }
}

TEST_CASE("average gain") {
  const UserGeometry user{5.0, std::numbers::pi / 3, std::numbers::pi / 6};

  SUBCASE("single subcarrier at the center frequency") {
    const ArrayLayout layout = nominal_layout(1, 1, 4, 4, kLambda);
    const Waveband band{kFc, 20e9, 1, 0};  // f_1 = f_c exactly
    CHECK(average_gain(layout, band, user, 0) == doctest::Approx(16.0).epsilon(1e-12));
    CHECK(normalized_average_gain(layout, band, user, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("vanishing bandwidth recovers full normalized gain") {
    const ArrayLayout layout = nominal_layout(1, 1, 4, 4, kLambda);
    const Waveband band{kFc, 1.0, 64, 8};  // 1 Hz of bandwidth
    CHECK(normalized_average_gain(layout, band, user, 0) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("wideband fixed layout loses gain") {
    const ArrayLayout layout = nominal_layout(1, 1, 16, 4, kLambda);  // N_sub = 64
    const Waveband band{kFc, 20e9, 64, 8};
    const double gain = normalized_average_gain(layout, band, user, 0);
    CHECK(gain < 1.0);
    // Regression baseline recorded from the reference run of this scenario.
    CHECK(gain == doctest::Approx(0.905923770538394).epsilon(1e-9));
  }
}
