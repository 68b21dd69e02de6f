#pragma once

// Test-only reference implementations kept independent of the library code
// paths they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "squintlab/geometry.hpp"
#include "squintlab/layout_optimizer.hpp"
#include "squintlab/rng.hpp"

namespace squintlab::testing {

// ---------------------------------------------------------------------------
// Finite differences

inline Vec2 fd_gradient(const std::function<double(const Vec2&)>& f, const Vec2& x, double h) {
  Vec2 g;
  for (int a = 0; a < 2; ++a) {
    Vec2 lo = x, hi = x;
    lo[a] -= h;
    hi[a] += h;
    g[a] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

inline Mat2 fd_hessian(const std::function<double(const Vec2&)>& f, const Vec2& x, double h) {
  Mat2 hess;
  const double center = f(x);
  for (int a = 0; a < 2; ++a) {
    Vec2 lo = x, hi = x;
    lo[a] -= h;
    hi[a] += h;
    hess(a, a) = (f(hi) - 2.0 * center + f(lo)) / (h * h);
  }
  Vec2 pp = x, pm = x, mp = x, mm = x;
  pp += Vec2(h, h);
  pm += Vec2(h, -h);
  mp += Vec2(-h, h);
  mm += Vec2(-h, -h);
  const double cross = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
  hess(0, 1) = cross;
  hess(1, 0) = cross;
  return hess;
}

// ---------------------------------------------------------------------------
// Subproblem oracle: dense grid plus compass-search polish.

inline bool satisfies_halfspaces(const Vec2& p, const std::vector<Halfspace>& halfspaces) {
  for (const Halfspace& hs : halfspaces) {
    if (hs.normal.dot(p) < hs.offset) return false;
  }
  return true;
}

inline double surrogate_min(const SurrogateModel& model, const Vec2& p) {
  double value = std::numeric_limits<double>::infinity();
  for (const QuadraticSurrogate& q : model.models) {
    value = std::min(value, q.eval(p, model.expansion));
  }
  return value;
}

struct OracleResult {
  Vec2 point = Vec2::Zero();
  double value = -std::numeric_limits<double>::infinity();
  double eta = 0.0;
};

inline OracleResult grid_polish_oracle(const SurrogateModel& model, const Box2& box,
                                       const std::vector<Halfspace>& halfspaces,
                                       int grid = 201) {
  OracleResult best;
  const Vec2 span = box.hi - box.lo;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const Vec2 p(box.lo.x() + span.x() * i / (grid - 1),
                   box.lo.y() + span.y() * j / (grid - 1));
      if (!satisfies_halfspaces(p, halfspaces)) continue;
      const double value = surrogate_min(model, p);
      if (value > best.value) {
        best.value = value;
        best.point = p;
      }
    }
  }
  // Rotating-compass polish around the grid winner; the angle dither keeps
  // the search from stalling on kinks of the piecewise-quadratic min.
  double step = std::max(span.x(), span.y()) / (grid - 1);
  int rotation = 0;
  while (step > 1e-13) {
    bool improved = false;
    const double base_angle = 2.0 * std::numbers::pi * (rotation % 5) / 80.0;
    for (int d = 0; d < 16; ++d) {
      const double angle = base_angle + 2.0 * std::numbers::pi * d / 16.0;
      const Vec2 q = box.clamp(best.point + step * Vec2(std::cos(angle), std::sin(angle)));
      if (!satisfies_halfspaces(q, halfspaces)) continue;
      const double value = surrogate_min(model, q);
      if (value > best.value) {
        best.value = value;
        best.point = q;
        improved = true;
      }
    }
    if (!improved) {
      step *= 0.5;
      ++rotation;
    }
  }
  best.eta = std::sqrt(std::max(0.0, best.value));
  return best;
}

// ---------------------------------------------------------------------------
// Zero-forcing with water-filling (rate oracle for WMMSE).

inline double zf_waterfilling_rate(const CMat& h_eff, double power_budget, double noise_power) {
  const int k = static_cast<int>(h_eff.cols());
  const CMat gram = h_eff.adjoint() * h_eff;
  const CMat pseudo = h_eff * gram.inverse();
  std::vector<double> gain(k);
  for (int u = 0; u < k; ++u) gain[u] = 1.0 / (noise_power * pseudo.col(u).squaredNorm());

  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return gain[a] > gain[b]; });
  std::vector<double> power(k, 0.0);
  for (int active = k; active >= 1; --active) {
    double inv_sum = 0.0;
    for (int i = 0; i < active; ++i) inv_sum += 1.0 / gain[order[i]];
    const double level = (power_budget + inv_sum) / active;
    if (level - 1.0 / gain[order[active - 1]] >= 0.0) {
      for (int i = 0; i < active; ++i) power[order[i]] = level - 1.0 / gain[order[i]];
      break;
    }
  }
  double rate = 0.0;
  for (int u = 0; u < k; ++u) rate += std::log2(1.0 + power[u] * gain[u]);
  return rate;
}

// ---------------------------------------------------------------------------
// Random test fixtures

inline ArrayLayout random_small_layout(Rng& rng, int n_tiles, int elements_side,
                                       double lambda_c) {
  const int n_e = elements_side * elements_side;
  ArrayLayout layout = nominal_layout(1, 1, 1, n_e, lambda_c);
  layout.d_min = 0.25 * lambda_c;
  // Regrow the tile list with random well-separated translations.
  const Box2 box{Vec2(-2.0 * lambda_c, -2.0 * lambda_c), Vec2(2.0 * lambda_c, 2.0 * lambda_c)};
  std::vector<Vec2> tiles;
  while (static_cast<int>(tiles.size()) < n_tiles) {
    const Vec2 cand(rng.uniform(box.lo.x(), box.hi.x()), rng.uniform(box.lo.y(), box.hi.y()));
    bool ok = true;
    for (const Vec2& t : tiles) ok = ok && (cand - t).norm() >= layout.d_min;
    if (ok) tiles.push_back(cand);
  }
  layout.tile_translations[0] = tiles;
  layout.panels[0].side = 12.0 * lambda_c;  // roomy panel so containment holds
  return layout;
}

inline UserGeometry random_user(Rng& rng) {
  UserGeometry u;
  u.range = rng.uniform(2.0, 10.0);
  u.azimuth = rng.uniform(-1.0, 1.0);
  u.elevation = rng.uniform(-1.0, 1.0);
  return u;
}

}  // namespace squintlab::testing
