#pragma once

#include <vector>

#include "squintlab/analog.hpp"

namespace squintlab {

struct SCAConfig {
  int inner_budget = 20;            // V_max, iterations per tile visit
  double step_tolerance = 1e-3;     // epsilon, meters; stop a tile below this step
  double near_worst_window = 1e-2;  // epsilon_J, gain units
  bool near_worst_relative = false; // window scales with the band minimum
  int outer_sweeps = 3;             // I_outer, full sweeps over the tiles
  double trust_radius = 0.0;        // meters; <= 0 selects panel_side / 4
  double subproblem_tol = 1e-6;     // relative gap for the inner solver
  int max_shrinks = 10;             // safeguard halvings before giving up a step
};

/// Concave quadratic model of one squared gain Q_l about an expansion point.
struct QuadraticSurrogate {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
  Mat2 curvature = Mat2::Zero();  // negative semidefinite

  double eval(const Vec2& delta, const Vec2& expansion) const {
    const Vec2 step = delta - expansion;
    return value + gradient.dot(step) + 0.5 * step.dot(curvature * step);
  }
};

struct SurrogateModel {
  Vec2 expansion = Vec2::Zero();
  std::vector<int> subcarriers;  // active near-worst set, 0-based
  std::vector<QuadraticSurrogate> models;
};

/// Affine constraint normal . x >= offset.
struct Halfspace {
  Vec2 normal = Vec2::Zero();
  double offset = 0.0;
  bool degenerate = false;  // built from coincident reference points
};

/// Q_l = J_l^2 for the panel serving `user`, other tiles held fixed.
double squared_gain(const ArrayLayout& layout, const Waveband& band, int l,
                    const UserGeometry& user, int panel);

/// Analytic value, gradient, and Hessian of Q_l with respect to the
/// translation of one tile, at the layout's current translation.
struct GainDerivatives {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
  Mat2 hessian = Mat2::Zero();
};
GainDerivatives gain_gradient_hessian(const ArrayLayout& layout, const Waveband& band, int l,
                                      const UserGeometry& user, int panel, int tile);

/// Negative-semidefinite projection: eigenvalues clamped at zero.
Mat2 concavify(const Mat2& hessian);

/// Indices (0-based) of gains within `window` of the band minimum.
std::vector<int> near_worst_set(const std::vector<double>& gains, double window);

/// Inner linearization of ||delta - other|| >= d_min about `reference`:
/// n^T (delta - other) >= d_min with n the unit vector from other to
/// reference. Any point satisfying it satisfies the true constraint.
Halfspace linearized_spacing(const Vec2& reference, const Vec2& other, double d_min);

struct SubproblemResult {
  Vec2 delta = Vec2::Zero();
  double eta = 0.0;          // sqrt of the clamped surrogate max-min value
  double model_value = 0.0;  // certified upper bound on the surrogate optimum
  int master_iterations = 0;
};

/// Maximizes min over active subcarriers of the concave surrogates over the
/// polytope (box intersected with the spacing halfspaces) via a cutting-plane
/// master. Among near-optimal points the one closest to the expansion point
/// is returned, so a flat surrogate yields no movement.
SubproblemResult solve_tile_subproblem(const SurrogateModel& surrogate, const Box2& box,
                                       const std::vector<Halfspace>& spacing, double tol);

struct TraceRow {
  int user = 0;
  int panel = 0;
  int tile = 0;
  int sweep = 0;
  int inner = 0;          // 1-based inner iteration within the tile visit
  double min_gain = 0.0;  // full-band min J after this iteration's decision
  double sum_gain = 0.0;  // full-band sum of J after this iteration's decision
  Vec2 translation = Vec2::Zero();
  bool accepted = false;
  double trust_radius = 0.0;
};

struct OptimizeResult {
  ArrayLayout layout;
  std::vector<TraceRow> trace;
};

/// Tile-wise successive convex approximation over each served user's panel.
/// Accepted iterates always validate, and the full-band minimum gain of each
/// panel never decreases across accepted steps (trust-region safeguard).
OptimizeResult optimize_layout(const ArrayLayout& layout, const Waveband& band,
                               const std::vector<UserGeometry>& users,
                               const Assignment& assignment, const SCAConfig& config);

/// Convex polygon helpers used by the subproblem master (exposed for tests).
using Polygon = std::vector<Vec2>;
Polygon box_polygon(const Box2& box);
Polygon clip_polygon(const Polygon& polygon, const Halfspace& halfspace);
Vec2 closest_point_in_polygon(const Polygon& polygon, const Vec2& point);

}  // namespace squintlab
