#include "squintlab/layout_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace squintlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct ElementPathGeometry {
  double dist = 0.0;
  Vec2 grad = Vec2::Zero();
  Mat2 hess = Mat2::Zero();
};

// Distance from (0, q) to the user, with first and second derivatives in q.
ElementPathGeometry path_geometry(const Vec2& q, const Vec3& user_pos) {
  const Vec2 v(q.x() - user_pos.y(), q.y() - user_pos.z());
  const double d2 = user_pos.x() * user_pos.x() + v.squaredNorm();
  const double d = std::sqrt(d2);
  // Derivatives scale like 1/d; a user within a nanometer of an element is a
  // degenerate drop, not a usable geometry.
  if (d <= 1e-9) throw std::domain_error("path_geometry: user coincides with an element");
  ElementPathGeometry out;
  out.dist = d;
  out.grad = v / d;
  out.hess = (Mat2::Identity() - out.grad * out.grad.transpose()) / d;
  return out;
}

// Phasor sum of one tile and its first two derivatives in the translation.
struct TilePhasor {
  cd sum = 0.0;
  Eigen::Vector2cd grad = Eigen::Vector2cd::Zero();
  Eigen::Matrix2cd hess = Eigen::Matrix2cd::Zero();
};

TilePhasor tile_phasor_derivatives(const std::vector<ElementPathGeometry>& elements,
                                   double omega) {
  TilePhasor out;
  for (const ElementPathGeometry& e : elements) {
    const cd phase = std::polar(1.0, omega * e.dist);
    out.sum += phase;
    const Eigen::Vector2cd dpsi = omega * e.grad.cast<cd>();
    out.grad += cd(0.0, 1.0) * phase * dpsi;
    out.hess += phase * (cd(0.0, 1.0) * omega * e.hess.cast<cd>() - dpsi * dpsi.transpose());
  }
  return out;
}

// Q = |C + s|^2 and its derivatives given the moving tile's phasor.
GainDerivatives squared_gain_from_phasor(cd fixed, const TilePhasor& tile) {
  const cd total = fixed + tile.sum;
  GainDerivatives out;
  out.value = std::norm(total);
  out.gradient = 2.0 * (std::conj(total) * tile.grad).real();
  const Eigen::Matrix2cd outer = tile.grad * tile.grad.adjoint();
  Mat2 hess = 2.0 * (outer + std::conj(total) * tile.hess).real();
  out.hessian = 0.5 * (hess + hess.transpose());
  return out;
}

std::vector<ElementPathGeometry> tile_geometry(const ArrayLayout& layout, int panel,
                                               const Vec2& delta, const Vec3& user_pos) {
  std::vector<ElementPathGeometry> out;
  out.reserve(layout.elements_per_tile());
  const Vec2 base = layout.panels[panel].center_yz + delta;
  for (const Vec2& offset : layout.intra_tile.offsets) {
    out.push_back(path_geometry(base + offset, user_pos));
  }
  return out;
}

// Residual-phase frequencies 2 pi (f_l - f_c) / c0 for every subcarrier.
std::vector<double> residual_wavenumbers(const Waveband& band) {
  std::vector<double> omega(band.subcarriers);
  for (int l = 1; l <= band.subcarriers; ++l) {
    omega[l - 1] = kTwoPi * (subcarrier_frequency(band, l) - band.center_frequency) / kSpeedOfLight;
  }
  return omega;
}

// Cached per-tile phasor sums for one (panel, user) pair. Gains and
// surrogates for a candidate tile translation reuse the fixed contribution of
// the other tiles.
class PanelGainEvaluator {
 public:
  PanelGainEvaluator(const ArrayLayout& layout, const Waveband& band, const UserGeometry& user,
                     int panel)
      : layout_(&layout),
        panel_(panel),
        user_pos_(user_position(user)),
        omega_(residual_wavenumbers(band)),
        translations_(layout.tile_translations[panel]) {
    const int n_tiles = static_cast<int>(translations_.size());
    tile_sums_.resize(static_cast<int>(omega_.size()), n_tiles);
    for (int t = 0; t < n_tiles; ++t) refresh_tile(t);
    refresh_totals();
  }

  int subcarriers() const { return static_cast<int>(omega_.size()); }
  int tiles() const { return static_cast<int>(translations_.size()); }
  const Vec2& translation(int tile) const { return translations_[tile]; }

  void set_translation(int tile, const Vec2& delta) {
    translations_[tile] = delta;
    refresh_tile(tile);
    refresh_totals();
  }

  std::vector<double> band_gains() const {
    std::vector<double> gains(subcarriers());
    for (int l = 0; l < subcarriers(); ++l) gains[l] = std::abs(totals_[l]);
    return gains;
  }

  std::vector<double> band_gains_with(int tile, const Vec2& delta) const {
    const std::vector<ElementPathGeometry> geom = tile_geometry(*layout_, panel_, delta, user_pos_);
    std::vector<double> gains(subcarriers());
    for (int l = 0; l < subcarriers(); ++l) {
      cd sum = totals_[l] - tile_sums_(l, tile);
      for (const ElementPathGeometry& e : geom) sum += std::polar(1.0, omega_[l] * e.dist);
      gains[l] = std::abs(sum);
    }
    return gains;
  }

  // Concave surrogates of Q_l about the tile's current translation.
  SurrogateModel build_surrogate(int tile, const std::vector<int>& active) const {
    const Vec2 delta = translations_[tile];
    const std::vector<ElementPathGeometry> geom = tile_geometry(*layout_, panel_, delta, user_pos_);
    SurrogateModel model;
    model.expansion = delta;
    model.subcarriers = active;
    model.models.reserve(active.size());
    for (const int l : active) {
      const TilePhasor phasor = tile_phasor_derivatives(geom, omega_[l]);
      const cd fixed = totals_[l] - tile_sums_(l, tile);
      const GainDerivatives d = squared_gain_from_phasor(fixed, phasor);
      QuadraticSurrogate q;
      q.value = d.value;
      q.gradient = d.gradient;
      q.curvature = concavify(d.hessian);
      model.models.push_back(q);
    }
    return model;
  }

 private:
  void refresh_tile(int tile) {
    const std::vector<ElementPathGeometry> geom =
        tile_geometry(*layout_, panel_, translations_[tile], user_pos_);
    for (int l = 0; l < subcarriers(); ++l) {
      cd sum = 0.0;
      for (const ElementPathGeometry& e : geom) sum += std::polar(1.0, omega_[l] * e.dist);
      tile_sums_(l, tile) = sum;
    }
  }

  void refresh_totals() { totals_ = tile_sums_.rowwise().sum(); }

  const ArrayLayout* layout_;
  int panel_;
  Vec3 user_pos_;
  std::vector<double> omega_;
  std::vector<Vec2> translations_;
  CMat tile_sums_;  // L x N_T
  CVec totals_;     // L
};

}  // namespace

double squared_gain(const ArrayLayout& layout, const Waveband& band, int l,
                    const UserGeometry& user, int panel) {
  const double g = per_subcarrier_gain(layout, band, l, user, panel);
  return g * g;
}

GainDerivatives gain_gradient_hessian(const ArrayLayout& layout, const Waveband& band, int l,
                                      const UserGeometry& user, int panel, int tile) {
  const double omega =
      kTwoPi * (subcarrier_frequency(band, l) - band.center_frequency) / kSpeedOfLight;
  const Vec3 pos = user_position(user);
  cd fixed = 0.0;
  for (int t = 0; t < layout.tiles_per_panel(); ++t) {
    if (t == tile) continue;
    for (int i = 0; i < layout.elements_per_tile(); ++i) {
      fixed += std::polar(1.0, omega * path_geometry(layout.element_yz(panel, t, i), pos).dist);
    }
  }
  const std::vector<ElementPathGeometry> geom =
      tile_geometry(layout, panel, layout.tile_translations[panel][tile], pos);
  return squared_gain_from_phasor(fixed, tile_phasor_derivatives(geom, omega));
}

Mat2 concavify(const Mat2& hessian) {
  const Mat2 sym = 0.5 * (hessian + hessian.transpose());
  Eigen::SelfAdjointEigenSolver<Mat2> eig(sym);
  const Vec2 clamped = eig.eigenvalues().cwiseMin(0.0);
  return eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
}

std::vector<int> near_worst_set(const std::vector<double>& gains, double window) {
  if (gains.empty()) throw std::invalid_argument("near_worst_set: empty gain list");
  const double lowest = *std::min_element(gains.begin(), gains.end());
  std::vector<int> set;
  for (int l = 0; l < static_cast<int>(gains.size()); ++l) {
    if (gains[l] - lowest <= window) set.push_back(l);
  }
  return set;
}

Halfspace linearized_spacing(const Vec2& reference, const Vec2& other, double d_min) {
  Halfspace hs;
  const Vec2 diff = reference - other;
  const double dist = diff.norm();
  if (dist > 0.0) {
    hs.normal = diff / dist;
  } else {
    // Coincident reference points leave the direction undefined; fall back to
    // a direction derived from the operands so rebuilds stay deterministic.
    const std::uint64_t bits =
        std::hash<double>{}(other.x()) ^ (std::hash<double>{}(other.y()) << 1);
    const double angle = kTwoPi * static_cast<double>(bits % 4096) / 4096.0;
    hs.normal = Vec2(std::cos(angle), std::sin(angle));
    hs.degenerate = true;
  }
  hs.offset = d_min + hs.normal.dot(other);
  return hs;
}

Polygon box_polygon(const Box2& box) {
  return {Vec2(box.lo.x(), box.lo.y()), Vec2(box.hi.x(), box.lo.y()),
          Vec2(box.hi.x(), box.hi.y()), Vec2(box.lo.x(), box.hi.y())};
}

Polygon clip_polygon(const Polygon& polygon, const Halfspace& halfspace) {
  Polygon out;
  const int n = static_cast<int>(polygon.size());
  if (n == 0) return out;
  // Sliver regions arise when spacing constraints are tangent at the current
  // iterate; a relative slack keeps rounding noise from emptying them.
  const double slack = 1e-14 * (1.0 + std::abs(halfspace.offset));
  out.reserve(polygon.size() + 1);
  for (int i = 0; i < n; ++i) {
    const Vec2& cur = polygon[i];
    const Vec2& nxt = polygon[(i + 1) % n];
    const double f_cur = halfspace.normal.dot(cur) - halfspace.offset;
    const double f_nxt = halfspace.normal.dot(nxt) - halfspace.offset;
    const bool in_cur = f_cur >= -slack;
    const bool in_nxt = f_nxt >= -slack;
    if (in_cur) out.push_back(cur);
    if (in_cur != in_nxt) {
      const double t = f_cur / (f_cur - f_nxt);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

Vec2 closest_point_in_polygon(const Polygon& polygon, const Vec2& point) {
  if (polygon.empty()) return point;
  if (polygon.size() == 1) return polygon.front();

  // Convex and counterclockwise by construction; inside means no edge sees
  // the point on its right.
  const int n = static_cast<int>(polygon.size());
  bool inside = true;
  for (int i = 0; i < n && inside; ++i) {
    const Vec2 edge = polygon[(i + 1) % n] - polygon[i];
    const Vec2 rel = point - polygon[i];
    if (edge.x() * rel.y() - edge.y() * rel.x() < 0.0) inside = false;
  }
  if (inside) return point;

  Vec2 best = polygon.front();
  double best_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % n];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (point - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 proj = a + t * ab;
    const double dist = (point - proj).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = proj;
    }
  }
  return best;
}

namespace {

struct Cut {  // affine upper bound a . x + b of one surrogate
  Vec2 a = Vec2::Zero();
  double b = 0.0;
};

Cut make_cut(const QuadraticSurrogate& model, const Vec2& expansion, const Vec2& at) {
  Cut cut;
  cut.a = model.gradient + model.curvature * (at - expansion);
  cut.b = model.eval(at, expansion) - cut.a.dot(at);
  return cut;
}

double min_model_value(const SurrogateModel& surrogate, const Vec2& x) {
  double value = std::numeric_limits<double>::infinity();
  for (const QuadraticSurrogate& q : surrogate.models) {
    value = std::min(value, q.eval(x, surrogate.expansion));
  }
  return value;
}

// Index of the smallest surrogate at x (the cut-generating subcarrier).
int argmin_model(const SurrogateModel& surrogate, const Vec2& x) {
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(surrogate.models.size()); ++i) {
    const double v = surrogate.models[i].eval(x, surrogate.expansion);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

Polygon clip_by_cuts_at_level(const Polygon& region, const std::vector<Cut>& cuts, double level) {
  Polygon poly = region;
  for (const Cut& cut : cuts) {
    if (poly.empty()) break;
    poly = clip_polygon(poly, Halfspace{cut.a, level - cut.b, false});
  }
  return poly;
}

}  // namespace

SubproblemResult solve_tile_subproblem(const SurrogateModel& surrogate, const Box2& box,
                                       const std::vector<Halfspace>& spacing, double tol) {
  if (surrogate.models.empty()) {
    throw std::invalid_argument("solve_tile_subproblem: no active surrogates");
  }
  if (box.empty()) throw std::invalid_argument("solve_tile_subproblem: empty box");

  Polygon region = box_polygon(box);
  for (const Halfspace& hs : spacing) region = clip_polygon(region, hs);
  if (region.empty()) {
    // Tangent spacing constraints can pinch the region to (numerically) a
    // point; if the expansion point itself still fits, solve on it alone,
    // which ends in a no-move step.
    const Vec2 pinned = box.clamp(surrogate.expansion);
    bool feasible = true;
    for (const Halfspace& hs : spacing) {
      feasible = feasible && hs.normal.dot(pinned) >= hs.offset - 1e-9 * (1.0 + std::abs(hs.offset));
    }
    if (feasible) {
      region = {pinned};
    } else {
      std::ostringstream msg;
      msg << "solve_tile_subproblem: infeasible region (box [" << box.lo.transpose() << "] .. ["
          << box.hi.transpose() << "], " << spacing.size() << " spacing halfspaces)";
      throw std::runtime_error(msg.str());
    }
  }

  // Proximal level-bundle method. Each round solves the cutting-plane master
  // exactly by level bisection (the sublevel sets of a min of affine cuts are
  // polygons), then projects the incumbent onto a sublevel set between the
  // incumbent value and the master optimum. The master optimum is a certified
  // upper bound on the surrogate max-min, so the eta gap is a true
  // optimality certificate.
  const Vec2 x0 = box.clamp(surrogate.expansion);
  SubproblemResult result;
  result.delta = closest_point_in_polygon(region, x0);
  double best_value = min_model_value(surrogate, result.delta);

  std::vector<Cut> cuts;
  cuts.push_back(make_cut(surrogate.models[argmin_model(surrogate, result.delta)],
                          surrogate.expansion, result.delta));

  constexpr int kMaxMasters = 200;
  constexpr std::size_t kMaxBundle = 150;
  constexpr double kLevelFraction = 0.7;
  double upper = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < kMaxMasters; ++iter) {
    result.master_iterations = iter + 1;

    // Loose initial upper bound: each affine cut peaks at a region vertex.
    double master_ub = std::numeric_limits<double>::infinity();
    for (const Cut& cut : cuts) {
      double cut_max = -std::numeric_limits<double>::infinity();
      for (const Vec2& v : region) cut_max = std::max(cut_max, cut.a.dot(v) + cut.b);
      master_ub = std::min(master_ub, cut_max);
    }

    // Exact master optimum by level bisection.
    double lo = std::min(best_value, master_ub);
    double hi = master_ub;
    Polygon level_region = clip_by_cuts_at_level(region, cuts, lo);
    if (level_region.empty()) level_region = region;
    for (int step = 0; step < 64 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++step) {
      const double mid = 0.5 * (lo + hi);
      Polygon trial = clip_by_cuts_at_level(region, cuts, mid);
      if (trial.empty()) {
        hi = mid;
      } else {
        lo = mid;
        level_region = std::move(trial);
      }
    }
    upper = std::min(upper, hi);

    const double eta_lo = std::sqrt(std::max(0.0, best_value));
    const double eta_hi = std::sqrt(std::max(0.0, upper));
    if (eta_hi - eta_lo <= tol * (1.0 + eta_lo)) break;

    // Level step: project the incumbent onto a sublevel polygon between the
    // incumbent value and the master optimum.
    const double target = best_value + kLevelFraction * (lo - best_value);
    Polygon target_region = clip_by_cuts_at_level(region, cuts, target);
    if (target_region.empty()) target_region = level_region;
    const Vec2 candidate = closest_point_in_polygon(target_region, result.delta);
    const double candidate_value = min_model_value(surrogate, candidate);

    if (candidate_value > best_value + 1e-15 * (1.0 + std::abs(best_value))) {
      best_value = candidate_value;
      result.delta = candidate;
    } else if (candidate_value >= best_value - 1e-12 * (1.0 + std::abs(best_value)) &&
               (candidate - x0).norm() < (result.delta - x0).norm()) {
      result.delta = candidate;
    }

    // Refine the model where it is optimistic: cut from the worst surrogate
    // at the candidate, plus the runner-up when it is nearly as low.
    const int worst = argmin_model(surrogate, candidate);
    cuts.push_back(make_cut(surrogate.models[worst], surrogate.expansion, candidate));
    int runner = -1;
    double runner_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(surrogate.models.size()); ++i) {
      if (i == worst) continue;
      const double v = surrogate.models[i].eval(candidate, surrogate.expansion);
      if (v < runner_value) {
        runner_value = v;
        runner = i;
      }
    }
    if (runner >= 0 && runner_value <= candidate_value + 0.1 * std::abs(candidate_value) + 1e-12) {
      cuts.push_back(make_cut(surrogate.models[runner], surrogate.expansion, candidate));
    }
    if (cuts.size() > kMaxBundle) {
      // Keep the cuts most binding at the candidate; drop stale slack.
      std::sort(cuts.begin(), cuts.end(), [&](const Cut& lhs, const Cut& rhs) {
        return lhs.a.dot(candidate) + lhs.b < rhs.a.dot(candidate) + rhs.b;
      });
      cuts.resize(kMaxBundle * 3 / 4);
    }
  }

  result.delta = box.clamp(result.delta);
  result.model_value = upper;
  result.eta = std::sqrt(std::max(0.0, best_value));
  return result;
}

OptimizeResult optimize_layout(const ArrayLayout& layout, const Waveband& band,
                               const std::vector<UserGeometry>& users,
                               const Assignment& assignment, const SCAConfig& config) {
  if (config.inner_budget < 0 || config.outer_sweeps < 1) {
    throw std::invalid_argument("optimize_layout: nonpositive iteration budget");
  }
  if (config.step_tolerance < 0.0 || config.near_worst_window < 0.0 ||
      config.subproblem_tol <= 0.0) {
    throw std::invalid_argument("optimize_layout: negative tolerance");
  }
  if (assignment.panel_of_user.size() != users.size()) {
    throw std::invalid_argument("optimize_layout: assignment and users disagree");
  }
  if (!validate_layout(layout).ok()) {
    throw std::invalid_argument("optimize_layout: initial layout is infeasible");
  }

  OptimizeResult result;
  result.layout = layout;

  const int n_tiles = layout.tiles_per_panel();
  for (int u = 0; u < static_cast<int>(users.size()); ++u) {
    const int panel = assignment.panel_of_user[u];
    const double base_radius =
        config.trust_radius > 0.0 ? config.trust_radius : 0.25 * layout.panels[panel].side;
    PanelGainEvaluator evaluator(result.layout, band, users[u], panel);

    for (int sweep = 1; sweep <= config.outer_sweeps; ++sweep) {
      for (int tile = 0; tile < n_tiles; ++tile) {
        Vec2 current = result.layout.tile_translations[panel][tile];
        for (int inner = 1; inner <= config.inner_budget; ++inner) {
          const std::vector<double> gains = evaluator.band_gains();
          const double min_old = *std::min_element(gains.begin(), gains.end());
          double sum_old = 0.0;
          for (const double g : gains) sum_old += g;

          const double window = config.near_worst_relative
                                    ? config.near_worst_window * min_old
                                    : config.near_worst_window;
          const std::vector<int> active = near_worst_set(gains, window);
          const SurrogateModel surrogate = evaluator.build_surrogate(tile, active);

          const Box2 box = feasible_translation_box(result.layout, panel, tile);
          std::vector<Halfspace> halfspaces;
          halfspaces.reserve(n_tiles - 1);
          for (int other = 0; other < n_tiles; ++other) {
            if (other == tile) continue;
            Halfspace hs = linearized_spacing(
                current, result.layout.tile_translations[panel][other], result.layout.d_min);
            // Keep the current iterate feasible even when it sits a rounding
            // error inside the true spacing boundary.
            hs.offset = std::min(hs.offset, hs.normal.dot(current));
            halfspaces.push_back(hs);
          }

          TraceRow row;
          row.user = u;
          row.panel = panel;
          row.tile = tile;
          row.sweep = sweep;
          row.inner = inner;
          row.translation = current;
          row.min_gain = min_old;
          row.sum_gain = sum_old;

          double radius = base_radius;
          bool accepted = false;
          Vec2 chosen = current;
          for (int shrink = 0; shrink <= config.max_shrinks; ++shrink) {
            Box2 trust;
            trust.lo = (current - Vec2(radius, radius)).cwiseMax(box.lo);
            trust.hi = (current + Vec2(radius, radius)).cwiseMin(box.hi);
            const SubproblemResult sub =
                solve_tile_subproblem(surrogate, trust, halfspaces, config.subproblem_tol);
            const Vec2 candidate = trust.clamp(sub.delta);

            bool spacing_ok = true;
            for (int other = 0; other < n_tiles && spacing_ok; ++other) {
              if (other == tile) continue;
              spacing_ok = (candidate - result.layout.tile_translations[panel][other]).norm() >=
                           result.layout.d_min - 1e-12;
            }
            if (spacing_ok) {
              const std::vector<double> cand_gains = evaluator.band_gains_with(tile, candidate);
              const double min_new = *std::min_element(cand_gains.begin(), cand_gains.end());
              if (min_new >= min_old - 1e-12) {
                accepted = true;
                chosen = candidate;
                row.min_gain = min_new;
                row.sum_gain = 0.0;
                for (const double g : cand_gains) row.sum_gain += g;
                break;
              }
            }
            radius *= 0.5;
          }

          row.accepted = accepted;
          row.trust_radius = radius;
          row.translation = chosen;
          result.trace.push_back(row);

          if (!accepted) break;

          const double step = (chosen - current).norm();
          current = chosen;
          result.layout.tile_translations[panel][tile] = chosen;
          evaluator.set_translation(tile, chosen);
          if (step <= config.step_tolerance) break;
        }
      }
    }
  }
  return result;
}

}  // namespace squintlab
