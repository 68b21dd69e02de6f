#pragma once

#include <string>
#include <vector>

#include "squintlab/types.hpp"

namespace squintlab {

/// Fixed s x s element grid shared by every tile. Offsets live in the y-z
/// plane and are centered (they sum to the zero vector).
struct IntraTileLayout {
  int side = 1;               // s; the tile holds side^2 elements
  double spacing = 0.0;       // meters between adjacent elements
  std::vector<Vec2> offsets;  // side^2 entries, row-major over (z, y)

  static IntraTileLayout centered_square(int side, double spacing);

  int elements() const { return static_cast<int>(offsets.size()); }
};

/// One panel: a square admissible region in the y-z plane driven by one RF
/// chain. The array plane is x = 0.
struct PanelSpec {
  int m = 1;  // horizontal grid index, 1-based
  int n = 1;  // vertical grid index, 1-based
  Vec2 center_yz = Vec2::Zero();
  double side = 0.0;  // admissible region: closed square of this side
};

/// Full hierarchical array: panels -> movable tiles -> fixed intra-tile grid.
/// Panels are stored lexicographically in (m, n); that order, with tiles and
/// intra-tile offsets in stored order, defines the canonical element order
/// used by every vector and matrix in the system.
struct ArrayLayout {
  std::vector<PanelSpec> panels;
  std::vector<std::vector<Vec2>> tile_translations;  // [panel][tile], meters
  IntraTileLayout intra_tile;
  double d_min = 0.0;  // minimum tile-translation separation within a panel

  int num_panels() const { return static_cast<int>(panels.size()); }
  int tiles_per_panel() const {
    return tile_translations.empty() ? 0 : static_cast<int>(tile_translations.front().size());
  }
  int elements_per_tile() const { return intra_tile.elements(); }
  int elements_per_panel() const { return tiles_per_panel() * elements_per_tile(); }
  int total_elements() const { return num_panels() * elements_per_panel(); }

  /// y-z coordinates of one element: panel center + tile translation + offset.
  Vec2 element_yz(int panel, int tile, int element) const;
};

/// Tile center pitch that keeps cross-tile element separation at or above
/// half a wavelength for an s x s tile with half-wavelength internal spacing.
double tile_pitch(int side, double lambda_c);

/// Regular grid layout: tiles on a centered grid with pitch tile_pitch(),
/// panels on a centered grid with pitch equal to the panel side
/// 2*sqrt(n_tiles*n_elements)*lambda_c. This is both the fixed-position
/// baseline geometry and the optimizer's initial point.
///
/// n_tiles that are not perfect squares are placed on the nearest-to-square
/// rectangular grid (e.g. 8 -> 2 x 4).
ArrayLayout nominal_layout(int n_panels_h, int n_panels_v, int n_tiles, int n_elements,
                           double lambda_c);

/// Positions of all elements in canonical (m, n, t, i) order; x is always 0.
std::vector<Vec3> element_positions(const ArrayLayout& layout);

struct Violation {
  enum class Kind { containment, spacing };
  Kind kind = Kind::containment;
  int panel = -1;
  int tile = -1;
  int other_tile = -1;  // spacing violations only
  int element = -1;     // containment violations only
  double margin = 0.0;  // signed, meters; negative means violated
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks containment of every element in its panel's (closed) admissible
/// region and the pairwise tile-translation spacing within each panel.
/// Violations smaller than `tol` are ignored.
ValidationReport validate_layout(const ArrayLayout& layout, double tol = 1e-12);

struct Box2 {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();
  bool contains(const Vec2& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }
  Vec2 clamp(const Vec2& p) const {
    return {std::min(std::max(p.x(), lo.x()), hi.x()), std::min(std::max(p.y(), lo.y()), hi.y())};
  }
  Box2 intersect(const Box2& other) const {
    return {lo.cwiseMax(other.lo), hi.cwiseMin(other.hi)};
  }
  bool empty() const { return lo.x() > hi.x() || lo.y() > hi.y(); }
};

/// Interval bounds on a tile translation equivalent to keeping every element
/// of the (rigid) tile inside the panel's admissible square. Throws
/// std::invalid_argument when the tile footprint exceeds the panel.
Box2 feasible_translation_box(const ArrayLayout& layout, int panel, int tile);

/// JSON persistence; units are meters throughout.
std::string layout_to_json(const ArrayLayout& layout);
ArrayLayout layout_from_json(const std::string& text);

}  // namespace squintlab
