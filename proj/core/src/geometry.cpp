#include "squintlab/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace squintlab {

IntraTileLayout IntraTileLayout::centered_square(int side, double spacing) {
  if (side < 1) throw std::invalid_argument("intra-tile side must be >= 1");
  if (side > 1 && spacing <= 0.0) throw std::invalid_argument("intra-tile spacing must be > 0");
  IntraTileLayout out;
  out.side = side;
  out.spacing = spacing;
  out.offsets.reserve(static_cast<std::size_t>(side) * side);
  const double half = 0.5 * (side - 1);
  for (int iz = 0; iz < side; ++iz) {
    for (int iy = 0; iy < side; ++iy) {
      out.offsets.emplace_back((iy - half) * spacing, (iz - half) * spacing);
    }
  }
  return out;
}

Vec2 ArrayLayout::element_yz(int panel, int tile, int element) const {
  return panels[panel].center_yz + tile_translations[panel][tile] + intra_tile.offsets[element];
}

double tile_pitch(int side, double lambda_c) {
  return 0.5 * (std::numbers::sqrt2 * (side - 1) + 1.0) * lambda_c;
}

namespace {

// Largest divisor of n not exceeding sqrt(n); pairs with n/g to give the
// nearest-to-square grid factorization.
int near_square_divisor(int n) {
  int g = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
  while (g > 1 && n % g != 0) --g;
  return g;
}

}  // namespace

ArrayLayout nominal_layout(int n_panels_h, int n_panels_v, int n_tiles, int n_elements,
                           double lambda_c) {
  if (n_panels_h < 1 || n_panels_v < 1 || n_tiles < 1 || n_elements < 1) {
    throw std::invalid_argument("nominal_layout: all counts must be positive");
  }
  if (lambda_c <= 0.0) throw std::invalid_argument("nominal_layout: lambda_c must be > 0");
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_elements))));
  if (side * side != n_elements) {
    throw std::invalid_argument("nominal_layout: n_elements must be a perfect square s^2");
  }

  ArrayLayout layout;
  layout.intra_tile = IntraTileLayout::centered_square(side, 0.5 * lambda_c);

  const double pitch = tile_pitch(side, lambda_c);
  layout.d_min = pitch;

  const double panel_side = 2.0 * std::sqrt(static_cast<double>(n_tiles) * n_elements) * lambda_c;

  const int grid_y = near_square_divisor(n_tiles);
  const int grid_z = n_tiles / grid_y;

  std::vector<Vec2> tiles;
  tiles.reserve(n_tiles);
  for (int a = 0; a < grid_y; ++a) {
    for (int b = 0; b < grid_z; ++b) {
      tiles.emplace_back((a - 0.5 * (grid_y - 1)) * pitch, (b - 0.5 * (grid_z - 1)) * pitch);
    }
  }

  for (int m = 1; m <= n_panels_h; ++m) {
    for (int n = 1; n <= n_panels_v; ++n) {
      PanelSpec panel;
      panel.m = m;
      panel.n = n;
      panel.center_yz = Vec2((m - 1 - 0.5 * (n_panels_h - 1)) * panel_side,
                             (n - 1 - 0.5 * (n_panels_v - 1)) * panel_side);
      panel.side = panel_side;
      layout.panels.push_back(panel);
      layout.tile_translations.push_back(tiles);
    }
  }
  return layout;
}

std::vector<Vec3> element_positions(const ArrayLayout& layout) {
  std::vector<Vec3> out;
  out.reserve(layout.total_elements());
  for (int p = 0; p < layout.num_panels(); ++p) {
    for (int t = 0; t < layout.tiles_per_panel(); ++t) {
      for (int i = 0; i < layout.elements_per_tile(); ++i) {
        const Vec2 yz = layout.element_yz(p, t, i);
        out.emplace_back(0.0, yz.x(), yz.y());
      }
    }
  }
  return out;
}

ValidationReport validate_layout(const ArrayLayout& layout, double tol) {
  ValidationReport report;
  for (int p = 0; p < layout.num_panels(); ++p) {
    const PanelSpec& panel = layout.panels[p];
    const double half = 0.5 * panel.side;
    const int n_tiles = static_cast<int>(layout.tile_translations[p].size());
    for (int t = 0; t < n_tiles; ++t) {
      for (int i = 0; i < layout.elements_per_tile(); ++i) {
        const Vec2 rel = layout.element_yz(p, t, i) - panel.center_yz;
        const double margin =
            std::min(half - std::abs(rel.x()), half - std::abs(rel.y()));
        if (margin < -tol) {
          Violation v;
          v.kind = Violation::Kind::containment;
          v.panel = p;
          v.tile = t;
          v.element = i;
          v.margin = margin;
          report.violations.push_back(v);
        }
      }
      for (int u = t + 1; u < n_tiles; ++u) {
        const double dist =
            (layout.tile_translations[p][t] - layout.tile_translations[p][u]).norm();
        const double margin = dist - layout.d_min;
        if (margin < -tol) {
          Violation v;
          v.kind = Violation::Kind::spacing;
          v.panel = p;
          v.tile = t;
          v.other_tile = u;
          v.margin = margin;
          report.violations.push_back(v);
        }
      }
    }
  }
  return report;
}

Box2 feasible_translation_box(const ArrayLayout& layout, int panel, int tile) {
  (void)tile;  // all tiles share the intra-tile footprint
  const double half = 0.5 * layout.panels[panel].side;
  double min_y = 0.0, max_y = 0.0, min_z = 0.0, max_z = 0.0;
  for (const Vec2& d : layout.intra_tile.offsets) {
    min_y = std::min(min_y, d.x());
    max_y = std::max(max_y, d.x());
    min_z = std::min(min_z, d.y());
    max_z = std::max(max_z, d.y());
  }
  Box2 box;
  box.lo = Vec2(-half - min_y, -half - min_z);
  box.hi = Vec2(half - max_y, half - max_z);
  if (box.empty()) {
    throw std::invalid_argument("feasible_translation_box: tile footprint exceeds panel side");
  }
  return box;
}

std::string layout_to_json(const ArrayLayout& layout) {
  nlohmann::json j;
  j["panels"] = nlohmann::json::array();
  for (const PanelSpec& p : layout.panels) {
    j["panels"].push_back({{"m", p.m},
                           {"n", p.n},
                           {"center_yz", {p.center_yz.x(), p.center_yz.y()}},
                           {"side", p.side}});
  }
  j["tile_translations"] = nlohmann::json::array();
  for (const auto& tiles : layout.tile_translations) {
    nlohmann::json panel_tiles = nlohmann::json::array();
    for (const Vec2& t : tiles) panel_tiles.push_back({t.x(), t.y()});
    j["tile_translations"].push_back(panel_tiles);
  }
  j["intra_tile"] = {{"s", layout.intra_tile.side}, {"spacing", layout.intra_tile.spacing}};
  j["d_min"] = layout.d_min;
  return j.dump(2);
}

ArrayLayout layout_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ArrayLayout layout;
  layout.intra_tile = IntraTileLayout::centered_square(j.at("intra_tile").at("s").get<int>(),
                                                       j.at("intra_tile").at("spacing").get<double>());
  layout.d_min = j.at("d_min").get<double>();
  for (const auto& jp : j.at("panels")) {
    PanelSpec p;
    p.m = jp.at("m").get<int>();
    p.n = jp.at("n").get<int>();
    p.center_yz = Vec2(jp.at("center_yz").at(0).get<double>(), jp.at("center_yz").at(1).get<double>());
    p.side = jp.at("side").get<double>();
    layout.panels.push_back(p);
  }
  for (const auto& jtiles : j.at("tile_translations")) {
    std::vector<Vec2> tiles;
    for (const auto& jt : jtiles) tiles.emplace_back(jt.at(0).get<double>(), jt.at(1).get<double>());
    layout.tile_translations.push_back(std::move(tiles));
  }
  if (layout.panels.size() != layout.tile_translations.size()) {
    throw std::invalid_argument("layout_from_json: panels and tile_translations disagree");
  }
  return layout;
}

}  // namespace squintlab
