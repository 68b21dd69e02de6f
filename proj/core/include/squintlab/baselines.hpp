#pragma once

#include <vector>

#include "squintlab/digital.hpp"
#include "squintlab/layout_optimizer.hpp"

namespace squintlab {

/// Idealized true-time-delay network: the tiles of each panel are grouped
/// into contiguous branches, each driven by one loss-free unquantized delay.
struct TtdConfig {
  int branches_per_panel = 8;
};

/// Contiguous near-even partition of tiles into branches; entry t is the
/// branch serving tile t.
std::vector<int> branch_of_tile(int n_tiles, int branches);

/// Per-branch delays that align the branch centroids of the assigned user's
/// path lengths: tau_g = (mean path of branch g - smallest branch mean) / c0.
std::vector<double> ttd_delays(const ArrayLayout& layout, int panel, const UserGeometry& user,
                               int branches);

/// ttd_delays expanded to one delay per tile.
std::vector<double> per_tile_delays(const ArrayLayout& layout, int panel, const UserGeometry& user,
                                    const TtdConfig& config);

/// One fully specified downlink drop shared by every scheme.
struct LinkScenario {
  ArrayLayout layout;  // nominal geometry; schemes may reposition tiles
  Waveband band;
  std::vector<UserGeometry> users;
  CMat path_gains;              // L x K
  double transmit_power = 1.0;  // P_t
  double noise_power = 0.1;     // sigma^2
  WmmseOptions wmmse;
};

struct SchemeResult {
  ArrayLayout layout;
  Assignment assignment;
  std::vector<AnalogPrecoder> analog;  // size 1 (frequency flat) or L (TTD)
  std::vector<CMat> precoders;         // per subcarrier
  RateReport report;
};

/// Geometry and analog stage of a scheme, before any digital precoding;
/// reusable across noise levels.
struct PreparedScheme {
  ArrayLayout layout;
  Assignment assignment;
  std::vector<AnalogPrecoder> analog;
};

PreparedScheme prepare_fpa(const LinkScenario& scenario);
PreparedScheme prepare_ttd(const LinkScenario& scenario, const TtdConfig& config = {});
PreparedScheme prepare_hsc(const LinkScenario& scenario, const SCAConfig& config);

/// Channels + per-subcarrier WMMSE on a prepared scheme.
SchemeResult finish_scheme(const LinkScenario& scenario, PreparedScheme prepared);

/// Fixed-position baseline: nominal layout, phase shifters only.
SchemeResult fpa_pipeline(const LinkScenario& scenario);

/// Fixed layout with ideal per-branch true time delays on top of the phase
/// shifters; the analog response becomes frequency dependent.
SchemeResult ttd_pipeline(const LinkScenario& scenario, const TtdConfig& config = {});

/// Movable-tile scheme: layout optimization on each served panel, then phase
/// shifters and WMMSE on the optimized geometry.
SchemeResult hsc_pipeline(const LinkScenario& scenario, const SCAConfig& config);

}  // namespace squintlab
