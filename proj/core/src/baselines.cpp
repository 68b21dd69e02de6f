#include "squintlab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace squintlab {

std::vector<int> branch_of_tile(int n_tiles, int branches) {
  if (n_tiles < 1 || branches < 1) throw std::invalid_argument("branch_of_tile: counts must be >= 1");
  const int effective = std::min(branches, n_tiles);
  std::vector<int> map(n_tiles);
  for (int t = 0; t < n_tiles; ++t) {
    map[t] = static_cast<int>((static_cast<long>(t) * effective) / n_tiles);
  }
  return map;
}

std::vector<double> ttd_delays(const ArrayLayout& layout, int panel, const UserGeometry& user,
                               int branches) {
  const int n_tiles = layout.tiles_per_panel();
  const std::vector<int> branch = branch_of_tile(n_tiles, branches);
  const int effective = branch.back() + 1;

  std::vector<double> mean_path(effective, 0.0);
  std::vector<int> count(effective, 0);
  for (int t = 0; t < n_tiles; ++t) {
    for (int i = 0; i < layout.elements_per_tile(); ++i) {
      mean_path[branch[t]] += path_length(layout.element_yz(panel, t, i), user);
      ++count[branch[t]];
    }
  }
  for (int g = 0; g < effective; ++g) mean_path[g] /= count[g];
  const double reference = *std::min_element(mean_path.begin(), mean_path.end());

  std::vector<double> delays(effective);
  for (int g = 0; g < effective; ++g) delays[g] = (mean_path[g] - reference) / kSpeedOfLight;
  return delays;
}

std::vector<double> per_tile_delays(const ArrayLayout& layout, int panel, const UserGeometry& user,
                                    const TtdConfig& config) {
  const std::vector<int> branch = branch_of_tile(layout.tiles_per_panel(), config.branches_per_panel);
  const std::vector<double> delays = ttd_delays(layout, panel, user, config.branches_per_panel);
  std::vector<double> out(branch.size());
  for (std::size_t t = 0; t < branch.size(); ++t) out[t] = delays[branch[t]];
  return out;
}

PreparedScheme prepare_fpa(const LinkScenario& scenario) {
  PreparedScheme prepared;
  prepared.layout = scenario.layout;
  prepared.assignment = assign_users(scenario.layout, scenario.band, scenario.users);
  prepared.analog = {
      conjugate_steering(scenario.layout, scenario.band, prepared.assignment, scenario.users)};
  return prepared;
}

PreparedScheme prepare_ttd(const LinkScenario& scenario, const TtdConfig& config) {
  PreparedScheme prepared;
  prepared.layout = scenario.layout;
  prepared.assignment = assign_users(scenario.layout, scenario.band, scenario.users);
  const AnalogPrecoder base =
      conjugate_steering(scenario.layout, scenario.band, prepared.assignment, scenario.users);

  // Delays act only on served panels; unassigned panels stay frequency flat.
  const int n_rf = scenario.layout.num_panels();
  const int n_tiles = scenario.layout.tiles_per_panel();
  const int n_elem = scenario.layout.elements_per_tile();
  std::vector<std::vector<double>> delays_of_panel(n_rf);
  for (std::size_t u = 0; u < scenario.users.size(); ++u) {
    const int panel = prepared.assignment.panel_of_user[u];
    delays_of_panel[panel] = per_tile_delays(scenario.layout, panel, scenario.users[u], config);
  }

  prepared.analog.resize(scenario.band.subcarriers);
  for (int l = 1; l <= scenario.band.subcarriers; ++l) {
    const double offset_freq =
        subcarrier_frequency(scenario.band, l) - scenario.band.center_frequency;
    AnalogPrecoder per_l = base;
    for (int p = 0; p < n_rf; ++p) {
      if (delays_of_panel[p].empty()) continue;
      for (int t = 0; t < n_tiles; ++t) {
        const cd rotation =
            std::polar(1.0, -2.0 * std::numbers::pi * offset_freq * delays_of_panel[p][t]);
        per_l.columns[p].segment(t * n_elem, n_elem) *= rotation;
      }
    }
    prepared.analog[l - 1] = std::move(per_l);
  }
  return prepared;
}

PreparedScheme prepare_hsc(const LinkScenario& scenario, const SCAConfig& config) {
  PreparedScheme prepared;
  prepared.assignment = assign_users(scenario.layout, scenario.band, scenario.users);
  OptimizeResult optimized =
      optimize_layout(scenario.layout, scenario.band, scenario.users, prepared.assignment, config);
  prepared.layout = std::move(optimized.layout);
  prepared.analog = {
      conjugate_steering(prepared.layout, scenario.band, prepared.assignment, scenario.users)};
  return prepared;
}

SchemeResult finish_scheme(const LinkScenario& scenario, PreparedScheme prepared) {
  const ChannelSet channels =
      ChannelSet::generate(prepared.layout, scenario.band, scenario.users, scenario.path_gains);
  BandPrecodingResult precoded =
      precode_band(channels, prepared.analog, scenario.transmit_power, scenario.noise_power,
                   scenario.band.cyclic_prefix, scenario.wmmse);
  SchemeResult result;
  result.layout = std::move(prepared.layout);
  result.assignment = std::move(prepared.assignment);
  result.analog = std::move(prepared.analog);
  result.precoders = std::move(precoded.precoders);
  result.report = std::move(precoded.report);
  return result;
}

SchemeResult fpa_pipeline(const LinkScenario& scenario) {
  return finish_scheme(scenario, prepare_fpa(scenario));
}

SchemeResult ttd_pipeline(const LinkScenario& scenario, const TtdConfig& config) {
  return finish_scheme(scenario, prepare_ttd(scenario, config));
}

SchemeResult hsc_pipeline(const LinkScenario& scenario, const SCAConfig& config) {
  return finish_scheme(scenario, prepare_hsc(scenario, config));
}

}  // namespace squintlab
