#include "squintlab/analog.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace squintlab {

CMat AnalogPrecoder::assemble() const {
  const int n_rf = num_panels();
  const int n = n_rf * elements_per_panel;
  CMat a = CMat::Zero(n, n_rf);
  for (int p = 0; p < n_rf; ++p) {
    a.block(p * elements_per_panel, p, elements_per_panel, 1) = columns[p];
  }
  return a;
}

Assignment assign_users(const ArrayLayout& layout, const Waveband& band,
                        const std::vector<UserGeometry>& users) {
  const int n_rf = layout.num_panels();
  const int k = static_cast<int>(users.size());
  if (k > n_rf) throw std::invalid_argument("assign_users: more users than panels");

  const double wavenumber = 2.0 * std::numbers::pi * band.center_frequency / kSpeedOfLight;
  Assignment assignment;
  assignment.panel_of_user.assign(k, -1);
  std::vector<bool> taken(n_rf, false);
  for (int u = 0; u < k; ++u) {
    int best = -1;
    double best_score = -1.0;
    for (int p = 0; p < n_rf; ++p) {
      if (taken[p]) continue;
      cd sum = 0.0;
      for (int t = 0; t < layout.tiles_per_panel(); ++t) {
        for (int i = 0; i < layout.elements_per_tile(); ++i) {
          const double d = path_length(layout.element_yz(p, t, i), users[u]);
          sum += std::polar(1.0, wavenumber * d);
        }
      }
      const double score = std::abs(sum);
      if (score > best_score) {
        best_score = score;
        best = p;
      }
    }
    assignment.panel_of_user[u] = best;
    taken[best] = true;
  }
  return assignment;
}

AnalogPrecoder conjugate_steering(const ArrayLayout& layout, const Waveband& band,
                                  const Assignment& assignment,
                                  const std::vector<UserGeometry>& users) {
  const int n_rf = layout.num_panels();
  const int n_sub = layout.elements_per_panel();
  std::vector<int> user_of_panel(n_rf, -1);
  for (int u = 0; u < static_cast<int>(assignment.panel_of_user.size()); ++u) {
    const int p = assignment.panel_of_user[u];
    if (p < 0 || p >= n_rf) throw std::invalid_argument("conjugate_steering: panel out of range");
    if (user_of_panel[p] != -1) {
      throw std::invalid_argument("conjugate_steering: assignment is not injective");
    }
    user_of_panel[p] = u;
  }

  const double wavenumber = 2.0 * std::numbers::pi * band.center_frequency / kSpeedOfLight;
  AnalogPrecoder precoder;
  precoder.elements_per_panel = n_sub;
  precoder.columns.resize(n_rf);
  for (int p = 0; p < n_rf; ++p) {
    CVec col(n_sub);
    if (user_of_panel[p] < 0) {
      col.setOnes();
    } else {
      const UserGeometry& user = users[user_of_panel[p]];
      int idx = 0;
      for (int t = 0; t < layout.tiles_per_panel(); ++t) {
        for (int i = 0; i < layout.elements_per_tile(); ++i) {
          const double d = path_length(layout.element_yz(p, t, i), user);
          col[idx++] = std::polar(1.0, -wavenumber * d);
        }
      }
    }
    precoder.columns[p] = std::move(col);
  }
  return precoder;
}

std::vector<double> per_subcarrier_gains(const ArrayLayout& layout, const Waveband& band,
                                         const UserGeometry& user, int panel,
                                         const std::vector<double>* tile_delays) {
  const int n_tiles = layout.tiles_per_panel();
  const int n_elem = layout.elements_per_tile();
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n_tiles) * n_elem);
  for (int t = 0; t < n_tiles; ++t) {
    const double delay_dist = tile_delays ? kSpeedOfLight * (*tile_delays)[t] : 0.0;
    for (int i = 0; i < n_elem; ++i) {
      dist.push_back(path_length(layout.element_yz(panel, t, i), user) - delay_dist);
    }
  }
  std::vector<double> gains(band.subcarriers);
  for (int l = 1; l <= band.subcarriers; ++l) {
    const double omega = 2.0 * std::numbers::pi *
                         (subcarrier_frequency(band, l) - band.center_frequency) / kSpeedOfLight;
    cd sum = 0.0;
    for (const double d : dist) sum += std::polar(1.0, omega * d);
    gains[l - 1] = std::abs(sum);
  }
  return gains;
}

double per_subcarrier_gain(const ArrayLayout& layout, const Waveband& band, int l,
                           const UserGeometry& user, int panel) {
  const double omega = 2.0 * std::numbers::pi *
                       (subcarrier_frequency(band, l) - band.center_frequency) / kSpeedOfLight;
  cd sum = 0.0;
  for (int t = 0; t < layout.tiles_per_panel(); ++t) {
    for (int i = 0; i < layout.elements_per_tile(); ++i) {
      sum += std::polar(1.0, omega * path_length(layout.element_yz(panel, t, i), user));
    }
  }
  return std::abs(sum);
}

double per_subcarrier_gain_delayed(const ArrayLayout& layout, const Waveband& band, int l,
                                   const UserGeometry& user, int panel,
                                   const std::vector<double>& tile_delays) {
  const double omega = 2.0 * std::numbers::pi *
                       (subcarrier_frequency(band, l) - band.center_frequency) / kSpeedOfLight;
  cd sum = 0.0;
  for (int t = 0; t < layout.tiles_per_panel(); ++t) {
    const double delay_dist = kSpeedOfLight * tile_delays[t];
    for (int i = 0; i < layout.elements_per_tile(); ++i) {
      const double d = path_length(layout.element_yz(panel, t, i), user);
      sum += std::polar(1.0, omega * (d - delay_dist));
    }
  }
  return std::abs(sum);
}

double average_gain(const ArrayLayout& layout, const Waveband& band, const UserGeometry& user,
                    int panel) {
  const std::vector<double> gains = per_subcarrier_gains(layout, band, user, panel);
  double sum = 0.0;
  for (const double g : gains) sum += g;
  return sum / band.subcarriers;
}

double normalized_average_gain(const ArrayLayout& layout, const Waveband& band,
                               const UserGeometry& user, int panel) {
  return average_gain(layout, band, user, panel) / layout.elements_per_panel();
}

}  // namespace squintlab
