#pragma once

#include <vector>

#include "squintlab/channel.hpp"

namespace squintlab {

/// Injective map user -> panel (one RF chain per served user).
struct Assignment {
  std::vector<int> panel_of_user;
};

/// Block-diagonal phase-shifter precoder: one unit-modulus column per panel.
struct AnalogPrecoder {
  int elements_per_panel = 0;
  std::vector<CVec> columns;  // per panel, length elements_per_panel

  int num_panels() const { return static_cast<int>(columns.size()); }

  /// Dense N x N_RF block-diagonal matrix in canonical element order.
  CMat assemble() const;
};

/// Greedy panel selection: users in index order each take the remaining panel
/// maximizing |b_{f_c,k}^H 1_panel| (coherence of the center-frequency
/// steering phases summed over the panel). Ties break to the lowest panel
/// index. Throws when more users than panels.
Assignment assign_users(const ArrayLayout& layout, const Waveband& band,
                        const std::vector<UserGeometry>& users);

/// Phase shifters matched to the assigned user's center-frequency steering
/// phases, exp(-j 2 pi f_c d / c0) per element, so the analog stage is
/// coherent at f_c. Panels without a user get all-ones columns.
AnalogPrecoder conjugate_steering(const ArrayLayout& layout, const Waveband& band,
                                  const Assignment& assignment,
                                  const std::vector<UserGeometry>& users);

/// Per-subcarrier array gain of a conjugate-steered panel toward `user`:
/// J_l = |sum_{t,i} exp(j 2 pi (f_l - f_c) d_{t,i} / c0)|, in [0, N_sub].
double per_subcarrier_gain(const ArrayLayout& layout, const Waveband& band, int l,
                           const UserGeometry& user, int panel);

/// Same with one true-time delay per tile applied on top of the phase
/// shifters (each tile's phase rotates by -2 pi (f_l - f_c) tau_t).
double per_subcarrier_gain_delayed(const ArrayLayout& layout, const Waveband& band, int l,
                                   const UserGeometry& user, int panel,
                                   const std::vector<double>& tile_delays);

/// (1/L) sum_l J_l, and the [0, 1] variant normalized by N_sub.
double average_gain(const ArrayLayout& layout, const Waveband& band, const UserGeometry& user,
                    int panel);
double normalized_average_gain(const ArrayLayout& layout, const Waveband& band,
                               const UserGeometry& user, int panel);

/// J_l for every subcarrier at once (cheaper than L separate calls).
std::vector<double> per_subcarrier_gains(const ArrayLayout& layout, const Waveband& band,
                                         const UserGeometry& user, int panel,
                                         const std::vector<double>* tile_delays = nullptr);

}  // namespace squintlab
