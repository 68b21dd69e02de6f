#pragma once

#include <string>
#include <vector>

#include "squintlab/geometry.hpp"
#include "squintlab/rng.hpp"
#include "squintlab/types.hpp"

namespace squintlab {

/// User location in spherical coordinates about the array origin.
struct UserGeometry {
  double range = 1.0;      // meters, > 0
  double azimuth = 0.0;    // radians, theta
  double elevation = 0.0;  // radians, phi
};

struct Waveband {
  double center_frequency = 0.0;  // Hz
  double bandwidth = 0.0;         // Hz
  int subcarriers = 1;            // L
  int cyclic_prefix = 0;          // L_CP, OFDM symbols

  double wavelength() const { return kSpeedOfLight / center_frequency; }
  double spacing() const { return bandwidth / subcarriers; }
};

/// Center frequency of subcarrier l (1-based):
/// f_l = f_c + B/(2L) * (2l - 1 - L). Throws on l outside 1..L.
double subcarrier_frequency(const Waveband& band, int l);

/// Cartesian position (r cos(phi) cos(theta), r cos(phi) sin(theta), r sin(phi)).
Vec3 user_position(const UserGeometry& user);

/// Exact spherical-wave path length from an element at (0, y, z) to the user:
/// sqrt(r^2 + y^2 + z^2 - 2r(y cos(phi) sin(theta) + z sin(phi))).
double path_length(const Vec2& element_yz, const UserGeometry& user);

/// Unit-modulus steering vector exp(-j 2 pi f d / c0) per element, canonical
/// element order.
CVec steering_vector_at(const ArrayLayout& layout, double frequency, const UserGeometry& user);
CVec steering_vector(const ArrayLayout& layout, const Waveband& band, int l,
                     const UserGeometry& user);

/// i.i.d. CN(0,1) path gains, drawn subcarrier-major (all users of subcarrier
/// 1 first). Deterministic under a fixed stream.
CMat draw_path_gains(Rng& rng, int subcarriers, int users);

/// h_{l,k} = beta * steering_vector(l, user).
CVec channel_vector(const ArrayLayout& layout, const Waveband& band, int l,
                    const UserGeometry& user, cd gain);

/// All L x K channel vectors of one drop, stored in canonical element order.
struct ChannelSet {
  int subcarriers = 0;
  int users = 0;
  CMat gains;                 // L x K path gains
  std::vector<CVec> vectors;  // indexed subcarrier-major: l * users + k

  const CVec& at(int subcarrier_index, int user) const {  // both 0-based
    return vectors[static_cast<std::size_t>(subcarrier_index) * users + user];
  }

  static ChannelSet generate(const ArrayLayout& layout, const Waveband& band,
                             const std::vector<UserGeometry>& users, const CMat& gains);
};

/// Debug dump: one row per (subcarrier-major, user-minor) channel vector,
/// columns in canonical element order, entries as "re+imj".
std::string channel_dump_csv(const ChannelSet& channels);

}  // namespace squintlab
