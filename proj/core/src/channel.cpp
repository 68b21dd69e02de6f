#include "squintlab/channel.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace squintlab {

double subcarrier_frequency(const Waveband& band, int l) {
  if (l < 1 || l > band.subcarriers) {
    throw std::out_of_range("subcarrier_frequency: l must be in 1..L");
  }
  const double half_spacing = band.bandwidth / (2.0 * band.subcarriers);
  return band.center_frequency + half_spacing * (2.0 * l - 1.0 - band.subcarriers);
}

Vec3 user_position(const UserGeometry& user) {
  const double cp = std::cos(user.elevation);
  return {user.range * cp * std::cos(user.azimuth), user.range * cp * std::sin(user.azimuth),
          user.range * std::sin(user.elevation)};
}

double path_length(const Vec2& element_yz, const UserGeometry& user) {
  const double y = element_yz.x();
  const double z = element_yz.y();
  const double r = user.range;
  double arg = r * r + y * y + z * z -
               2.0 * r * (y * std::cos(user.elevation) * std::sin(user.azimuth) +
                          z * std::sin(user.elevation));
  assert(arg >= -1e-18);
  if (arg < 0.0) arg = 0.0;
  return std::sqrt(arg);
}

CVec steering_vector_at(const ArrayLayout& layout, double frequency, const UserGeometry& user) {
  const double wavenumber = 2.0 * std::numbers::pi * frequency / kSpeedOfLight;
  CVec out(layout.total_elements());
  int idx = 0;
  for (int p = 0; p < layout.num_panels(); ++p) {
    for (int t = 0; t < layout.tiles_per_panel(); ++t) {
      for (int i = 0; i < layout.elements_per_tile(); ++i) {
        const double d = path_length(layout.element_yz(p, t, i), user);
        out[idx++] = std::polar(1.0, -wavenumber * d);
      }
    }
  }
  return out;
}

CVec steering_vector(const ArrayLayout& layout, const Waveband& band, int l,
                     const UserGeometry& user) {
  return steering_vector_at(layout, subcarrier_frequency(band, l), user);
}

CMat draw_path_gains(Rng& rng, int subcarriers, int users) {
  CMat gains(subcarriers, users);
  for (int l = 0; l < subcarriers; ++l) {
    for (int k = 0; k < users; ++k) gains(l, k) = rng.cnormal();
  }
  return gains;
}

CVec channel_vector(const ArrayLayout& layout, const Waveband& band, int l,
                    const UserGeometry& user, cd gain) {
  return gain * steering_vector(layout, band, l, user);
}

ChannelSet ChannelSet::generate(const ArrayLayout& layout, const Waveband& band,
                                const std::vector<UserGeometry>& users, const CMat& gains) {
  if (gains.rows() != band.subcarriers || gains.cols() != static_cast<int>(users.size())) {
    throw std::invalid_argument("ChannelSet::generate: gain matrix must be L x K");
  }
  ChannelSet set;
  set.subcarriers = band.subcarriers;
  set.users = static_cast<int>(users.size());
  set.gains = gains;
  set.vectors.reserve(static_cast<std::size_t>(set.subcarriers) * set.users);
  for (int l = 0; l < set.subcarriers; ++l) {
    for (int k = 0; k < set.users; ++k) {
      set.vectors.push_back(channel_vector(layout, band, l + 1, users[k], gains(l, k)));
    }
  }
  return set;
}

std::string channel_dump_csv(const ChannelSet& channels) {
  std::ostringstream out;
  out.precision(17);
  out << "subcarrier,user";
  const int n = channels.vectors.empty() ? 0 : static_cast<int>(channels.vectors.front().size());
  for (int e = 0; e < n; ++e) out << ",h" << e;
  out << "\n";
  for (int l = 0; l < channels.subcarriers; ++l) {
    for (int k = 0; k < channels.users; ++k) {
      out << l + 1 << "," << k;
      const CVec& h = channels.at(l, k);
      for (int e = 0; e < n; ++e) {
        out << "," << h[e].real() << (h[e].imag() < 0 ? "" : "+") << h[e].imag() << "j";
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace squintlab
