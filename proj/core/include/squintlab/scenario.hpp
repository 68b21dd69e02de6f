#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "squintlab/baselines.hpp"

namespace squintlab {

/// Raised for malformed or inconsistent experiment configuration; the CLI
/// maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UserPlacement {
  enum class Mode { fixed, uniform };
  Mode mode = Mode::uniform;
  std::vector<UserGeometry> fixed;  // mode == fixed
  double range_min = 5.0;           // meters
  double range_max = 15.0;
  double azimuth_min = -1.0471975511965976;  // -pi/3
  double azimuth_max = 1.0471975511965976;
  double elevation_min = -1.0471975511965976;
  double elevation_max = 1.0471975511965976;
  double min_angle_separation = 0.05;  // radians, per-axis rejection window
};

enum class SweepAxis { none, snr, bandwidth, subcarrier };

enum class PathGainMode { iid, frequency_flat };

/// Full experiment description; mirrors the JSON config file.
struct ScenarioConfig {
  struct ArrayCounts {
    int n_ph = 2;  // panels per row
    int n_pv = 2;  // panels per column
    int n_t = 16;  // tiles per panel
    int n_e = 4;   // elements per tile (s^2)
  } array;

  Waveband band{100e9, 20e9, 64, 8};

  int n_users = 4;
  UserPlacement placement;

  double snr_db = 10.0;

  struct Seeds {
    int count = 50;
    std::uint64_t base = 1;
  } seeds;

  SCAConfig sca;
  WmmseOptions wmmse;
  TtdConfig ttd;
  PathGainMode path_gain_mode = PathGainMode::iid;

  SweepAxis sweep_axis = SweepAxis::none;
  std::vector<double> sweep_values;

  std::vector<std::string> schemes = {"fpa", "fpa_ttd", "hsc_hbf"};

  int threads = 0;  // 0 selects hardware concurrency

  static ScenarioConfig from_json_text(const std::string& text);
  static ScenarioConfig from_file(const std::string& path);

  /// Serialized resolved configuration (the audit sidecar).
  std::string to_json() const;

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  int rf_chains() const { return array.n_ph * array.n_pv; }
  ArrayLayout make_layout() const;
  double noise_power() const;  // P_t = 1, sigma^2 = 10^(-snr_db/10)
  bool wants_scheme(const std::string& name) const;
};

/// Users of one trial: the fixed list, or a uniform draw with rejection of
/// drops where two users sit within the angular window on both axes.
std::vector<UserGeometry> draw_users(const ScenarioConfig& config, Rng& rng);

/// Path gains of one trial (draw order: users after placement, then gains).
CMat draw_trial_gains(const ScenarioConfig& config, Rng& rng);

}  // namespace squintlab
