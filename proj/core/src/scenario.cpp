#include "squintlab/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace squintlab {

namespace {

using nlohmann::json;

void get_if(const json& j, const char* key, int& out) {
  if (j.contains(key)) out = j.at(key).get<int>();
}
void get_if(const json& j, const char* key, double& out) {
  if (j.contains(key)) out = j.at(key).get<double>();
}
void get_if(const json& j, const char* key, bool& out) {
  if (j.contains(key)) out = j.at(key).get<bool>();
}
void get_if(const json& j, const char* key, std::uint64_t& out) {
  if (j.contains(key)) out = j.at(key).get<std::uint64_t>();
}

UserGeometry parse_user(const json& j) {
  UserGeometry u;
  u.range = j.at("range_m").get<double>();
  u.azimuth = j.at("azimuth_rad").get<double>();
  u.elevation = j.at("elevation_rad").get<double>();
  return u;
}

void parse_interval(const json& j, const char* key, double& lo, double& hi) {
  if (!j.contains(key)) return;
  lo = j.at(key).at(0).get<double>();
  hi = j.at(key).at(1).get<double>();
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  ScenarioConfig cfg;
  try {
    if (j.contains("array")) {
      const json& a = j.at("array");
      get_if(a, "n_ph", cfg.array.n_ph);
      get_if(a, "n_pv", cfg.array.n_pv);
      get_if(a, "n_t", cfg.array.n_t);
      get_if(a, "n_e", cfg.array.n_e);
    }
    bool cp_given = false;
    if (j.contains("band")) {
      const json& b = j.at("band");
      get_if(b, "f_c_hz", cfg.band.center_frequency);
      get_if(b, "bandwidth_hz", cfg.band.bandwidth);
      get_if(b, "subcarriers", cfg.band.subcarriers);
      if (b.contains("cyclic_prefix")) {
        cfg.band.cyclic_prefix = b.at("cyclic_prefix").get<int>();
        cp_given = true;
      }
    }
    if (!cp_given) cfg.band.cyclic_prefix = cfg.band.subcarriers / 8;

    if (j.contains("users")) {
      const json& u = j.at("users");
      get_if(u, "count", cfg.n_users);
      if (u.contains("placement")) {
        const json& p = u.at("placement");
        const std::string mode = p.value("mode", "uniform");
        if (mode == "fixed") {
          cfg.placement.mode = UserPlacement::Mode::fixed;
          for (const json& ju : p.at("positions")) cfg.placement.fixed.push_back(parse_user(ju));
        } else if (mode == "uniform") {
          cfg.placement.mode = UserPlacement::Mode::uniform;
        } else {
          throw ConfigError("users.placement.mode must be 'fixed' or 'uniform'");
        }
        parse_interval(p, "range_m", cfg.placement.range_min, cfg.placement.range_max);
        parse_interval(p, "azimuth_rad", cfg.placement.azimuth_min, cfg.placement.azimuth_max);
        parse_interval(p, "elevation_rad", cfg.placement.elevation_min,
                       cfg.placement.elevation_max);
        get_if(p, "min_angle_separation_rad", cfg.placement.min_angle_separation);
      }
    }

    get_if(j, "snr_db", cfg.snr_db);

    if (j.contains("seeds")) {
      get_if(j.at("seeds"), "count", cfg.seeds.count);
      get_if(j.at("seeds"), "base", cfg.seeds.base);
    }

    if (j.contains("algorithm")) {
      const json& a = j.at("algorithm");
      if (a.contains("sca")) {
        const json& s = a.at("sca");
        get_if(s, "inner_budget", cfg.sca.inner_budget);
        get_if(s, "step_tolerance_m", cfg.sca.step_tolerance);
        get_if(s, "near_worst_window", cfg.sca.near_worst_window);
        get_if(s, "near_worst_relative", cfg.sca.near_worst_relative);
        get_if(s, "outer_sweeps", cfg.sca.outer_sweeps);
        get_if(s, "trust_radius_m", cfg.sca.trust_radius);
        get_if(s, "subproblem_tol", cfg.sca.subproblem_tol);
        get_if(s, "max_shrinks", cfg.sca.max_shrinks);
      }
      if (a.contains("wmmse")) {
        get_if(a.at("wmmse"), "max_iterations", cfg.wmmse.max_iterations);
        get_if(a.at("wmmse"), "tolerance", cfg.wmmse.tolerance);
      }
      get_if(a, "ttd_branches", cfg.ttd.branches_per_panel);
    }

    if (j.contains("path_gain_mode")) {
      const std::string mode = j.at("path_gain_mode").get<std::string>();
      if (mode == "iid") {
        cfg.path_gain_mode = PathGainMode::iid;
      } else if (mode == "frequency_flat") {
        cfg.path_gain_mode = PathGainMode::frequency_flat;
      } else {
        throw ConfigError("path_gain_mode must be 'iid' or 'frequency_flat'");
      }
    }

    if (j.contains("sweep")) {
      const std::string axis = j.at("sweep").value("axis", "none");
      if (axis == "none") {
        cfg.sweep_axis = SweepAxis::none;
      } else if (axis == "snr") {
        cfg.sweep_axis = SweepAxis::snr;
      } else if (axis == "bandwidth") {
        cfg.sweep_axis = SweepAxis::bandwidth;
      } else if (axis == "subcarrier") {
        cfg.sweep_axis = SweepAxis::subcarrier;
      } else {
        throw ConfigError("sweep.axis must be none|snr|bandwidth|subcarrier");
      }
      if (j.at("sweep").contains("values")) {
        cfg.sweep_values = j.at("sweep").at("values").get<std::vector<double>>();
      }
    }

    if (j.contains("schemes")) cfg.schemes = j.at("schemes").get<std::vector<std::string>>();

    get_if(j, "threads", cfg.threads);
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config structure error: ") + e.what());
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

std::string ScenarioConfig::to_json() const {
  json j;
  j["array"] = {{"n_ph", array.n_ph}, {"n_pv", array.n_pv}, {"n_t", array.n_t}, {"n_e", array.n_e}};
  j["band"] = {{"f_c_hz", band.center_frequency},
               {"bandwidth_hz", band.bandwidth},
               {"subcarriers", band.subcarriers},
               {"cyclic_prefix", band.cyclic_prefix}};
  json placement_json;
  placement_json["mode"] = placement.mode == UserPlacement::Mode::fixed ? "fixed" : "uniform";
  if (placement.mode == UserPlacement::Mode::fixed) {
    json positions = json::array();
    for (const UserGeometry& u : placement.fixed) {
      positions.push_back(
          {{"range_m", u.range}, {"azimuth_rad", u.azimuth}, {"elevation_rad", u.elevation}});
    }
    placement_json["positions"] = positions;
  }
  placement_json["range_m"] = {placement.range_min, placement.range_max};
  placement_json["azimuth_rad"] = {placement.azimuth_min, placement.azimuth_max};
  placement_json["elevation_rad"] = {placement.elevation_min, placement.elevation_max};
  placement_json["min_angle_separation_rad"] = placement.min_angle_separation;
  j["users"] = {{"count", n_users}, {"placement", placement_json}};
  j["snr_db"] = snr_db;
  j["seeds"] = {{"count", seeds.count}, {"base", seeds.base}};
  j["algorithm"] = {{"sca",
                     {{"inner_budget", sca.inner_budget},
                      {"step_tolerance_m", sca.step_tolerance},
                      {"near_worst_window", sca.near_worst_window},
                      {"near_worst_relative", sca.near_worst_relative},
                      {"outer_sweeps", sca.outer_sweeps},
                      {"trust_radius_m", sca.trust_radius},
                      {"subproblem_tol", sca.subproblem_tol},
                      {"max_shrinks", sca.max_shrinks}}},
                    {"wmmse", {{"max_iterations", wmmse.max_iterations}, {"tolerance", wmmse.tolerance}}},
                    {"ttd_branches", ttd.branches_per_panel}};
  j["path_gain_mode"] = path_gain_mode == PathGainMode::iid ? "iid" : "frequency_flat";
  const char* axis = "none";
  if (sweep_axis == SweepAxis::snr) axis = "snr";
  if (sweep_axis == SweepAxis::bandwidth) axis = "bandwidth";
  if (sweep_axis == SweepAxis::subcarrier) axis = "subcarrier";
  j["sweep"] = {{"axis", axis}, {"values", sweep_values}};
  j["schemes"] = schemes;
  j["threads"] = threads;
  return j.dump(2);
}

void ScenarioConfig::validate() const {
  if (array.n_ph < 1 || array.n_pv < 1 || array.n_t < 1 || array.n_e < 1) {
    throw ConfigError("array counts must all be positive");
  }
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(array.n_e))));
  if (side * side != array.n_e) throw ConfigError("array.n_e must be a perfect square");
  if (band.center_frequency <= 0.0) throw ConfigError("band.f_c_hz must be positive");
  if (band.bandwidth < 0.0) throw ConfigError("band.bandwidth_hz must be nonnegative");
  if (band.bandwidth >= 2.0 * band.center_frequency) {
    throw ConfigError("band.bandwidth_hz must be below 2 f_c (all subcarriers positive)");
  }
  if (band.subcarriers < 1) throw ConfigError("band.subcarriers must be >= 1");
  if (band.cyclic_prefix < 0) throw ConfigError("band.cyclic_prefix must be >= 0");
  if (n_users < 1) throw ConfigError("users.count must be >= 1");
  if (n_users > rf_chains()) throw ConfigError("users.count must not exceed the panel count");
  if (placement.mode == UserPlacement::Mode::fixed) {
    if (static_cast<int>(placement.fixed.size()) != n_users) {
      throw ConfigError("fixed placement must list exactly users.count positions");
    }
    for (const UserGeometry& u : placement.fixed) {
      if (u.range <= 0.0) throw ConfigError("user range must be positive");
    }
  } else {
    if (placement.range_min <= 0.0 || placement.range_max < placement.range_min) {
      throw ConfigError("placement range interval invalid");
    }
    if (placement.azimuth_max < placement.azimuth_min ||
        placement.elevation_max < placement.elevation_min) {
      throw ConfigError("placement angle intervals invalid");
    }
  }
  if (seeds.count < 1) throw ConfigError("seeds.count must be >= 1");
  if (sca.inner_budget < 0 || sca.outer_sweeps < 1 || sca.max_shrinks < 0) {
    throw ConfigError("algorithm.sca iteration counts invalid");
  }
  if (sca.step_tolerance < 0.0 || sca.near_worst_window < 0.0 || sca.subproblem_tol <= 0.0) {
    throw ConfigError("algorithm.sca tolerances invalid");
  }
  if (wmmse.max_iterations < 1 || wmmse.tolerance <= 0.0) {
    throw ConfigError("algorithm.wmmse parameters invalid");
  }
  if (ttd.branches_per_panel < 1) throw ConfigError("algorithm.ttd_branches must be >= 1");
  if (schemes.empty()) throw ConfigError("schemes must not be empty");
  for (const std::string& s : schemes) {
    if (s != "fpa" && s != "fpa_ttd" && s != "hsc_hbf") {
      throw ConfigError("unknown scheme: " + s);
    }
  }
  if ((sweep_axis == SweepAxis::snr || sweep_axis == SweepAxis::bandwidth) &&
      sweep_values.empty()) {
    throw ConfigError("sweep.values must be nonempty for snr/bandwidth sweeps");
  }
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

ArrayLayout ScenarioConfig::make_layout() const {
  return nominal_layout(array.n_ph, array.n_pv, array.n_t, array.n_e, band.wavelength());
}

double ScenarioConfig::noise_power() const { return std::pow(10.0, -snr_db / 10.0); }

bool ScenarioConfig::wants_scheme(const std::string& name) const {
  for (const std::string& s : schemes) {
    if (s == name) return true;
  }
  return false;
}

std::vector<UserGeometry> draw_users(const ScenarioConfig& config, Rng& rng) {
  if (config.placement.mode == UserPlacement::Mode::fixed) return config.placement.fixed;

  const UserPlacement& p = config.placement;
  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<UserGeometry> users(config.n_users);
    for (UserGeometry& u : users) {
      u.range = rng.uniform(p.range_min, p.range_max);
      u.azimuth = rng.uniform(p.azimuth_min, p.azimuth_max);
      u.elevation = rng.uniform(p.elevation_min, p.elevation_max);
    }
    bool separated = true;
    for (std::size_t a = 0; a < users.size() && separated; ++a) {
      for (std::size_t b = a + 1; b < users.size() && separated; ++b) {
        const bool close_azimuth =
            std::abs(users[a].azimuth - users[b].azimuth) < p.min_angle_separation;
        const bool close_elevation =
            std::abs(users[a].elevation - users[b].elevation) < p.min_angle_separation;
        if (close_azimuth && close_elevation) separated = false;
      }
    }
    if (separated) return users;
  }
  throw std::runtime_error("draw_users: rejection sampling failed to separate users");
}

CMat draw_trial_gains(const ScenarioConfig& config, Rng& rng) {
  if (config.path_gain_mode == PathGainMode::iid) {
    return draw_path_gains(rng, config.band.subcarriers, config.n_users);
  }
  CMat flat(config.band.subcarriers, config.n_users);
  for (int k = 0; k < config.n_users; ++k) flat.col(k).setConstant(rng.cnormal());
  return flat;
}

}  // namespace squintlab
