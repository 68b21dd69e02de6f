#include "squintlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "squintlab/stats.hpp"

namespace squintlab {

namespace fs = std::filesystem;

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (count <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      const int index = next.fetch_add(1);
      if (index >= count) return;
      try {
        body(index);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string format_csv_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

LinkScenario make_trial(const ScenarioConfig& config, int trial) {
  Rng stream = Rng(config.seeds.base).substream(static_cast<std::uint64_t>(trial));
  LinkScenario scenario;
  scenario.layout = config.make_layout();
  scenario.band = config.band;
  scenario.users = draw_users(config, stream);
  scenario.path_gains = draw_trial_gains(config, stream);
  scenario.transmit_power = 1.0;
  scenario.noise_power = config.noise_power();
  scenario.wmmse = config.wmmse;
  return scenario;
}

namespace {

std::string write_text_file(const std::string& out_dir, const std::string& name,
                            const std::string& content) {
  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + path.string());
  out << content;
  return path.string();
}

std::string write_sidecar(const ScenarioConfig& config, const std::string& out_dir) {
  return write_text_file(out_dir, "resolved_config.json", config.to_json() + "\n");
}

const UserGeometry& require_single_user(const ScenarioConfig& config,
                                        const std::vector<UserGeometry>& users) {
  if (config.n_users != 1) {
    throw ConfigError("this experiment requires a single-user configuration (users.count == 1)");
  }
  return users.front();
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "user,panel,tile,inner_iter,min_J,sum_J,delta_y,delta_z,accepted,trust_radius\n";
  for (const TraceRow& row : trace) {
    out << row.user << ',' << row.panel << ',' << row.tile << ',' << row.inner << ','
        << format_csv_double(row.min_gain) << ',' << format_csv_double(row.sum_gain) << ','
        << format_csv_double(row.translation.x()) << ',' << format_csv_double(row.translation.y())
        << ',' << (row.accepted ? 1 : 0) << ',' << format_csv_double(row.trust_radius) << "\n";
  }
  return out.str();
}

// Canonical scheme ordering for CSV rows.
const std::vector<std::string> kSchemeOrder = {"fpa", "fpa_ttd", "hsc_hbf"};

std::vector<std::string> requested_schemes(const ScenarioConfig& config) {
  std::vector<std::string> out;
  for (const std::string& name : kSchemeOrder) {
    if (config.wants_scheme(name)) out.push_back(name);
  }
  return out;
}

PreparedScheme prepare_named(const LinkScenario& scenario, const std::string& name,
                             const ScenarioConfig& config) {
  if (name == "fpa") return prepare_fpa(scenario);
  if (name == "fpa_ttd") return prepare_ttd(scenario, config.ttd);
  return prepare_hsc(scenario, config.sca);
}

struct RateTable {
  std::vector<double> axis_values;
  std::vector<std::string> schemes;
  int trials = 0;
  // rate[(value_index * schemes + scheme_index) * trials + trial]
  std::vector<double> rates;

  double& at(int value_index, int scheme_index, int trial) {
    return rates[(static_cast<std::size_t>(value_index) * schemes.size() + scheme_index) * trials +
                 trial];
  }
  double at(int value_index, int scheme_index, int trial) const {
    return rates[(static_cast<std::size_t>(value_index) * schemes.size() + scheme_index) * trials +
                 trial];
  }
};

std::string rate_rows_csv(const RateTable& table, const std::string& axis_name) {
  std::ostringstream out;
  out << axis_name << ",scheme,trial,sum_rate\n";
  for (std::size_t v = 0; v < table.axis_values.size(); ++v) {
    for (std::size_t s = 0; s < table.schemes.size(); ++s) {
      for (int trial = 0; trial < table.trials; ++trial) {
        out << format_csv_double(table.axis_values[v]) << ',' << table.schemes[s] << ',' << trial
            << ',' << format_csv_double(table.at(static_cast<int>(v), static_cast<int>(s), trial))
            << "\n";
      }
    }
  }
  return out.str();
}

std::string rate_summary_csv(const RateTable& table, const std::string& axis_name) {
  std::ostringstream out;
  out << axis_name << ",scheme,trials,mean_rate,ci95_half_width\n";
  for (std::size_t v = 0; v < table.axis_values.size(); ++v) {
    for (std::size_t s = 0; s < table.schemes.size(); ++s) {
      std::vector<double> rates(table.trials);
      for (int trial = 0; trial < table.trials; ++trial) {
        rates[trial] = table.at(static_cast<int>(v), static_cast<int>(s), trial);
      }
      const SampleStats stats = sample_stats(rates);
      out << format_csv_double(table.axis_values[v]) << ',' << table.schemes[s] << ','
          << stats.count << ',' << format_csv_double(stats.mean) << ','
          << format_csv_double(ci95_half_width(rates)) << "\n";
    }
  }
  return out.str();
}

}  // namespace

std::vector<std::string> run_convergence(const ScenarioConfig& config,
                                         const std::string& out_dir) {
  const LinkScenario trial = make_trial(config, 0);
  require_single_user(config, trial.users);

  const Assignment assignment = assign_users(trial.layout, trial.band, trial.users);
  const OptimizeResult optimized =
      optimize_layout(trial.layout, trial.band, trial.users, assignment, config.sca);

  const int n_sub = trial.layout.elements_per_panel();
  const int subcarriers = trial.band.subcarriers;
  const int panel = assignment.panel_of_user[0];

  std::ostringstream csv;
  csv << "iteration,sum_gain_norm,min_gain_norm\n";
  const std::vector<double> initial =
      per_subcarrier_gains(trial.layout, trial.band, trial.users[0], panel);
  double init_sum = 0.0;
  double init_min = initial.front();
  for (const double g : initial) {
    init_sum += g;
    init_min = std::min(init_min, g);
  }
  csv << 0 << ',' << format_csv_double(init_sum / (n_sub * subcarriers)) << ','
      << format_csv_double(init_min / n_sub) << "\n";
  int iteration = 0;
  for (const TraceRow& row : optimized.trace) {
    csv << ++iteration << ',' << format_csv_double(row.sum_gain / (n_sub * subcarriers)) << ','
        << format_csv_double(row.min_gain / n_sub) << "\n";
  }

  std::vector<std::string> outputs;
  outputs.push_back(write_text_file(out_dir, "convergence.csv", csv.str()));
  outputs.push_back(write_text_file(out_dir, "trace.csv", trace_csv(optimized.trace)));
  outputs.push_back(write_sidecar(config, out_dir));
  return outputs;
}

std::vector<std::string> run_gain_vs_frequency(const ScenarioConfig& config,
                                               const std::string& out_dir) {
  const LinkScenario trial = make_trial(config, 0);
  const UserGeometry& user = require_single_user(config, trial.users);

  const Assignment assignment = assign_users(trial.layout, trial.band, trial.users);
  const int panel = assignment.panel_of_user[0];
  const int n_sub = trial.layout.elements_per_panel();

  const std::vector<double> fpa = per_subcarrier_gains(trial.layout, trial.band, user, panel);
  const std::vector<double> tile_delays = per_tile_delays(trial.layout, panel, user, config.ttd);
  const std::vector<double> ttd =
      per_subcarrier_gains(trial.layout, trial.band, user, panel, &tile_delays);
  const OptimizeResult optimized =
      optimize_layout(trial.layout, trial.band, trial.users, assignment, config.sca);
  const std::vector<double> ma =
      per_subcarrier_gains(optimized.layout, trial.band, user, panel);

  std::ostringstream csv;
  csv << "f_l,gain_fpa,gain_ttd,gain_ma\n";
  for (int l = 1; l <= trial.band.subcarriers; ++l) {
    csv << format_csv_double(subcarrier_frequency(trial.band, l)) << ','
        << format_csv_double(fpa[l - 1] / n_sub) << ',' << format_csv_double(ttd[l - 1] / n_sub)
        << ',' << format_csv_double(ma[l - 1] / n_sub) << "\n";
  }

  std::vector<std::string> outputs;
  outputs.push_back(write_text_file(out_dir, "gain_vs_frequency.csv", csv.str()));
  outputs.push_back(write_sidecar(config, out_dir));
  return outputs;
}

namespace {

std::vector<std::string> run_rate_sweep(const ScenarioConfig& config, const std::string& out_dir,
                                        SweepAxis axis, const std::string& axis_name,
                                        const std::string& file_stem) {
  RateTable table;
  table.schemes = requested_schemes(config);
  table.trials = config.seeds.count;
  if (config.sweep_axis == axis && !config.sweep_values.empty()) {
    table.axis_values = config.sweep_values;
  } else if (axis == SweepAxis::snr) {
    table.axis_values = {config.snr_db};
  } else {
    table.axis_values = {config.band.bandwidth};
  }
  table.rates.assign(table.axis_values.size() * table.schemes.size() * table.trials, 0.0);

  parallel_for(table.trials, config.threads, [&](int trial) {
    LinkScenario scenario = make_trial(config, trial);
    if (axis == SweepAxis::snr) {
      // Geometry and analog stages are noise independent: prepare once.
      for (std::size_t s = 0; s < table.schemes.size(); ++s) {
        PreparedScheme prepared = prepare_named(scenario, table.schemes[s], config);
        const ChannelSet channels = ChannelSet::generate(prepared.layout, scenario.band,
                                                         scenario.users, scenario.path_gains);
        for (std::size_t v = 0; v < table.axis_values.size(); ++v) {
          const double sigma2 = std::pow(10.0, -table.axis_values[v] / 10.0);
          const BandPrecodingResult precoded =
              precode_band(channels, prepared.analog, scenario.transmit_power, sigma2,
                           scenario.band.cyclic_prefix, scenario.wmmse);
          table.at(static_cast<int>(v), static_cast<int>(s), trial) = precoded.report.total;
        }
      }
    } else {
      for (std::size_t v = 0; v < table.axis_values.size(); ++v) {
        scenario.band.bandwidth = table.axis_values[v];
        for (std::size_t s = 0; s < table.schemes.size(); ++s) {
          const SchemeResult result =
              finish_scheme(scenario, prepare_named(scenario, table.schemes[s], config));
          table.at(static_cast<int>(v), static_cast<int>(s), trial) = result.report.total;
        }
      }
    }
  });

  std::vector<std::string> outputs;
  outputs.push_back(
      write_text_file(out_dir, file_stem + ".csv", rate_rows_csv(table, axis_name)));
  outputs.push_back(write_text_file(out_dir, file_stem + "_summary.csv",
                                    rate_summary_csv(table, axis_name)));
  outputs.push_back(write_sidecar(config, out_dir));
  return outputs;
}

}  // namespace

std::vector<std::string> run_rate_vs_snr(const ScenarioConfig& config,
                                         const std::string& out_dir) {
  return run_rate_sweep(config, out_dir, SweepAxis::snr, "snr_db", "rate_vs_snr");
}

std::vector<std::string> run_rate_vs_bandwidth(const ScenarioConfig& config,
                                               const std::string& out_dir) {
  return run_rate_sweep(config, out_dir, SweepAxis::bandwidth, "bandwidth_hz",
                        "rate_vs_bandwidth");
}

std::vector<std::string> run_optimize_layout(const ScenarioConfig& config,
                                             const std::string& out_dir) {
  const LinkScenario trial = make_trial(config, 0);
  const Assignment assignment = assign_users(trial.layout, trial.band, trial.users);
  const OptimizeResult optimized =
      optimize_layout(trial.layout, trial.band, trial.users, assignment, config.sca);

  std::vector<std::string> outputs;
  outputs.push_back(write_text_file(out_dir, "layout.json", layout_to_json(optimized.layout) + "\n"));
  outputs.push_back(write_text_file(out_dir, "trace.csv", trace_csv(optimized.trace)));
  outputs.push_back(write_sidecar(config, out_dir));
  return outputs;
}

}  // namespace squintlab
