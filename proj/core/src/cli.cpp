#include "squintlab/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "squintlab/experiments.hpp"

namespace squintlab {

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string schemes;
  int threads = -1;
};

void add_common(CLI::App* cmd, CommonOptions* opts, bool needs_out) {
  cmd->add_option("--config", opts->config_path, "Scenario config JSON file")->required();
  if (needs_out) cmd->add_option("--out", opts->out_dir, "Output directory");
  cmd->add_option("--seed", opts->seed, "Override the base seed")
      ->each([opts](const std::string&) { opts->seed_given = true; });
  cmd->add_option("--schemes", opts->schemes,
                  "Comma-separated scheme subset (fpa,fpa_ttd,hsc_hbf)");
  cmd->add_option("--threads", opts->threads, "Worker threads (0 = hardware)");
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ScenarioConfig load_config(const CommonOptions& opts) {
  ScenarioConfig config = ScenarioConfig::from_file(opts.config_path);
  if (opts.seed_given) config.seeds.base = opts.seed;
  if (!opts.schemes.empty()) {
    config.schemes = split_csv(opts.schemes);
    config.validate();
  }
  if (opts.threads >= 0) config.threads = opts.threads;
  // The environment variable takes precedence over the flag.
  if (const char* env = std::getenv("SQUINTLAB_THREADS")) {
    config.threads = std::max(0, std::atoi(env));
  }
  return config;
}

void print_summary(const std::string& command, const std::string& status,
                   const std::vector<std::string>& outputs, const std::string& message = "") {
  nlohmann::json j;
  j["command"] = command;
  j["status"] = status;
  if (!outputs.empty()) j["outputs"] = outputs;
  if (!message.empty()) j["message"] = message;
  std::cout << j.dump() << std::endl;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Wideband near-field movable-antenna beamforming experiments"};
  app.require_subcommand(1);

  CommonOptions opts;
  CLI::App* convergence = app.add_subcommand("convergence", "Layout-optimizer convergence trace");
  CLI::App* gain_vs_freq =
      app.add_subcommand("gain-vs-freq", "Per-subcarrier array gain of each scheme");
  CLI::App* rate_vs_snr = app.add_subcommand("rate-vs-snr", "Sum rate over an SNR sweep");
  CLI::App* rate_vs_bw = app.add_subcommand("rate-vs-bw", "Sum rate over a bandwidth sweep");
  CLI::App* validate = app.add_subcommand("validate-config", "Parse and validate a config file");
  CLI::App* optimize = app.add_subcommand("optimize-layout", "Optimize and persist a layout");
  for (CLI::App* cmd : {convergence, gain_vs_freq, rate_vs_snr, rate_vs_bw, optimize}) {
    add_common(cmd, &opts, true);
  }
  add_common(validate, &opts, false);

  std::string command = "";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_summary("", "config_error", {}, e.what());
    app.exit(e, std::cout, std::cerr);
    return 2;
  }

  try {
    std::vector<std::string> outputs;
    if (validate->parsed()) {
      command = "validate-config";
      load_config(opts);
    } else {
      const ScenarioConfig config = load_config(opts);
      if (convergence->parsed()) {
        command = "convergence";
        outputs = run_convergence(config, opts.out_dir);
      } else if (gain_vs_freq->parsed()) {
        command = "gain-vs-freq";
        outputs = run_gain_vs_frequency(config, opts.out_dir);
      } else if (rate_vs_snr->parsed()) {
        command = "rate-vs-snr";
        outputs = run_rate_vs_snr(config, opts.out_dir);
      } else if (rate_vs_bw->parsed()) {
        command = "rate-vs-bw";
        outputs = run_rate_vs_bandwidth(config, opts.out_dir);
      } else if (optimize->parsed()) {
        command = "optimize-layout";
        outputs = run_optimize_layout(config, opts.out_dir);
      }
    }
    print_summary(command, "ok", outputs);
    return 0;
  } catch (const ConfigError& e) {
    print_summary(command, "config_error", {}, e.what());
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    print_summary(command, "runtime_error", {}, e.what());
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace squintlab
