#include <chrono>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "qdswitch/scenario.hpp"

namespace {

using qdswitch::cli::json;

json build_config(const std::string& file, const std::vector<std::string>& overrides) {
  json config = file.empty() ? qdswitch::cli::default_config() : qdswitch::cli::load_config(file);
  for (const auto& o : overrides) qdswitch::cli::apply_override(config, o);
  return config;
}

void print_manifest(const qdswitch::cli::Manifest& m, const std::filesystem::path& out) {
  std::cout << m.scenario << ": wrote " << m.files.size() + 1 << " files to " << out.string() << '\n';
  for (const auto& f : m.files) std::cout << "  " << f.file << "  " << f.sha256.substr(0, 16) << '\n';
  std::cout << "  manifest.json\n";
  std::cout << m.summary.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qdswitch: quantum-dot cavity switch simulator"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list the available scenarios");

  std::string scenario, config_file, out_dir;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "run a scenario and write its artifacts");
  run->add_option("scenario", scenario, "scenario name")->required();
  run->add_option("--config", config_file, "JSON configuration merged onto the defaults");
  run->add_option("--set", overrides, "override a configuration value, e.g. device.g=13.4");
  run->add_option("--out", out_dir, "output directory")->required();

  std::string fitter, data, fit_config, fit_out;
  std::vector<std::string> fit_overrides;
  auto* fit = app.add_subcommand("fit", "fit measured data (CSV with a header and two columns)");
  fit->add_option("fitter", fitter, "lorentzian, gaussian, switching_curve, vacuum_rabi or eta")->required();
  fit->add_option("--data", data, "input CSV")->required();
  fit->add_option("--config", fit_config, "JSON configuration for the device parameters");
  fit->add_option("--set", fit_overrides, "override a configuration value");
  fit->add_option("--out", fit_out, "also write the fit artifacts to this directory");

  auto* defaults = app.add_subcommand("defaults", "print the bundled default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qdswitch::cli::kConfig;
  }

  try {
    if (list->parsed()) {
      for (const auto& s : qdswitch::cli::list_scenarios()) {
        std::cout << s.name << "\t" << s.description << '\n';
      }
      return 0;
    }
    if (defaults->parsed()) {
      std::cout << qdswitch::cli::default_config().dump(2) << '\n';
      return 0;
    }
    if (run->parsed()) {
      if (!qdswitch::cli::is_scenario(scenario)) {
        throw qdswitch::cli::ConfigError("unknown scenario '" + scenario + "' (see 'qdswitch list')");
      }
      const json config = build_config(config_file, overrides);
      const auto m = qdswitch::cli::run_scenario(scenario, config, out_dir);
      print_manifest(m, out_dir);
      return 0;
    }
    // fit
    json config = build_config(fit_config, fit_overrides);
    config["scenarios"]["fit"]["fitter"] = fitter;
    config["scenarios"]["fit"]["data"] = std::filesystem::absolute(data).string();
    std::filesystem::path target = fit_out;
    const bool scratch = fit_out.empty();
    if (scratch) {
      std::mt19937_64 rng(static_cast<std::uint64_t>(
          std::chrono::steady_clock::now().time_since_epoch().count()));
      target = std::filesystem::temp_directory_path() / ("qdswitch-fit-" + std::to_string(rng()));
    }
    const auto m = qdswitch::cli::run_scenario("fit", config, target);
    std::cout << m.summary.at("result").dump(2) << '\n';
    if (scratch) std::filesystem::remove_all(target);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "qdswitch: " << e.what() << '\n';
    return qdswitch::cli::exit_code_for(e);
  }
}
