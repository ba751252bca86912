#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "eigennet/harness.hpp"

namespace h = eigennet::harness;

int main(int argc, char** argv) {
  CLI::App app{"Decentralized eigenvalue estimation experiments"};
  std::string experiment;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  app.add_option("experiment", experiment,
                 "ac-compare | eig-converge | multi-eig | roc | audit-messages | prop-check")
      ->required();
  app.add_option("--config", config_path, "key = value configuration file")->required();
  app.add_option("--out", out_dir, "output directory (overrides the config's output key)");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--trials", trials, "Monte-Carlo trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  h::ExperimentConfig cfg;
  try {
    cfg = h::load_config_file(config_path, h::experiment_from_string(experiment));
    if (seed) cfg.seed = *seed;
    if (trials) {
      cfg.trials = *trials;
      cfg.h0_trials = *trials;
      cfg.h1_trials = *trials;
    }
    if (!out_dir.empty()) cfg.output = out_dir;
    cfg.validate();
  } catch (const eigennet::InvalidArgument& e) {
    std::cerr << "eigennet: invalid configuration\n" << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "eigennet: " << e.what() << '\n';
    return 2;
  }

  try {
    const auto report = h::run(cfg);
    for (const auto& path : h::emit_csv(report, cfg.output)) std::cout << path.string() << '\n';
    std::cout << "trials " << report.trial_seeds.size() << ", degenerate runs " << report.degenerate_runs << ", "
              << h::format_double(report.duration_s) << " s\n";
    for (const auto& f : report.failures) std::cerr << "check failed: " << f << '\n';
    return report.ok ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "eigennet: " << e.what() << '\n';
    return 2;
  }
}
