#include "phaseest/experiment.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

// Exit codes: 2 for configuration problems, 3 for runtime failures.
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

int run(const std::string& command, const std::string& config_path,
        const std::optional<uint64_t>& seed, const std::optional<uint64_t>& samples,
        const std::optional<std::string>& out, const std::optional<unsigned>& threads,
        const std::optional<std::string>& in) {
  phaseest::ExperimentConfig cfg;
  try {
    cfg = phaseest::ExperimentConfig::load(config_path);
    if (cfg.command != command)
      throw std::invalid_argument("config command '" + cfg.command +
                                  "' does not match subcommand '" + command + "'");
    if (seed) cfg.seed = *seed;
    if (samples) cfg.samples = *samples;
    if (out) cfg.out = *out;
    if (threads) cfg.threads = *threads;
    if (in) cfg.in = *in;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    std::string text = phaseest::run_command(cfg);
    if (cfg.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open output file '" + cfg.out + "'");
      f << text;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NOON-state phase estimation simulator and analytics"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<uint64_t> seed, samples;
  std::optional<std::string> out, in;
  std::optional<unsigned> threads;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "experiment config (JSON)");
    if (needs_config) opt->required();
    sub->add_option("--seed", seed, "base RNG seed (overrides config)");
    sub->add_option("--samples", samples, "Monte Carlo samples (overrides config)");
    sub->add_option("--out", out, "output path (default stdout)");
    sub->add_option("--threads", threads, "worker threads; affects speed only");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo variance estimates");
  CLI::App* enumerate = app.add_subcommand("enumerate", "exact small-instance variances");
  CLI::App* canonical = app.add_subcommand("canonical", "equivalent-state analytics");
  CLI::App* sweep = app.add_subcommand("sweep", "batch simulate with derived seeds");
  CLI::App* table = app.add_subcommand("table", "fit variance scaling exponents");
  for (CLI::App* sub : {simulate, enumerate, canonical, sweep, table}) add_common(sub, true);
  table->add_option("--in", in, "input CSV from simulate/sweep (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  for (CLI::App* sub : {simulate, enumerate, canonical, sweep, table})
    if (sub->parsed()) return run(sub->get_name(), config_path, seed, samples, out, threads, in);
  return kConfigError;
}
