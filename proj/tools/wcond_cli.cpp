// wcond: command-line front end of the weight-conditioning lab.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wcond/errors.hpp"
#include "wcond/harness/config.hpp"
#include "wcond/harness/csv.hpp"
#include "wcond/harness/experiments.hpp"

namespace h = wcond::harness;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "Parent directory for the run directory (overrides output_dir)");
  sub->add_option("--seed", c.seed, "Base seed (overrides the config)");
}

h::ExperimentConfig resolve(h::ExperimentKind kind, const Common& c) {
  h::ExperimentConfig cfg = h::default_config(kind);
  if (!c.config.empty()) {
    cfg = h::load_config(c.config);
    if (cfg.kind != kind) {
      throw h::ConfigError("config: experiment is '" + std::string(h::to_string(cfg.kind)) +
                           "' but the subcommand runs '" + std::string(h::to_string(kind)) + "'");
    }
  }
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.seed) cfg.seed = *c.seed;
  h::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wcond - weight-conditioning numerical lab"};
  app.require_subcommand(0, 1);
  bool list_arms = false;
  app.add_flag("--list-arms", list_arms, "Print the normalization/conditioning arms and exit");

  struct Sub {
    const char* name;
    const char* help;
    h::ExperimentKind kind;
    CLI::App* app = nullptr;
    Common common;
  };
  Sub subs[] = {
      {"cond", "kappa of a matrix file before/after diagonal preconditioning", h::ExperimentKind::cond_report, nullptr, {}},
      {"vds", "row equilibration vs random diagonal scaling sweep", h::ExperimentKind::vds, nullptr, {}},
      {"quad", "gradient descent on preconditioned quadratics", h::ExperimentKind::quad, nullptr, {}},
      {"train", "training comparison across normalization/conditioning arms", h::ExperimentKind::train_compare, nullptr, {}},
      {"hessian", "finite-difference Hessian condition numbers, plain vs equilibrated", h::ExperimentKind::hessian_compare, nullptr, {}},
  };
  std::string matrix_file;
  for (auto& s : subs) {
    s.app = app.add_subcommand(s.name, s.help);
    add_common(s.app, s.common);
  }
  subs[0].app->add_option("matrix-file", matrix_file, "Matrix text file (`rows cols` header, one row per line)")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  if (list_arms) {
    for (const auto& a : h::arm_names()) std::cout << a << '\n';
    return 0;
  }
  for (auto& s : subs) {
    if (!s.app->parsed()) continue;
    try {
      const h::ExperimentConfig cfg = resolve(s.kind, s.common);
      std::optional<std::filesystem::path> matrix;
      if (s.kind == h::ExperimentKind::cond_report) matrix = matrix_file;
      const h::RunOutcome out = h::execute(cfg, matrix);
      std::cout << out.directory.string() << '\n' << out.artifacts.summary_json << '\n';
      return 0;
    } catch (const h::ConfigError& e) {
      std::cerr << "wcond: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "wcond: " << e.what() << '\n';
      return 1;
    }
  }
  std::cout << app.help();
  return 0;
}
