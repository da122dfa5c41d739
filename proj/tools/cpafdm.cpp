// cpafdm <experiment> --config <path> [--seed S] [--out DIR] [--format csv|json] [--threads T]
// cpafdm validate --config <path>
#include <omp.h>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cpafdm/cli/config.hpp"
#include "cpafdm/cli/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

void print(const std::vector<cpafdm::cli::Diagnostic>& diags) {
  for (const auto& d : diags) {
    std::cerr << to_string(d.severity) << ": " << d.field << ": " << d.message << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cpafdm::cli;

  CLI::App app{"Chirp-permuted AFDM experiment runner"};
  app.set_version_flag("--version", kVersion);
  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::optional<std::string> format;
  int threads = 0;

  app.add_option("experiment", experiment,
                 "ber | papr | af | effchan | cpim | physec | keyspace | validate")
      ->required()
      ->check(CLI::IsMember({"ber", "papr", "af", "effchan", "cpim", "physec", "keyspace",
                             "validate"}));
  app.add_option("--config,-c", config_path, "experiment configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--seed,-s", seed, "master seed (overrides the config)");
  app.add_option("--out,-o", out_dir, "output directory");
  app.add_option("--format,-f", format, "csv or json (overrides the config)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads,-t", threads, "OpenMP threads (0 = runtime default)")
      ->envname("CPAFDM_THREADS")
      ->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return kExitConfig;
  }
  if (experiment != "validate") cfg.experiment = experiment_from_string(experiment);
  if (seed) cfg.seed = *seed;
  if (format) cfg.format = format_from_string(*format);

  const auto diags = validate(cfg);
  print(diags);
  if (experiment == "validate") {
    if (diags.empty()) std::cout << "ok\n";
    return has_errors(diags) ? kExitConfig : 0;
  }
  if (has_errors(diags)) return kExitConfig;

  if (threads > 0) omp_set_num_threads(threads);
  try {
    const RunResult res = run(cfg, out_dir);
    for (const auto& f : res.files) std::cout << f.string() << "\n";
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
