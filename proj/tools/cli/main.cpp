// simulate: run one fuse scenario from a config file or a built-in preset and
// write its CSV.
//
// Exit codes: 0 ok, 1 I/O failure, 2 invalid input, 3 numerical non-convergence.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "config.hpp"
#include "runner.hpp"

namespace {

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitConvergence = 3;

// FUSE_OUT_DIR overrides the config's output dir; --out overrides both.
constexpr const char* kOutDirEnv = "FUSE_OUT_DIR";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photorefractive micro-ring fuse simulator"};
  app.name("simulate");
  std::string config_path;
  std::string preset;
  std::string out_dir;
  bool list = false;
  auto* cfg_opt = app.add_option("--config", config_path, "Run configuration (TOML subset)");
  auto* preset_opt = app.add_option("--preset", preset, "Built-in figure preset");
  cfg_opt->excludes(preset_opt);
  app.add_option("--out", out_dir, "Output directory (overrides FUSE_OUT_DIR and the config)");
  app.add_flag("--list-presets", list, "Print preset names and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& n : fuse::cli::preset_names()) std::cout << n << '\n';
    return 0;
  }
  if (config_path.empty() && preset.empty()) {
    std::cerr << "simulate: one of --config or --preset is required\n" << app.help();
    return kExitValidation;
  }

  try {
    const fuse::cli::RunConfig config =
        config_path.empty() ? fuse::cli::preset_config(preset) : fuse::cli::parse_config_file(config_path);

    std::filesystem::path dir = config.output.dir;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) dir = env;
    if (!out_dir.empty()) dir = out_dir;

    const fuse::cli::Table table = fuse::cli::simulate(config);
    for (const auto& note : table.notes) std::cerr << "simulate: note: " << note << '\n';

    const std::filesystem::path path = dir / config.output_file();
    fuse::cli::write_atomic(path, fuse::cli::render_csv(table));
    std::cout << path.string() << " (" << table.rows.size() << " rows, "
              << fuse::cli::to_string(config.scenario.kind) << ")\n";
    return 0;
  } catch (const fuse::ConvergenceError& e) {
    std::cerr << "simulate: did not converge: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const fuse::NumericalError& e) {
    std::cerr << "simulate: numerical failure: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const fuse::ValidationError& e) {
    std::cerr << "simulate: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fuse::DomainError& e) {
    std::cerr << "simulate: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fuse::InfeasibleError& e) {
    std::cerr << "simulate: infeasible: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "simulate: " << e.what() << '\n';
    return kExitIo;
  }
}
