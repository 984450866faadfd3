#include <CLI11.hpp>

#include <exception>
#include <fstream>
#include <iostream>

#include "config.hpp"
#include "experiments.hpp"

namespace harness = fraclab::harness;

int main(int argc, char** argv) {
  CLI::App app{"fraclab: discretised fractional obstacle problems and their verification"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", harness::version());

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool dump_matrix = false;
  bool quiet = false;

  const char* commands[][2] = {
      {"eig", "principal eigenvalues of D and D0 and the existence window"},
      {"solve", "solve the obstacle problem and run every verifier"},
      {"sweep", "existence-window detection and uniqueness across starts"},
      {"potential", "Green matrices, heat kernel constants, triangle and comparability constants"},
      {"mc", "Monte Carlo estimates against matrix oracles"},
      {"all", "every subcommand in turn"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config_path, "run config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides [run] output)");
    sub->add_option("--seed", seed, "random seed (overrides [run] seed)");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--dump-matrix", dump_matrix, "write the operator as row col value triplets (eig)");
    sub->add_flag("-q,--quiet", quiet, "suppress the summary on stdout");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    harness::RunConfig cfg = harness::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    harness::RunOptions opts;
    opts.out_dir = cfg.output_dir;
    opts.jobs = jobs;
    opts.dump_matrix = dump_matrix;
    opts.log = quiet ? nullptr : &std::cout;

    std::filesystem::create_directories(opts.out_dir);
    std::ofstream(opts.out_dir / "config.ini") << harness::serialize_config(cfg);
    const harness::RunResult r = harness::run_command(command, cfg, opts);
    std::ofstream(opts.out_dir / "manifest.json") << harness::manifest(command, cfg, r.passed).dump(2) << '\n';
    if (!quiet) std::cout << (r.passed ? "all verifiers passed" : "some verifiers FAILED") << '\n';
    return r.passed ? 0 : 1;
  } catch (const harness::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
