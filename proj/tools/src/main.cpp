#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "helios/cli/commands.hpp"
#include "helios/numerics.hpp"

int main(int argc, char** argv) {
  CLI::App app{"helios: phase-space light transport"};
  app.require_subcommand(1);

  helios::cli::RunOptions options;
  std::string out_dir = ".";
  int threads = 0;
  std::uint64_t seed = 0;
  std::string tolerances;
  std::string argument;

  struct Command {
    const char* name;
    const char* help;
    const char* arg_name;
  };
  const Command commands[] = {
      {"trace", "Integrate the rays of a scenario", "scenario"},
      {"transport", "Sample and advect a particle ensemble", "scenario"},
      {"measure", "Energy through the scenario surfaces", "scenario"},
      {"wigner", "Wave vs Liouville convergence ladder", "scenario"},
      {"validate", "Run an invariant suite (symplectic, conservation, cosphere, fermat, measure, wigner, all)",
       "suite"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option(c.arg_name, argument)->required();
    sub->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
    sub->add_flag("--plot", options.plot, "Also write SVG plots");
    sub->add_option("--threads", threads, "Worker threads (falls back to HELIOS_THREADS)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "Override the random seed");
    if (std::string(c.name) == "validate") {
      sub->add_option("--tolerances", tolerances, "JSON object of tolerance overrides")->check(CLI::ExistingFile);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : helios::cli::kUsage;
  }

  if (threads == 0) {
    if (const char* env = std::getenv("HELIOS_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        std::cerr << "error: HELIOS_THREADS must be an integer\n";
        return helios::cli::kUsage;
      }
    }
  }
  if (threads > 0) helios::set_thread_count(threads);

  const CLI::App* sub = app.get_subcommands().front();
  options.out_dir = out_dir;
  if (sub->count("--seed") > 0) options.seed = seed;
  if (!tolerances.empty()) options.tolerances = tolerances;
  return helios::cli::run_command(sub->get_name(), argument, options);
}
