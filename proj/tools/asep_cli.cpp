// Command-line front end. Talks to the toolkit only through the C interface.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "asep/asep.h"

namespace {

int run(const std::string& path, const char* subcommand, bool quiet) {
  asep_run* r = nullptr;
  if (asep_run_config(path.c_str(), subcommand, quiet ? 0 : 1, &r) != ASEP_OK) {
    std::fprintf(stderr, "error: %s\n", asep_last_error());
    return 1;
  }
  const int code = asep_run_exit_code(r);
  const std::string dir = asep_run_output_dir(r);
  if (code != 0) std::fprintf(stderr, "error: %s\n", asep_run_message(r));
  if (!dir.empty()) std::printf("results in %s\n", dir.c_str());
  asep_run_destroy(r);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ASEP superdiffusivity toolkit"};
  app.set_version_flag("--version", std::string(asep_version()));
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "no progress messages");

  std::string path;
  auto* run_cmd = app.add_subcommand("run", "run the subcommand named by run.subcommand in the config");
  run_cmd->add_option("config", path, "config file")->required();

  const char* names[] = {"simulate", "resolvent", "fourier", "oracle"};
  const char* help[] = {"Monte Carlo structure function, velocity and diffusivity",
                        "truncated resolvent sweep over lambda and degree",
                        "degree-3 Fourier integrals and their scaling fit",
                        "exact small-torus identity checks"};
  for (int i = 0; i < 4; ++i) app.add_subcommand(names[i], help[i])->add_option("config", path, "config file")->required();

  auto* check_cmd = app.add_subcommand("check", "validate a config and print its effective values");
  check_cmd->add_option("config", path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  if (check_cmd->parsed()) {
    asep_config* c = nullptr;
    if (asep_config_load(path.c_str(), &c) != ASEP_OK) {
      std::fprintf(stderr, "error: %s\n", asep_last_error());
      return 2;
    }
    std::fputs(asep_config_text(c), stdout);
    asep_config_destroy(c);
    return 0;
  }
  if (run_cmd->parsed()) return run(path, nullptr, quiet);
  for (const char* n : names)
    if (app.got_subcommand(n)) return run(path, n, quiet);
  return 2;
}
