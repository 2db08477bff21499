#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asep/kmc.hpp"
#include "asep/lattice.hpp"
#include "asep/quotient.hpp"

namespace asep {

enum class Subcommand { Simulate, Resolvent, Fourier, Oracle };

std::string_view subcommand_name(Subcommand s);
// Throws ErrorKind::Config for anything but the four names.
Subcommand parse_subcommand(std::string_view name);

struct ModelConfig {
  int dimension = 1;
  double density = 0.5;
  std::string jump_law = "tasep";  // "tasep", "symmetric" or "dx[,dy]:rate; ..."
};

struct SimConfig {
  std::vector<int> lattice{1024};  // one side per dimension
  std::vector<double> t_obs{1.0, 2.0, 4.0, 8.0, 16.0};
  int replicas = 64;
  std::uint64_t seed = 1;
  InitialEnsemble ensemble = InitialEnsemble::Bernoulli;
};

struct ResolventConfig {
  std::vector<double> lambda{1e-2};
  std::vector<int> degree{2, 3, 4};
  int window = 16;
  Dynamics dynamics = Dynamics::HardCore;
  double tolerance = 1e-10;
  int max_iterations = 10000;
  bool check_window = true;
};

struct FourierConfig {
  std::vector<double> lambda;  // defaults to 13 points log-spaced over [1e-10, 1e-4]
  double tol = 1e-4;
};

struct OracleConfig {
  std::vector<int> sites{10};  // one side per dimension, at most 16 sites in total
  std::vector<double> lambda{1.0};
};

struct OutputConfig {
  std::string dir = "asep-output";
  bool namespaced = true;  // write into dir/<subcommand>-<timestamp>
};

struct RunConfig {
  bool has_subcommand = false;
  Subcommand subcommand = Subcommand::Simulate;
  int threads = 0;  // 0: all available cores
  ModelConfig model;
  SimConfig sim;
  ResolventConfig resolvent;
  FourierConfig fourier;
  OracleConfig oracle;
  OutputConfig output;
};

// Sectioned key=value text: "[section]" headers, "key = value" lines, '#' or ';' comments.
// Keys may also be written fully qualified ("model.density = 0.5") outside any section.
// Lists are comma separated; "logspace(hi, lo, n)" expands to n log-spaced values.
// Parse errors carry "<source>:<line>:"; validation errors start with the offending key.
RunConfig parse_config(std::string_view text, std::string_view source = "config");
RunConfig load_config(const std::string& path);

// Every key with its effective value, in a fixed order. Feeding format_config's output
// back through parse_config reproduces the same configuration.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);
std::string format_config(const RunConfig& config);

// The jump law described by model.jump_law in model.dimension.
JumpLaw model_law(const ModelConfig& model);

}  // namespace asep
