#include "doctest.h"

#include <string>

#include "asep/config.hpp"
#include "asep/error.hpp"

using namespace asep;

namespace {

// message of the Config error thrown by parse_config, or "" when it parses
std::string config_failure(const std::string& text) {
  try {
    parse_config(text, "t.ini");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults parse from an empty file") {
  const auto c = parse_config("");
  CHECK_FALSE(c.has_subcommand);
  CHECK(c.model.dimension == 1);
  CHECK(c.model.density == 0.5);
  CHECK(c.fourier.lambda.size() == 13);
  CHECK(c.fourier.lambda.front() == doctest::Approx(1e-4));
  CHECK(c.fourier.lambda.back() == doctest::Approx(1e-10));
}

TEST_CASE("sections, qualified keys and comments") {
  const auto c = parse_config(
      "# header comment\n"
      "; also a comment\n"
      "run.subcommand = resolvent\n"
      "[model]\n"
      "dimension = 2   # trailing\n"
      "density=0.25\n"
      "jump_law = 1,0:1; 0,1:0.5; 0,-1:0.5\n"
      "[sim]\n"
      "lattice = 32x16\n"
      "t_obs = 0.5, 1, 2\n"
      "ensemble = canonical\n"
      "[resolvent]\n"
      "degree = 2, 4\n"
      "dynamics = free\n"
      "[oracle]\n"
      "sites = 4x4\n"
      "lambda = logspace(1, 0.01, 3)\n");
  CHECK(c.has_subcommand);
  CHECK(c.subcommand == Subcommand::Resolvent);
  CHECK(c.model.dimension == 2);
  CHECK(c.model.density == 0.25);
  CHECK(c.sim.lattice == std::vector<int>{32, 16});
  CHECK(c.sim.t_obs == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(c.sim.ensemble == InitialEnsemble::Canonical);
  CHECK(c.resolvent.degree == std::vector<int>{2, 4});
  CHECK(c.resolvent.dynamics == Dynamics::Free);
  REQUIRE(c.oracle.lambda.size() == 3);
  CHECK(c.oracle.lambda[1] == doctest::Approx(0.1));
  const auto law = model_law(c.model);
  CHECK(law.entries().size() == 3);
  CHECK(law.mean()[0] == doctest::Approx(1.0));
}

TEST_CASE("density outside (0,1) is rejected by key name") {
  const auto msg = config_failure("[model]\ndensity = 1.2\n");
  CHECK(msg.find("model.density") != std::string::npos);
  CHECK(config_failure("[model]\ndensity = 0\n").find("model.density") != std::string::npos);
}

TEST_CASE("parse errors carry the line number") {
  CHECK(config_failure("[model]\n\ndimension\n").find("t.ini:3:") == 0);
  CHECK(config_failure("[model\n").find("t.ini:1:") == 0);
  CHECK(config_failure("[model]\ndensity = abc\n").find("t.ini:2: model.density") == 0);
  CHECK(config_failure("dimension = 1\n").find("outside any section") != std::string::npos);
}

TEST_CASE("unknown and duplicate keys are rejected") {
  const auto unknown = config_failure("[model]\ndensty = 0.5\n");
  CHECK(unknown.find("t.ini:2:") == 0);
  CHECK(unknown.find("model.densty") != std::string::npos);
  CHECK(config_failure("[nosuch]\nx = 1\n").find("nosuch.x") != std::string::npos);
  CHECK(config_failure("[model]\ndensity = 0.5\ndensity = 0.4\n").find("duplicate") != std::string::npos);
  CHECK(config_failure("[model]\ndensity =\n").find("empty value") != std::string::npos);
}

TEST_CASE("validation names the offending key") {
  CHECK(config_failure("[model]\ndimension = 3\n").find("model.dimension") == 0);
  CHECK(config_failure("[model]\njump_law = 1:0.5; -1:0.5\n").find("model.jump_law") == 0);  // symmetric, no drift
  CHECK(config_failure("[model]\njump_law = 1,0:1\n").find("model.jump_law") != std::string::npos);
  CHECK(config_failure("[sim]\nt_obs = 2, 1\n").find("sim.t_obs") == 0);
  CHECK(config_failure("[sim]\nreplicas = 1\n").find("sim.replicas") == 0);
  CHECK(config_failure("[sim]\nlattice = 8x8\n").find("sim.lattice") == 0);
  CHECK(config_failure("[sim]\nseed = -3\n").find("sim.seed") != std::string::npos);
  CHECK(config_failure("[resolvent]\ndegree = 5\n").find("resolvent.degree") == 0);
  CHECK(config_failure("[resolvent]\nlambda = 0.1, -1\n").find("resolvent.lambda") == 0);
  CHECK(config_failure("[resolvent]\ndynamics = soft\n").find("resolvent.dynamics") != std::string::npos);
  CHECK(config_failure("[fourier]\nlambda = 1e-3, 1e-4\n").find("fourier.lambda") == 0);
  CHECK(config_failure("[fourier]\ntol = 2\n").find("fourier.tol") == 0);
  CHECK(config_failure("[oracle]\nsites = 17\n").find("oracle.sites") == 0);
  CHECK(config_failure("[run]\nsubcommand = plot\n").find("run.subcommand") != std::string::npos);
  CHECK(config_failure("[run]\nthreads = -1\n").find("run.threads") == 0);
  CHECK(config_failure("[output]\nnamespaced = maybe\n").find("output.namespaced") != std::string::npos);
}

TEST_CASE("formatted config parses back to the same entries") {
  const auto c = parse_config(
      "[run]\nsubcommand = simulate\nthreads = 3\n[model]\ndensity = 0.3\n[sim]\nt_obs = 0.1, 0.7, 1e3\nseed = 123456789012\n"
      "[fourier]\nlambda = logspace(1e-3, 1e-8, 7)\n");
  const auto again = parse_config(format_config(c));
  CHECK(config_entries(again) == config_entries(c));
  CHECK(again.sim.t_obs == c.sim.t_obs);  // exact: 17 digits survive the round trip
  CHECK(again.fourier.lambda == c.fourier.lambda);
  CHECK(again.sim.seed == 123456789012ULL);
}

TEST_CASE("subcommand names") {
  for (auto s : {Subcommand::Simulate, Subcommand::Resolvent, Subcommand::Fourier, Subcommand::Oracle})
    CHECK(parse_subcommand(subcommand_name(s)) == s);
  CHECK_THROWS_AS(parse_subcommand("plot"), Error);
}

TEST_CASE("missing file is a config failure") {
  try {
    load_config("/nonexistent/dir/x.ini");
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}
