#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "asep/app.hpp"

using namespace asep;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("asep_app_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string file(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name, std::ios::binary) << text;
    return (dir / name).string();
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json summary(const RunOutcome& r) { return nlohmann::json::parse(slurp(fs::path(r.output_dir) / "summary.json")); }

}  // namespace

TEST_CASE("fourier run: CSV plus a summary with the fitted exponent") {
  Scratch s("fourier");
  const auto cfg = s.file("f.ini", "[run]\nsubcommand = fourier\n[model]\ndimension = 1\n[fourier]\nlambda = logspace(1e-4, 1e-10, 13)\n[output]\ndir = " +
                                       (s.dir / "out").string() + "\n");
  const auto r = run_config_file(cfg);
  REQUIRE(r.exit_code == 0);
  const auto j = summary(r);
  CHECK(j["status"] == "ok");
  CHECK(std::abs(j["results"]["fitted_exponent"].get<double>() + 0.25) <= 0.02);
  CHECK(j["config"]["fourier.tol"] == "0.0001");
  CHECK(j.contains("versions"));
  CHECK(j.contains("wall_time_seconds"));
  const auto csv = slurp(fs::path(r.output_dir) / "fourier.csv");
  CHECK(csv.rfind("d,lambda,integral,fit_exponent,residual\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 14);
}

TEST_CASE("oracle run: Laplace gap below 1e-6 at N = 10") {
  Scratch s("oracle");
  const auto cfg = s.file("o.ini", "[oracle]\nsites = 10\nlambda = 1\n[output]\ndir = " + (s.dir / "out").string() + "\n");
  const auto r = run_config_file(cfg, Subcommand::Oracle);
  REQUIRE(r.exit_code == 0);
  const auto j = summary(r);
  CHECK(j["results"]["laplace_max_relative_gap"].get<double>() < 1e-6);
  CHECK(j["results"]["stationarity_residual"].get<double>() < 1e-12);
}

TEST_CASE("invalid density exits 2 naming the key, before any output") {
  Scratch s("bad");
  const auto cfg = s.file("b.ini", "[model]\ndensity = 1.2\n[output]\ndir = " + (s.dir / "out").string() + "\n");
  const auto r = run_config_file(cfg, Subcommand::Simulate);
  CHECK(r.exit_code == 2);
  CHECK(r.message.find("model.density") != std::string::npos);
  CHECK_FALSE(fs::exists(s.dir / "out"));
  CHECK(run_config_file((s.dir / "missing.ini").string(), Subcommand::Fourier).exit_code == 2);
  CHECK(run_config_file(s.file("n.ini", "[model]\ndensity = 0.5\n")).exit_code == 2);  // no subcommand anywhere
}

TEST_CASE("compute failures exit 1 and still leave a summary") {
  Scratch s("compute");
  // a quadrature tolerance no mesh can meet
  const auto cfg = s.file("c.ini", "[fourier]\ntol = 1e-300\n[output]\ndir = " + (s.dir / "out").string() + "\n");
  const auto r = run_config_file(cfg, Subcommand::Fourier);
  CHECK(r.exit_code == 1);
  REQUIRE_FALSE(r.output_dir.empty());
  CHECK(summary(r)["status"] == "failed");
}

TEST_CASE("runs never share an output directory") {
  Scratch s("ns");
  const auto cfg = s.file("o.ini", "[oracle]\nsites = 6\n[output]\ndir = " + (s.dir / "out").string() + "\n");
  const auto a = run_config_file(cfg, Subcommand::Oracle);
  const auto b = run_config_file(cfg, Subcommand::Oracle);
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(a.output_dir != b.output_dir);
  CHECK(fs::path(a.output_dir).filename().string().rfind("oracle-", 0) == 0);

  const auto fixed = s.file("f.ini", "[oracle]\nsites = 6\n[output]\nnamespaced = false\ndir = " + (s.dir / "fixed").string() + "\n");
  const auto c = run_config_file(fixed, Subcommand::Oracle);
  CHECK(c.output_dir == (s.dir / "fixed").string());
  CHECK(fs::exists(s.dir / "fixed" / "laplace.csv"));
}

TEST_CASE("a simulate run is reproduced from its summary alone") {
  Scratch s("repro");
  const auto cfg = s.file("s.ini",
                          "[run]\nsubcommand = simulate\nthreads = 2\n[sim]\nlattice = 64\nt_obs = 1, 2, 3, 4, 5\nreplicas = 12\nseed = 99\n"
                          "[output]\ndir = " + (s.dir / "a").string() + "\n");
  const auto a = run_config_file(cfg);
  REQUIRE(a.exit_code == 0);
  const auto j = summary(a);
  CHECK(j["seeds"][0]["seed"] == 99);

  // rebuild a config file from the echo, change only where results go and the thread count
  std::string text;
  for (const auto& [k, v] : j["config"].items()) {
    if (k == "output.dir")
      text += k + " = " + (s.dir / "b").string() + "\n";
    else if (k == "run.threads")
      text += k + " = 1\n";
    else
      text += k + " = " + v.get<std::string>() + "\n";
  }
  const auto b = run_config_file(s.file("again.ini", text));
  REQUIRE(b.exit_code == 0);
  for (const char* f : {"structure.csv", "diffusivity.csv", "diffusivity_current.csv", "spread.csv"})
    CHECK(slurp(fs::path(a.output_dir) / f) == slurp(fs::path(b.output_dir) / f));
}

TEST_CASE("resolvent run writes one row per lambda and degree") {
  Scratch s("res");
  const auto cfg = s.file("r.ini", "[resolvent]\nlambda = 0.1, 0.01\ndegree = 2, 3, 4\nwindow = 12\ncheck_window = false\n[output]\ndir = " +
                                       (s.dir / "out").string() + "\n");
  const auto r = run_config_file(cfg, Subcommand::Resolvent);
  REQUIRE(r.exit_code == 0);
  const auto csv = slurp(fs::path(r.output_dir) / "resolvent.csv");
  CHECK(csv.rfind("lambda,n,dynamics,M,value,converged,iterations\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK(summary(r)["results"]["monotonicity_ok"] == true);
}
