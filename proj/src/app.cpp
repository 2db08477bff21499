#include "asep/app.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "json.hpp"

#include "asep/csv.hpp"
#include "asep/error.hpp"
#include "asep/exact_oracle.hpp"
#include "asep/fourier.hpp"
#include "asep/kmc.hpp"
#include "asep/resolvent.hpp"

namespace asep {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Context {
  const RunConfig& config;
  fs::path dir;
  std::ostream* log;
  json results = json::object();
  json seeds = json::array();
  json files = json::array();
  std::string invariant_failure;  // first hard invariant that failed, if any

  void say(const std::string& s) const {
    if (log) *log << s << '\n';
  }
  void write(const std::string& name, const CsvSchema& schema, const std::vector<CsvRecord>& rows) {
    emit_results(rows, schema, (dir / name).string());
    files.push_back(name);
  }
  void violated(const std::string& what) {
    say("invariant violated: " + what);
    if (invariant_failure.empty()) invariant_failure = what;
  }
};

json versions() {
  return {
      {"asep", kVersion},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                    std::to_string(BOOST_VERSION % 100)},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                            "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
      {"compiler", __VERSION__},
  };
}

std::string utc_stamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

fs::path prepare_output(const RunConfig& c) {
  fs::path base(c.output.dir);
  std::error_code ec;
  if (!c.output.namespaced) {
    fs::create_directories(base, ec);
    if (ec) fail(ErrorKind::Io, base.string() + ": " + ec.message());
    return base;
  }
  const std::string stem = std::string(subcommand_name(c.subcommand)) + "-" + utc_stamp();
  // never reuse an existing directory, so two runs cannot touch each other's files
  for (int k = 0;; ++k) {
    fs::path p = base / (k ? stem + "-" + std::to_string(k) : stem);
    fs::create_directories(base, ec);
    if (ec) fail(ErrorKind::Io, base.string() + ": " + ec.message());
    if (fs::create_directory(p, ec)) return p;
    if (ec) fail(ErrorKind::Io, p.string() + ": " + ec.message());
  }
}

TorusGeometry geometry_of(int dimension, const std::vector<int>& sides) {
  return dimension == 1 ? TorusGeometry(1, sides[0]) : TorusGeometry(2, sides[0], sides[1]);
}

json pair_json(const std::array<double, 2>& v, int d) {
  json out = json::array();
  for (int i = 0; i < d; ++i) out.push_back(v[static_cast<std::size_t>(i)]);
  return out;
}

// Power-law fit of y(t); the series helper wants its abscissa decreasing.
std::optional<ScalingFit> time_fit(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() < 5) return std::nullopt;
  for (double v : y)
    if (!(v > 0.0)) return std::nullopt;
  ScalingSeries s;
  s.lambda.assign(t.rbegin(), t.rend());
  s.value.assign(y.rbegin(), y.rend());
  return fit_scaling(s, ScalingModel::Power);
}

json fit_json(const std::optional<ScalingFit>& f) {
  if (!f) return nullptr;
  return {{"exponent", f->exponent}, {"stderr", f->stderr}, {"intercept", f->intercept}, {"residual_norm", f->residual_norm}};
}

void run_simulate(Context& ctx) {
  const auto& c = ctx.config;
  const int d = c.model.dimension;
  SimulationParams p;
  p.geometry = geometry_of(d, c.sim.lattice);
  p.law = model_law(c.model);
  p.density = c.model.density;
  p.times = c.sim.t_obs;
  p.ensemble = c.sim.ensemble;
  ctx.seeds.push_back({{"seed", c.sim.seed}, {"replicas", c.sim.replicas}, {"streams", "replica r uses stream (seed, r)"}});
  ctx.say("simulate: " + std::to_string(c.sim.replicas) + " replicas on " + std::to_string(p.geometry.sites()) + " sites");

  const auto stats = simulate_statistics(p, c.sim.replicas, c.sim.seed, c.threads);

  CsvSchema s_schema{{"t", ColumnType::Real}, {"x1", ColumnType::Integer}};
  if (d == 2) s_schema.push_back({"x2", ColumnType::Integer});
  s_schema.push_back({"S_hat", ColumnType::Real});
  s_schema.push_back({"stderr", ColumnType::Real});
  std::vector<CsvRecord> rows;
  for (const auto& r : estimate_structure_function(stats)) {
    CsvRecord rec{r.t, std::int64_t{r.x[0]}};
    if (d == 2) rec.emplace_back(std::int64_t{r.x[1]});
    rec.emplace_back(r.value);
    rec.emplace_back(r.stderr);
    rows.push_back(std::move(rec));
  }
  ctx.write("structure.csv", s_schema, rows);

  const CsvSchema d_schema{{"t", ColumnType::Real},
                           {"i", ColumnType::Integer},
                           {"j", ColumnType::Integer},
                           {"D_hat", ColumnType::Real},
                           {"stderr", ColumnType::Real}};
  json diffusivity = json::object();
  json warnings = json::array();
  auto emit_series = [&](const DiffusivitySeries& series, const std::string& file, const std::string& label) {
    std::vector<CsvRecord> out;
    std::vector<double> t, d11;
    for (const auto& e : series.estimates) {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          out.push_back({e.t, std::int64_t{i + 1}, std::int64_t{j + 1}, e.value[i][j], e.stderr[i][j]});
      t.push_back(e.t);
      d11.push_back(e.value[0][0]);
    }
    ctx.write(file, d_schema, out);
    for (const auto& w : series.warnings) warnings.push_back(label + ": " + w);
    diffusivity[label] = {{"file", file}, {"refused_times", series.refused_times}, {"D11_time_exponent", fit_json(time_fit(t, d11))}};
  };
  emit_series(estimate_diffusivity(stats), "diffusivity.csv", "structure");
  emit_series(estimate_diffusivity_from_current(stats), "diffusivity_current.csv", "current");
  ctx.results["diffusivity"] = diffusivity;

  const auto v = estimate_velocity(stats);
  json velocity = {{"structure", {{"value", pair_json(v.value, d)}, {"stderr", pair_json(v.stderr, d)}}}};
  for (const auto& w : v.warnings) warnings.push_back("velocity: " + w);
  if (c.sim.ensemble == InitialEnsemble::Bernoulli && c.sim.replicas > 2) {
    const auto vc = estimate_velocity_from_current(stats);
    velocity["current"] = {{"value", pair_json(vc.value, d)}, {"stderr", pair_json(vc.stderr, d)}};
  }
  ctx.results["velocity"] = velocity;

  if (d == 1) {
    const CsvSchema sp_schema{{"t", ColumnType::Real},
                              {"abs_first_moment", ColumnType::Real},
                              {"stderr", ColumnType::Real},
                              {"bond_variance", ColumnType::Real},
                              {"bond_stderr", ColumnType::Real}};
    std::vector<CsvRecord> out;
    std::vector<double> t, bv;
    for (const auto& sp : estimate_current_spread(stats)) {
      out.push_back({sp.t, sp.value, sp.stderr, sp.bond_variance, sp.bond_stderr});
      t.push_back(sp.t);
      bv.push_back(sp.bond_variance);
    }
    ctx.write("spread.csv", sp_schema, out);
    ctx.results["spread_time_exponent"] = fit_json(time_fit(t, bv));
  }
  ctx.results["warnings"] = warnings;
}

void run_resolvent(Context& ctx) {
  const auto& c = ctx.config;
  const auto law = model_law(c.model);
  const CsvSchema schema{{"lambda", ColumnType::Real},   {"n", ColumnType::Integer},     {"dynamics", ColumnType::Text},
                         {"M", ColumnType::Integer},     {"value", ColumnType::Real},    {"converged", ColumnType::Boolean},
                         {"iterations", ColumnType::Integer}};
  const std::string dyn = c.resolvent.dynamics == Dynamics::HardCore ? "hardcore" : "free";
  std::vector<CsvRecord> rows;
  json table = json::array();
  for (double lambda : c.resolvent.lambda) {
    std::array<std::optional<double>, 5> value{};
    for (int n : c.resolvent.degree) {
      ResolventProblem p;
      p.lambda = lambda;
      p.degree = n;
      p.window = c.resolvent.window;
      p.dynamics = c.resolvent.dynamics;
      p.tolerance = c.resolvent.tolerance;
      p.max_iterations = c.resolvent.max_iterations;
      p.law = law;
      p.check_window = c.resolvent.check_window;
      ctx.say("resolvent: lambda " + std::to_string(lambda) + ", degree " + std::to_string(n));
      const auto r = solve_truncated_resolvent(p);
      value[static_cast<std::size_t>(n)] = r.value;
      const bool converged = c.resolvent.check_window ? r.window_converged : true;
      rows.push_back({lambda, std::int64_t{n}, dyn, std::int64_t{c.resolvent.window}, r.value, converged,
                      static_cast<std::int64_t>(r.iterations)});
      json entry = {{"lambda", lambda}, {"n", n}, {"value", r.value}, {"states", r.states}, {"iterations", r.iterations}};
      if (c.resolvent.check_window) {
        entry["doubled_window_value"] = r.doubled_window_value;
        entry["window_change"] = r.window_change;
      }
      table.push_back(entry);
    }
    // odd truncations sit below, even ones above: L3 <= L4 <= L2
    const double slack = 10.0 * c.resolvent.tolerance * std::abs(value[2].value_or(value[3].value_or(0.0)));
    auto le = [&](int a, int b) {
      if (value[static_cast<std::size_t>(a)] && value[static_cast<std::size_t>(b)] &&
          !(*value[static_cast<std::size_t>(a)] <= *value[static_cast<std::size_t>(b)] + slack))
        ctx.violated("monotonicity at lambda = " + std::to_string(lambda) + ": L" + std::to_string(a) + " > L" +
                     std::to_string(b));
    };
    le(3, 2);
    le(3, 4);
    le(4, 2);
  }
  ctx.write("resolvent.csv", schema, rows);
  ctx.results["values"] = table;
  ctx.results["monotonicity_ok"] = ctx.invariant_failure.empty();
}

void run_fourier(Context& ctx) {
  const auto& c = ctx.config;
  const int d = c.model.dimension;
  ScalingSeries series;
  for (double lambda : c.fourier.lambda) {
    ctx.say("fourier: lambda " + std::to_string(lambda));
    series.lambda.push_back(lambda);
    series.value.push_back(degree3_lower_integral(lambda, d, c.fourier.tol).value);
  }
  // d = 1 scales as a power of lambda, d = 2 as a power of |log lambda|
  const auto model = d == 1 ? ScalingModel::Power : ScalingModel::LogPower;
  const auto fit = fit_scaling(series, model);
  const CsvSchema schema{{"d", ColumnType::Integer},
                         {"lambda", ColumnType::Real},
                         {"integral", ColumnType::Real},
                         {"fit_exponent", ColumnType::Real},
                         {"residual", ColumnType::Real}};
  std::vector<CsvRecord> rows;
  for (std::size_t i = 0; i < series.lambda.size(); ++i)
    rows.push_back({std::int64_t{d}, series.lambda[i], series.value[i], fit.exponent, fit.residuals[i]});
  ctx.write("fourier.csv", schema, rows);
  ctx.results["model"] = d == 1 ? "power of lambda" : "power of |log lambda|";
  ctx.results["fitted_exponent"] = fit.exponent;
  ctx.results["exponent_stderr"] = fit.stderr;
  ctx.results["residual_norm"] = fit.residual_norm;
}

void run_oracle(Context& ctx) {
  const auto& c = ctx.config;
  const auto gen = build_generator_matrix(geometry_of(c.model.dimension, c.oracle.sites), model_law(c.model));
  const double residual = check_stationarity(gen, c.model.density);
  ctx.results["states"] = gen.states();
  ctx.results["stationarity_residual"] = residual;
  if (!(residual < 1e-10)) ctx.violated("product measure is not stationary (residual " + std::to_string(residual) + ")");

  const CsvSchema schema{{"lambda", ColumnType::Real},       {"lhs", ColumnType::Real},
                         {"rhs", ColumnType::Real},          {"pairing", ColumnType::Real},
                         {"quadrature_error", ColumnType::Real}, {"relative_gap", ColumnType::Real}};
  std::vector<CsvRecord> rows;
  if (c.model.density != 0.5) {
    ctx.results["laplace"] = "skipped: the identity is checked at density 0.5";
  } else {
    double worst = 0.0;
    for (double lambda : c.oracle.lambda) {
      ctx.say("oracle: Laplace identity at lambda " + std::to_string(lambda));
      const auto l = laplace_identity_check(gen, c.model.density, lambda);
      rows.push_back({l.lambda, l.lhs, l.rhs, l.pairing, l.quadrature_error, l.relative_gap});
      worst = std::max(worst, l.relative_gap);
    }
    ctx.results["laplace_max_relative_gap"] = worst;
    if (!(worst < 1e-6)) ctx.violated("Laplace identity gap " + std::to_string(worst));
  }
  ctx.write("laplace.csv", schema, rows);
}

int exit_for(const Error& e) { return e.kind() == ErrorKind::Config ? kExitConfig : kExitCompute; }

}  // namespace

RunOutcome run_config(const RunConfig& config, std::ostream* log) {
  RunOutcome out;
  if (!config.has_subcommand) {
    out.exit_code = kExitConfig;
    out.message = "run.subcommand: no subcommand given";
    return out;
  }
  const auto start = std::chrono::steady_clock::now();
  std::optional<Context> ctx;
  try {
    ctx.emplace(Context{config, prepare_output(config), log, json::object(), json::array(), json::array(), {}});
    out.output_dir = ctx->dir.string();
    switch (config.subcommand) {
      case Subcommand::Simulate: run_simulate(*ctx); break;
      case Subcommand::Resolvent: run_resolvent(*ctx); break;
      case Subcommand::Fourier: run_fourier(*ctx); break;
      case Subcommand::Oracle: run_oracle(*ctx); break;
    }
    if (!ctx->invariant_failure.empty()) {
      out.exit_code = kExitCompute;
      out.message = ctx->invariant_failure;
    }
  } catch (const Error& e) {
    out.exit_code = exit_for(e);
    out.message = e.what();
  } catch (const std::exception& e) {
    out.exit_code = kExitCompute;
    out.message = e.what();
  }
  if (!ctx) return out;

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json config_echo = json::object();
  for (const auto& [k, v] : config_entries(config)) config_echo[k] = v;
  const json summary = {
      {"subcommand", std::string(subcommand_name(config.subcommand))},
      {"status", out.exit_code == kExitOk ? "ok" : "failed"},
      {"exit_code", out.exit_code},
      {"message", out.message},
      {"config", config_echo},
      {"versions", versions()},
      {"seeds", ctx->seeds},
      {"wall_time_seconds", wall},
      {"files", ctx->files},
      {"results", ctx->results},
  };
  std::ofstream f(ctx->dir / "summary.json", std::ios::binary | std::ios::trunc);
  f << summary.dump(2) << '\n';
  if (!f && out.exit_code == kExitOk) {
    out.exit_code = kExitCompute;
    out.message = "cannot write summary.json";
  }
  return out;
}

RunOutcome run_config_file(const std::string& path, std::optional<Subcommand> subcommand, std::ostream* log) {
  RunConfig config;
  try {
    config = load_config(path);
  } catch (const Error& e) {
    return {exit_for(e), e.what(), {}};
  } catch (const std::exception& e) {
    return {kExitConfig, e.what(), {}};
  }
  if (subcommand) {
    config.subcommand = *subcommand;
    config.has_subcommand = true;
  }
  return run_config(config, log);
}

}  // namespace asep
