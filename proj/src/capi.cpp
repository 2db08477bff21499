#include "asep/asep.h"

#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "asep/app.hpp"
#include "asep/config.hpp"
#include "asep/error.hpp"
#include "asep/exact_oracle.hpp"
#include "asep/fourier.hpp"
#include "asep/kmc.hpp"
#include "asep/resolvent.hpp"
#include "asep/variational.hpp"

struct asep_law {
  asep::JumpLaw law;
};
struct asep_config {
  asep::RunConfig config;
  std::string text;
};
struct asep_run {
  asep::RunOutcome outcome;
};
struct asep_stats {
  asep::StructureStatistics stats;
};
struct asep_oracle {
  asep::GeneratorMatrix gen;
};

namespace {

thread_local std::string last_error;

asep_status record(asep_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

asep_status status_of(asep::ErrorKind kind) {
  switch (kind) {
    case asep::ErrorKind::InvalidArgument: return ASEP_ERR_INVALID_ARGUMENT;
    case asep::ErrorKind::Compute: return ASEP_ERR_COMPUTE;
    case asep::ErrorKind::Config: return ASEP_ERR_CONFIG;
    case asep::ErrorKind::Io: return ASEP_ERR_IO;
  }
  return ASEP_ERR_INTERNAL;
}

// Runs f and converts every exception into a status.
template <class F>
asep_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return ASEP_OK;
  } catch (const asep::Error& e) {
    return record(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return record(ASEP_ERR_COMPUTE, "out of memory");
  } catch (const std::exception& e) {
    return record(ASEP_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(ASEP_ERR_INTERNAL, "unknown exception");
  }
}

#define ASEP_REQUIRE_ARG(cond, what) \
  if (!(cond)) return record(ASEP_ERR_INVALID_ARGUMENT, what)

asep::TorusGeometry geometry(const asep::JumpLaw& law, int side1, int side2) {
  return law.dimension() == 1 ? asep::TorusGeometry(1, side1) : asep::TorusGeometry(2, side1, side2);
}

}  // namespace

extern "C" {

const char* asep_version(void) { return asep::kVersion; }

const char* asep_last_error(void) { return last_error.c_str(); }

const char* asep_status_name(asep_status status) {
  switch (status) {
    case ASEP_OK: return "ok";
    case ASEP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ASEP_ERR_COMPUTE: return "compute failure";
    case ASEP_ERR_CONFIG: return "config error";
    case ASEP_ERR_IO: return "i/o error";
    case ASEP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

asep_status asep_law_tasep(int dimension, asep_law** out) {
  ASEP_REQUIRE_ARG(out, "asep_law_tasep: out is NULL");
  *out = nullptr;
  ASEP_REQUIRE_ARG(dimension == 1 || dimension == 2, "asep_law_tasep: dimension must be 1 or 2");
  return guarded([&] {
    *out = new asep_law{dimension == 1 ? asep::JumpLaw::tasep_1d() : asep::JumpLaw::tasep_2d()};
  });
}

asep_status asep_law_create(int dimension, const int* dx, const int* dy, const double* rate, size_t n, asep_law** out) {
  ASEP_REQUIRE_ARG(out, "asep_law_create: out is NULL");
  *out = nullptr;
  ASEP_REQUIRE_ARG(dx && rate && n > 0, "asep_law_create: empty law");
  ASEP_REQUIRE_ARG(dimension == 1 || dy, "asep_law_create: dy is NULL in dimension 2");
  return guarded([&] {
    std::vector<asep::JumpEntry> e(n);
    for (size_t k = 0; k < n; ++k) e[k] = {{dx[k], dimension == 2 ? dy[k] : 0}, rate[k]};
    *out = new asep_law{asep::JumpLaw::build(dimension, e)};
  });
}

asep_status asep_law_mean(const asep_law* law, double mean[2]) {
  ASEP_REQUIRE_ARG(law && mean, "asep_law_mean: NULL argument");
  mean[0] = law->law.mean()[0];
  mean[1] = law->law.mean()[1];
  return ASEP_OK;
}

void asep_law_destroy(asep_law* law) { delete law; }

asep_status asep_config_load(const char* path, asep_config** out) {
  ASEP_REQUIRE_ARG(out, "asep_config_load: out is NULL");
  *out = nullptr;
  ASEP_REQUIRE_ARG(path, "asep_config_load: path is NULL");
  return guarded([&] {
    auto c = std::make_unique<asep_config>();
    c->config = asep::load_config(path);
    c->text = asep::format_config(c->config);
    *out = c.release();
  });
}

const char* asep_config_text(const asep_config* config) { return config ? config->text.c_str() : ""; }

void asep_config_destroy(asep_config* config) { delete config; }

asep_status asep_run_config(const char* path, const char* subcommand, int verbose, asep_run** out) {
  ASEP_REQUIRE_ARG(out, "asep_run_config: out is NULL");
  *out = nullptr;
  ASEP_REQUIRE_ARG(path, "asep_run_config: path is NULL");
  return guarded([&] {
    auto run = std::make_unique<asep_run>();
    std::optional<asep::Subcommand> sub;
    try {
      if (subcommand) sub = asep::parse_subcommand(subcommand);
      run->outcome = asep::run_config_file(path, sub, verbose ? &std::cerr : nullptr);
    } catch (const asep::Error& e) {
      run->outcome = {asep::kExitConfig, e.what(), {}};
    }
    if (run->outcome.exit_code != 0) last_error = run->outcome.message;
    *out = run.release();
  });
}

int asep_run_exit_code(const asep_run* run) { return run ? run->outcome.exit_code : asep::kExitCompute; }
const char* asep_run_message(const asep_run* run) { return run ? run->outcome.message.c_str() : ""; }
const char* asep_run_output_dir(const asep_run* run) { return run ? run->outcome.output_dir.c_str() : ""; }
void asep_run_destroy(asep_run* run) { delete run; }

asep_status asep_simulate(const asep_law* law, const asep_sim_params* params, asep_stats** out) {
  ASEP_REQUIRE_ARG(out, "asep_simulate: out is NULL");
  *out = nullptr;
  ASEP_REQUIRE_ARG(law && params, "asep_simulate: NULL argument");
  ASEP_REQUIRE_ARG(params->times && params->n_times > 0, "asep_simulate: no observation times");
  return guarded([&] {
    asep::SimulationParams p;
    p.geometry = geometry(law->law, params->side1, params->side2);
    p.law = law->law;
    p.density = params->density;
    p.times.assign(params->times, params->times + params->n_times);
    p.ensemble = params->canonical ? asep::InitialEnsemble::Canonical : asep::InitialEnsemble::Bernoulli;
    *out = new asep_stats{asep::simulate_statistics(p, params->replicas, params->seed, params->threads)};
  });
}

int asep_stats_replicas(const asep_stats* stats) { return stats ? stats->stats.replicas() : 0; }

asep_status asep_stats_velocity(const asep_stats* stats, int from_current, double value[2], double stderr_out[2]) {
  ASEP_REQUIRE_ARG(stats && value, "asep_stats_velocity: NULL argument");
  return guarded([&] {
    const auto v = from_current ? asep::estimate_velocity_from_current(stats->stats) : asep::estimate_velocity(stats->stats);
    for (int i = 0; i < 2; ++i) {
      value[i] = v.value[static_cast<std::size_t>(i)];
      if (stderr_out) stderr_out[i] = v.stderr[static_cast<std::size_t>(i)];
    }
  });
}

asep_status asep_stats_diffusivity(const asep_stats* stats, int from_current, double* t, double* d11, double* stderr_out,
                                   size_t capacity, size_t* count) {
  ASEP_REQUIRE_ARG(stats && count, "asep_stats_diffusivity: NULL argument");
  return guarded([&] {
    const auto s = from_current ? asep::estimate_diffusivity_from_current(stats->stats) : asep::estimate_diffusivity(stats->stats);
    *count = s.estimates.size();
    for (size_t k = 0; k < s.estimates.size() && k < capacity; ++k) {
      if (t) t[k] = s.estimates[k].t;
      if (d11) d11[k] = s.estimates[k].value[0][0];
      if (stderr_out) stderr_out[k] = s.estimates[k].stderr[0][0];
    }
  });
}

asep_status asep_stats_bond_variance(const asep_stats* stats, double* value, double* stderr_out, size_t capacity,
                                     size_t* count) {
  ASEP_REQUIRE_ARG(stats && count, "asep_stats_bond_variance: NULL argument");
  return guarded([&] {
    const auto s = asep::estimate_current_spread(stats->stats);
    *count = s.size();
    for (size_t k = 0; k < s.size() && k < capacity; ++k) {
      if (value) value[k] = s[k].bond_variance;
      if (stderr_out) stderr_out[k] = s[k].bond_stderr;
    }
  });
}

void asep_stats_destroy(asep_stats* stats) { delete stats; }

asep_status asep_resolvent_solve(const asep_law* law, const asep_resolvent_params* params, double* value,
                                 double* doubled_window_value) {
  ASEP_REQUIRE_ARG(law && params && value, "asep_resolvent_solve: NULL argument");
  return guarded([&] {
    asep::ResolventProblem p;
    p.lambda = params->lambda;
    p.degree = params->degree;
    p.window = params->window;
    p.dynamics = params->free_dynamics ? asep::Dynamics::Free : asep::Dynamics::HardCore;
    p.tolerance = params->tolerance;
    p.law = law->law;
    p.check_window = params->check_window != 0;
    const auto r = asep::solve_truncated_resolvent(p);
    *value = r.value;
    if (doubled_window_value)
      *doubled_window_value = p.check_window ? r.doubled_window_value : std::numeric_limits<double>::quiet_NaN();
  });
}

asep_status asep_fourier_lower_integral(double lambda, int dimension, double tolerance, double* value) {
  ASEP_REQUIRE_ARG(value, "asep_fourier_lower_integral: value is NULL");
  return guarded([&] { *value = asep::degree3_lower_integral(lambda, dimension, tolerance).value; });
}

asep_status asep_fit_exponent(const double* lambda, const double* value, size_t n, int log_model, double* exponent,
                              double* stderr_out) {
  ASEP_REQUIRE_ARG(lambda && value && exponent, "asep_fit_exponent: NULL argument");
  return guarded([&] {
    asep::ScalingSeries s{{lambda, lambda + n}, {value, value + n}};
    const auto f = asep::fit_scaling(s, log_model ? asep::ScalingModel::LogPower : asep::ScalingModel::Power);
    *exponent = f.exponent;
    if (stderr_out) *stderr_out = f.stderr;
  });
}

asep_status asep_variational_bound(double lambda, double* bound, double* alpha) {
  ASEP_REQUIRE_ARG(bound, "asep_variational_bound: bound is NULL");
  return guarded([&] {
    const auto b = asep::variational_bound_d1(lambda);
    if (!b.converged) asep::fail(asep::ErrorKind::Compute, "variational bound: mesh refinement did not converge");
    *bound = b.bound;
    if (alpha) *alpha = b.alpha;
  });
}

asep_status asep_oracle_create(const asep_law* law, int side1, int side2, asep_oracle** out) {
  ASEP_REQUIRE_ARG(out, "asep_oracle_create: out is NULL");
  *out = nullptr;
  ASEP_REQUIRE_ARG(law, "asep_oracle_create: law is NULL");
  return guarded([&] { *out = new asep_oracle{asep::build_generator_matrix(geometry(law->law, side1, side2), law->law)}; });
}

asep_status asep_oracle_stationarity(const asep_oracle* oracle, double density, double* residual) {
  ASEP_REQUIRE_ARG(oracle && residual, "asep_oracle_stationarity: NULL argument");
  return guarded([&] { *residual = asep::check_stationarity(oracle->gen, density); });
}

asep_status asep_oracle_laplace(const asep_oracle* oracle, double lambda, double* lhs, double* rhs, double* relative_gap) {
  ASEP_REQUIRE_ARG(oracle, "asep_oracle_laplace: oracle is NULL");
  return guarded([&] {
    const auto l = asep::laplace_identity_check(oracle->gen, 0.5, lambda);
    if (lhs) *lhs = l.lhs;
    if (rhs) *rhs = l.rhs;
    if (relative_gap) *relative_gap = l.relative_gap;
  });
}

asep_status asep_oracle_pairing(const asep_oracle* oracle, double lambda, int degree, double* value) {
  ASEP_REQUIRE_ARG(oracle && value, "asep_oracle_pairing: NULL argument");
  return guarded([&] {
    *value = asep::exact_resolvent_pairing(oracle->gen, 0.5, lambda, degree > 0 ? std::optional<int>(degree) : std::nullopt);
  });
}

void asep_oracle_destroy(asep_oracle* oracle) { delete oracle; }

}  // extern "C"
