#include "asep/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "asep/error.hpp"
#include "asep/fourier.hpp"

namespace asep {

namespace {

[[noreturn]] void config_error(const std::string& what) { fail(ErrorKind::Config, what); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

// Value parsers. `key` goes into every message so the user sees what to fix.
double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto r = std::from_chars(text.data(), end, v);
  if (text.empty() || r.ec != std::errc() || r.ptr != end || !std::isfinite(v))
    config_error(key + ": expected a finite number, got '" + text + "'");
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const char* end = text.data() + text.size();
  auto r = std::from_chars(text.data(), end, v);
  if (text.empty() || r.ec != std::errc() || r.ptr != end) config_error(key + ": expected an integer, got '" + text + "'");
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const long long v = to_integer(key, text);
  if (v < -2147483647LL || v > 2147483647LL) config_error(key + ": value out of range");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  config_error(key + ": expected true or false, got '" + text + "'");
}

std::vector<double> to_double_list(const std::string& key, const std::string& text) {
  if (text.rfind("logspace(", 0) == 0) {
    if (text.back() != ')') config_error(key + ": unterminated logspace(...)");
    const auto args = split(std::string_view(text).substr(9, text.size() - 10), ',');
    if (args.size() != 3) config_error(key + ": logspace takes (hi, lo, n)");
    const double hi = to_double(key, args[0]);
    const double lo = to_double(key, args[1]);
    const int n = to_int(key, args[2]);
    if (!(hi > 0.0 && lo > 0.0 && n >= 2)) config_error(key + ": logspace needs positive bounds and n >= 2");
    return log_grid(hi, lo, n);
  }
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(to_double(key, item));
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& text, char sep = ',') {
  std::vector<int> out;
  for (const auto& item : split(text, sep)) out.push_back(to_int(key, item));
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

std::string join_ints(const std::vector<int>& v, const char* sep = ", ") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> to_sides(const std::string& key, const std::string& text) {
  return to_int_list(key, text, text.find('x') != std::string::npos ? 'x' : ',');
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.subcommand",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         try {
           c.subcommand = parse_subcommand(v);
         } catch (const Error&) {
           config_error(k + ": unknown subcommand '" + v + "'");
         }
         c.has_subcommand = true;
       }},
      {"run.threads", [](RunConfig& c, const std::string& k, const std::string& v) { c.threads = to_int(k, v); }},
      {"model.dimension", [](RunConfig& c, const std::string& k, const std::string& v) { c.model.dimension = to_int(k, v); }},
      {"model.density", [](RunConfig& c, const std::string& k, const std::string& v) { c.model.density = to_double(k, v); }},
      {"model.jump_law", [](RunConfig& c, const std::string&, const std::string& v) { c.model.jump_law = v; }},
      {"sim.lattice", [](RunConfig& c, const std::string& k, const std::string& v) { c.sim.lattice = to_sides(k, v); }},
      {"sim.t_obs", [](RunConfig& c, const std::string& k, const std::string& v) { c.sim.t_obs = to_double_list(k, v); }},
      {"sim.replicas", [](RunConfig& c, const std::string& k, const std::string& v) { c.sim.replicas = to_int(k, v); }},
      {"sim.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long s = to_integer(k, v);
         if (s < 0) config_error(k + ": must be non-negative");
         c.sim.seed = static_cast<std::uint64_t>(s);
       }},
      {"sim.ensemble",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "bernoulli")
           c.sim.ensemble = InitialEnsemble::Bernoulli;
         else if (v == "canonical")
           c.sim.ensemble = InitialEnsemble::Canonical;
         else
           config_error(k + ": expected bernoulli or canonical, got '" + v + "'");
       }},
      {"resolvent.lambda", [](RunConfig& c, const std::string& k, const std::string& v) { c.resolvent.lambda = to_double_list(k, v); }},
      {"resolvent.degree", [](RunConfig& c, const std::string& k, const std::string& v) { c.resolvent.degree = to_int_list(k, v); }},
      {"resolvent.window", [](RunConfig& c, const std::string& k, const std::string& v) { c.resolvent.window = to_int(k, v); }},
      {"resolvent.dynamics",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "hardcore")
           c.resolvent.dynamics = Dynamics::HardCore;
         else if (v == "free")
           c.resolvent.dynamics = Dynamics::Free;
         else
           config_error(k + ": expected hardcore or free, got '" + v + "'");
       }},
      {"resolvent.tolerance", [](RunConfig& c, const std::string& k, const std::string& v) { c.resolvent.tolerance = to_double(k, v); }},
      {"resolvent.max_iterations",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.resolvent.max_iterations = to_int(k, v); }},
      {"resolvent.check_window",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.resolvent.check_window = to_bool(k, v); }},
      {"fourier.lambda", [](RunConfig& c, const std::string& k, const std::string& v) { c.fourier.lambda = to_double_list(k, v); }},
      {"fourier.tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.fourier.tol = to_double(k, v); }},
      {"oracle.sites", [](RunConfig& c, const std::string& k, const std::string& v) { c.oracle.sites = to_sides(k, v); }},
      {"oracle.lambda", [](RunConfig& c, const std::string& k, const std::string& v) { c.oracle.lambda = to_double_list(k, v); }},
      {"output.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output.dir = v; }},
      {"output.namespaced", [](RunConfig& c, const std::string& k, const std::string& v) { c.output.namespaced = to_bool(k, v); }},
  };
  return table;
}

std::vector<JumpEntry> parse_law_entries(int dimension, const std::string& text) {
  std::vector<JumpEntry> out;
  for (const auto& item : split(text, ';')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) config_error("model.jump_law: entry '" + item + "' lacks ':rate'");
    const auto coords = to_int_list("model.jump_law", trim(item.substr(0, colon)));
    if (static_cast<int>(coords.size()) != dimension)
      config_error("model.jump_law: entry '" + item + "' needs " + std::to_string(dimension) + " coordinate(s)");
    JumpEntry e;
    e.displacement = {coords[0], dimension == 2 ? coords[1] : 0};
    e.rate = to_double("model.jump_law", trim(item.substr(colon + 1)));
    out.push_back(e);
  }
  if (out.empty()) config_error("model.jump_law: no entries");
  return out;
}

void validate(const RunConfig& c) {
  auto check = [](bool ok, const std::string& msg) {
    if (!ok) config_error(msg);
  };
  check(c.threads >= 0, "run.threads: must be >= 0 (0 = all cores)");
  check(c.model.dimension == 1 || c.model.dimension == 2, "model.dimension: must be 1 or 2");
  check(c.model.density > 0.0 && c.model.density < 1.0, "model.density: must lie strictly between 0 and 1, got " +
                                                            format_double(c.model.density));
  try {
    (void)model_law(c.model);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    config_error(std::string("model.jump_law: ") + e.what());
  }

  const int d = c.model.dimension;
  check(static_cast<int>(c.sim.lattice.size()) == d, "sim.lattice: needs one side per dimension");
  for (int s : c.sim.lattice) check(s >= 2 && s <= (1 << 24), "sim.lattice: sides must lie in [2, 2^24]");
  if (d == 2) check(static_cast<long long>(c.sim.lattice[0]) * c.sim.lattice[1] <= (1LL << 24), "sim.lattice: too many sites");
  check(!c.sim.t_obs.empty(), "sim.t_obs: at least one observation time");
  for (std::size_t i = 0; i < c.sim.t_obs.size(); ++i) {
    check(c.sim.t_obs[i] > 0.0, "sim.t_obs: times must be positive");
    if (i) check(c.sim.t_obs[i] > c.sim.t_obs[i - 1], "sim.t_obs: times must be strictly increasing");
  }
  check(c.sim.replicas >= 2, "sim.replicas: at least 2 replicas are needed for error bars");

  check(!c.resolvent.lambda.empty(), "resolvent.lambda: at least one value");
  for (double l : c.resolvent.lambda) check(l > 0.0, "resolvent.lambda: values must be positive");
  check(!c.resolvent.degree.empty(), "resolvent.degree: at least one value");
  for (std::size_t i = 0; i < c.resolvent.degree.size(); ++i) {
    check(c.resolvent.degree[i] >= 2 && c.resolvent.degree[i] <= 4, "resolvent.degree: values must lie in {2, 3, 4}");
    if (i) check(c.resolvent.degree[i] > c.resolvent.degree[i - 1], "resolvent.degree: values must be increasing");
  }
  check(c.resolvent.window >= 2, "resolvent.window: must be >= 2");
  check(c.resolvent.tolerance > 0.0 && c.resolvent.tolerance < 1e-2, "resolvent.tolerance: must lie in (0, 1e-2)");
  check(c.resolvent.max_iterations >= 1, "resolvent.max_iterations: must be >= 1");

  for (double l : c.fourier.lambda) check(l > 0.0, "fourier.lambda: values must be positive");
  check(c.fourier.lambda.empty() || c.fourier.lambda.size() >= 5, "fourier.lambda: the scaling fit needs at least 5 values");
  for (std::size_t i = 1; i < c.fourier.lambda.size(); ++i)
    check(c.fourier.lambda[i] < c.fourier.lambda[i - 1], "fourier.lambda: values must be strictly decreasing");
  check(c.fourier.tol > 0.0 && c.fourier.tol < 1.0, "fourier.tol: must lie in (0, 1)");

  check(static_cast<int>(c.oracle.sites.size()) == d, "oracle.sites: needs one side per dimension");
  int total = 1;
  for (int s : c.oracle.sites) {
    check(s >= 2 && s <= 16, "oracle.sites: sides must lie in [2, 16]");
    total *= s;
  }
  check(total <= 16, "oracle.sites: at most 16 sites in total");
  check(!c.oracle.lambda.empty(), "oracle.lambda: at least one value");
  for (double l : c.oracle.lambda) check(l > 0.0, "oracle.lambda: values must be positive");

  check(!c.output.dir.empty(), "output.dir: must not be empty");
}

}  // namespace

std::string_view subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::Simulate: return "simulate";
    case Subcommand::Resolvent: return "resolvent";
    case Subcommand::Fourier: return "fourier";
    case Subcommand::Oracle: return "oracle";
  }
  return "?";
}

Subcommand parse_subcommand(std::string_view name) {
  for (auto s : {Subcommand::Simulate, Subcommand::Resolvent, Subcommand::Fourier, Subcommand::Oracle})
    if (subcommand_name(s) == name) return s;
  config_error("unknown subcommand '" + std::string(name) + "' (expected simulate, resolvent, fourier or oracle)");
}

JumpLaw model_law(const ModelConfig& model) {
  const int d = model.dimension;
  if (model.jump_law == "tasep") return d == 1 ? JumpLaw::tasep_1d() : JumpLaw::tasep_2d();
  if (model.jump_law == "symmetric") {
    std::vector<JumpEntry> e{{{1, 0}, 0.5}, {{-1, 0}, 0.5}};
    if (d == 2) {
      e.push_back({{0, 1}, 0.5});
      e.push_back({{0, -1}, 0.5});
    }
    return JumpLaw::build(d, e, false);
  }
  const auto entries = parse_law_entries(d, model.jump_law);
  return JumpLaw::build(d, entries);
}

RunConfig parse_config(std::string_view text, std::string_view source) {
  RunConfig config;
  std::set<std::string> seen;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  const std::string where(source);
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string at = where + ":" + std::to_string(line_no) + ": ";

    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line[0] == '[') {
      if (line.back() != ']') config_error(at + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty() || section.find_first_of(" .=") != std::string::npos) config_error(at + "bad section name");
      continue;
    }
    // trailing '#' comments need whitespace in front; ';' separates jump-law entries so only starts a full-line comment
    for (const char* marker : {" #", "\t#"}) {
      const auto c = line.find(marker);
      if (c != std::string::npos) line = trim(std::string_view(line).substr(0, c));
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(at + "expected 'key = value'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) config_error(at + "missing key");
    if (key.find('.') == std::string::npos) {
      if (section.empty()) config_error(at + "key '" + key + "' outside any section");
      key = section + "." + key;
    }
    const auto it = setters().find(key);
    if (it == setters().end()) config_error(at + "unknown key '" + key + "'");
    if (!seen.insert(key).second) config_error(at + "duplicate key '" + key + "'");
    if (value.empty()) config_error(at + key + ": empty value");
    try {
      it->second(config, key, value);
    } catch (const Error& e) {
      config_error(at + e.what());
    }
  }
  if (config.fourier.lambda.empty()) config.fourier.lambda = log_grid(1e-4, 1e-10, 13);
  validate(config);
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Config, path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> e;
  if (c.has_subcommand) e.emplace_back("run.subcommand", std::string(subcommand_name(c.subcommand)));
  e.emplace_back("run.threads", std::to_string(c.threads));
  e.emplace_back("model.dimension", std::to_string(c.model.dimension));
  e.emplace_back("model.density", format_double(c.model.density));
  e.emplace_back("model.jump_law", c.model.jump_law);
  e.emplace_back("sim.lattice", join_ints(c.sim.lattice, "x"));
  e.emplace_back("sim.t_obs", join_doubles(c.sim.t_obs));
  e.emplace_back("sim.replicas", std::to_string(c.sim.replicas));
  e.emplace_back("sim.seed", std::to_string(c.sim.seed));
  e.emplace_back("sim.ensemble", c.sim.ensemble == InitialEnsemble::Bernoulli ? "bernoulli" : "canonical");
  e.emplace_back("resolvent.lambda", join_doubles(c.resolvent.lambda));
  e.emplace_back("resolvent.degree", join_ints(c.resolvent.degree));
  e.emplace_back("resolvent.window", std::to_string(c.resolvent.window));
  e.emplace_back("resolvent.dynamics", c.resolvent.dynamics == Dynamics::HardCore ? "hardcore" : "free");
  e.emplace_back("resolvent.tolerance", format_double(c.resolvent.tolerance));
  e.emplace_back("resolvent.max_iterations", std::to_string(c.resolvent.max_iterations));
  e.emplace_back("resolvent.check_window", c.resolvent.check_window ? "true" : "false");
  e.emplace_back("fourier.lambda", join_doubles(c.fourier.lambda));
  e.emplace_back("fourier.tol", format_double(c.fourier.tol));
  e.emplace_back("oracle.sites", join_ints(c.oracle.sites, "x"));
  e.emplace_back("oracle.lambda", join_doubles(c.oracle.lambda));
  e.emplace_back("output.dir", c.output.dir);
  e.emplace_back("output.namespaced", c.output.namespaced ? "true" : "false");
  return e;
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_entries(config)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace asep
