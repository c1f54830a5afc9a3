#include "mts/runner.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mts/baselines.hpp"
#include "mts/diagnostics.hpp"

namespace mts::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_real(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError("'" + key + "': expected a real number, got '" + text + "'");
  }
  return v;
}

long parse_integer(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw ConfigError("'" + key + "': expected an integer, got '" + text + "'");
  }
  return v;
}

std::size_t parse_subdomain(const std::string& key, const std::string& text) {
  const long k = parse_integer(key, text);
  if (k < 1) throw ConfigError("'" + key + "': subdomains are numbered from 1");
  return static_cast<std::size_t>(k - 1);
}

Method parse_method(const std::string& text) {
  if (text == "coupled") return Method::coupled;
  if (text == "backward_euler") return Method::backward_euler;
  if (text == "monolithic_newmark") return Method::monolithic_newmark;
  throw ConfigError("'method': unknown value '" + text + "'");
}

SaddleSolver parse_solver(const std::string& text) {
  if (text == "auto") return SaddleSolver::automatic;
  if (text == "monolithic") return SaddleSolver::monolithic;
  if (text == "schur") return SaddleSolver::schur_complement;
  throw ConfigError("'solver': unknown value '" + text + "'");
}

void apply_key(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "scenario") {
    config.scenario = value;
  } else if (key == "method") {
    config.method = parse_method(value);
  } else if (key == "dt_system") {
    config.dt_system = parse_real(key, value);
  } else if (key == "duration") {
    config.duration = parse_real(key, value);
  } else if (key == "output") {
    config.output_path = value;
  } else if (key == "solver") {
    config.solver = parse_solver(value);
  } else if (key == "probes") {
    config.probes.clear();
    for (const std::string& item : split(value, ',')) {
      const auto parts = split(item, ':');
      if (parts.size() != 2) throw ConfigError("'probes': expected subdomain:dof, got '" + item + "'");
      const long dof = parse_integer(key, parts[1]);
      if (dof < 0) throw ConfigError("'probes': DOF indices start at 0");
      config.probes.push_back({parse_subdomain(key, parts[0]), dof, "s" + parts[0] + "_d" + parts[1]});
    }
  } else if (key == "sweep.subdomain") {
    config.sweep_subdomain = parse_subdomain(key, value);
  } else if (key.rfind("subdomain.", 0) == 0) {
    const auto parts = split(key, '.');
    if (parts.size() != 3) throw ConfigError("unknown key '" + key + "'");
    const std::size_t sub = parse_subdomain(key, parts[1]);
    if (parts[2] == "eta") {
      const long eta = parse_integer(key, value);
      if (eta < 1) throw ConfigError("'" + key + "': eta must be a positive integer");
      config.eta[sub] = static_cast<int>(eta);
    } else if (parts[2] == "beta") {
      config.newmark[sub].beta = parse_real(key, value);
    } else if (parts[2] == "gamma") {
      config.newmark[sub].gamma = parse_real(key, value);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

double max_norm(const DenseVector& v) { return max_abs(v); }

struct Row {
  double t;
  EnergyBreakdown energy;
  DriftRecord drift;
  DenseVector lambda;
  std::vector<double> probes;
};

void write_row(std::ostream& out, const Row& row) {
  out << format_double(row.t) << ',' << format_double(row.energy.total) << ','
      << format_double(row.energy.kinetic_total()) << ',' << format_double(row.energy.potential_total()) << ','
      << format_double(row.energy.e_algorithm) << ',' << format_double(row.energy.e_interface) << ','
      << format_double(max_norm(row.drift.d_drift)) << ',' << format_double(max_norm(row.drift.a_drift)) << ','
      << format_double(max_norm(row.drift.v_residual));
  for (Index k = 0; k < row.lambda.size(); ++k) out << ',' << format_double(row.lambda[k]);
  for (double p : row.probes) out << ',' << format_double(p);
  out << '\n';
}

std::vector<double> probe_values(const std::vector<KinematicState>& states, const std::vector<Probe>& probes) {
  std::vector<double> out;
  for (const Probe& p : probes) out.push_back(states.at(p.subdomain).d[p.dof]);
  return out;
}

std::vector<KinematicState> final_states(const SystemStepResult& step) {
  std::vector<KinematicState> out;
  for (std::size_t i = 0; i < step.history.size(); ++i) out.push_back(step.final_state(i));
  return out;
}

// Dissipation and interface work of one backward Euler step.
void backward_euler_energy(const SystemStepResult& step, const CoupledSystem& sys, EnergyBreakdown& energy) {
  double dissipation = 0.0;
  double interface = 0.0;
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const Subdomain& sub = sys.subdomain(i);
    const DenseVector dv = step.final_state(i).v - sys.state(i).v;
    const DenseVector dd = step.final_state(i).d - sys.state(i).d;
    dissipation -= 0.5 * dv.dot(sub.apply_mass(dv)) + 0.5 * dd.dot(sub.apply_stiffness(dd));
    interface += step.lambda_next.dot(sub.constraints().multiply(dd));
  }
  energy.e_algorithm = dissipation;
  energy.e_interface = interface;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::coupled:
      return "coupled";
    case Method::backward_euler:
      return "backward_euler";
    case Method::monolithic_newmark:
      return "monolithic_newmark";
  }
  return "coupled";
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

RunConfig parse_config(std::istream& in) {
  RunConfig config;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_key(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  if (config.scenario.empty()) throw ConfigError("missing required key 'scenario'");
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

Scenario configure(const RunConfig& config) {
  Scenario s;
  try {
    s = build_scenario(config.scenario);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  const auto check_index = [&s](std::size_t i, const char* what) {
    if (i >= s.subdomains.size()) {
      throw ConfigError(std::string(what) + ": scenario '" + s.name + "' has only " +
                        std::to_string(s.subdomains.size()) + " subdomains");
    }
  };
  try {
    if (config.dt_system) s.set_dt_system(*config.dt_system);
    if (config.duration) {
      if (!(*config.duration > 0.0)) throw ConfigError("'duration' must be positive");
      s.duration = *config.duration;
    }
    if (config.method != Method::coupled) {
      for (std::size_t i = 0; i < s.subdomains.size(); ++i) s.set_eta(i, 1);
    }
    if (config.method == Method::monolithic_newmark) {
      for (std::size_t i = 0; i < s.subdomains.size(); ++i) s.set_newmark(i, NewmarkParams::average_acceleration());
    }
    for (const auto& [i, eta] : config.eta) {
      check_index(i, "eta override");
      if (config.method != Method::coupled && eta != 1) {
        throw ConfigError("method '" + method_name(config.method) + "' does not subcycle; eta must be 1");
      }
      s.set_eta(i, eta);
    }
    for (const auto& [i, o] : config.newmark) {
      check_index(i, "Newmark override");
      const NewmarkParams& base = s.subdomains[i].params();
      s.set_newmark(i, NewmarkParams(o.beta.value_or(base.beta()), o.gamma.value_or(base.gamma())));
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (config.solver) s.options.solver = *config.solver;
  if (!config.probes.empty()) {
    for (const Probe& p : config.probes) {
      check_index(p.subdomain, "probe");
      if (p.dof >= s.subdomains[p.subdomain].size()) {
        throw ConfigError("probe " + p.label + ": DOF index out of range");
      }
    }
    s.probes = config.probes;
  }
  return s;
}

std::vector<std::string> csv_header(const std::vector<Probe>& probes, Index constraints) {
  std::vector<std::string> cols{"t",           "E_total",      "E_kinetic",    "E_potential",    "e_algorithm",
                                "e_interface", "norm_d_drift", "norm_a_drift", "norm_v_residual"};
  for (Index k = 0; k < constraints; ++k) cols.push_back("lambda_" + std::to_string(k));
  for (const Probe& p : probes) cols.push_back(p.label);
  return cols;
}

PreparedRun prepare(const RunConfig& config) {
  Scenario scenario = configure(config);
  try {
    CoupledSystem system = scenario.make_system();
    return {config, std::move(scenario), std::move(system)};
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

RunSummary run(const RunConfig& config, std::ostream& csv) { return execute(prepare(config), csv); }

RunSummary execute(const PreparedRun& prepared, std::ostream& csv) {
  const RunConfig& config = prepared.config;
  const Scenario& scenario = prepared.scenario;
  CoupledSystem sys = prepared.system;
  std::optional<BackwardEulerSolver> be;
  if (config.method == Method::backward_euler) be.emplace(sys);

  const std::vector<std::string> header = csv_header(scenario.probes, sys.constraint_count());
  for (std::size_t k = 0; k < header.size(); ++k) csv << (k ? "," : "") << header[k];
  csv << '\n';

  RunSummary summary;
  SubcyclingIndicator indicator;
  const auto track = [&summary](const DriftRecord& d) {
    summary.max_norm_d_drift = std::max(summary.max_norm_d_drift, max_norm(d.d_drift));
    summary.max_norm_a_drift = std::max(summary.max_norm_a_drift, max_norm(d.a_drift));
    summary.max_norm_v_residual = std::max(summary.max_norm_v_residual, max_norm(d.v_residual));
  };

  Row row{sys.time(), total_energy(sys), drift_record(sys), sys.lambda(), probe_values(sys.states(), scenario.probes)};
  track(row.drift);
  write_row(csv, row);

  const long steps = scenario.step_count();
  for (long n = 0; n < steps; ++n) {
    try {
      const SystemStepResult step = be ? be->step(sys) : advance_system_step(sys);
      const std::vector<KinematicState> finals = final_states(step);
      row.t = step.t_next;
      row.energy = total_energy(sys, finals);
      if (be) {
        backward_euler_energy(step, sys, row.energy);
      } else {
        row.energy.e_algorithm = energy_algorithm(step, sys);
        row.energy.e_interface = energy_interface(step, sys);
      }
      row.drift = drift_record(sys, finals);
      row.lambda = step.lambda_next;
      row.probes = probe_values(finals, scenario.probes);
      for (double v : row.probes) {
        if (!std::isfinite(v)) throw NotConverged("solution is no longer finite");
      }
      sys.commit(step);
    } catch (const Error& e) {
      throw StepFailure(n + 1, e.what());
    }
    indicator.record(row.energy.e_interface);
    track(row.drift);
    write_row(csv, row);
  }

  summary.steps = steps;
  summary.final_time = sys.time();
  summary.max_abs_e_interface = indicator.max_abs();
  summary.cumulative_abs_e_interface = indicator.cumulative_abs();
  summary.final_probes = row.probes;
  if (scenario.oracle && !row.probes.empty()) {
    summary.oracle_error = std::abs(row.probes.front() - scenario.oracle(sys.time()));
  }
  return summary;
}

std::string resolve_output_path(const RunConfig& config) {
  std::filesystem::path path = config.output_path.empty() ? config.scenario + ".csv" : config.output_path;
  if (const char* dir = std::getenv("MTS_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
    path = std::filesystem::path(dir) / path.filename();
  }
  return path.string();
}

RunConfig sweep_member(const RunConfig& base, const std::string& axis, const std::string& value) {
  RunConfig member = base;
  if (axis == "dt_system") {
    member.dt_system = parse_real(axis, value);
    return member;
  }
  std::size_t target = 0;
  if (axis == "eta") {
    if (base.sweep_subdomain) {
      target = *base.sweep_subdomain;
    } else {
      const Scenario s = configure(base);
      for (std::size_t i = 1; i < s.subdomains.size(); ++i) {
        if (s.eta(i) > s.eta(target)) target = i;
      }
    }
  } else if (axis.rfind("subdomain.", 0) == 0 && axis.size() > 14 && axis.substr(axis.size() - 4) == ".eta") {
    target = parse_subdomain(axis, axis.substr(10, axis.size() - 14));
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "'");
  }
  const long eta = parse_integer(axis, value);
  if (eta < 1) throw ConfigError("sweep value '" + value + "': eta must be a positive integer");
  member.eta[target] = static_cast<int>(eta);
  return member;
}

std::string sweep(const RunConfig& base, const std::string& axis, const std::vector<std::string>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<RunConfig> members;
  for (const std::string& v : values) members.push_back(sweep_member(base, axis, v));

  const std::filesystem::path base_path = resolve_output_path(base);
  const std::filesystem::path dir = base_path.parent_path();
  const std::string stem = base_path.stem().string();
  const std::filesystem::path summary_path = dir / (stem + "_summary.csv");

  std::ofstream summary(summary_path);
  if (!summary) throw ConfigError("cannot write '" + summary_path.string() + "'");
  summary << axis
          << ",steps,final_time,oracle_error,max_abs_e_interface,cumulative_abs_e_interface,max_norm_d_drift,"
             "max_norm_a_drift,max_norm_v_residual\n";
  for (std::size_t k = 0; k < members.size(); ++k) {
    const std::filesystem::path out_path = dir / (stem + "_" + axis + "_" + values[k] + ".csv");
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write '" + out_path.string() + "'");
    const RunSummary r = run(members[k], out);
    summary << values[k] << ',' << r.steps << ',' << format_double(r.final_time) << ','
            << (r.oracle_error ? format_double(*r.oracle_error) : "") << ',' << format_double(r.max_abs_e_interface)
            << ',' << format_double(r.cumulative_abs_e_interface) << ',' << format_double(r.max_norm_d_drift) << ','
            << format_double(r.max_norm_a_drift) << ',' << format_double(r.max_norm_v_residual) << '\n';
  }
  return summary_path.string();
}

int run_command(const std::string& config_path, std::ostream& err) {
  try {
    const PreparedRun prepared = prepare(load_config(config_path));
    const std::string path = resolve_output_path(prepared.config);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    (void)execute(prepared, out);
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const StepFailure& e) {
    err << "solver failure at " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    err << "solver failure: " << e.what() << '\n';
    return 3;
  }
}

int sweep_command(const std::string& config_path, const std::string& axis, const std::vector<std::string>& values,
                  std::ostream& err) {
  try {
    const RunConfig config = load_config(config_path);
    // Validate every member before running any of them.
    for (const std::string& v : values) (void)prepare(sweep_member(config, axis, v));
    (void)sweep(config, axis, values);
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const StepFailure& e) {
    err << "solver failure at " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    err << "solver failure: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace mts::cli
