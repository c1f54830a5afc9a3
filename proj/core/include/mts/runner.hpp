#pragma once

// Config-driven scenario runs with per-step CSV output.
//
// Config files are flat `key=value` lines; `#` starts a comment.
//
//   scenario=bar1d                  sdof2 | sdof3 | bar1d | plate2d | wave2d
//   method=coupled                  coupled | backward_euler | monolithic_newmark
//   dt_system=1e-3
//   duration=0.05
//   output=bar.csv
//   solver=auto                     auto | monolithic | schur
//   subdomain.2.eta=100             subdomains are numbered from 1
//   subdomain.2.beta=0
//   subdomain.2.gamma=0.5
//   probes=3:4,1:0                  subdomain (from 1) : DOF (from 0)
//   sweep.subdomain=2               target of `--axis eta`

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mts/problems.hpp"

namespace mts::cli {

/// Malformed or inconsistent configuration (exit status 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure while stepping (exit status 3).
class StepFailure : public Error {
 public:
  StepFailure(long step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
  [[nodiscard]] long step() const { return step_; }

 private:
  long step_;
};

enum class Method { coupled, backward_euler, monolithic_newmark };

struct NewmarkOverride {
  std::optional<double> beta;
  std::optional<double> gamma;
};

struct RunConfig {
  std::string scenario;
  Method method = Method::coupled;
  std::optional<double> dt_system;
  std::optional<double> duration;
  std::string output_path;
  std::optional<SaddleSolver> solver;
  std::map<std::size_t, int> eta;                    ///< 0-based subdomain -> η
  std::map<std::size_t, NewmarkOverride> newmark;    ///< 0-based subdomain -> (β, γ)
  std::vector<Probe> probes;                         ///< empty: scenario defaults
  std::optional<std::size_t> sweep_subdomain;        ///< 0-based
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// The scenario with every override applied. Throws ConfigError.
Scenario configure(const RunConfig& config);

struct RunSummary {
  long steps = 0;
  double final_time = 0.0;
  std::optional<double> oracle_error;  ///< |probe₀(T) - oracle(T)|
  double max_abs_e_interface = 0.0;
  double cumulative_abs_e_interface = 0.0;
  double max_norm_d_drift = 0.0;
  double max_norm_a_drift = 0.0;
  double max_norm_v_residual = 0.0;
  std::vector<double> final_probes;
};

/// A configured scenario with its coupled system built and validated.
struct PreparedRun {
  RunConfig config;
  Scenario scenario;
  CoupledSystem system;
};

/// Throws ConfigError when the scenario or the resulting system is invalid.
PreparedRun prepare(const RunConfig& config);

/// Steps a prepared run, writing one CSV row per system level (initial
/// level included) to `csv`. Throws StepFailure during stepping.
RunSummary execute(const PreparedRun& prepared, std::ostream& csv);

/// prepare + execute.
RunSummary run(const RunConfig& config, std::ostream& csv);

/// Output file for `config`: output_path (or "<scenario>.csv"), moved into
/// $MTS_OUTPUT_DIR when that variable is set.
std::string resolve_output_path(const RunConfig& config);

/// Config for one sweep member. Axes: dt_system, eta (uses sweep_subdomain,
/// else the subdomain with the largest η) and subdomain.<k>.eta.
RunConfig sweep_member(const RunConfig& base, const std::string& axis, const std::string& value);

/// Runs every member, writing "<stem>_<axis>_<value>.csv" for each and
/// "<stem>_summary.csv". Returns the summary file path.
std::string sweep(const RunConfig& base, const std::string& axis, const std::vector<std::string>& values);

/// Entry points used by the command-line tool; return the exit status and
/// report errors on `err`.
int run_command(const std::string& config_path, std::ostream& err);
int sweep_command(const std::string& config_path, const std::string& axis, const std::vector<std::string>& values,
                  std::ostream& err);

/// Column names in output order.
std::vector<std::string> csv_header(const std::vector<Probe>& probes, Index constraints);

/// Shortest decimal text that round-trips through a double (17 significant digits).
std::string format_double(double value);

}  // namespace mts::cli
