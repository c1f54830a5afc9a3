#pragma once

// Benchmark problems: split-DOF spring-mass systems, a 1D bar with a tip
// step load, a 2D plate with a corner force and 2D scalar wave propagation.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mts/coupling.hpp"

namespace mts {

/// One plotted quantity: displacement of a DOF in a subdomain.
struct Probe {
  std::size_t subdomain = 0;
  Index dof = 0;
  std::string label;
};

/// A ready-to-run problem. Subdomain time-steps are stored as Δt/ηᵢ, so
/// changing dt_system through set_dt_system keeps every ηᵢ.
struct Scenario {
  std::string name;
  std::vector<Subdomain> subdomains;
  double dt_system = 0.0;
  std::vector<InitialCondition> initial;
  double duration = 0.0;
  std::vector<Probe> probes;
  /// Exact displacement of probes[0] as a function of time, when known.
  std::function<double(double)> oracle;
  CouplingOptions options;

  [[nodiscard]] CoupledSystem make_system() const;
  [[nodiscard]] int eta(std::size_t i) const;
  [[nodiscard]] long step_count() const;

  void set_dt_system(double dt);
  void set_eta(std::size_t i, int eta);
  void set_newmark(std::size_t i, const NewmarkParams& params);
  /// Same problem with every external force removed.
  [[nodiscard]] Scenario without_forces() const;
};

/// Names accepted by build_scenario.
const std::vector<std::string>& scenario_names();
/// Throws InvalidArgument for an unknown name.
Scenario build_scenario(const std::string& name);

/// Two masses sharing one DOF; average acceleration in both; ηₐ = 1, η_b = 4.
Scenario build_sdof2();
/// Merged single-DOF displacement for build_sdof2's data.
double sdof2_displacement(double t);
/// Interface force mₐ ü + kₐ u on the merged motion.
double sdof2_lambda(double t);

/// Three masses sharing one DOF with a constant force on the middle one.
Scenario build_sdof3();
double sdof3_displacement(double t);

struct BarSubdivision {
  int a = 5;
  int b = 5;
  int c = 5;
};
/// Three-subdomain bar, left end fixed, step tip load. A and C average
/// acceleration (η = 1), B central difference, Δt = 1e-3. η_B is 10, or the
/// smallest stable value when B is refined past that.
Scenario build_bar_1d(BarSubdivision elements = {});
/// Series solution for the bar's displacement at (x, t), summing `terms` odd modes.
double series_bar_solution(double x, double t, int terms = 2000);

/// Square elastic plate on [0, 2]², four 5x5-quad subdomains, left edge
/// fixed, constant corner force (1, 1) at the bottom-right corner.
/// Subdomain order: bottom-left, bottom-right, top-left, top-right.
Scenario build_plate_2d();

struct WaveMesh {
  int nx = 105;           ///< elements along L_x = 2
  int ny = 53;            ///< elements along L_y = 1
  int interface_col = 21; ///< node column of the vertical interface
};
/// Scalar wave on [0, 2] x [0, 1], loaded on x = 0, y ∈ [0.4, 0.6];
/// the other three sides fixed. Subdomain 1 (loaded side, central
/// difference, Δt₁ = 1e-5), subdomain 2 (average acceleration, Δt₂ = 1e-4).
Scenario build_wave_2d(WaveMesh mesh = {});
/// Edge load amplitude 5 sin(2πt/0.1) for t <= 0.1, zero afterwards.
double wave_load_history(double t);

}  // namespace mts
