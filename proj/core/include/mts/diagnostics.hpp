#pragma once

// Energy and drift bookkeeping for coupled runs.

#include <vector>

#include "mts/coupling.hpp"

namespace mts {

struct EnergyBreakdown {
  std::vector<double> kinetic;    ///< ½ vᵀMv per subdomain
  std::vector<double> potential;  ///< ½ dᵀKd per subdomain
  double total = 0.0;
  double e_algorithm = 0.0;  ///< over the last system step (0 when not evaluated)
  double e_interface = 0.0;  ///< over the last system step (0 when not evaluated)

  [[nodiscard]] double kinetic_total() const;
  [[nodiscard]] double potential_total() const;
};

double kinetic_energy(const DenseMatrix& m, const DenseVector& v);
double potential_energy(const DenseMatrix& k, const DenseVector& d);

/// Kinetic and potential energy of every subdomain at the committed level.
EnergyBreakdown total_energy(const CoupledSystem& sys);
/// Same, for an arbitrary set of per-subdomain states (e.g. the end of a step result).
EnergyBreakdown total_energy(const CoupledSystem& sys, const std::vector<KinematicState>& states);

/// Scheme contribution to the energy change over one system step, general
/// (subcycled) form. `sys` must be the system the step was computed from.
double energy_algorithm(const SystemStepResult& step, const CoupledSystem& sys);

/// The η = 1 closed form as commonly quoted:
///   -2 Σ (γᵢ-½) 𝒱ᵢ([d]) - Δt² Σ γᵢ(2βᵢ-γᵢ) 𝒯ᵢ([a]).
/// It agrees with energy_algorithm only when βᵢ = γᵢ/2 or γᵢ = ½ with [𝒯(a)] = 𝒯([a]).
/// Throws InvalidArgument if any ηᵢ ≠ 1.
double energy_algorithm_no_subcycling(const SystemStepResult& step, const CoupledSystem& sys);

/// Net work done by the interface multipliers over one system step, with
/// sub-level multipliers from interpolate_lambda.
double energy_interface(const SystemStepResult& step, const CoupledSystem& sys);

/// Work of the external forces over one system step in the Newmark sense:
/// Σᵢ Σⱼ [dᵢ]ᵀ((1-γᵢ) fᵢ(tⱼ) + γᵢ fᵢ(tⱼ₊₁)). Zero when all forces vanish.
double external_work(const SystemStepResult& step, const CoupledSystem& sys);

/// Interface constraint violations Σ Cᵢxᵢ at one system level.
struct DriftRecord {
  DenseVector a_drift;
  DenseVector d_drift;
  DenseVector v_residual;
};

DriftRecord drift_record(const CoupledSystem& sys);
DriftRecord drift_record(const CoupledSystem& sys, const std::vector<KinematicState>& states);

/// Next drift under a uniform (β, γ) scheme without subcycling:
///   a ← (1 - 1/γ) a,   d ← d + (½ - β/γ) Δt² a.
/// v_residual is carried as zero.
DriftRecord predict_drift(const DriftRecord& current, const NewmarkParams& params, double dt);

/// Σᵢ (aᵢᵀ Aᵢ aᵢ + vᵢᵀ Kᵢ vᵢ) with Aᵢ = Mᵢ + Δtᵢ²(βᵢ - γᵢ/2) Kᵢ.
double stability_norm(const CoupledSystem& sys);
double stability_norm(const CoupledSystem& sys, const std::vector<KinematicState>& states);

/// Running summary of |e_interface| over a run.
class SubcyclingIndicator {
 public:
  void record(double e_interface);

  [[nodiscard]] double max_abs() const { return max_abs_; }
  [[nodiscard]] double cumulative_abs() const { return cumulative_; }
  [[nodiscard]] long samples() const { return samples_; }

 private:
  double max_abs_ = 0.0;
  double cumulative_ = 0.0;
  long samples_ = 0;
};

/// Everything reported for one committed system step.
struct StepReport {
  double t = 0.0;
  EnergyBreakdown energy;
  DriftRecord drift;
};

/// Energies at the end of `step`, with e_algorithm and e_interface filled in.
StepReport make_step_report(const SystemStepResult& step, const CoupledSystem& sys);

}  // namespace mts
