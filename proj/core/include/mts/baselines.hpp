#pragma once

// Backward Euler on the first-order form of the coupled system, as a
// dissipative reference against the Newmark coupling.

#include <vector>

#include "mts/coupling.hpp"

namespace mts {

/// Per-subdomain factorizations of M/Δt + ΔtK and the interface operator,
/// reusable across steps of the same system.
class BackwardEulerSolver {
 public:
  /// Throws InvalidArgument unless every ηᵢ = 1.
  explicit BackwardEulerSolver(const CoupledSystem& sys);

  /// One step from the committed level of `sys` (which must match the
  /// system this solver was built from). Acceleration is reported as
  /// (vⁿ⁺¹ - vⁿ)/Δt.
  [[nodiscard]] SystemStepResult step(const CoupledSystem& sys) const;

 private:
  std::vector<SpdSolver> effective_;
  std::vector<DenseMatrix> h_inv_ct_;  // (M/Δt + ΔtK)⁻¹ Cᵀ
  LuSolver interface_;
  double dt_;
};

/// Single backward Euler step; factors from scratch each call.
SystemStepResult backward_euler_step(const CoupledSystem& sys);

}  // namespace mts
