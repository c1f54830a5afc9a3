#pragma once

#include <memory>

#include "mts/linalg.hpp"

namespace mts {

/// Newmark (β, γ) pair. Construction rejects γ < 1/2 and β < 0.
class NewmarkParams {
 public:
  NewmarkParams(double beta, double gamma);

  static NewmarkParams average_acceleration() { return {0.25, 0.5}; }
  static NewmarkParams central_difference() { return {0.0, 0.5}; }
  static NewmarkParams linear_acceleration() { return {1.0 / 6.0, 0.5}; }

  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] double gamma() const { return gamma_; }
  /// 2β >= γ: no critical time-step.
  [[nodiscard]] bool unconditionally_stable() const { return 2.0 * beta_ >= gamma_; }

  friend bool operator==(const NewmarkParams&, const NewmarkParams&) = default;

 private:
  double beta_;
  double gamma_;
};

/// Displacement, velocity and acceleration of one domain at one time level.
struct KinematicState {
  DenseVector d;
  DenseVector v;
  DenseVector a;

  static KinematicState zeros(Index n) {
    return {DenseVector::Zero(n), DenseVector::Zero(n), DenseVector::Zero(n)};
  }
  [[nodiscard]] Index size() const { return d.size(); }
  /// Throws DimensionMismatch unless d, v and a have the same length.
  void check_consistent() const;
};

/// The parts of d⁽ⁿ⁺¹⁾ and v⁽ⁿ⁺¹⁾ that do not depend on a⁽ⁿ⁺¹⁾.
struct NewmarkPrediction {
  DenseVector d;
  DenseVector v;
};

NewmarkPrediction newmark_predict(const KinematicState& state, const NewmarkParams& params, double dt);

/// One Newmark step of M a + K d = f_next without constraints.
KinematicState newmark_step_unconstrained(const DenseMatrix& m, const DenseMatrix& k, const DenseVector& f_next,
                                          const KinematicState& state, const NewmarkParams& params, double dt);

/// Solves M a = f - K d for the acceleration consistent with (d, f).
DenseVector consistent_acceleration(const DenseMatrix& m, const DenseMatrix& k, const DenseVector& f,
                                    const DenseVector& d);

/// Stability limit of one Newmark domain: either a finite bound or
/// "unconditional". The unconditional case carries no numeric value.
class CriticalTimeStep {
 public:
  static CriticalTimeStep unconditional() { return CriticalTimeStep(); }
  static CriticalTimeStep bounded(double value);

  [[nodiscard]] bool is_unconditional() const { return unconditional_; }
  /// Throws std::logic_error when unconditional.
  [[nodiscard]] double value() const;
  /// dt strictly below the limit.
  [[nodiscard]] bool admits(double dt) const { return unconditional_ || dt < value_; }

 private:
  CriticalTimeStep() = default;
  bool unconditional_ = true;
  double value_ = 0.0;
};

/// Δt_crit = 1 / (ω_max sqrt(γ/2 - β)) when 2β < γ, unconditional otherwise.
CriticalTimeStep critical_time_step(const DenseMatrix& m, const DenseMatrix& k, const NewmarkParams& params);

/// Newmark stepping with the effective matrix M + βΔt²K factored once.
///
/// The stepper shares ownership of K; it is immutable after construction.
class NewmarkStepper {
 public:
  NewmarkStepper(const DenseMatrix& m, MatrixOperator k, const NewmarkParams& params, double dt);

  /// Advances `state` by one step with total load `load` (M a + K d = load).
  [[nodiscard]] KinematicState step(const KinematicState& state, const DenseVector& load) const;

  /// Solves the augmented block system 𝕃 X = (r_a, r_v, r_d) for X = (a, v, d).
  [[nodiscard]] KinematicState solve_augmented(const DenseVector& r_a, const DenseVector& r_v,
                                               const DenseVector& r_d) const;

  /// ℝ X: the block rows (0, (1-γ)Δt a + v, (½-β)Δt² a + Δt v + d), returned as (r_a, r_v, r_d).
  [[nodiscard]] KinematicState apply_history(const KinematicState& prev) const;

  [[nodiscard]] Index size() const { return effective_.size(); }
  [[nodiscard]] double dt() const { return dt_; }
  [[nodiscard]] const NewmarkParams& params() const { return params_; }

 private:
  MatrixOperator k_;
  NewmarkParams params_;
  double dt_;
  SpdSolver effective_;
};

}  // namespace mts
