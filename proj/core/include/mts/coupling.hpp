#pragma once

// Multi-time-step coupling of Newmark subdomains glued by velocity
// continuity at system time levels.
//
// Each subdomain i advances with its own Newmark pair (βᵢ, γᵢ) and time-step
// Δtᵢ = Δt / ηᵢ. Interface multipliers λ live at system levels and are
// interpolated linearly in between. One system step solves
//
//   [ 𝔸  𝔹 ] [ 𝕏⁽ⁿ⁺¹⁾       ]   [ 𝔽⁽ⁿ⁺¹⁾ ]
//   [ ℂ  0 ] [ λ⁽ⁿ⁺¹⁾ - λ⁽ⁿ⁾ ] = [ 0      ]
//
// where 𝕏 stacks the (a, v, d) blocks of every sub-level of every subdomain
// (subdomain-major, then sub-level, then a/v/d).

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mts/linalg.hpp"
#include "mts/newmark.hpp"

namespace mts {

/// Constraint matrix with entries in {-1, 0, +1} and at most one non-zero per row.
class SignedBooleanMatrix {
 public:
  SignedBooleanMatrix() = default;
  SignedBooleanMatrix(Index rows, Index cols);

  /// Validates a dense matrix against the signed Boolean invariants.
  static SignedBooleanMatrix from_dense(const DenseMatrix& c);

  /// Places `sign` (±1) at (row, col). Throws if the row already has an entry.
  void set(Index row, Index col, int sign);

  [[nodiscard]] Index rows() const { return static_cast<Index>(entries_.size()); }
  [[nodiscard]] Index cols() const { return cols_; }
  [[nodiscard]] int sign(Index row) const { return entries_[static_cast<std::size_t>(row)].sign; }
  [[nodiscard]] Index column(Index row) const { return entries_[static_cast<std::size_t>(row)].col; }
  [[nodiscard]] Index nonzeros() const;
  [[nodiscard]] bool is_zero() const { return nonzeros() == 0; }

  /// C x (length rows).
  [[nodiscard]] DenseVector multiply(const DenseVector& x) const;
  /// Cᵀ λ (length cols).
  [[nodiscard]] DenseVector multiply_transpose(const DenseVector& lambda) const;
  [[nodiscard]] DenseMatrix dense() const;

 private:
  struct Entry {
    Index col = 0;
    int sign = 0;
  };
  std::vector<Entry> entries_;
  Index cols_ = 0;
};

using ForceFunction = std::function<DenseVector(double)>;

/// One physics partition: mass, stiffness, integrator, time-step, load and
/// its rows of the interface constraint.
///
/// Matrices are held behind shared immutable storage so copies are cheap.
class Subdomain {
 public:
  /// Throws InvalidArgument unless M is SPD and K symmetric, and
  /// DimensionMismatch when shapes (including C's column count) disagree.
  Subdomain(DenseMatrix mass, DenseMatrix stiffness, NewmarkParams params, double dt,
            SignedBooleanMatrix constraints, ForceFunction force = {}, std::string name = {});

  [[nodiscard]] const DenseMatrix& mass() const { return mass_.dense(); }
  [[nodiscard]] const DenseMatrix& stiffness() const { return stiffness_.dense(); }
  [[nodiscard]] const MatrixOperator& mass_operator() const { return mass_; }
  [[nodiscard]] const MatrixOperator& stiffness_operator() const { return stiffness_; }
  [[nodiscard]] DenseVector apply_mass(const DenseVector& x) const { return mass_.apply(x); }
  [[nodiscard]] DenseVector apply_stiffness(const DenseVector& x) const { return stiffness_.apply(x); }
  [[nodiscard]] const NewmarkParams& params() const { return params_; }
  [[nodiscard]] double dt() const { return dt_; }
  [[nodiscard]] const SignedBooleanMatrix& constraints() const { return constraints_; }
  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] Index size() const { return mass_.rows(); }
  [[nodiscard]] bool has_force() const { return static_cast<bool>(force_); }

  /// External load at time t; zero when the subdomain carries no force.
  [[nodiscard]] DenseVector force(double t) const;

  [[nodiscard]] Subdomain with_force(ForceFunction force) const;
  [[nodiscard]] Subdomain with_params(const NewmarkParams& params) const;
  [[nodiscard]] Subdomain with_dt(double dt) const;

 private:
  MatrixOperator mass_;
  MatrixOperator stiffness_;
  NewmarkParams params_;
  double dt_;
  SignedBooleanMatrix constraints_;
  ForceFunction force_;
  std::string name_;
};

/// Initial displacement and velocity; acceleration is made consistent unless given.
struct InitialCondition {
  DenseVector d;
  DenseVector v;
  std::optional<DenseVector> a;
};

enum class SaddleSolver {
  automatic,        ///< monolithic below kMonolithicSizeLimit unknowns, Schur otherwise
  monolithic,       ///< dense pivoted LU of the full saddle matrix
  schur_complement  ///< subdomain sweeps plus an N_C x N_C interface solve
};

inline constexpr Index kMonolithicSizeLimit = 1200;

struct CouplingOptions {
  SaddleSolver solver = SaddleSolver::automatic;
  /// Overrides the consistent initial multiplier.
  std::optional<DenseVector> initial_lambda;
  /// Reject Δtᵢ >= Δtᵢ_crit at construction.
  bool enforce_stability_limit = true;
  double t0 = 0.0;
};

/// Per-subdomain sub-level history over one system step plus λ⁽ⁿ⁺¹⁾.
struct SystemStepResult {
  /// history[i][j-1] is subdomain i at sub-level j (j = 1..ηᵢ).
  std::vector<std::vector<KinematicState>> history;
  DenseVector lambda_next;
  double t_next = 0.0;

  [[nodiscard]] const KinematicState& final_state(std::size_t i) const { return history.at(i).back(); }
};

namespace detail {
struct StepCache;
}

struct SaddleSolution;

/// All subdomains, the system time-step and the committed state at level n.
///
/// Construction validates integer subcycling ratios, stability limits,
/// constraint shapes and compatible initial velocities, then initializes
/// λ⁰ and a⁰ consistently. Copies share an immutable factorization cache.
class CoupledSystem {
 public:
  CoupledSystem(std::vector<Subdomain> subdomains, double dt_system, std::vector<InitialCondition> initial,
                CouplingOptions options = {});

  [[nodiscard]] std::size_t subdomain_count() const { return subdomains_.size(); }
  [[nodiscard]] const Subdomain& subdomain(std::size_t i) const { return subdomains_.at(i); }
  [[nodiscard]] const std::vector<Subdomain>& subdomains() const { return subdomains_; }
  [[nodiscard]] double dt_system() const { return dt_; }
  [[nodiscard]] int eta(std::size_t i) const { return eta_.at(i); }
  [[nodiscard]] const std::vector<int>& etas() const { return eta_; }
  [[nodiscard]] Index constraint_count() const { return constraint_count_; }
  [[nodiscard]] const DenseVector& lambda() const { return lambda_; }
  [[nodiscard]] const KinematicState& state(std::size_t i) const { return states_.at(i); }
  [[nodiscard]] const std::vector<KinematicState>& states() const { return states_; }
  [[nodiscard]] double time() const { return time_at(step_); }
  /// t₀ + n Δt, without accumulated round-off.
  [[nodiscard]] double time_at(long step) const { return t0_ + static_cast<double>(step) * dt_; }
  [[nodiscard]] long step_index() const { return step_; }
  /// Number of kinematic unknowns Σ 3 ηᵢ Nᵢ.
  [[nodiscard]] Index kinematic_unknowns() const;
  /// Resolved solver path (never `automatic`).
  [[nodiscard]] SaddleSolver solver() const { return solver_; }

  /// Moves the system to level n+1 using a result from advance_system_step
  /// (or any stepper producing the same shape).
  void commit(const SystemStepResult& result);

 private:
  std::vector<Subdomain> subdomains_;
  double dt_;
  std::vector<int> eta_;
  Index constraint_count_ = 0;
  std::vector<KinematicState> states_;
  DenseVector lambda_;
  double t0_ = 0.0;
  long step_ = 0;
  SaddleSolver solver_ = SaddleSolver::automatic;
  std::shared_ptr<const detail::StepCache> cache_;

  friend SaddleSolution solve_saddle(const CoupledSystem&, const DenseVector&, std::optional<SaddleSolver>);
};

/// (1 - j/η) λⁿ + (j/η) λⁿ⁺¹, for 0 <= j <= η.
DenseVector interpolate_lambda(const DenseVector& lambda_n, const DenseVector& lambda_np1, int j, int eta);

/// The 3N x 3N blocks 𝕃ᵢ and ℝᵢ, block order (a, v, d).
struct AugmentedMatrices {
  DenseMatrix L;
  DenseMatrix R;
};
AugmentedMatrices assemble_L_R(const Subdomain& sub);

/// Advances one subdomain from sub-level j-1 to j with the interpolated multiplier.
KinematicState subdomain_substep(const Subdomain& sub, const KinematicState& prev, const DenseVector& lambda_n,
                                 const DenseVector& lambda_np1, int j, int eta, const DenseVector& f_next);

/// Right-hand side 𝔽⁽ⁿ⁺¹⁾ of the saddle system at the committed level.
DenseVector assemble_saddle_rhs(const CoupledSystem& sys);

/// The full saddle matrix [[𝔸, 𝔹], [ℂ, 0]]. Dense; intended for small systems.
DenseMatrix assemble_saddle_matrix(const CoupledSystem& sys);

struct SaddleSolution {
  DenseVector x;        ///< stacked 𝕏⁽ⁿ⁺¹⁾
  DenseVector dlambda;  ///< λ⁽ⁿ⁺¹⁾ - λ⁽ⁿ⁾
};

/// Solves [[𝔸, 𝔹], [ℂ, 0]] (X, Δλ) = (F, 0). `path` defaults to the system's choice.
SaddleSolution solve_saddle(const CoupledSystem& sys, const DenseVector& f,
                            std::optional<SaddleSolver> path = std::nullopt);

/// Splits a stacked 𝕏 into per-subdomain sub-level histories.
std::vector<std::vector<KinematicState>> unpack_history(const CoupledSystem& sys, const DenseVector& x);

/// One system step. Pure: the system is not modified.
SystemStepResult advance_system_step(const CoupledSystem& sys);

}  // namespace mts
