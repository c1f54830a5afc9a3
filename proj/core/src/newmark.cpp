#include "mts/newmark.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mts {

NewmarkParams::NewmarkParams(double beta, double gamma) : beta_(beta), gamma_(gamma) {
  if (!std::isfinite(beta) || !std::isfinite(gamma)) throw InvalidArgument("Newmark parameters must be finite");
  if (gamma < 0.5) throw InvalidArgument("Newmark gamma must be >= 1/2, got " + std::to_string(gamma));
  if (beta < 0.0) throw InvalidArgument("Newmark beta must be >= 0, got " + std::to_string(beta));
}

void KinematicState::check_consistent() const {
  if (v.size() != d.size() || a.size() != d.size()) {
    throw DimensionMismatch("kinematic state: d, v and a must have equal lengths");
  }
}

NewmarkPrediction newmark_predict(const KinematicState& state, const NewmarkParams& params, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("Newmark time-step must be positive");
  state.check_consistent();
  const double beta = params.beta();
  const double gamma = params.gamma();
  return {state.d + dt * state.v + (0.5 * dt * dt * (1.0 - 2.0 * beta)) * state.a,
          state.v + (dt * (1.0 - gamma)) * state.a};
}

KinematicState newmark_step_unconstrained(const DenseMatrix& m, const DenseMatrix& k, const DenseVector& f_next,
                                          const KinematicState& state, const NewmarkParams& params, double dt) {
  if (m.rows() != state.size() || k.rows() != state.size() || f_next.size() != state.size()) {
    throw DimensionMismatch("newmark_step_unconstrained: inconsistent dimensions");
  }
  const NewmarkStepper stepper(m, MatrixOperator(std::make_shared<const DenseMatrix>(k)), params, dt);
  return stepper.step(state, f_next);
}

DenseVector consistent_acceleration(const DenseMatrix& m, const DenseMatrix& k, const DenseVector& f,
                                    const DenseVector& d) {
  if (m.rows() != d.size() || k.rows() != d.size() || f.size() != d.size()) {
    throw DimensionMismatch("consistent_acceleration: inconsistent dimensions");
  }
  return SpdSolver(m).solve(DenseVector(f - k * d));
}

CriticalTimeStep CriticalTimeStep::bounded(double value) {
  CriticalTimeStep c;
  c.unconditional_ = false;
  c.value_ = value;
  return c;
}

double CriticalTimeStep::value() const {
  if (unconditional_) throw std::logic_error("critical time-step is unconditional and has no finite value");
  return value_;
}

CriticalTimeStep critical_time_step(const DenseMatrix& m, const DenseMatrix& k, const NewmarkParams& params) {
  if (params.unconditionally_stable()) return CriticalTimeStep::unconditional();
  const double omega2 = max_generalized_eigenvalue(k, m);
  if (omega2 <= 0.0) return CriticalTimeStep::unconditional();  // K = 0: no oscillatory mode
  return CriticalTimeStep::bounded(1.0 / (std::sqrt(omega2) * std::sqrt(params.gamma() / 2.0 - params.beta())));
}

NewmarkStepper::NewmarkStepper(const DenseMatrix& m, MatrixOperator k, const NewmarkParams& params, double dt)
    : k_(std::move(k)), params_(params), dt_(dt) {
  if (!(dt > 0.0)) throw InvalidArgument("Newmark time-step must be positive");
  if (k_.rows() != m.rows() || k_.dense().cols() != m.cols() || m.rows() != m.cols()) {
    throw DimensionMismatch("NewmarkStepper: M and K must be square and of equal size");
  }
  effective_ = SpdSolver(m + (params.beta() * dt * dt) * k_.dense());
}

KinematicState NewmarkStepper::step(const KinematicState& state, const DenseVector& load) const {
  if (state.size() != size() || load.size() != size()) throw DimensionMismatch("NewmarkStepper::step: wrong size");
  const NewmarkPrediction pred = newmark_predict(state, params_, dt_);
  KinematicState next;
  next.a = effective_.solve(DenseVector(load - k_.apply(pred.d)));
  next.d = pred.d + (params_.beta() * dt_ * dt_) * next.a;
  next.v = pred.v + (params_.gamma() * dt_) * next.a;
  return next;
}

KinematicState NewmarkStepper::solve_augmented(const DenseVector& r_a, const DenseVector& r_v,
                                               const DenseVector& r_d) const {
  // Rows: M a + K d = r_a;  v - γΔt a = r_v;  d - βΔt² a = r_d.
  KinematicState x;
  x.a = effective_.solve(DenseVector(r_a - k_.apply(r_d)));
  x.v = r_v + (params_.gamma() * dt_) * x.a;
  x.d = r_d + (params_.beta() * dt_ * dt_) * x.a;
  return x;
}

KinematicState NewmarkStepper::apply_history(const KinematicState& prev) const {
  const NewmarkPrediction pred = newmark_predict(prev, params_, dt_);
  // r_a row of ℝ is zero; d/v rows are exactly the predictor.
  return {pred.d, pred.v, DenseVector::Zero(prev.size())};
}

}  // namespace mts
