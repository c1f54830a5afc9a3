#include "mts/baselines.hpp"

namespace mts {

BackwardEulerSolver::BackwardEulerSolver(const CoupledSystem& sys) : dt_(sys.dt_system()) {
  const Index nc = sys.constraint_count();
  DenseMatrix schur = DenseMatrix::Zero(nc, nc);
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    if (sys.eta(i) != 1) throw InvalidArgument("backward Euler baseline requires eta = 1 in every subdomain");
    const Subdomain& sub = sys.subdomain(i);
    effective_.emplace_back(DenseMatrix(sub.mass() / dt_ + dt_ * sub.stiffness()));
    const DenseMatrix ct = sub.constraints().dense().transpose();
    h_inv_ct_.push_back(effective_.back().solve_columns(ct));
    schur += ct.transpose() * h_inv_ct_.back();
  }
  if (nc > 0) {
    try {
      interface_ = LuSolver(schur);
    } catch (const SingularMatrix& e) {
      throw SingularSaddleSystem(std::string("backward Euler interface system: ") + e.what());
    }
  }
}

SystemStepResult BackwardEulerSolver::step(const CoupledSystem& sys) const {
  if (sys.subdomain_count() != effective_.size() || sys.dt_system() != dt_) {
    throw InvalidArgument("backward Euler solver used with a different system");
  }
  const double t_next = sys.time_at(sys.step_index() + 1);
  const Index nc = sys.constraint_count();

  // Free velocities and the interface correction.
  std::vector<DenseVector> v_free(sys.subdomain_count());
  DenseVector residual = DenseVector::Zero(nc);
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const Subdomain& sub = sys.subdomain(i);
    const KinematicState& s = sys.state(i);
    const DenseVector rhs = sub.force(t_next) - sub.apply_stiffness(s.d) + sub.apply_mass(s.v) / dt_;
    v_free[i] = effective_[i].solve(rhs);
    residual += sub.constraints().multiply(v_free[i]);
  }
  const DenseVector lambda = nc > 0 ? DenseVector(-interface_.solve(residual)) : DenseVector(0);

  SystemStepResult out;
  out.history.resize(sys.subdomain_count());
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const KinematicState& s = sys.state(i);
    KinematicState next;
    next.v = v_free[i] + h_inv_ct_[i] * lambda;
    next.d = s.d + dt_ * next.v;
    next.a = (next.v - s.v) / dt_;
    out.history[i].push_back(std::move(next));
  }
  out.lambda_next = lambda;
  out.t_next = t_next;
  return out;
}

SystemStepResult backward_euler_step(const CoupledSystem& sys) { return BackwardEulerSolver(sys).step(sys); }

}  // namespace mts
