#include "mts/diagnostics.hpp"

#include <cmath>
#include <numeric>

namespace mts {

namespace {

void check_step_shape(const SystemStepResult& step, const CoupledSystem& sys) {
  if (step.history.size() != sys.subdomain_count()) {
    throw DimensionMismatch("step result has " + std::to_string(step.history.size()) + " subdomains, system has " +
                            std::to_string(sys.subdomain_count()));
  }
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    if (step.history[i].size() != static_cast<std::size_t>(sys.eta(i))) {
      throw DimensionMismatch("step result sub-level count does not match eta");
    }
  }
  if (step.lambda_next.size() != sys.constraint_count()) {
    throw DimensionMismatch("step result multiplier length does not match the system");
  }
}

// State of subdomain i at sub-level j (0 = committed level).
const KinematicState& level(const SystemStepResult& step, const CoupledSystem& sys, std::size_t i, int j) {
  return j == 0 ? sys.state(i) : step.history[i][static_cast<std::size_t>(j - 1)];
}

double kinetic(const Subdomain& sub, const DenseVector& v) { return 0.5 * v.dot(sub.apply_mass(v)); }
double potential(const Subdomain& sub, const DenseVector& d) { return 0.5 * d.dot(sub.apply_stiffness(d)); }

}  // namespace

double EnergyBreakdown::kinetic_total() const { return std::accumulate(kinetic.begin(), kinetic.end(), 0.0); }
double EnergyBreakdown::potential_total() const { return std::accumulate(potential.begin(), potential.end(), 0.0); }

double kinetic_energy(const DenseMatrix& m, const DenseVector& v) { return 0.5 * v.dot(m * v); }
double potential_energy(const DenseMatrix& k, const DenseVector& d) { return 0.5 * d.dot(k * d); }

EnergyBreakdown total_energy(const CoupledSystem& sys) { return total_energy(sys, sys.states()); }

EnergyBreakdown total_energy(const CoupledSystem& sys, const std::vector<KinematicState>& states) {
  if (states.size() != sys.subdomain_count()) throw DimensionMismatch("total_energy: one state per subdomain");
  EnergyBreakdown out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    out.kinetic.push_back(kinetic(sys.subdomain(i), states[i].v));
    out.potential.push_back(potential(sys.subdomain(i), states[i].d));
  }
  out.total = out.kinetic_total() + out.potential_total();
  return out;
}

double energy_algorithm(const SystemStepResult& step, const CoupledSystem& sys) {
  check_step_shape(step, sys);
  const double dt2 = sys.dt_system() * sys.dt_system();
  double total = 0.0;
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const Subdomain& sub = sys.subdomain(i);
    const double beta = sub.params().beta();
    const double gamma = sub.params().gamma();
    const int eta = sys.eta(i);
    const double scale = dt2 / (static_cast<double>(eta) * eta) * (beta - gamma / 2.0);

    double potential_jumps = 0.0;
    double kinetic_jumps = 0.0;
    for (int j = 0; j < eta; ++j) {
      const KinematicState& a = level(step, sys, i, j);
      const KinematicState& b = level(step, sys, i, j + 1);
      potential_jumps += potential(sub, b.d - a.d);
      kinetic_jumps += kinetic(sub, b.a - a.a);
    }
    const double t_a_jump =
        kinetic(sub, step.history[i].back().a) - kinetic(sub, sys.state(i).a);

    total += -2.0 * (gamma - 0.5) * potential_jumps - scale * t_a_jump - scale * (2.0 * gamma - 1.0) * kinetic_jumps;
  }
  return total;
}

double energy_algorithm_no_subcycling(const SystemStepResult& step, const CoupledSystem& sys) {
  check_step_shape(step, sys);
  const double dt2 = sys.dt_system() * sys.dt_system();
  double total = 0.0;
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    if (sys.eta(i) != 1) throw InvalidArgument("energy_algorithm_no_subcycling: subdomain is subcycled");
    const Subdomain& sub = sys.subdomain(i);
    const double beta = sub.params().beta();
    const double gamma = sub.params().gamma();
    const KinematicState& a = sys.state(i);
    const KinematicState& b = step.history[i].front();
    total += -2.0 * (gamma - 0.5) * potential(sub, b.d - a.d) -
             dt2 * gamma * (2.0 * beta - gamma) * kinetic(sub, b.a - a.a);
  }
  return total;
}

double energy_interface(const SystemStepResult& step, const CoupledSystem& sys) {
  check_step_shape(step, sys);
  double total = 0.0;
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const Subdomain& sub = sys.subdomain(i);
    if (sub.constraints().is_zero()) continue;
    const double gamma = sub.params().gamma();
    const int eta = sys.eta(i);
    for (int j = 0; j < eta; ++j) {
      const DenseVector lam = (1.0 - gamma) * interpolate_lambda(sys.lambda(), step.lambda_next, j, eta) +
                              gamma * interpolate_lambda(sys.lambda(), step.lambda_next, j + 1, eta);
      const DenseVector jump = level(step, sys, i, j + 1).d - level(step, sys, i, j).d;
      total += lam.dot(sub.constraints().multiply(jump));
    }
  }
  return total;
}

double external_work(const SystemStepResult& step, const CoupledSystem& sys) {
  check_step_shape(step, sys);
  double total = 0.0;
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const Subdomain& sub = sys.subdomain(i);
    if (!sub.has_force()) continue;
    const double gamma = sub.params().gamma();
    DenseVector f_prev = sub.force(sys.time());
    for (int j = 0; j < sys.eta(i); ++j) {
      DenseVector f_next = sub.force(sys.time() + (j + 1) * sub.dt());
      const DenseVector jump = level(step, sys, i, j + 1).d - level(step, sys, i, j).d;
      total += jump.dot((1.0 - gamma) * f_prev + gamma * f_next);
      f_prev = std::move(f_next);
    }
  }
  return total;
}

DriftRecord drift_record(const CoupledSystem& sys) { return drift_record(sys, sys.states()); }

DriftRecord drift_record(const CoupledSystem& sys, const std::vector<KinematicState>& states) {
  if (states.size() != sys.subdomain_count()) throw DimensionMismatch("drift_record: one state per subdomain");
  const Index nc = sys.constraint_count();
  DriftRecord out{DenseVector::Zero(nc), DenseVector::Zero(nc), DenseVector::Zero(nc)};
  for (std::size_t i = 0; i < states.size(); ++i) {
    const SignedBooleanMatrix& c = sys.subdomain(i).constraints();
    out.a_drift += c.multiply(states[i].a);
    out.d_drift += c.multiply(states[i].d);
    out.v_residual += c.multiply(states[i].v);
  }
  return out;
}

DriftRecord predict_drift(const DriftRecord& current, const NewmarkParams& params, double dt) {
  const double beta = params.beta();
  const double gamma = params.gamma();
  DriftRecord out;
  out.a_drift = (1.0 - 1.0 / gamma) * current.a_drift;
  out.d_drift = current.d_drift + ((0.5 - beta / gamma) * dt * dt) * current.a_drift;
  out.v_residual = DenseVector::Zero(current.a_drift.size());
  return out;
}

double stability_norm(const CoupledSystem& sys) { return stability_norm(sys, sys.states()); }

double stability_norm(const CoupledSystem& sys, const std::vector<KinematicState>& states) {
  if (states.size() != sys.subdomain_count()) throw DimensionMismatch("stability_norm: one state per subdomain");
  double total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Subdomain& sub = sys.subdomain(i);
    const double h = sub.dt();
    const double c = h * h * (sub.params().beta() - sub.params().gamma() / 2.0);
    const DenseVector& a = states[i].a;
    const DenseVector& v = states[i].v;
    total += a.dot(sub.apply_mass(a)) + c * a.dot(sub.apply_stiffness(a)) + v.dot(sub.apply_stiffness(v));
  }
  return total;
}

void SubcyclingIndicator::record(double e_interface) {
  const double mag = std::abs(e_interface);
  max_abs_ = std::max(max_abs_, mag);
  cumulative_ += mag;
  ++samples_;
}

StepReport make_step_report(const SystemStepResult& step, const CoupledSystem& sys) {
  std::vector<KinematicState> finals;
  finals.reserve(step.history.size());
  for (std::size_t i = 0; i < step.history.size(); ++i) finals.push_back(step.final_state(i));
  StepReport out;
  out.t = step.t_next;
  out.energy = total_energy(sys, finals);
  out.energy.e_algorithm = energy_algorithm(step, sys);
  out.energy.e_interface = energy_interface(step, sys);
  out.drift = drift_record(sys, finals);
  return out;
}

}  // namespace mts
