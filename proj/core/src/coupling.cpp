#include "mts/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

namespace mts {

// ---------------------------------------------------------------------------
// SignedBooleanMatrix

SignedBooleanMatrix::SignedBooleanMatrix(Index rows, Index cols)
    : entries_(static_cast<std::size_t>(rows)), cols_(cols) {
  if (rows < 0 || cols < 0) throw InvalidArgument("signed Boolean matrix: negative dimension");
}

SignedBooleanMatrix SignedBooleanMatrix::from_dense(const DenseMatrix& c) {
  SignedBooleanMatrix out(c.rows(), c.cols());
  for (Index r = 0; r < c.rows(); ++r) {
    for (Index col = 0; col < c.cols(); ++col) {
      const double value = c(r, col);
      if (value == 0.0) continue;
      if (value != 1.0 && value != -1.0) {
        throw InvalidArgument("signed Boolean matrix: entry (" + std::to_string(r) + "," + std::to_string(col) +
                              ") is not in {-1, 0, +1}");
      }
      out.set(r, col, value > 0 ? 1 : -1);
    }
  }
  return out;
}

void SignedBooleanMatrix::set(Index row, Index col, int sign) {
  if (row < 0 || row >= rows() || col < 0 || col >= cols_) {
    throw InvalidArgument("signed Boolean matrix: index out of range");
  }
  if (sign != 1 && sign != -1) throw InvalidArgument("signed Boolean matrix: sign must be +1 or -1");
  auto& e = entries_[static_cast<std::size_t>(row)];
  if (e.sign != 0) {
    throw InvalidArgument("signed Boolean matrix: row " + std::to_string(row) + " already has a non-zero entry");
  }
  e = {col, sign};
}

Index SignedBooleanMatrix::nonzeros() const {
  return static_cast<Index>(std::count_if(entries_.begin(), entries_.end(), [](const Entry& e) { return e.sign != 0; }));
}

DenseVector SignedBooleanMatrix::multiply(const DenseVector& x) const {
  if (x.size() != cols_) throw DimensionMismatch("C x: vector length does not match column count");
  DenseVector out = DenseVector::Zero(rows());
  for (Index r = 0; r < rows(); ++r) {
    const auto& e = entries_[static_cast<std::size_t>(r)];
    if (e.sign != 0) out[r] = e.sign * x[e.col];
  }
  return out;
}

DenseVector SignedBooleanMatrix::multiply_transpose(const DenseVector& lambda) const {
  if (lambda.size() != rows()) throw DimensionMismatch("Cᵀ λ: vector length does not match row count");
  DenseVector out = DenseVector::Zero(cols_);
  for (Index r = 0; r < rows(); ++r) {
    const auto& e = entries_[static_cast<std::size_t>(r)];
    if (e.sign != 0) out[e.col] += e.sign * lambda[r];
  }
  return out;
}

DenseMatrix SignedBooleanMatrix::dense() const {
  DenseMatrix out = DenseMatrix::Zero(rows(), cols_);
  for (Index r = 0; r < rows(); ++r) {
    const auto& e = entries_[static_cast<std::size_t>(r)];
    if (e.sign != 0) out(r, e.col) = e.sign;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subdomain

Subdomain::Subdomain(DenseMatrix mass, DenseMatrix stiffness, NewmarkParams params, double dt,
                     SignedBooleanMatrix constraints, ForceFunction force, std::string name)
    : mass_(std::make_shared<const DenseMatrix>(std::move(mass))),
      stiffness_(std::make_shared<const DenseMatrix>(std::move(stiffness))),
      params_(params),
      dt_(dt),
      constraints_(std::move(constraints)),
      force_(std::move(force)),
      name_(std::move(name)) {
  const DenseMatrix& m = mass_.dense();
  const DenseMatrix& k = stiffness_.dense();
  const Index n = m.rows();
  if (m.cols() != n || k.rows() != n || k.cols() != n) {
    throw DimensionMismatch("subdomain '" + name_ + "': M and K must be square and of equal size");
  }
  if (constraints_.cols() != n) {
    throw DimensionMismatch("subdomain '" + name_ + "': constraint matrix has " +
                            std::to_string(constraints_.cols()) + " columns, expected " + std::to_string(n));
  }
  if (!(dt > 0.0)) throw InvalidArgument("subdomain '" + name_ + "': time-step must be positive");
  if (!m.allFinite() || !k.allFinite()) throw InvalidArgument("subdomain '" + name_ + "': non-finite matrix entries");
  if (!is_symmetric(m) || !is_symmetric(k)) {
    throw InvalidArgument("subdomain '" + name_ + "': M and K must be symmetric");
  }
  try {
    (void)SpdSolver(m);
  } catch (const SingularMatrix&) {
    throw InvalidArgument("subdomain '" + name_ + "': mass matrix is not positive definite");
  }
}

DenseVector Subdomain::force(double t) const {
  if (!force_) return DenseVector::Zero(size());
  DenseVector f = force_(t);
  if (f.size() != size()) {
    throw DimensionMismatch("subdomain '" + name_ + "': force function returned length " + std::to_string(f.size()));
  }
  return f;
}

Subdomain Subdomain::with_force(ForceFunction force) const {
  Subdomain out = *this;
  out.force_ = std::move(force);
  return out;
}

Subdomain Subdomain::with_params(const NewmarkParams& params) const {
  Subdomain out = *this;
  out.params_ = params;
  return out;
}

Subdomain Subdomain::with_dt(double dt) const {
  if (!(dt > 0.0)) throw InvalidArgument("subdomain '" + name_ + "': time-step must be positive");
  Subdomain out = *this;
  out.dt_ = dt;
  return out;
}

// ---------------------------------------------------------------------------
// Step cache

namespace detail {

struct SubdomainCache {
  NewmarkStepper stepper;
  /// Response of the stacked sub-level history to a unit Δλ: -Q⁻¹𝔹 (3ηN x N_C).
  DenseMatrix response;
};

struct StepCache {
  std::vector<SubdomainCache> subs;
  std::vector<Index> offsets;
  Index unknowns = 0;
  std::optional<LuSolver> interface;   // Schur complement Σ ℂᵢ(-Qᵢ⁻¹𝔹ᵢ)
  std::optional<LuSolver> monolithic;  // full saddle matrix
};

}  // namespace detail

namespace {

/// Q⁻¹ F for one subdomain: forward substitution over its sub-levels.
DenseVector forward_sweep(const NewmarkStepper& stepper, int eta, const Eigen::Ref<const DenseVector>& f) {
  const Index n = stepper.size();
  DenseVector x(3 * n * eta);
  KinematicState prev;
  for (int j = 0; j < eta; ++j) {
    const Index base = 3 * n * j;
    DenseVector r_a = f.segment(base, n);
    DenseVector r_v = f.segment(base + n, n);
    DenseVector r_d = f.segment(base + 2 * n, n);
    if (j > 0) {
      const KinematicState hist = stepper.apply_history(prev);
      r_v += hist.v;
      r_d += hist.d;
    }
    prev = stepper.solve_augmented(r_a, r_v, r_d);
    x.segment(base, n) = prev.a;
    x.segment(base + n, n) = prev.v;
    x.segment(base + 2 * n, n) = prev.d;
  }
  return x;
}

/// Σ Cᵢ vᵢ at the last sub-level of a stacked history.
DenseVector constraint_residual(const CoupledSystem& sys, const std::vector<Index>& offsets, const DenseVector& x) {
  DenseVector out = DenseVector::Zero(sys.constraint_count());
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const Index n = sys.subdomain(i).size();
    const Index v_last = offsets[i] + 3 * n * (sys.eta(i) - 1) + n;
    out += sys.subdomain(i).constraints().multiply(x.segment(v_last, n));
  }
  return out;
}

DenseMatrix response_matrix(const Subdomain& sub, const NewmarkStepper& stepper, int eta) {
  const Index n = sub.size();
  const Index nc = sub.constraints().rows();
  DenseMatrix g = DenseMatrix::Zero(3 * n * eta, nc);
  for (Index k = 0; k < nc; ++k) {
    if (sub.constraints().sign(k) == 0) continue;
    DenseVector unit = DenseVector::Zero(nc);
    unit[k] = 1.0;
    const DenseVector ct = sub.constraints().multiply_transpose(unit);
    DenseVector f = DenseVector::Zero(3 * n * eta);
    for (int j = 1; j <= eta; ++j) f.segment(3 * n * (j - 1), n) = (static_cast<double>(j) / eta) * ct;
    g.col(k) = forward_sweep(stepper, eta, f);
  }
  return g;
}

std::vector<Index> stacked_offsets(const CoupledSystem& sys) {
  std::vector<Index> offsets(sys.subdomain_count());
  Index acc = 0;
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    offsets[i] = acc;
    acc += 3 * sys.subdomain(i).size() * sys.eta(i);
  }
  return offsets;
}

DenseMatrix interface_schur(const CoupledSystem& sys, const std::vector<detail::SubdomainCache>& subs) {
  const Index nc = sys.constraint_count();
  DenseMatrix s = DenseMatrix::Zero(nc, nc);
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const Subdomain& sub = sys.subdomain(i);
    const Index n = sub.size();
    const Index v_last = 3 * n * (sys.eta(i) - 1) + n;
    for (Index k = 0; k < nc; ++k) {
      s.col(k) += sub.constraints().multiply(subs[i].response.col(k).segment(v_last, n));
    }
  }
  return s;
}

LuSolver factor_saddle(const DenseMatrix& a, const char* what) {
  try {
    return LuSolver(a);
  } catch (const SingularMatrix& e) {
    throw SingularSaddleSystem(std::string(what) + ": " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// CoupledSystem

CoupledSystem::CoupledSystem(std::vector<Subdomain> subdomains, double dt_system,
                             std::vector<InitialCondition> initial, CouplingOptions options)
    : subdomains_(std::move(subdomains)), dt_(dt_system), t0_(options.t0) {
  if (subdomains_.empty()) throw InvalidArgument("coupled system needs at least one subdomain");
  if (!(dt_system > 0.0) || !std::isfinite(dt_system)) throw InvalidArgument("system time-step must be positive");
  if (initial.size() != subdomains_.size()) {
    throw InvalidArgument("coupled system: expected " + std::to_string(subdomains_.size()) +
                          " initial conditions, got " + std::to_string(initial.size()));
  }

  constraint_count_ = subdomains_.front().constraints().rows();
  for (const auto& sub : subdomains_) {
    if (sub.constraints().rows() != constraint_count_) {
      throw InvalidArgument("coupled system: subdomain '" + sub.name() + "' has " +
                            std::to_string(sub.constraints().rows()) + " constraint rows, expected " +
                            std::to_string(constraint_count_));
    }
  }

  // Integer subcycling ratios; the subdomain step is then reset to Δt/η exactly.
  eta_.resize(subdomains_.size());
  for (std::size_t i = 0; i < subdomains_.size(); ++i) {
    const double ratio = dt_ / subdomains_[i].dt();
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "coupled system: subdomain '" << subdomains_[i].name() << "' time-step " << subdomains_[i].dt()
          << " does not divide the system time-step " << dt_ << " (ratio " << ratio << ")";
      throw InvalidArgument(msg.str());
    }
    eta_[i] = static_cast<int>(rounded);
    subdomains_[i] = subdomains_[i].with_dt(dt_ / eta_[i]);
  }

  if (options.enforce_stability_limit) {
    for (const auto& sub : subdomains_) {
      const CriticalTimeStep crit = critical_time_step(sub.mass(), sub.stiffness(), sub.params());
      if (!crit.admits(sub.dt())) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "coupled system: subdomain '" << sub.name() << "' time-step " << sub.dt()
            << " is not below its critical time-step " << crit.value();
        throw InvalidArgument(msg.str());
      }
    }
  }

  // Initial data and compatibility of interface velocities.
  double v_scale = 0.0;
  DenseVector v_residual = DenseVector::Zero(constraint_count_);
  for (std::size_t i = 0; i < subdomains_.size(); ++i) {
    const auto& ic = initial[i];
    const Index n = subdomains_[i].size();
    if (ic.d.size() != n || ic.v.size() != n || (ic.a && ic.a->size() != n)) {
      throw DimensionMismatch("coupled system: initial condition of subdomain '" + subdomains_[i].name() +
                              "' has the wrong length");
    }
    v_scale = std::max(v_scale, max_abs(ic.v));
    v_residual += subdomains_[i].constraints().multiply(ic.v);
  }
  if (max_abs(v_residual) > 1e-10 * v_scale) {
    throw InvalidArgument("coupled system: initial interface velocities are incompatible (residual " +
                          std::to_string(max_abs(v_residual)) + ")");
  }

  // λ⁰ from the acceleration-level interface condition, then a⁰ = M⁻¹(f + Cᵀλ⁰ - K d⁰).
  std::vector<SpdSolver> mass_solvers;
  mass_solvers.reserve(subdomains_.size());
  for (const auto& sub : subdomains_) mass_solvers.emplace_back(sub.mass());

  if (options.initial_lambda) {
    if (options.initial_lambda->size() != constraint_count_) {
      throw DimensionMismatch("coupled system: initial multiplier has the wrong length");
    }
    lambda_ = *options.initial_lambda;
  } else {
    DenseMatrix s = DenseMatrix::Zero(constraint_count_, constraint_count_);
    DenseVector r = DenseVector::Zero(constraint_count_);
    for (std::size_t i = 0; i < subdomains_.size(); ++i) {
      const auto& sub = subdomains_[i];
      if (sub.constraints().is_zero()) continue;
      const DenseMatrix ct = sub.constraints().dense().transpose();
      const DenseMatrix minv_ct = mass_solvers[i].solve_columns(ct);
      s += ct.transpose() * minv_ct;
      r += sub.constraints().multiply(mass_solvers[i].solve(DenseVector(sub.force(t0_) - sub.apply_stiffness(initial[i].d))));
    }
    if (constraint_count_ > 0) {
      lambda_ = -factor_saddle(s, "initial multiplier (redundant constraints?)").solve(r);
    } else {
      lambda_ = DenseVector(0);
    }
  }

  states_.reserve(subdomains_.size());
  for (std::size_t i = 0; i < subdomains_.size(); ++i) {
    const auto& sub = subdomains_[i];
    KinematicState st;
    st.d = initial[i].d;
    st.v = initial[i].v;
    st.a = initial[i].a ? *initial[i].a
                        : mass_solvers[i].solve(DenseVector(sub.force(t0_) + sub.constraints().multiply_transpose(lambda_) -
                                                            sub.apply_stiffness(st.d)));
    states_.push_back(std::move(st));
  }

  // Solver path and cached factorizations.
  auto cache = std::make_shared<detail::StepCache>();
  cache->offsets = stacked_offsets(*this);
  cache->unknowns = kinematic_unknowns();
  cache->subs.reserve(subdomains_.size());
  for (std::size_t i = 0; i < subdomains_.size(); ++i) {
    const auto& sub = subdomains_[i];
    cache->subs.push_back({NewmarkStepper(sub.mass(), sub.stiffness_operator(), sub.params(), sub.dt()), {}});
  }

  solver_ = options.solver;
  if (solver_ == SaddleSolver::automatic) {
    solver_ = cache->unknowns + constraint_count_ <= kMonolithicSizeLimit ? SaddleSolver::monolithic
                                                                          : SaddleSolver::schur_complement;
  }
  if (solver_ == SaddleSolver::monolithic) {
    cache->monolithic = factor_saddle(assemble_saddle_matrix(*this), "saddle system");
  } else {
    for (std::size_t i = 0; i < subdomains_.size(); ++i) {
      cache->subs[i].response = response_matrix(subdomains_[i], cache->subs[i].stepper, eta_[i]);
    }
    if (constraint_count_ > 0) {
      cache->interface = factor_saddle(interface_schur(*this, cache->subs), "interface Schur complement");
    }
  }
  cache_ = std::move(cache);
}

Index CoupledSystem::kinematic_unknowns() const {
  Index total = 0;
  for (std::size_t i = 0; i < subdomains_.size(); ++i) total += 3 * subdomains_[i].size() * eta_[i];
  return total;
}

void CoupledSystem::commit(const SystemStepResult& result) {
  if (result.history.size() != subdomains_.size() || result.lambda_next.size() != constraint_count_) {
    throw DimensionMismatch("commit: step result does not match the system");
  }
  for (std::size_t i = 0; i < subdomains_.size(); ++i) {
    if (result.history[i].size() != static_cast<std::size_t>(eta_[i])) {
      throw DimensionMismatch("commit: subdomain history has the wrong number of sub-levels");
    }
  }
  for (std::size_t i = 0; i < subdomains_.size(); ++i) states_[i] = result.history[i].back();
  lambda_ = result.lambda_next;
  ++step_;
}

// ---------------------------------------------------------------------------
// Operations

DenseVector interpolate_lambda(const DenseVector& lambda_n, const DenseVector& lambda_np1, int j, int eta) {
  if (lambda_n.size() != lambda_np1.size()) throw DimensionMismatch("interpolate_lambda: multiplier lengths differ");
  if (eta < 1 || j < 0 || j > eta) throw InvalidArgument("interpolate_lambda: need 0 <= j <= eta, eta >= 1");
  if (j == 0) return lambda_n;
  if (j == eta) return lambda_np1;
  const double w = static_cast<double>(j) / eta;
  return (1.0 - w) * lambda_n + w * lambda_np1;
}

AugmentedMatrices assemble_L_R(const Subdomain& sub) {
  const Index n = sub.size();
  const double h = sub.dt();
  const double beta = sub.params().beta();
  const double gamma = sub.params().gamma();
  const DenseMatrix eye = DenseMatrix::Identity(n, n);

  AugmentedMatrices out{DenseMatrix::Zero(3 * n, 3 * n), DenseMatrix::Zero(3 * n, 3 * n)};
  auto& l = out.L;
  l.block(0, 0, n, n) = sub.mass();
  l.block(0, 2 * n, n, n) = sub.stiffness();
  l.block(n, 0, n, n) = -gamma * h * eye;
  l.block(n, n, n, n) = eye;
  l.block(2 * n, 0, n, n) = -beta * h * h * eye;
  l.block(2 * n, 2 * n, n, n) = eye;

  auto& r = out.R;
  r.block(n, 0, n, n) = (1.0 - gamma) * h * eye;
  r.block(n, n, n, n) = eye;
  r.block(2 * n, 0, n, n) = (0.5 - beta) * h * h * eye;
  r.block(2 * n, n, n, n) = h * eye;
  r.block(2 * n, 2 * n, n, n) = eye;
  return out;
}

KinematicState subdomain_substep(const Subdomain& sub, const KinematicState& prev, const DenseVector& lambda_n,
                                 const DenseVector& lambda_np1, int j, int eta, const DenseVector& f_next) {
  if (j < 1 || j > eta) throw InvalidArgument("subdomain_substep: need 1 <= j <= eta");
  if (lambda_n.size() != sub.constraints().rows()) throw DimensionMismatch("subdomain_substep: multiplier length");
  const NewmarkStepper stepper(sub.mass(), sub.stiffness_operator(), sub.params(), sub.dt());
  const DenseVector lam = interpolate_lambda(lambda_n, lambda_np1, j, eta);
  return stepper.step(prev, f_next + sub.constraints().multiply_transpose(lam));
}

DenseVector assemble_saddle_rhs(const CoupledSystem& sys) {
  DenseVector f(sys.kinematic_unknowns());
  Index offset = 0;
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const Subdomain& sub = sys.subdomain(i);
    const Index n = sub.size();
    const int eta = sys.eta(i);
    const DenseVector ct_lambda = sub.constraints().multiply_transpose(sys.lambda());
    for (int j = 1; j <= eta; ++j) {
      const Index base = offset + 3 * n * (j - 1);
      f.segment(base, n) = sub.force(sys.time() + j * sub.dt()) + ct_lambda;
      f.segment(base + n, 2 * n).setZero();
    }
    // ℝᵢ Xᵢ⁽ⁿ⁾ enters the first sub-level only.
    const NewmarkPrediction pred = newmark_predict(sys.state(i), sub.params(), sub.dt());
    f.segment(offset + n, n) = pred.v;
    f.segment(offset + 2 * n, n) = pred.d;
    offset += 3 * n * eta;
  }
  return f;
}

DenseMatrix assemble_saddle_matrix(const CoupledSystem& sys) {
  const Index nx = sys.kinematic_unknowns();
  const Index nc = sys.constraint_count();
  DenseMatrix a = DenseMatrix::Zero(nx + nc, nx + nc);
  Index offset = 0;
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const Subdomain& sub = sys.subdomain(i);
    const Index n = sub.size();
    const int eta = sys.eta(i);
    const AugmentedMatrices lr = assemble_L_R(sub);
    const DenseMatrix ct = sub.constraints().dense().transpose();
    for (int j = 1; j <= eta; ++j) {
      const Index base = offset + 3 * n * (j - 1);
      a.block(base, base, 3 * n, 3 * n) = lr.L;
      if (j > 1) a.block(base, base - 3 * n, 3 * n, 3 * n) = -lr.R;
      // 𝔹ᵢ: -(j/ηᵢ) Cᵢᵀ in the equilibrium rows.
      a.block(base, nx, n, nc) = -(static_cast<double>(j) / eta) * ct;
    }
    // ℂᵢ: velocity rows of the last sub-level.
    a.block(nx, offset + 3 * n * (eta - 1) + n, nc, n) = ct.transpose();
    offset += 3 * n * eta;
  }
  return a;
}

SaddleSolution solve_saddle(const CoupledSystem& sys, const DenseVector& f, std::optional<SaddleSolver> path) {
  const detail::StepCache& cache = *sys.cache_;
  if (f.size() != cache.unknowns) throw DimensionMismatch("solve_saddle: right-hand side has the wrong length");
  const Index nc = sys.constraint_count();
  SaddleSolver chosen = path.value_or(sys.solver());
  if (chosen == SaddleSolver::automatic) chosen = sys.solver();

  SaddleSolution out;
  if (chosen == SaddleSolver::monolithic) {
    DenseVector rhs = DenseVector::Zero(cache.unknowns + nc);
    rhs.head(cache.unknowns) = f;
    DenseVector sol;
    if (cache.monolithic) {
      sol = cache.monolithic->solve(rhs);
    } else {
      sol = factor_saddle(assemble_saddle_matrix(sys), "saddle system").solve(rhs);
    }
    out.x = sol.head(cache.unknowns);
    out.dlambda = sol.tail(nc);
    return out;
  }

  // Schur path: free sweeps, interface solve, then superpose the Δλ response.
  out.x.resize(cache.unknowns);
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const Index len = 3 * sys.subdomain(i).size() * sys.eta(i);
    out.x.segment(cache.offsets[i], len) =
        forward_sweep(cache.subs[i].stepper, sys.eta(i), f.segment(cache.offsets[i], len));
  }
  if (nc == 0) {
    out.dlambda = DenseVector(0);
    return out;
  }

  // A monolithic-path system has no cached responses; build them on demand.
  std::vector<detail::SubdomainCache> fresh;
  const std::vector<detail::SubdomainCache>* subs = &cache.subs;
  if (!cache.interface) {
    fresh.reserve(sys.subdomain_count());
    for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
      const auto& stepper = cache.subs[i].stepper;
      fresh.push_back({stepper, response_matrix(sys.subdomain(i), stepper, sys.eta(i))});
    }
    subs = &fresh;
  }

  const DenseVector residual = constraint_residual(sys, cache.offsets, out.x);
  if (cache.interface) {
    out.dlambda = -cache.interface->solve(residual);
  } else {
    out.dlambda = -factor_saddle(interface_schur(sys, *subs), "interface Schur complement").solve(residual);
  }
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const DenseMatrix& g = (*subs)[i].response;
    out.x.segment(cache.offsets[i], g.rows()) += g * out.dlambda;
  }
  return out;
}

std::vector<std::vector<KinematicState>> unpack_history(const CoupledSystem& sys, const DenseVector& x) {
  if (x.size() != sys.kinematic_unknowns()) throw DimensionMismatch("unpack_history: wrong stacked length");
  std::vector<std::vector<KinematicState>> history(sys.subdomain_count());
  Index offset = 0;
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const Index n = sys.subdomain(i).size();
    history[i].reserve(static_cast<std::size_t>(sys.eta(i)));
    for (int j = 0; j < sys.eta(i); ++j) {
      const Index base = offset + 3 * n * j;
      history[i].push_back({x.segment(base + 2 * n, n), x.segment(base + n, n), x.segment(base, n)});
    }
    offset += 3 * n * sys.eta(i);
  }
  return history;
}

SystemStepResult advance_system_step(const CoupledSystem& sys) {
  const SaddleSolution sol = solve_saddle(sys, assemble_saddle_rhs(sys));
  SystemStepResult out;
  out.history = unpack_history(sys, sol.x);
  out.lambda_next = sys.lambda() + sol.dlambda;
  out.t_next = sys.time_at(sys.step_index() + 1);
  return out;
}

}  // namespace mts
