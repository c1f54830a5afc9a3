#include <gtest/gtest.h>

#include <cmath>

#include "mts/coupling.hpp"
#include "mts/problems.hpp"
#include "test_support.hpp"

namespace mts {
namespace {

using testing::RandomProblem;
using testing::RandomProblemSpec;
using testing::Rng;

DenseMatrix scalar(double x) { return DenseMatrix::Constant(1, 1, x); }
DenseVector vec1(double x) { return DenseVector::Constant(1, x); }

SignedBooleanMatrix single(Index rows, Index cols, Index row, Index col, int sign) {
  SignedBooleanMatrix c(rows, cols);
  c.set(row, col, sign);
  return c;
}

void run_steps(CoupledSystem& sys, int steps) {
  for (int i = 0; i < steps; ++i) sys.commit(advance_system_step(sys));
}

// ---------------------------------------------------------------------------
// SignedBooleanMatrix

TEST(SignedBooleanMatrix, RowInvariants) {
  SignedBooleanMatrix c(2, 3);
  c.set(0, 2, -1);
  EXPECT_THROW(c.set(0, 1, 1), InvalidArgument);
  EXPECT_THROW(c.set(1, 0, 2), InvalidArgument);
  EXPECT_THROW(c.set(1, 3, 1), InvalidArgument);
  c.set(1, 0, 1);
  EXPECT_EQ(c.nonzeros(), 2);
  DenseMatrix expected = DenseMatrix::Zero(2, 3);
  expected(0, 2) = -1;
  expected(1, 0) = 1;
  EXPECT_EQ(c.dense(), expected);
  const DenseVector x{{1.0, 2.0, 3.0}};
  EXPECT_EQ(c.multiply(x), expected * x);
  const DenseVector l{{4.0, 5.0}};
  EXPECT_EQ(c.multiply_transpose(l), expected.transpose() * l);
}

TEST(SignedBooleanMatrix, FromDenseValidates) {
  DenseMatrix ok = DenseMatrix::Zero(2, 2);
  ok(0, 1) = 1;
  EXPECT_EQ(SignedBooleanMatrix::from_dense(ok).dense(), ok);
  DenseMatrix two_per_row = ok;
  two_per_row(0, 0) = -1;
  EXPECT_THROW((void)SignedBooleanMatrix::from_dense(two_per_row), InvalidArgument);
  DenseMatrix bad_value = DenseMatrix::Zero(1, 2);
  bad_value(0, 0) = 0.5;
  EXPECT_THROW((void)SignedBooleanMatrix::from_dense(bad_value), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Interpolation and augmented matrices

TEST(InterpolateLambda, Endpoints) {
  const DenseVector a{{1.0, -2.0}};
  const DenseVector b{{3.0, 7.0}};
  EXPECT_EQ(interpolate_lambda(a, b, 0, 5), a);
  EXPECT_EQ(interpolate_lambda(a, b, 5, 5), b);
}

TEST(InterpolateLambda, QuarterPoint) {
  EXPECT_DOUBLE_EQ(interpolate_lambda(vec1(0.0), vec1(4.0), 1, 4)(0), 1.0);
}

TEST(InterpolateLambda, Errors) {
  EXPECT_THROW((void)interpolate_lambda(vec1(0.0), DenseVector::Zero(2), 1, 2), DimensionMismatch);
  EXPECT_THROW((void)interpolate_lambda(vec1(0.0), vec1(1.0), 3, 2), InvalidArgument);
}

Subdomain scalar_subdomain(double m, double k, NewmarkParams params, double dt, int sign = 1) {
  return {scalar(m), scalar(k), params, dt, single(1, 1, 0, 0, sign)};
}

TEST(AssembleLR, ScalarExample) {
  const auto lr = assemble_L_R(scalar_subdomain(2.0, 8.0, NewmarkParams::average_acceleration(), 0.5));
  DenseMatrix l(3, 3);
  l << 2, 0, 8, -0.25, 1, 0, -0.0625, 0, 1;
  DenseMatrix r(3, 3);
  r << 0, 0, 0, 0.25, 1, 0, 0.0625, 0.5, 1;
  EXPECT_LE((lr.L - l).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((lr.R - r).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AssembleLR, CentralDifferenceHasNoDisplacementCoupling) {
  Rng rng(11);
  const Subdomain sub(testing::random_spd(rng, 3), testing::random_psd(rng, 3, 3), NewmarkParams::central_difference(),
                      1e-3, SignedBooleanMatrix(0, 3));
  const auto lr = assemble_L_R(sub);
  EXPECT_EQ(lr.L.block(6, 0, 3, 3), DenseMatrix::Zero(3, 3));
}

TEST(AssembleLR, ReproducesUnconstrainedNewmark) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = testing::uniform_int(rng, 1, 5);
    const NewmarkParams params(testing::uniform(rng, 0.0, 0.5), testing::uniform(rng, 0.5, 1.0));
    const double dt = testing::uniform(rng, 1e-3, 0.2);
    const Subdomain sub(testing::random_spd(rng, n), testing::random_psd(rng, n, n), params, dt,
                        SignedBooleanMatrix(0, n));
    const KinematicState prev{testing::random_vector(rng, n), testing::random_vector(rng, n),
                              testing::random_vector(rng, n)};
    const DenseVector f = testing::random_vector(rng, n);
    const auto lr = assemble_L_R(sub);
    DenseVector x_prev(3 * n);
    x_prev << prev.a, prev.v, prev.d;
    DenseVector p = DenseVector::Zero(3 * n);
    p.head(n) = f;
    const DenseVector x = lr.L.fullPivLu().solve(p + lr.R * x_prev);
    const auto ref = newmark_step_unconstrained(sub.mass(), sub.stiffness(), f, prev, params, dt);
    EXPECT_LE(max_abs(x.segment(0, n) - ref.a), 1e-9 * (1.0 + max_abs(ref.a)));
    EXPECT_LE(max_abs(x.segment(n, n) - ref.v), 1e-10 * (1.0 + max_abs(ref.v)));
    EXPECT_LE(max_abs(x.segment(2 * n, n) - ref.d), 1e-10 * (1.0 + max_abs(ref.d)));
  }
}

// ---------------------------------------------------------------------------
// Subdomain substep

TEST(SubdomainSubstep, DecoupledMatchesUnconstrained) {
  Rng rng(13);
  const Index n = 4;
  const NewmarkParams params(0.3, 0.6);
  const Subdomain sub(testing::random_spd(rng, n), testing::random_psd(rng, n, 2), params, 0.01,
                      SignedBooleanMatrix(2, n));
  const KinematicState prev{testing::random_vector(rng, n), testing::random_vector(rng, n),
                            testing::random_vector(rng, n)};
  const DenseVector f = testing::random_vector(rng, n);
  const auto x = subdomain_substep(sub, prev, DenseVector{{3.0, -1.0}}, DenseVector{{8.0, 2.0}}, 2, 3, f);
  const auto ref = newmark_step_unconstrained(sub.mass(), sub.stiffness(), f, prev, params, 0.01);
  EXPECT_LE(max_abs(x.a - ref.a), 1e-12);
  EXPECT_LE(max_abs(x.d - ref.d), 1e-13);
}

TEST(SubdomainSubstep, ConstantMultiplierActsAsForce) {
  Rng rng(14);
  const Index n = 3;
  const NewmarkParams params = NewmarkParams::average_acceleration();
  SignedBooleanMatrix c(2, n);
  c.set(0, 0, 1);
  c.set(1, 2, -1);
  const Subdomain sub(testing::random_spd(rng, n), testing::random_psd(rng, n, 3), params, 0.02, c);
  const KinematicState prev{testing::random_vector(rng, n), testing::random_vector(rng, n),
                            testing::random_vector(rng, n)};
  const DenseVector f = testing::random_vector(rng, n);
  const DenseVector lambda{{0.7, -1.3}};
  const auto x = subdomain_substep(sub, prev, lambda, lambda, 1, 2, f);
  const auto ref = newmark_step_unconstrained(sub.mass(), sub.stiffness(), f + c.multiply_transpose(lambda), prev,
                                              params, 0.02);
  EXPECT_LE(max_abs(x.a - ref.a), 1e-12);
  EXPECT_LE(max_abs(x.v - ref.v), 1e-13);
  EXPECT_LE(max_abs(x.d - ref.d), 1e-13);
}

TEST(SubdomainSubstep, SatisfiesAugmentedEquation) {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = testing::uniform_int(rng, 1, 5);
    const int eta = testing::uniform_int(rng, 1, 6);
    const int j = testing::uniform_int(rng, 1, eta);
    const NewmarkParams params(testing::uniform(rng, 0.0, 0.5), testing::uniform(rng, 0.5, 1.0));
    SignedBooleanMatrix c(2, n);
    c.set(0, testing::uniform_int(rng, 0, static_cast<int>(n) - 1), -1);
    const Subdomain sub(testing::random_spd(rng, n), testing::random_psd(rng, n, n), params, 0.01, c);
    const KinematicState prev{testing::random_vector(rng, n), testing::random_vector(rng, n),
                              testing::random_vector(rng, n)};
    const DenseVector f = testing::random_vector(rng, n);
    const DenseVector ln = testing::random_vector(rng, 2);
    const DenseVector lnp1 = testing::random_vector(rng, 2);
    const auto x = subdomain_substep(sub, prev, ln, lnp1, j, eta, f);

    const auto lr = assemble_L_R(sub);
    DenseVector xs(3 * n);
    xs << x.a, x.v, x.d;
    DenseVector xp(3 * n);
    xp << prev.a, prev.v, prev.d;
    DenseMatrix ct = DenseMatrix::Zero(3 * n, 2);
    ct.topRows(n) = c.dense().transpose();
    DenseVector p = DenseVector::Zero(3 * n);
    p.head(n) = f;
    const DenseVector lhs = lr.L * xs - (static_cast<double>(j) / eta) * ct * (lnp1 - ln);
    const DenseVector rhs = p + ct * ln + lr.R * xp;
    EXPECT_LE(max_abs(lhs - rhs), 1e-9 * (1.0 + max_abs(rhs)));
  }
}

// ---------------------------------------------------------------------------
// Construction

TEST(CoupledSystem, RejectsNonIntegerRatio) {
  std::vector<Subdomain> subs{scalar_subdomain(1, 1, NewmarkParams::average_acceleration(), 0.02, 1),
                              scalar_subdomain(1, 1, NewmarkParams::average_acceleration(), 0.03, -1)};
  std::vector<InitialCondition> ic(2, InitialCondition{vec1(0.0), vec1(0.0), std::nullopt});
  EXPECT_THROW(CoupledSystem(subs, 0.05, ic), InvalidArgument);
}

TEST(CoupledSystem, AcceptsRatioWithinRounding) {
  std::vector<Subdomain> subs{scalar_subdomain(1, 1, NewmarkParams::average_acceleration(), 0.1, 1),
                              scalar_subdomain(1, 1, NewmarkParams::average_acceleration(), 0.1 / 3.0, -1)};
  std::vector<InitialCondition> ic(2, InitialCondition{vec1(0.0), vec1(0.0), std::nullopt});
  const CoupledSystem sys(subs, 0.1, ic);
  EXPECT_EQ(sys.eta(1), 3);
  EXPECT_DOUBLE_EQ(sys.subdomain(1).dt() * 3.0, 0.1);
}

TEST(CoupledSystem, RejectsUnstableStep) {
  std::vector<Subdomain> subs{scalar_subdomain(1, 1e4, NewmarkParams::central_difference(), 0.05, 1),
                              scalar_subdomain(1, 1, NewmarkParams::average_acceleration(), 0.05, -1)};
  std::vector<InitialCondition> ic(2, InitialCondition{vec1(0.0), vec1(0.0), std::nullopt});
  EXPECT_THROW(CoupledSystem(subs, 0.05, ic), InvalidArgument);
  CouplingOptions relaxed;
  relaxed.enforce_stability_limit = false;
  EXPECT_NO_THROW(CoupledSystem(subs, 0.05, ic, relaxed));
}

TEST(CoupledSystem, RejectsMismatchedConstraintRows) {
  std::vector<Subdomain> subs{scalar_subdomain(1, 1, NewmarkParams::average_acceleration(), 0.1, 1),
                              Subdomain(scalar(1), scalar(1), NewmarkParams::average_acceleration(), 0.1,
                                        SignedBooleanMatrix(2, 1))};
  std::vector<InitialCondition> ic(2, InitialCondition{vec1(0.0), vec1(0.0), std::nullopt});
  EXPECT_THROW(CoupledSystem(subs, 0.1, ic), InvalidArgument);
}

TEST(CoupledSystem, RejectsIncompatibleVelocities) {
  std::vector<Subdomain> subs{scalar_subdomain(1, 1, NewmarkParams::average_acceleration(), 0.1, 1),
                              scalar_subdomain(1, 1, NewmarkParams::average_acceleration(), 0.1, -1)};
  std::vector<InitialCondition> ic{{vec1(0.0), vec1(1.0), std::nullopt}, {vec1(0.0), vec1(0.5), std::nullopt}};
  EXPECT_THROW(CoupledSystem(subs, 0.1, ic), InvalidArgument);
}

TEST(CoupledSystem, RejectsRedundantConstraints) {
  // Both rows glue the same pair of DOFs.
  SignedBooleanMatrix ca(2, 1);
  ca.set(0, 0, 1);
  ca.set(1, 0, 1);
  SignedBooleanMatrix cb(2, 1);
  cb.set(0, 0, -1);
  cb.set(1, 0, -1);
  std::vector<Subdomain> subs{Subdomain(scalar(1), scalar(1), NewmarkParams::average_acceleration(), 0.1, ca),
                              Subdomain(scalar(1), scalar(1), NewmarkParams::average_acceleration(), 0.1, cb)};
  std::vector<InitialCondition> ic(2, InitialCondition{vec1(0.0), vec1(0.0), std::nullopt});
  EXPECT_THROW(CoupledSystem(subs, 0.1, ic), SingularSaddleSystem);
}

TEST(CoupledSystem, SubdomainRejectsBadMatrices) {
  DenseMatrix asym = DenseMatrix::Identity(2, 2);
  asym(0, 1) = 0.5;
  EXPECT_THROW(Subdomain(asym, DenseMatrix::Identity(2, 2), NewmarkParams::average_acceleration(), 0.1,
                         SignedBooleanMatrix(0, 2)),
               InvalidArgument);
  EXPECT_THROW(Subdomain(-DenseMatrix::Identity(2, 2), DenseMatrix::Identity(2, 2),
                         NewmarkParams::average_acceleration(), 0.1, SignedBooleanMatrix(0, 2)),
               InvalidArgument);
  EXPECT_THROW(Subdomain(DenseMatrix::Identity(2, 2), DenseMatrix::Identity(2, 2),
                         NewmarkParams::average_acceleration(), 0.1, SignedBooleanMatrix(0, 3)),
               DimensionMismatch);
}

TEST(CoupledSystem, InitialAccelerationIsConsistent) {
  Rng rng(16);
  const RandomProblem p = testing::random_problem(rng, {3, 5, 3, false, true, 0.05});
  const CoupledSystem sys = p.make();
  DenseVector a_drift = DenseVector::Zero(sys.constraint_count());
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const auto& sub = sys.subdomain(i);
    const auto& st = sys.state(i);
    const DenseVector residual = sub.mass() * st.a + sub.stiffness() * st.d - sub.force(0.0) -
                                 sub.constraints().multiply_transpose(sys.lambda());
    EXPECT_LE(max_abs(residual), 1e-10);
    a_drift += sub.constraints().multiply(st.a);
  }
  EXPECT_LE(max_abs(a_drift), 1e-10);
}

// ---------------------------------------------------------------------------
// System step

TEST(AdvanceSystemStep, RestStateStaysAtRest) {
  Rng rng(17);
  RandomProblem p = testing::random_problem(rng, {2, 5, 3, false, false, 0.05});
  for (auto& ic : p.initial) {
    ic.d.setZero();
    ic.v.setZero();
  }
  const CoupledSystem sys = p.make();
  const auto step = advance_system_step(sys);
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    for (const auto& x : step.history[i]) {
      EXPECT_EQ(max_abs(x.d), 0.0);
      EXPECT_EQ(max_abs(x.v), 0.0);
      EXPECT_EQ(max_abs(x.a), 0.0);
    }
  }
  EXPECT_EQ(max_abs(step.lambda_next), 0.0);
}

TEST(AdvanceSystemStep, SingleSubdomainWithoutConstraints) {
  Rng rng(18);
  const Index n = 4;
  const NewmarkParams params(0.25, 0.5);
  const DenseMatrix m = testing::random_spd(rng, n);
  const DenseMatrix k = testing::random_psd(rng, n, n);
  const DenseVector amp = testing::random_vector(rng, n);
  ForceFunction f = [amp](double t) { return DenseVector(amp * std::cos(3.0 * t)); };
  const Subdomain sub(m, k, params, 0.025, SignedBooleanMatrix(0, n), f);
  const KinematicState init{testing::random_vector(rng, n), testing::random_vector(rng, n), DenseVector()};
  CoupledSystem sys({sub}, 0.1, {{init.d, init.v, std::nullopt}});
  EXPECT_EQ(sys.eta(0), 4);
  KinematicState ref{init.d, init.v, consistent_acceleration(m, k, f(0.0), init.d)};
  for (int n_step = 0; n_step < 5; ++n_step) {
    const auto step = advance_system_step(sys);
    ASSERT_EQ(step.history[0].size(), 4u);
    EXPECT_EQ(step.lambda_next.size(), 0);
    for (int j = 1; j <= 4; ++j) {
      ref = newmark_step_unconstrained(m, k, f(sys.time() + j * 0.025), ref, params, 0.025);
      const auto& x = step.history[0][static_cast<std::size_t>(j - 1)];
      EXPECT_LE(max_abs(x.d - ref.d), 1e-12);
      EXPECT_LE(max_abs(x.v - ref.v), 1e-12);
    }
    sys.commit(step);
  }
}

TEST(AdvanceSystemStep, IsPure) {
  Rng rng(19);
  const RandomProblem p = testing::random_problem(rng, {2, 5, 3, false, true, 0.05});
  const CoupledSystem sys = p.make();
  const auto before = sys.states();
  const DenseVector lambda_before = sys.lambda();
  const auto first = advance_system_step(sys);
  const auto second = advance_system_step(sys);
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    EXPECT_EQ(sys.state(i).d, before[i].d);
    EXPECT_EQ(sys.state(i).a, before[i].a);
    EXPECT_EQ(first.final_state(i).d, second.final_state(i).d);
  }
  EXPECT_EQ(sys.lambda(), lambda_before);
  EXPECT_EQ(sys.step_index(), 0);
}

TEST(AdvanceSystemStep, HistoryHasEtaEntriesAndContinuousVelocities) {
  Rng rng(20);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomProblem p = testing::random_problem(rng, {testing::uniform_int(rng, 2, 3), 6, 5, false, true, 0.05});
    CoupledSystem sys = p.make();
    for (int n = 0; n < 10; ++n) {
      const auto step = advance_system_step(sys);
      DenseVector residual = DenseVector::Zero(sys.constraint_count());
      double scale = 0.0;
      for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
        ASSERT_EQ(static_cast<int>(step.history[i].size()), sys.eta(i));
        residual += sys.subdomain(i).constraints().multiply(step.final_state(i).v);
        scale = std::max(scale, max_abs(step.final_state(i).v));
      }
      EXPECT_LE(max_abs(residual), 1e-9 * std::max(scale, 1e-300)) << "trial " << trial;
      sys.commit(step);
    }
  }
}

TEST(AdvanceSystemStep, SubstepsSatisfyTheirContract) {
  Rng rng(21);
  const RandomProblem p = testing::random_problem(rng, {2, 4, 4, false, true, 0.05});
  CoupledSystem sys = p.make();
  run_steps(sys, 3);
  const auto step = advance_system_step(sys);
  for (std::size_t i = 0; i < sys.subdomain_count(); ++i) {
    const auto& sub = sys.subdomain(i);
    KinematicState prev = sys.state(i);
    for (int j = 1; j <= sys.eta(i); ++j) {
      const auto& x = step.history[i][static_cast<std::size_t>(j - 1)];
      const auto expected = subdomain_substep(sub, prev, sys.lambda(), step.lambda_next, j, sys.eta(i),
                                              sub.force(sys.time() + j * sub.dt()));
      EXPECT_LE(max_abs(x.a - expected.a), 1e-9 * (1.0 + max_abs(x.a)));
      EXPECT_LE(max_abs(x.d - expected.d), 1e-9 * (1.0 + max_abs(x.d)));
      prev = x;
    }
  }
}

TEST(AdvanceSystemStep, CommitAdvancesTime) {
  const Scenario s = build_sdof2();
  CoupledSystem sys = s.make_system();
  run_steps(sys, 25);
  EXPECT_EQ(sys.step_index(), 25);
  EXPECT_EQ(sys.time(), 0.5);
}

// ---------------------------------------------------------------------------
// Saddle solve

TEST(SolveSaddle, SchurMatchesMonolithic) {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomProblem p = testing::random_problem(rng, {testing::uniform_int(rng, 2, 4), 6, 4, false, true, 0.05});
    CouplingOptions mono;
    mono.solver = SaddleSolver::monolithic;
    CouplingOptions schur;
    schur.solver = SaddleSolver::schur_complement;
    CoupledSystem a = p.make(mono);
    CoupledSystem b = p.make(schur);
    ASSERT_EQ(a.solver(), SaddleSolver::monolithic);
    ASSERT_EQ(b.solver(), SaddleSolver::schur_complement);
    for (int n = 0; n < 20; ++n) {
      a.commit(advance_system_step(a));
      b.commit(advance_system_step(b));
    }
    const double scale = testing::state_scale(a.states());
    for (std::size_t i = 0; i < a.subdomain_count(); ++i) {
      EXPECT_LE(max_abs(a.state(i).d - b.state(i).d), 1e-8 * scale);
      EXPECT_LE(max_abs(a.state(i).v - b.state(i).v), 1e-8 * scale);
      EXPECT_LE(max_abs(a.state(i).a - b.state(i).a), 1e-8 * scale);
    }
    EXPECT_LE(max_abs(a.lambda() - b.lambda()), 1e-8 * std::max(1.0, max_abs(a.lambda())));
  }
}

TEST(SolveSaddle, ResidualOfBothBlockRows) {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const RandomProblem p = testing::random_problem(rng, {3, 5, 3, false, true, 0.05});
    CoupledSystem sys = p.make();
    run_steps(sys, 2);
    const DenseVector f = assemble_saddle_rhs(sys);
    const DenseMatrix a = assemble_saddle_matrix(sys);
    for (auto path : {SaddleSolver::monolithic, SaddleSolver::schur_complement}) {
      const auto sol = solve_saddle(sys, f, path);
      DenseVector full(sol.x.size() + sol.dlambda.size());
      full << sol.x, sol.dlambda;
      DenseVector rhs = DenseVector::Zero(full.size());
      rhs.head(f.size()) = f;
      const DenseVector r = a * full - rhs;
      const Index nx = sol.x.size();
      EXPECT_LE(max_abs(r.head(nx)), 1e-9 * (max_abs(f) + a.cwiseAbs().maxCoeff() * max_abs(full)));
      EXPECT_LE(max_abs(r.tail(r.size() - nx)), 1e-9 * (1.0 + max_abs(sol.x)));
    }
  }
}

TEST(SolveSaddle, NoConstraintsGivesEmptyMultiplier) {
  Rng rng(24);
  const Subdomain a(testing::random_spd(rng, 2), testing::random_psd(rng, 2, 2), NewmarkParams::average_acceleration(),
                    0.05, SignedBooleanMatrix(0, 2));
  const Subdomain b(testing::random_spd(rng, 3), testing::random_psd(rng, 3, 3), NewmarkParams::average_acceleration(),
                    0.025, SignedBooleanMatrix(0, 3));
  const CoupledSystem sys({a, b}, 0.05,
                          {{DenseVector::Ones(2), DenseVector::Zero(2), std::nullopt},
                           {DenseVector::Ones(3), DenseVector::Zero(3), std::nullopt}});
  for (auto path : {SaddleSolver::monolithic, SaddleSolver::schur_complement}) {
    const auto sol = solve_saddle(sys, assemble_saddle_rhs(sys), path);
    EXPECT_EQ(sol.dlambda.size(), 0);
    EXPECT_EQ(sol.x.size(), sys.kinematic_unknowns());
  }
}

TEST(SolveSaddle, MirroredTwinsGiveAntisymmetricMotion) {
  Rng rng(25);
  const Index n = 4;
  const DenseMatrix m = testing::random_spd(rng, n);
  const DenseMatrix k = testing::random_psd(rng, n, n);
  const DenseVector amp = testing::random_vector(rng, n);
  ForceFunction f1 = [amp](double t) { return DenseVector(amp * (1.0 + t)); };
  ForceFunction f2 = [amp](double t) { return DenseVector(-amp * (1.0 + t)); };
  const Subdomain s1(m, k, NewmarkParams::average_acceleration(), 0.01, single(1, n, 0, n - 1, 1), f1);
  const Subdomain s2(m, k, NewmarkParams::average_acceleration(), 0.01, single(1, n, 0, n - 1, -1), f2);
  const InitialCondition rest{DenseVector::Zero(n), DenseVector::Zero(n), std::nullopt};
  CoupledSystem sys({s1, s2}, 0.01, {rest, rest});
  for (int step = 0; step < 10; ++step) {
    const auto res = advance_system_step(sys);
    EXPECT_TRUE(res.lambda_next.allFinite());
    const auto& x1 = res.final_state(0);
    const auto& x2 = res.final_state(1);
    EXPECT_LE(max_abs(x1.d + x2.d), 1e-12 * (1.0 + max_abs(x1.d)));
    EXPECT_LE(max_abs(x1.v + x2.v), 1e-12 * (1.0 + max_abs(x1.v)));
    EXPECT_LE(max_abs(x1.a + x2.a), 1e-12 * (1.0 + max_abs(x1.a)));
    sys.commit(res);
  }
}

// ---------------------------------------------------------------------------
// Reference solutions

double merged_newmark(double t_end, double dt) {
  const double m = 0.105;
  const double k = 52.5;
  KinematicState s{vec1(0.1), vec1(1.0), vec1(-k * 0.1 / m)};
  const long steps = std::lround(t_end / dt);
  for (long i = 0; i < steps; ++i)
    s = newmark_step_unconstrained(scalar(m), scalar(k), vec1(0.0), s, NewmarkParams::average_acceleration(), dt);
  return s.d(0);
}

TEST(Sdof2, WithoutSubcyclingMatchesMergedNewmark) {
  Scenario s = build_sdof2();
  s.set_eta(1, 1);
  CoupledSystem sys = s.make_system();
  const NewmarkParams aa = NewmarkParams::average_acceleration();
  KinematicState merged{vec1(0.1), vec1(1.0), vec1(-52.5 * 0.1 / 0.105)};
  for (long n = 0; n < s.step_count(); ++n) {
    sys.commit(advance_system_step(sys));
    merged = newmark_step_unconstrained(scalar(0.105), scalar(52.5), vec1(0.0), merged, aa, 0.02);
    EXPECT_NEAR(sys.state(0).d(0), merged.d(0), 1e-8) << "step " << n;
    EXPECT_NEAR(sys.state(1).d(0), merged.d(0), 1e-8) << "step " << n;
    EXPECT_NEAR(sys.state(0).v(0), merged.v(0), 1e-8) << "step " << n;
  }
}

TEST(Sdof2, FirstSubstepReproducesMergedStep) {
  Scenario s = build_sdof2();
  s.set_eta(1, 1);
  const CoupledSystem sys = s.make_system();
  const auto res = advance_system_step(sys);
  const auto x = subdomain_substep(sys.subdomain(0), sys.state(0), sys.lambda(), res.lambda_next, 1, 1, vec1(0.0));
  EXPECT_NEAR(x.d(0), merged_newmark(0.02, 0.02), 1e-9);
}

TEST(Sdof2, InitialMultiplierMatchesInterfaceForce) {
  const CoupledSystem sys = build_sdof2().make_system();
  EXPECT_NEAR(sys.lambda()(0), sdof2_lambda(0.0), 1e-12);
}

TEST(Sdof2, SubcycledStaysNearExactSolution) {
  // With η_b = 4 the coupled pair is no longer a single merged DOF; it is
  // closer to the exact motion than the merged Newmark trajectory.
  const Scenario s = build_sdof2();
  CoupledSystem sys = s.make_system();
  run_steps(sys, static_cast<int>(s.step_count()));
  const double coupled = std::abs(sys.state(0).d(0) - sdof2_displacement(0.5));
  const double merged = std::abs(merged_newmark(0.5, 0.02) - sdof2_displacement(0.5));
  EXPECT_LT(coupled, merged);
}

TEST(Oracle, NoSubcyclingMatchesUndecomposedSaddle) {
  Rng rng(26);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomProblem p = testing::random_problem(rng, {testing::uniform_int(rng, 2, 3), 6, 1, true, true, 0.05});
    CoupledSystem sys = p.make();
    const testing::UndecomposedOracle oracle(p);
    DenseVector d = testing::stack(sys.states(), &KinematicState::d);
    DenseVector v = testing::stack(sys.states(), &KinematicState::v);
    DenseVector a = testing::stack(sys.states(), &KinematicState::a);
    for (int n = 1; n <= 50; ++n) {
      const DenseVector lambda = oracle.step(d, v, a, sys.time_at(n));
      sys.commit(advance_system_step(sys));
      const double scale = std::max(1.0, max_abs(d));
      EXPECT_LE(max_abs(testing::stack(sys.states(), &KinematicState::d) - d), 1e-8 * scale);
      EXPECT_LE(max_abs(testing::stack(sys.states(), &KinematicState::v) - v), 1e-8 * std::max(1.0, max_abs(v)));
      EXPECT_LE(max_abs(sys.lambda() - lambda), 1e-8 * std::max(1.0, max_abs(lambda)));
    }
  }
}

TEST(Properties, SwappingSubdomainOrderChangesNothing) {
  Rng rng(27);
  for (int trial = 0; trial < 10; ++trial) {
    const RandomProblem p = testing::random_problem(rng, {2, 5, 4, false, false, 0.05});
    RandomProblem swapped = p;
    std::swap(swapped.subdomains[0], swapped.subdomains[1]);
    std::swap(swapped.initial[0], swapped.initial[1]);
    CoupledSystem a = p.make();
    CoupledSystem b = swapped.make();
    run_steps(a, 30);
    run_steps(b, 30);
    const double scale = testing::state_scale(a.states());
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_LE(max_abs(a.state(i).d - b.state(1 - i).d), 1e-10 * scale);
      EXPECT_LE(max_abs(a.state(i).v - b.state(1 - i).v), 1e-10 * scale);
    }
    EXPECT_LE(max_abs(a.lambda() - b.lambda()), 1e-10 * std::max(1.0, max_abs(a.lambda())));
  }
}

TEST(Properties, Linearity) {
  Rng rng(28);
  for (int trial = 0; trial < 10; ++trial) {
    const RandomProblem p = testing::random_problem(rng, {3, 5, 3, false, true, 0.05});
    const double c = testing::uniform(rng, -3.0, 3.0);
    RandomProblem scaled = p;
    for (std::size_t i = 0; i < p.subdomains.size(); ++i) {
      const auto& sub = p.subdomains[i];
      scaled.subdomains[i] = sub.with_force([sub, c](double t) { return DenseVector(c * sub.force(t)); });
      scaled.initial[i].d *= c;
      scaled.initial[i].v *= c;
    }
    CoupledSystem a = p.make();
    CoupledSystem b = scaled.make();
    run_steps(a, 20);
    run_steps(b, 20);
    const double scale = std::abs(c) * testing::state_scale(a.states());
    for (std::size_t i = 0; i < a.subdomain_count(); ++i) {
      EXPECT_LE(max_abs(c * a.state(i).d - b.state(i).d), 1e-10 * scale);
      EXPECT_LE(max_abs(c * a.state(i).v - b.state(i).v), 1e-10 * scale);
      EXPECT_LE(max_abs(c * a.state(i).a - b.state(i).a), 1e-10 * scale);
    }
    EXPECT_LE(max_abs(c * a.lambda() - b.lambda()), 1e-10 * std::max(1.0, std::abs(c) * max_abs(a.lambda())));
  }
}

}  // namespace
}  // namespace mts
