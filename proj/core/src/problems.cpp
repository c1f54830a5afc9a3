#include "mts/problems.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "mts/fem.hpp"

namespace mts {

// ---------------------------------------------------------------------------
// Scenario

CoupledSystem Scenario::make_system() const { return CoupledSystem(subdomains, dt_system, initial, options); }

int Scenario::eta(std::size_t i) const {
  return static_cast<int>(std::lround(dt_system / subdomains.at(i).dt()));
}

long Scenario::step_count() const {
  // Tolerate round-off in duration / Δt landing just above an integer.
  return static_cast<long>(std::ceil(duration / dt_system - 1e-9));
}

void Scenario::set_dt_system(double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("system time-step must be positive");
  std::vector<int> etas;
  for (std::size_t i = 0; i < subdomains.size(); ++i) etas.push_back(eta(i));
  dt_system = dt;
  for (std::size_t i = 0; i < subdomains.size(); ++i) subdomains[i] = subdomains[i].with_dt(dt / etas[i]);
}

void Scenario::set_eta(std::size_t i, int eta) {
  if (eta < 1) throw InvalidArgument("eta must be a positive integer");
  subdomains.at(i) = subdomains.at(i).with_dt(dt_system / eta);
}

void Scenario::set_newmark(std::size_t i, const NewmarkParams& params) {
  subdomains.at(i) = subdomains.at(i).with_params(params);
}

Scenario Scenario::without_forces() const {
  Scenario out = *this;
  for (auto& sub : out.subdomains) sub = sub.with_force({});
  out.oracle = {};
  return out;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"sdof2", "sdof3", "bar1d", "plate2d", "wave2d"};
  return names;
}

Scenario build_scenario(const std::string& name) {
  if (name == "sdof2") return build_sdof2();
  if (name == "sdof3") return build_sdof3();
  if (name == "bar1d") return build_bar_1d();
  if (name == "plate2d") return build_plate_2d();
  if (name == "wave2d") return build_wave_2d();
  throw InvalidArgument("unknown scenario '" + name + "'");
}

namespace {

DenseMatrix scalar(double value) { return DenseMatrix::Constant(1, 1, value); }

ForceFunction constant_force(DenseVector f) {
  return [f = std::move(f)](double) { return f; };
}

// Constraint rows gluing subdomain DOFs that share a key. Keys appear in
// ascending subdomain order; k copies of a key give k - 1 chained rows
// (+1 on the earlier subdomain, -1 on the later one).
class Glue {
 public:
  explicit Glue(std::size_t subdomains) : sizes_(subdomains, 0) {}

  void add_dof(std::size_t sub, Index local, long key) {
    owners_[key].push_back({sub, local});
    sizes_[sub] = std::max(sizes_[sub], local + 1);
  }
  void set_size(std::size_t sub, Index n) { sizes_[sub] = n; }

  [[nodiscard]] std::vector<SignedBooleanMatrix> build() const {
    std::vector<std::array<std::pair<std::size_t, Index>, 2>> rows;
    for (const auto& [key, owners] : owners_) {
      for (std::size_t k = 1; k < owners.size(); ++k) rows.push_back({owners[k - 1], owners[k]});
    }
    std::vector<SignedBooleanMatrix> out;
    for (Index n : sizes_) out.emplace_back(static_cast<Index>(rows.size()), n);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out[rows[r][0].first].set(static_cast<Index>(r), rows[r][0].second, +1);
      out[rows[r][1].first].set(static_cast<Index>(r), rows[r][1].second, -1);
    }
    return out;
  }

 private:
  std::map<long, std::vector<std::pair<std::size_t, Index>>> owners_;
  std::vector<Index> sizes_;
};

std::vector<InitialCondition> at_rest(const std::vector<Subdomain>& subs) {
  std::vector<InitialCondition> out;
  for (const auto& s : subs) out.push_back({DenseVector::Zero(s.size()), DenseVector::Zero(s.size()), std::nullopt});
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Split-DOF systems

namespace {
constexpr double kSdof2MassA = 0.1;
constexpr double kSdof2MassB = 0.005;
constexpr double kSdof2StiffA = 2.5;
constexpr double kSdof2StiffB = 50.0;
constexpr double kSdof2D0 = 0.1;
constexpr double kSdof2V0 = 1.0;
}  // namespace

Scenario build_sdof2() {
  SignedBooleanMatrix ca(1, 1);
  ca.set(0, 0, +1);
  SignedBooleanMatrix cb(1, 1);
  cb.set(0, 0, -1);
  Scenario s;
  s.name = "sdof2";
  s.dt_system = 0.02;
  s.subdomains.emplace_back(scalar(kSdof2MassA), scalar(kSdof2StiffA), NewmarkParams::average_acceleration(), 0.02,
                            ca, ForceFunction{}, "A");
  s.subdomains.emplace_back(scalar(kSdof2MassB), scalar(kSdof2StiffB), NewmarkParams::average_acceleration(), 0.005,
                            cb, ForceFunction{}, "B");
  for (int k = 0; k < 2; ++k) s.initial.push_back({scalar(kSdof2D0), scalar(kSdof2V0), std::nullopt});
  s.duration = 0.5;
  s.probes = {{0, 0, "d_A"}};
  s.oracle = sdof2_displacement;
  return s;
}

double sdof2_displacement(double t) {
  const double omega = std::sqrt((kSdof2StiffA + kSdof2StiffB) / (kSdof2MassA + kSdof2MassB));
  return kSdof2D0 * std::cos(omega * t) + kSdof2V0 / omega * std::sin(omega * t);
}

double sdof2_lambda(double t) {
  const double omega2 = (kSdof2StiffA + kSdof2StiffB) / (kSdof2MassA + kSdof2MassB);
  const double u = sdof2_displacement(t);
  return kSdof2MassA * (-omega2 * u) + kSdof2StiffA * u;
}

namespace {
constexpr double kSdof3Mass[3] = {5.0, 0.1, 0.01};
constexpr double kSdof3Stiff[3] = {5.0, 2.5, 4.0};
constexpr double kSdof3ForceB = 1.0;
constexpr double kSdof3D0 = 1.0;
}  // namespace

Scenario build_sdof3() {
  std::vector<SignedBooleanMatrix> c(3, SignedBooleanMatrix(2, 1));
  c[0].set(0, 0, +1);
  c[1].set(0, 0, -1);
  c[1].set(1, 0, +1);
  c[2].set(1, 0, -1);
  const double dts[3] = {0.01, 0.005, 0.0025};
  const char* names[3] = {"A", "B", "C"};
  Scenario s;
  s.name = "sdof3";
  s.dt_system = 0.01;
  for (int i = 0; i < 3; ++i) {
    ForceFunction f = i == 1 ? constant_force(scalar(kSdof3ForceB)) : ForceFunction{};
    s.subdomains.emplace_back(scalar(kSdof3Mass[i]), scalar(kSdof3Stiff[i]), NewmarkParams::average_acceleration(),
                              dts[i], c[static_cast<std::size_t>(i)], std::move(f), names[i]);
    s.initial.push_back({scalar(kSdof3D0), scalar(0.0), std::nullopt});
  }
  s.duration = 10.0;
  s.probes = {{0, 0, "d_A"}};
  s.oracle = sdof3_displacement;
  return s;
}

double sdof3_displacement(double t) {
  const double m = kSdof3Mass[0] + kSdof3Mass[1] + kSdof3Mass[2];
  const double k = kSdof3Stiff[0] + kSdof3Stiff[1] + kSdof3Stiff[2];
  const double center = kSdof3ForceB / k;
  return center + (kSdof3D0 - center) * std::cos(std::sqrt(k / m) * t);
}

// ---------------------------------------------------------------------------
// 1D bar

namespace {
constexpr double kBarE = 1e4;
constexpr double kBarRho = 0.1;
constexpr double kBarArea = 1.0;
constexpr double kBarLength = 1.0;
constexpr double kBarLoad = 10.0;
}  // namespace

Scenario build_bar_1d(BarSubdivision elements) {
  if (elements.a < 1 || elements.b < 1 || elements.c < 1) {
    throw InvalidArgument("bar subdomains need at least one element each");
  }
  const double third = kBarLength / 3.0;
  const fem::Mesh1D meshes[3] = {
      fem::Mesh1D::uniform(0.0, third, elements.a, kBarE, kBarRho, kBarArea),
      fem::Mesh1D::uniform(third, 2.0 * third, elements.b, kBarE, kBarRho, kBarArea),
      fem::Mesh1D::uniform(2.0 * third, kBarLength, elements.c, kBarE, kBarRho, kBarArea)};

  std::vector<fem::MassStiffness> mk;
  for (const auto& m : meshes) mk.push_back(fem::assemble(m));
  // Left end of A is fixed.
  const std::vector<Index> keep_a = fem::free_dofs(meshes[0].node_count(), {0});
  mk[0].mass = fem::restrict_symmetric(mk[0].mass, keep_a);
  mk[0].stiffness = fem::restrict_symmetric(mk[0].stiffness, keep_a);

  const Index na = mk[0].mass.rows();
  const Index nb = mk[1].mass.rows();
  const Index nc = mk[2].mass.rows();
  std::vector<SignedBooleanMatrix> c{SignedBooleanMatrix(2, na), SignedBooleanMatrix(2, nb),
                                     SignedBooleanMatrix(2, nc)};
  c[0].set(0, na - 1, +1);
  c[1].set(0, 0, -1);
  c[1].set(1, nb - 1, +1);
  c[2].set(1, 0, -1);

  DenseVector tip = DenseVector::Zero(nc);
  tip[nc - 1] = kBarLoad;

  const double dt = 1e-3;
  // η_B = 10 unless B's mesh is fine enough to need more sub-steps.
  int eta_b = 10;
  const CriticalTimeStep crit_b = critical_time_step(mk[1].mass, mk[1].stiffness, NewmarkParams::central_difference());
  while (!crit_b.admits(dt / eta_b)) ++eta_b;
  Scenario s;
  s.name = "bar1d";
  s.dt_system = dt;
  s.subdomains.emplace_back(mk[0].mass, mk[0].stiffness, NewmarkParams::average_acceleration(), dt, c[0],
                            ForceFunction{}, "A");
  s.subdomains.emplace_back(mk[1].mass, mk[1].stiffness, NewmarkParams::central_difference(), dt / eta_b, c[1],
                            ForceFunction{}, "B");
  s.subdomains.emplace_back(mk[2].mass, mk[2].stiffness, NewmarkParams::average_acceleration(), dt, c[2],
                            constant_force(tip), "C");
  s.initial = at_rest(s.subdomains);
  s.duration = 0.05;
  s.probes = {{2, nc - 1, "tip"}};
  s.oracle = [](double t) { return series_bar_solution(kBarLength, t); };
  return s;
}

double series_bar_solution(double x, double t, int terms) {
  if (terms < 1) throw InvalidArgument("series_bar_solution needs at least one term");
  if (x < 0.0 || x > kBarLength) throw InvalidArgument("series_bar_solution: x outside the bar");
  const double ea = kBarE * kBarArea;
  const double c = std::sqrt(kBarE / kBarRho);
  double sum = 0.0;
  for (int k = 0; k < terms; ++k) {
    const int n = 2 * k + 1;
    const double beta = n * std::numbers::pi / (2.0 * kBarLength);
    const double sign = ((n + 1) / 2) % 2 == 0 ? 1.0 : -1.0;
    sum += sign / (static_cast<double>(n) * n) * std::sin(beta * x) * std::cos(beta * c * t);
  }
  return kBarLoad * x / ea + 8.0 * kBarLoad * kBarLength / (std::numbers::pi * std::numbers::pi * ea) * sum;
}

// ---------------------------------------------------------------------------
// 2D problems on a global structured grid split into rectangular patches

namespace {

struct Patch {
  int i0, i1, j0, j1;  // global node-index ranges, inclusive
};

struct PatchSystem {
  std::vector<fem::MassStiffness> matrices;
  // For each subdomain: global DOF key of every retained local DOF.
  std::vector<std::vector<long>> keys;
  std::vector<SignedBooleanMatrix> constraints;
};

// `fixed(i, j)` marks grid nodes whose DOFs are eliminated.
template <typename FixedFn>
PatchSystem build_patches(double lx, double ly, int nx, int ny, const std::vector<Patch>& patches,
                          const fem::Material2D& material, FixedFn fixed) {
  PatchSystem out;
  Glue glue(patches.size());
  for (std::size_t p = 0; p < patches.size(); ++p) {
    const Patch& pa = patches[p];
    const fem::Mesh2D mesh = fem::Mesh2D::structured(lx * pa.i0 / nx, lx * pa.i1 / nx, pa.i1 - pa.i0, ly * pa.j0 / ny,
                                                     ly * pa.j1 / ny, pa.j1 - pa.j0, material);
    const int per = mesh.dofs_per_node();
    const int local_nx = pa.i1 - pa.i0;
    std::vector<Index> fixed_dofs;
    std::vector<long> all_keys;
    for (Index node = 0; node < mesh.node_count(); ++node) {
      const int gi = pa.i0 + static_cast<int>(node % (local_nx + 1));
      const int gj = pa.j0 + static_cast<int>(node / (local_nx + 1));
      const long gnode = static_cast<long>(gj) * (nx + 1) + gi;
      for (int c = 0; c < per; ++c) {
        all_keys.push_back(gnode * per + c);
        if (fixed(gi, gj)) fixed_dofs.push_back(node * per + c);
      }
    }
    const std::vector<Index> keep = fem::free_dofs(mesh.dof_count(), fixed_dofs);
    fem::MassStiffness mk = fem::assemble(mesh);
    mk.mass = fem::restrict_symmetric(mk.mass, keep);
    mk.stiffness = fem::restrict_symmetric(mk.stiffness, keep);
    std::vector<long> keys;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      keys.push_back(all_keys[static_cast<std::size_t>(keep[k])]);
      glue.add_dof(p, static_cast<Index>(k), keys.back());
    }
    glue.set_size(p, static_cast<Index>(keep.size()));
    out.matrices.push_back(std::move(mk));
    out.keys.push_back(std::move(keys));
  }
  out.constraints = glue.build();
  return out;
}

Index find_key(const std::vector<long>& keys, long key) {
  const auto it = std::find(keys.begin(), keys.end(), key);
  if (it == keys.end()) throw InvalidArgument("grid DOF is not retained in this subdomain");
  return static_cast<Index>(it - keys.begin());
}

}  // namespace

Scenario build_plate_2d() {
  constexpr double kSide = 2.0;
  constexpr int kCells = 10;
  const fem::ElasticMaterial material{100.0, 100.0, 100.0};
  const std::vector<Patch> patches{{0, 5, 0, 5}, {5, 10, 0, 5}, {0, 5, 5, 10}, {5, 10, 5, 10}};
  PatchSystem ps =
      build_patches(kSide, kSide, kCells, kCells, patches, material, [](int i, int) { return i == 0; });

  // Point A: bottom-right corner, grid node (10, 0), owned by subdomain 2.
  const long corner = 10;
  const Index ax = find_key(ps.keys[1], corner * 2);
  const Index ay = find_key(ps.keys[1], corner * 2 + 1);
  DenseVector load = DenseVector::Zero(ps.matrices[1].mass.rows());
  load[ax] = 1.0;
  load[ay] = 1.0;

  const double dt = 0.1;
  const double dt_sub = 0.02;
  Scenario s;
  s.name = "plate2d";
  s.dt_system = dt;
  const char* names[4] = {"1", "2", "3", "4"};
  for (std::size_t p = 0; p < 4; ++p) {
    const NewmarkParams params = p < 3 ? NewmarkParams::central_difference() : NewmarkParams::average_acceleration();
    ForceFunction f = p == 1 ? constant_force(load) : ForceFunction{};
    s.subdomains.emplace_back(ps.matrices[p].mass, ps.matrices[p].stiffness, params, dt_sub, ps.constraints[p],
                              std::move(f), names[p]);
  }
  s.initial = at_rest(s.subdomains);
  s.duration = 10.0;
  s.probes = {{1, ax, "A_x"}, {1, ay, "A_y"}};
  return s;
}

double wave_load_history(double t) {
  constexpr double kAmplitude = 5.0;
  constexpr double kDuration = 0.1;
  if (t < 0.0 || t > kDuration) return 0.0;
  return kAmplitude * std::sin(2.0 * std::numbers::pi * t / kDuration);
}

Scenario build_wave_2d(WaveMesh mesh) {
  constexpr double kLx = 2.0;
  constexpr double kLy = 1.0;
  if (mesh.nx < 2 || mesh.ny < 2 || mesh.interface_col < 1 || mesh.interface_col >= mesh.nx) {
    throw InvalidArgument("wave mesh needs nx, ny >= 2 and an interior interface column");
  }
  const int nx = mesh.nx;
  const int ny = mesh.ny;
  const std::vector<Patch> patches{{0, mesh.interface_col, 0, ny}, {mesh.interface_col, nx, 0, ny}};
  PatchSystem ps = build_patches(kLx, kLy, nx, ny, patches, fem::WaveMaterial{1.0},
                                 [nx, ny](int i, int j) { return i == nx || j == 0 || j == ny; });

  // Consistent edge load on x = 0 over [2Ly/5, 3Ly/5].
  std::vector<double> ys;
  for (int j = 0; j <= ny; ++j) ys.push_back(kLy * j / ny);
  const std::vector<double> w = fem::line_load_weights(ys, 0.4 * kLy, 0.6 * kLy);
  DenseVector shape = DenseVector::Zero(ps.matrices[0].mass.rows());
  for (int j = 1; j < ny; ++j) {
    if (w[static_cast<std::size_t>(j)] == 0.0) continue;
    shape[find_key(ps.keys[0], static_cast<long>(j) * (nx + 1))] = w[static_cast<std::size_t>(j)];
  }

  const double dt = 1e-4;
  Scenario s;
  s.name = "wave2d";
  s.dt_system = dt;
  s.subdomains.emplace_back(ps.matrices[0].mass, ps.matrices[0].stiffness, NewmarkParams::central_difference(), 1e-5,
                            ps.constraints[0], [shape](double t) { return DenseVector(wave_load_history(t) * shape); },
                            "1");
  s.subdomains.emplace_back(ps.matrices[1].mass, ps.matrices[1].stiffness, NewmarkParams::average_acceleration(), dt,
                            ps.constraints[1], ForceFunction{}, "2");
  s.initial = at_rest(s.subdomains);
  s.duration = 0.25;
  // Loaded edge, node nearest to mid-height.
  const long mid = static_cast<long>(ny / 2) * (nx + 1);
  s.probes = {{0, find_key(ps.keys[0], mid), "u_load"}};
  return s;
}

}  // namespace mts
