#include "mts/fem.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

namespace mts::fem {

namespace {

constexpr double kGauss = 0.57735026918962576;  // 1/√3
constexpr std::array<double, 2> kGaussPoints{-kGauss, kGauss};
constexpr std::array<double, 4> kXiNode{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kEtaNode{-1.0, -1.0, 1.0, 1.0};

struct Jacobian {
  Eigen::Matrix2d j;
  double det;
  // dN/dx, dN/dy per node
  std::array<double, 4> dn_dx;
  std::array<double, 4> dn_dy;
};

Jacobian jacobian(const QuadCoords& xy, const ShapeQ4& s) {
  Jacobian out{};
  out.j.setZero();
  for (int k = 0; k < 4; ++k) {
    out.j(0, 0) += s.dn_dxi[k] * xy[k][0];
    out.j(0, 1) += s.dn_dxi[k] * xy[k][1];
    out.j(1, 0) += s.dn_deta[k] * xy[k][0];
    out.j(1, 1) += s.dn_deta[k] * xy[k][1];
  }
  out.det = out.j.determinant();
  if (!(out.det > 0.0)) throw InvalidArgument("quadrilateral has a non-positive Jacobian (clockwise or degenerate)");
  const Eigen::Matrix2d inv = out.j.inverse();
  for (int k = 0; k < 4; ++k) {
    out.dn_dx[k] = inv(0, 0) * s.dn_dxi[k] + inv(0, 1) * s.dn_deta[k];
    out.dn_dy[k] = inv(1, 0) * s.dn_dxi[k] + inv(1, 1) * s.dn_deta[k];
  }
  return out;
}

Eigen::Matrix<double, 3, 8> strain_displacement(const Jacobian& jac) {
  Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
  for (int k = 0; k < 4; ++k) {
    b(0, 2 * k) = jac.dn_dx[k];
    b(1, 2 * k + 1) = jac.dn_dy[k];
    b(2, 2 * k) = jac.dn_dy[k];
    b(2, 2 * k + 1) = jac.dn_dx[k];
  }
  return b;
}

void scatter(DenseMatrix& global, const DenseMatrix& local, const std::vector<Index>& dofs) {
  for (std::size_t r = 0; r < dofs.size(); ++r) {
    for (std::size_t c = 0; c < dofs.size(); ++c) {
      global(dofs[r], dofs[c]) += local(static_cast<Index>(r), static_cast<Index>(c));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// 1D

Mesh1D Mesh1D::uniform(double x0, double x1, int elements, double e, double rho, double area) {
  if (elements < 1) throw InvalidArgument("bar mesh needs at least one element");
  if (!(x1 > x0)) throw InvalidArgument("bar mesh needs x1 > x0");
  Mesh1D mesh;
  mesh.youngs_modulus = e;
  mesh.density = rho;
  mesh.area = area;
  for (int k = 0; k <= elements; ++k) mesh.x.push_back(x0 + (x1 - x0) * k / elements);
  mesh.x.back() = x1;
  for (int k = 0; k < elements; ++k) mesh.elements.push_back({k, k + 1});
  return mesh;
}

void Mesh1D::validate() const {
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (!(x[k] > x[k - 1])) throw InvalidArgument("bar mesh coordinates must be strictly increasing");
  }
  for (const auto& el : elements) {
    if (el[0] < 0 || el[1] < 0 || el[0] >= node_count() || el[1] >= node_count() || el[0] == el[1]) {
      throw InvalidArgument("bar mesh has an invalid element");
    }
  }
  if (!(youngs_modulus > 0.0 && density > 0.0 && area > 0.0)) {
    throw InvalidArgument("bar mesh needs positive E, rho and A");
  }
}

MassStiffness bar_element(double e, double rho, double area, double h) {
  if (!(h > 0.0)) throw InvalidArgument("bar element length must be positive");
  MassStiffness out{DenseMatrix(2, 2), DenseMatrix(2, 2)};
  out.stiffness << 1.0, -1.0, -1.0, 1.0;
  out.stiffness *= e * area / h;
  out.mass << 2.0, 1.0, 1.0, 2.0;
  out.mass *= rho * area * h / 6.0;
  return out;
}

MassStiffness assemble(const Mesh1D& mesh) {
  mesh.validate();
  const Index n = mesh.node_count();
  MassStiffness out{DenseMatrix::Zero(n, n), DenseMatrix::Zero(n, n)};
  for (const auto& el : mesh.elements) {
    const double h = std::abs(mesh.x[static_cast<std::size_t>(el[1])] - mesh.x[static_cast<std::size_t>(el[0])]);
    const MassStiffness local = bar_element(mesh.youngs_modulus, mesh.density, mesh.area, h);
    const std::vector<Index> dofs{el[0], el[1]};
    scatter(out.mass, local.mass, dofs);
    scatter(out.stiffness, local.stiffness, dofs);
  }
  return out;
}

// ---------------------------------------------------------------------------
// 2D

Mesh2D Mesh2D::structured(double x0, double x1, int nx, double y0, double y1, int ny, Material2D material) {
  if (nx < 1 || ny < 1) throw InvalidArgument("structured mesh needs at least one element per direction");
  Mesh2D mesh;
  mesh.material = material;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const double x = i == nx ? x1 : x0 + (x1 - x0) * i / nx;
      const double y = j == ny ? y1 : y0 + (y1 - y0) * j / ny;
      mesh.nodes.push_back({x, y});
    }
  }
  const auto id = [nx](int i, int j) { return static_cast<Index>(j) * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) mesh.quads.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  }
  mesh.validate();
  return mesh;
}

QuadCoords Mesh2D::coords(std::size_t element) const {
  QuadCoords xy{};
  for (int k = 0; k < 4; ++k) xy[k] = nodes[static_cast<std::size_t>(quads[element][k])];
  return xy;
}

void Mesh2D::validate() const {
  for (const auto& q : quads) {
    for (Index n : q) {
      if (n < 0 || n >= node_count()) throw InvalidArgument("quad mesh references a missing node");
    }
  }
  for (std::size_t e = 0; e < quads.size(); ++e) {
    const QuadCoords xy = coords(e);
    for (double xi : kGaussPoints) {
      for (double eta : kGaussPoints) (void)jacobian(xy, shape_q4(xi, eta));
    }
  }
  if (const auto* m = std::get_if<ElasticMaterial>(&material)) {
    if (!(m->mu > 0.0 && m->lame_lambda + m->mu > 0.0 && m->density > 0.0)) {
      throw InvalidArgument("elastic material needs mu > 0, lambda + mu > 0 and rho > 0");
    }
  } else if (!(std::get<WaveMaterial>(material).c0 > 0.0)) {
    throw InvalidArgument("wave material needs c0 > 0");
  }
}

ShapeQ4 shape_q4(double xi, double eta) {
  ShapeQ4 s{};
  for (int k = 0; k < 4; ++k) {
    s.n[k] = 0.25 * (1.0 + kXiNode[k] * xi) * (1.0 + kEtaNode[k] * eta);
    s.dn_dxi[k] = 0.25 * kXiNode[k] * (1.0 + kEtaNode[k] * eta);
    s.dn_deta[k] = 0.25 * kEtaNode[k] * (1.0 + kXiNode[k] * xi);
  }
  return s;
}

Eigen::Matrix3d plane_strain_elasticity(double lame_lambda, double mu) {
  Eigen::Matrix3d d;
  d << lame_lambda + 2.0 * mu, lame_lambda, 0.0,  //
      lame_lambda, lame_lambda + 2.0 * mu, 0.0,   //
      0.0, 0.0, mu;
  return d;
}

MassStiffness q4_elastic_element(const QuadCoords& xy, const ElasticMaterial& material) {
  const Eigen::Matrix3d d = plane_strain_elasticity(material.lame_lambda, material.mu);
  MassStiffness out{DenseMatrix::Zero(8, 8), DenseMatrix::Zero(8, 8)};
  for (double xi : kGaussPoints) {
    for (double eta : kGaussPoints) {
      const ShapeQ4 s = shape_q4(xi, eta);
      const Jacobian jac = jacobian(xy, s);
      const Eigen::Matrix<double, 3, 8> b = strain_displacement(jac);
      out.stiffness += jac.det * b.transpose() * d * b;
      for (int p = 0; p < 4; ++p) {
        for (int q = 0; q < 4; ++q) {
          const double m = material.density * s.n[p] * s.n[q] * jac.det;
          out.mass(2 * p, 2 * q) += m;
          out.mass(2 * p + 1, 2 * q + 1) += m;
        }
      }
    }
  }
  return out;
}

MassStiffness q4_scalar_element(const QuadCoords& xy, const WaveMaterial& material) {
  const double rho = 1.0 / (material.c0 * material.c0);
  MassStiffness out{DenseMatrix::Zero(4, 4), DenseMatrix::Zero(4, 4)};
  for (double xi : kGaussPoints) {
    for (double eta : kGaussPoints) {
      const ShapeQ4 s = shape_q4(xi, eta);
      const Jacobian jac = jacobian(xy, s);
      for (int p = 0; p < 4; ++p) {
        for (int q = 0; q < 4; ++q) {
          out.stiffness(p, q) += jac.det * (jac.dn_dx[p] * jac.dn_dx[q] + jac.dn_dy[p] * jac.dn_dy[q]);
          out.mass(p, q) += jac.det * rho * s.n[p] * s.n[q];
        }
      }
    }
  }
  return out;
}

Eigen::Vector3d q4_strain(const QuadCoords& xy, const Eigen::Matrix<double, 8, 1>& u, double xi, double eta) {
  return strain_displacement(jacobian(xy, shape_q4(xi, eta))) * u;
}

MassStiffness assemble(const Mesh2D& mesh) {
  const Index n = mesh.dof_count();
  const int per = mesh.dofs_per_node();
  MassStiffness out{DenseMatrix::Zero(n, n), DenseMatrix::Zero(n, n)};
  std::vector<Index> dofs(static_cast<std::size_t>(4 * per));
  for (std::size_t e = 0; e < mesh.quads.size(); ++e) {
    const QuadCoords xy = mesh.coords(e);
    const MassStiffness local = std::visit(
        [&xy](const auto& m) {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ElasticMaterial>) {
            return q4_elastic_element(xy, m);
          } else {
            return q4_scalar_element(xy, m);
          }
        },
        mesh.material);
    for (int k = 0; k < 4; ++k) {
      for (int c = 0; c < per; ++c) dofs[static_cast<std::size_t>(k * per + c)] = mesh.quads[e][k] * per + c;
    }
    scatter(out.mass, local.mass, dofs);
    scatter(out.stiffness, local.stiffness, dofs);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boundary conditions and loads

DenseMatrix restrict_symmetric(const DenseMatrix& a, const std::vector<Index>& keep) {
  const Index n = static_cast<Index>(keep.size());
  DenseMatrix out(n, n);
  for (Index c = 0; c < n; ++c) {
    for (Index r = 0; r < n; ++r) out(r, c) = a(keep[static_cast<std::size_t>(r)], keep[static_cast<std::size_t>(c)]);
  }
  return out;
}

std::vector<Index> free_dofs(Index n, const std::vector<Index>& fixed) {
  std::vector<bool> is_fixed(static_cast<std::size_t>(n), false);
  for (Index f : fixed) {
    if (f < 0 || f >= n) throw InvalidArgument("fixed DOF " + std::to_string(f) + " out of range");
    is_fixed[static_cast<std::size_t>(f)] = true;
  }
  std::vector<Index> out;
  for (Index k = 0; k < n; ++k) {
    if (!is_fixed[static_cast<std::size_t>(k)]) out.push_back(k);
  }
  return out;
}

std::vector<double> line_load_weights(const std::vector<double>& s, double lo, double hi) {
  std::vector<double> w(s.size(), 0.0);
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double s0 = s[k - 1];
    const double s1 = s[k];
    if (!(s1 > s0)) throw InvalidArgument("line_load_weights: positions must be strictly increasing");
    const double a = std::max(lo, s0);
    const double b = std::min(hi, s1);
    if (b <= a) continue;
    // Exact integrals of the two linear shape functions over [a, b].
    const double h = s1 - s0;
    const double len = b - a;
    const double mid = 0.5 * (a + b);
    w[k - 1] += len * (s1 - mid) / h;
    w[k] += len * (mid - s0) / h;
  }
  return w;
}

}  // namespace mts::fem
