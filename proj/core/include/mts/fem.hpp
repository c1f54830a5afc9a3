#pragma once

// Small finite element toolkit: 2-node bars, 4-node quadrilaterals
// (plane-strain elasticity and the scalar wave equation), assembly and
// Dirichlet elimination.

#include <array>
#include <variant>
#include <vector>

#include "mts/linalg.hpp"

namespace mts::fem {

struct MassStiffness {
  DenseMatrix mass;
  DenseMatrix stiffness;
};

// ---------------------------------------------------------------------------
// 1D

struct Mesh1D {
  std::vector<double> x;                       ///< strictly increasing
  std::vector<std::array<Index, 2>> elements;  ///< node pairs
  double youngs_modulus = 1.0;
  double density = 1.0;
  double area = 1.0;

  /// Uniform mesh of `elements` bars on [x0, x1].
  static Mesh1D uniform(double x0, double x1, int elements, double e, double rho, double area);
  /// Throws InvalidArgument on non-increasing coordinates or bad connectivity.
  void validate() const;
  [[nodiscard]] Index node_count() const { return static_cast<Index>(x.size()); }
};

/// EA/h [[1,-1],[-1,1]] and ρAh/6 [[2,1],[1,2]].
MassStiffness bar_element(double e, double rho, double area, double h);
MassStiffness assemble(const Mesh1D& mesh);

// ---------------------------------------------------------------------------
// 2D

struct ElasticMaterial {
  double lame_lambda = 1.0;
  double mu = 1.0;
  double density = 1.0;
};

/// Scalar wave equation with mass density 1/c₀².
struct WaveMaterial {
  double c0 = 1.0;
};

using Material2D = std::variant<ElasticMaterial, WaveMaterial>;

/// Node coordinates of one quadrilateral, counterclockwise.
using QuadCoords = std::array<std::array<double, 2>, 4>;

struct Mesh2D {
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<Index, 4>> quads;  ///< counterclockwise
  Material2D material;

  /// nx x ny structured quads on [x0, x1] x [y0, y1]; node (i, j) has index j (nx + 1) + i.
  static Mesh2D structured(double x0, double x1, int nx, double y0, double y1, int ny, Material2D material);
  /// Throws InvalidArgument on bad connectivity or a non-positive Jacobian at a Gauss point.
  void validate() const;

  [[nodiscard]] Index node_count() const { return static_cast<Index>(nodes.size()); }
  [[nodiscard]] int dofs_per_node() const { return std::holds_alternative<ElasticMaterial>(material) ? 2 : 1; }
  [[nodiscard]] Index dof_count() const { return node_count() * dofs_per_node(); }
  [[nodiscard]] QuadCoords coords(std::size_t element) const;
};

/// Bilinear shape functions and their natural derivatives at (ξ, η).
struct ShapeQ4 {
  std::array<double, 4> n;
  std::array<double, 4> dn_dxi;
  std::array<double, 4> dn_deta;
};
ShapeQ4 shape_q4(double xi, double eta);

/// Plane-strain constitutive matrix for (εxx, εyy, γxy).
Eigen::Matrix3d plane_strain_elasticity(double lame_lambda, double mu);

/// 8x8 element matrices, DOF order (u1x, u1y, u2x, ...), 2x2 Gauss, consistent mass.
MassStiffness q4_elastic_element(const QuadCoords& xy, const ElasticMaterial& material);
/// 4x4 element matrices for the scalar wave equation, 2x2 Gauss, consistent mass.
MassStiffness q4_scalar_element(const QuadCoords& xy, const WaveMaterial& material);

/// Strain (εxx, εyy, γxy) at (ξ, η) from the 8 element displacements.
Eigen::Vector3d q4_strain(const QuadCoords& xy, const Eigen::Matrix<double, 8, 1>& u, double xi, double eta);

MassStiffness assemble(const Mesh2D& mesh);

// ---------------------------------------------------------------------------
// Boundary conditions and loads

/// Rows and columns of `a` restricted to `keep` (in that order).
DenseMatrix restrict_symmetric(const DenseMatrix& a, const std::vector<Index>& keep);

/// Indices 0..n-1 not in `fixed`, ascending.
std::vector<Index> free_dofs(Index n, const std::vector<Index>& fixed);

/// Consistent nodal weights ∫ Nₖ(s) ds over [lo, hi] for a polyline of
/// 2-node segments with sorted positions `s`. Parts of [lo, hi] outside
/// the polyline contribute nothing.
std::vector<double> line_load_weights(const std::vector<double>& s, double lo, double hi);

}  // namespace mts::fem
