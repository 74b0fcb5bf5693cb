#pragma once

#include <array>
#include <set>
#include <vector>

#include "varimin/poly.hpp"

namespace varimin::mesh {

/// Reference-coordinate variable ids used by the reference bases: t (1D) or
/// (s, t) on the unit triangle.
constexpr poly::VarId kRefT = 0;
constexpr poly::VarId kRefS = 1;

enum class ElementKind {
    P1Interval,       ///< linear Lagrange on [0,1], 2 nodal values
    HermiteInterval,  ///< cubic Hermite on [0,1], nodal values and slopes
    P1Triangle,       ///< linear Lagrange on the unit triangle, 3 nodal values
};

struct ElementKindInfo {
    int dim;                ///< spatial dimension of the element
    int dofs_per_element;   ///< s, number of local DOFs
    int derivative_order;   ///< highest nodal derivative carried (0 or 1)
    int poly_degree;        ///< degree of the reference polynomial space
    int vertices_per_element;
};

ElementKindInfo element_kind_info(ElementKind kind);

/// 1D interval mesh or 2D structured triangulation. Immutable after
/// construction.
struct Mesh {
    int dim = 1;
    std::vector<std::array<double, 2>> vertices;  ///< y-coordinate unused in 1D
    std::vector<std::vector<int>> elements;       ///< vertex indices, 2 or 3 each
    std::set<int> boundary_vertices;
    double h = 0.0;  ///< max element diameter
};

/// Uniform mesh of [-half_length, half_length] with n_elements elements.
Mesh build_interval_mesh(double half_length, int n_elements);

/// Structured k x k grid of squares on [-lx,lx] x [-ly,ly], each split into
/// two triangles along the same diagonal.
Mesh build_rect_mesh(double lx, double ly, int k);

struct ReferenceBasis {
    std::vector<poly::Polynomial> functions;  ///< in reference coordinates
    /// Per basis function, the power of the element length applied under
    /// push-forward (1 for Hermite slope functions, 0 otherwise), so local
    /// DOFs are exactly nodal values and nodal derivatives.
    std::vector<int> length_scaling_power;
};

ReferenceBasis reference_basis(ElementKind kind);

/// Max pairwise vertex distance of element e.
double element_diameter(const Mesh& m, int e);

}  // namespace varimin::mesh
