#pragma once

#include <functional>
#include <string>
#include <vector>

#include "varimin/mesh.hpp"
#include "varimin/poly.hpp"

namespace varimin::discretize {

/// Field symbols an integrand may reference. Unused symbols stay -1.
struct FieldSymbols {
    poly::VarId x = -1;
    poly::VarId y = -1;
    poly::VarId u = -1;
    poly::VarId ux = -1;
    poly::VarId uy = -1;
    poly::VarId uxx = -1;

    /// Declares the symbols supported by `kind` (plus spatial coordinates)
    /// in the given registry.
    static FieldSymbols declare(poly::VarRegistry& reg, mesh::ElementKind kind);
};

/// Global DOF numbering with homogeneous Dirichlet elimination. Free DOFs are
/// numbered lexicographically by (vertex index, derivative tag); eliminated
/// DOFs are pinned to zero.
struct DofMap {
    int n_dofs = 0;
    /// Per element, global DOF index per local DOF slot; -1 for eliminated.
    std::vector<std::vector<int>> element_dofs;
    std::vector<int> dof_vertex;  ///< per free DOF, vertex index
    std::vector<int> dof_deriv;   ///< per free DOF, 0 = value, 1 = slope
    std::vector<std::array<double, 2>> dof_coords;

    /// Free global DOFs touched by element e, sorted, deduplicated.
    std::vector<int> free_dofs_of_element(int e) const;
};

DofMap build_dof_map(const mesh::Mesh& m, mesh::ElementKind kind);

enum class ConstraintKind { PerDofBox, PerElementBall };
enum class BoundRule { OverH, Constant };

/// Clique-sum POP: minimize sum_e f_e(F_e xi) subject to the compact
/// constraint. Element objectives are stored in internally rescaled
/// variables xi = scale * t so the POP lives on [-1,1]^N (or unit balls);
/// the unscaled originals are kept for energy evaluation.
struct Pop {
    int n_vars = 0;
    std::vector<poly::Polynomial> element_objectives;  ///< in scaled t variables
    std::vector<poly::Polynomial> element_objectives_unscaled;
    std::vector<std::vector<int>> element_vars;  ///< sorted free DOFs per element
    ConstraintKind constraint_kind = ConstraintKind::PerDofBox;
    double bound = 1.0;  ///< beta_h
    double scale = 1.0;  ///< xi = scale * t; equals beta_h
};

/// Assembles the element objectives f_e by Gauss quadrature exact to the
/// composed polynomial degree. Throws if the integrand uses a derivative
/// symbol the element kind cannot represent.
std::vector<poly::Polynomial> assemble_element_objectives(const poly::Polynomial& integrand,
                                                          const mesh::Mesh& m, const DofMap& dm,
                                                          mesh::ElementKind kind,
                                                          const FieldSymbols& sym);

Pop build_pop(const std::vector<poly::Polynomial>& f_list, const DofMap& dm, ConstraintKind ck,
              BoundRule rule, double c, const mesh::Mesh& m);

/// Phi(xi) in unscaled variables.
double evaluate_energy(const std::vector<double>& dofs, const Pop& pop);

/// Projects a DOF vector into the feasible set: per-DOF clamp (box) or
/// per-element radial projection with averaging of shared entries, iterated
/// to a fixed point (ball).
std::vector<double> saturated_interpolate(std::vector<double> dofs, const Pop& pop);

/// Classical interpolation: DOF functionals of a smooth function. `value`
/// evaluates u at a point; `gradient` its spatial derivatives (required for
/// derivative-bearing kinds).
std::vector<double> interpolate_dofs(
    const mesh::Mesh& m, const DofMap& dm, mesh::ElementKind kind,
    const std::function<double(double, double)>& value,
    const std::function<std::array<double, 2>(double, double)>& gradient = nullptr);

/// Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace varimin::discretize
