#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>

#include "varimin/discretize.hpp"

namespace varimin::gradflow {

struct FlowState {
    std::vector<double> dofs;
    double time = 0.0;
    double dt = 1e-2;
    std::vector<double> energy_history;
};

struct SteadyResult {
    std::vector<double> dofs;
    double energy = 0.0;
    bool converged = false;
    int steps = 0;
};

/// L2 gradient flow of the discrete energy Phi on the same FE space as the
/// relaxation pipeline, so energies are directly comparable and extracted
/// DOFs can seed the flow. Semi-implicit stepping: the quadratic (stiff)
/// part of Phi is treated implicitly, the higher-degree reaction terms
/// explicitly.
class GradientFlow {
public:
    GradientFlow(const discretize::Pop& pop, const discretize::DofMap& dm, const mesh::Mesh& m,
                 mesh::ElementKind kind, double dt);

    FlowState make_state(std::vector<double> u0) const;

    /// One semi-implicit step. Throws on non-finite state.
    void step(FlowState& state) const;

    SteadyResult run_to_steady(std::vector<double> u0, double tol, int max_steps) const;

    double energy(const std::vector<double>& dofs) const;

    /// Seeded uniform nodal values in [-2, 3]; slope DOFs in [-1, 1].
    std::vector<double> random_initial(unsigned seed) const;

    /// Discrete first variation, grad Phi(xi).
    std::vector<double> gradient(const std::vector<double>& dofs) const;

private:
    const discretize::Pop* pop_;
    const discretize::DofMap* dm_;
    double dt_;
    int n_ = 0;
    Eigen::SparseMatrix<double> mass_;
    Eigen::SparseMatrix<double> quad_hessian_;  ///< Hessian of the degree-<=2 part of Phi
    Eigen::VectorXd linear_part_;               ///< gradient of Phi at 0, degree-<=2 part
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
    /// Per element, per local free variable, the gradient polynomial of f_e.
    std::vector<std::vector<poly::Polynomial>> grad_polys_;
};

}  // namespace varimin::gradflow
