#include "varimin/gradflow.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace varimin::gradflow {

using discretize::DofMap;
using discretize::Pop;
using poly::Monomial;
using poly::Polynomial;

GradientFlow::GradientFlow(const Pop& pop, const DofMap& dm, const mesh::Mesh& m,
                           mesh::ElementKind kind, double dt)
    : pop_(&pop), dm_(&dm), dt_(dt), n_(pop.n_vars) {
    // Mass matrix from the element objectives of the integrand u^2:
    // Hessian of sum_e int u^2 is 2M.
    poly::VarRegistry reg;
    auto sym = discretize::FieldSymbols::declare(reg, kind);
    Polynomial u2 = Polynomial::variable(sym.u) * Polynomial::variable(sym.u);
    auto mass_objs = discretize::assemble_element_objectives(u2, m, dm, kind, sym);

    std::vector<Eigen::Triplet<double>> mt, ht;
    auto accumulate_quadratic = [](const Polynomial& f, std::vector<Eigen::Triplet<double>>& out,
                                   Eigen::VectorXd* lin) {
        for (const auto& [mono, c] : f.terms()) {
            const int deg = poly::monomial_degree(mono);
            if (deg == 1 && lin) (*lin)[mono[0].first] += c;
            if (deg != 2) continue;
            if (mono.size() == 1) {
                out.emplace_back(mono[0].first, mono[0].first, 2.0 * c);
            } else {
                out.emplace_back(mono[0].first, mono[1].first, c);
                out.emplace_back(mono[1].first, mono[0].first, c);
            }
        }
    };
    linear_part_ = Eigen::VectorXd::Zero(n_);
    for (const auto& f : mass_objs) accumulate_quadratic(f, mt, nullptr);
    for (const auto& f : pop.element_objectives_unscaled)
        accumulate_quadratic(f, ht, &linear_part_);
    mass_.resize(n_, n_);
    mass_.setFromTriplets(mt.begin(), mt.end());
    mass_ *= 0.5;
    quad_hessian_.resize(n_, n_);
    quad_hessian_.setFromTriplets(ht.begin(), ht.end());

    Eigen::SparseMatrix<double> sys = mass_ + (dt_ / 2.0) * quad_hessian_;
    lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(sys);
    if (lu_->info() != Eigen::Success)
        throw std::runtime_error("gradflow: implicit system factorization failed (dt too large?)");

    // Per-variable gradient polynomials, aligned with element_vars ordering.
    grad_polys_.resize(pop.element_objectives_unscaled.size());
    for (std::size_t e = 0; e < pop.element_objectives_unscaled.size(); ++e)
        for (int v : pop.element_vars[e])
            grad_polys_[e].push_back(pop.element_objectives_unscaled[e].differentiate(v));
}

double GradientFlow::energy(const std::vector<double>& dofs) const {
    return discretize::evaluate_energy(dofs, *pop_);
}

std::vector<double> GradientFlow::gradient(const std::vector<double>& dofs) const {
    std::vector<double> g(static_cast<std::size_t>(n_), 0.0);
    for (std::size_t e = 0; e < grad_polys_.size(); ++e)
        for (std::size_t i = 0; i < grad_polys_[e].size(); ++i)
            g[static_cast<std::size_t>(pop_->element_vars[e][i])] +=
                grad_polys_[e][i].evaluate_dense(dofs);
    return g;
}

FlowState GradientFlow::make_state(std::vector<double> u0) const {
    if (static_cast<int>(u0.size()) != n_) throw std::invalid_argument("DOF length mismatch");
    FlowState st;
    st.dofs = std::move(u0);
    st.dt = dt_;
    st.energy_history.push_back(energy(st.dofs));
    return st;
}

void GradientFlow::step(FlowState& state) const {
    Eigen::Map<const Eigen::VectorXd> xi(state.dofs.data(), n_);
    if (!xi.allFinite()) throw std::runtime_error("gradflow: non-finite state");
    // grad Phi = H xi + g0 + n(xi); treat H implicitly:
    // (M + dt/2 H) xi' = M xi - dt/2 (g0 + n(xi))
    std::vector<double> full = gradient(state.dofs);
    Eigen::Map<const Eigen::VectorXd> gfull(full.data(), n_);
    Eigen::VectorXd nonlin = gfull - quad_hessian_ * xi - linear_part_;
    Eigen::VectorXd rhs = mass_ * xi - (state.dt / 2.0) * (linear_part_ + nonlin);
    Eigen::VectorXd next = lu_->solve(rhs);
    for (int i = 0; i < n_; ++i) state.dofs[static_cast<std::size_t>(i)] = next[i];
    state.time += state.dt;
    state.energy_history.push_back(energy(state.dofs));
}

SteadyResult GradientFlow::run_to_steady(std::vector<double> u0, double tol,
                                         int max_steps) const {
    FlowState st = make_state(std::move(u0));
    SteadyResult out;
    for (int k = 0; k < max_steps; ++k) {
        std::vector<double> prev = st.dofs;
        step(st);
        double delta = 0.0;
        for (std::size_t i = 0; i < prev.size(); ++i)
            delta = std::max(delta, std::abs(st.dofs[i] - prev[i]));
        out.steps = k + 1;
        if (delta / st.dt <= tol) {
            out.converged = true;
            break;
        }
    }
    out.dofs = st.dofs;
    out.energy = st.energy_history.back();
    return out;
}

std::vector<double> GradientFlow::random_initial(unsigned seed) const {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> val(-2.0, 3.0);
    std::uniform_real_distribution<double> slope(-1.0, 1.0);
    std::vector<double> u(static_cast<std::size_t>(n_));
    for (int j = 0; j < n_; ++j)
        u[static_cast<std::size_t>(j)] =
            (dm_->dof_deriv[static_cast<std::size_t>(j)] == 0) ? val(rng) : slope(rng);
    return u;
}

}  // namespace varimin::gradflow
