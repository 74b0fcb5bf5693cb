#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "varimin/gradflow.hpp"

using namespace varimin;
using namespace varimin::gradflow;

namespace {

struct FlowSetup {
    mesh::Mesh m;
    discretize::DofMap dm;
    discretize::Pop pop;
};

FlowSetup sh_setup(double ell, int n, double beta_c) {
    FlowSetup s;
    s.m = mesh::build_interval_mesh(ell, n);
    s.dm = discretize::build_dof_map(s.m, mesh::ElementKind::HermiteInterval);
    poly::VarRegistry reg;
    auto sym = discretize::FieldSymbols::declare(reg, mesh::ElementKind::HermiteInterval);
    auto integrand = poly::parse_polynomial("(uxx+u)^2 - 0.3*u^2 - 1.2*u^3 + 0.5*u^4", reg);
    auto fs = discretize::assemble_element_objectives(integrand, s.m, s.dm,
                                                      mesh::ElementKind::HermiteInterval, sym);
    s.pop = discretize::build_pop(fs, s.dm, discretize::ConstraintKind::PerDofBox,
                                  discretize::BoundRule::Constant, beta_c, s.m);
    return s;
}

FlowSetup convex_setup(int n) {
    FlowSetup s;
    s.m = mesh::build_interval_mesh(1.0, n);
    s.dm = discretize::build_dof_map(s.m, mesh::ElementKind::P1Interval);
    poly::VarRegistry reg;
    auto sym = discretize::FieldSymbols::declare(reg, mesh::ElementKind::P1Interval);
    auto integrand = poly::parse_polynomial("ux^2 + u^2", reg);
    auto fs = discretize::assemble_element_objectives(integrand, s.m, s.dm,
                                                      mesh::ElementKind::P1Interval, sym);
    s.pop = discretize::build_pop(fs, s.dm, discretize::ConstraintKind::PerDofBox,
                                  discretize::BoundRule::Constant, 4.0, s.m);
    return s;
}

}  // namespace

TEST_CASE("zero initial data is a fixed point of the Swift-Hohenberg flow") {
    FlowSetup s = sh_setup(8.0, 8, 4.0);
    GradientFlow flow(s.pop, s.dm, s.m, mesh::ElementKind::HermiteInterval, 1e-2);
    std::vector<double> zero(static_cast<std::size_t>(s.pop.n_vars), 0.0);
    auto st = flow.make_state(zero);
    for (int k = 0; k < 50; ++k) flow.step(st);
    for (double d : st.dofs) CHECK(std::abs(d) < 1e-12);
    CHECK(flow.energy(st.dofs) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("energy history is non-increasing on random initial data") {
    FlowSetup s = sh_setup(8.0, 16, 4.0);
    GradientFlow flow(s.pop, s.dm, s.m, mesh::ElementKind::HermiteInterval, 1e-2);
    for (unsigned seed : {1u, 2u, 3u}) {
        auto st = flow.make_state(flow.random_initial(seed));
        for (int k = 0; k < 400; ++k) flow.step(st);
        for (std::size_t i = 0; i + 1 < st.energy_history.size(); ++i) {
            const double slack = 1e-10 * std::max(1.0, std::abs(st.energy_history[i]));
            CHECK(st.energy_history[i + 1] <= st.energy_history[i] + slack);
        }
    }
}

TEST_CASE("convex flow decays the DOF norm to zero") {
    FlowSetup s = convex_setup(8);
    GradientFlow flow(s.pop, s.dm, s.m, mesh::ElementKind::P1Interval, 1e-2);
    auto st = flow.make_state(flow.random_initial(7));
    auto norm = [](const std::vector<double>& v) {
        double n = 0;
        for (double x : v) n += x * x;
        return std::sqrt(n);
    };
    double prev = norm(st.dofs);
    REQUIRE(prev > 0.1);
    for (int k = 0; k < 200; ++k) {
        flow.step(st);
        const double cur = norm(st.dofs);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("steady states have small discrete first variation") {
    FlowSetup s = sh_setup(8.0, 16, 4.0);
    GradientFlow flow(s.pop, s.dm, s.m, mesh::ElementKind::HermiteInterval, 1e-2);
    const double tol = 1e-7;
    auto res = flow.run_to_steady(flow.random_initial(11), tol, 100000);
    REQUIRE(res.converged);
    // Finite-difference gradient norm at the steady state.
    const double eps = 1e-6;
    double gnorm = 0.0;
    for (int j = 0; j < s.pop.n_vars; ++j) {
        auto hi = res.dofs, lo = res.dofs;
        hi[static_cast<std::size_t>(j)] += eps;
        lo[static_cast<std::size_t>(j)] -= eps;
        const double g = (discretize::evaluate_energy(hi, s.pop) -
                          discretize::evaluate_energy(lo, s.pop)) /
                         (2 * eps);
        gnorm += g * g;
    }
    // The stopping rule bounds the mass-weighted update; allow the mass
    // matrix conditioning factor on top of 10*tol.
    CHECK(std::sqrt(gnorm) <= 1e-3);
    CHECK(res.energy <= flow.energy(flow.random_initial(11)));
}

TEST_CASE("multiple random starts find distinct steady energies") {
    FlowSetup s = sh_setup(8.0, 16, 4.0);
    GradientFlow flow(s.pop, s.dm, s.m, mesh::ElementKind::HermiteInterval, 1e-2);
    std::set<long long> distinct;
    for (unsigned seed = 0; seed < 8; ++seed) {
        auto res = flow.run_to_steady(flow.random_initial(seed), 1e-6, 50000);
        distinct.insert(llround(res.energy * 1e3));
    }
    CHECK(distinct.size() >= 2);
}

TEST_CASE("random_initial respects the documented ranges") {
    FlowSetup s = sh_setup(8.0, 16, 4.0);
    GradientFlow flow(s.pop, s.dm, s.m, mesh::ElementKind::HermiteInterval, 1e-2);
    auto u = flow.random_initial(42);
    for (int j = 0; j < s.pop.n_vars; ++j) {
        const double v = u[static_cast<std::size_t>(j)];
        if (s.dm.dof_deriv[static_cast<std::size_t>(j)] == 0) {
            CHECK(v >= -2.0);
            CHECK(v <= 3.0);
        } else {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(flow.random_initial(42) == u);
}

TEST_CASE("argument validation") {
    FlowSetup s = convex_setup(4);
    GradientFlow flow(s.pop, s.dm, s.m, mesh::ElementKind::P1Interval, 1e-2);
    CHECK_THROWS_AS(flow.make_state(std::vector<double>(99, 0.0)), std::exception);
    auto st = flow.make_state(std::vector<double>(static_cast<std::size_t>(s.pop.n_vars), 0.0));
    st.dofs[0] = std::nan("");
    CHECK_THROWS_AS(flow.step(st), std::exception);
}
