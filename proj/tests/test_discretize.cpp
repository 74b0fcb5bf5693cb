#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "varimin/discretize.hpp"

using namespace varimin;
using namespace varimin::discretize;
using poly::Polynomial;
using poly::VarId;

namespace {

Polynomial parse_with(poly::VarRegistry& reg, mesh::ElementKind kind, const std::string& text,
                      FieldSymbols& sym_out) {
    sym_out = FieldSymbols::declare(reg, kind);
    return poly::parse_polynomial(text, reg);
}

// Independent 1D energy oracle: composite Simpson on the reconstructed FE
// function, no shared quadrature code with the assembly path.
double simpson_energy_1d(const Polynomial& integrand, const FieldSymbols& sym,
                         const mesh::Mesh& m, const DofMap& dm, mesh::ElementKind kind,
                         const std::vector<double>& dofs, int panels_per_element = 64) {
    auto basis = mesh::reference_basis(kind);
    double total = 0.0;
    for (std::size_t e = 0; e < m.elements.size(); ++e) {
        const double x0 = m.vertices[static_cast<std::size_t>(m.elements[e][0])][0];
        const double x1 = m.vertices[static_cast<std::size_t>(m.elements[e][1])][0];
        const double len = x1 - x0;
        auto field_at = [&](double t) {
            std::map<VarId, double> pt{{mesh::kRefT, t}};
            double u = 0, ux = 0, uxx = 0;
            const auto& gd = dm.element_dofs[e];
            for (std::size_t i = 0; i < gd.size(); ++i) {
                if (gd[i] < 0) continue;
                const double d = dofs[static_cast<std::size_t>(gd[i])];
                const double sc = std::pow(len, basis.length_scaling_power[i]);
                const auto& th = basis.functions[i];
                u += d * sc * th.evaluate(pt);
                ux += d * sc / len * th.differentiate(mesh::kRefT).evaluate(pt);
                uxx += d * sc / (len * len) *
                       th.differentiate(mesh::kRefT).differentiate(mesh::kRefT).evaluate(pt);
            }
            std::map<VarId, double> fp;
            if (sym.x >= 0) fp[sym.x] = x0 + len * t;
            if (sym.u >= 0) fp[sym.u] = u;
            if (sym.ux >= 0) fp[sym.ux] = ux;
            if (sym.uxx >= 0) fp[sym.uxx] = uxx;
            return integrand.evaluate(fp);
        };
        const int n = panels_per_element;
        double acc = field_at(0.0) + field_at(1.0);
        for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * field_at(i / double(n));
        total += acc * len / (3.0 * n);
    }
    return total;
}

}  // namespace

TEST_CASE("gauss_legendre_01 integrates monomials exactly") {
    for (int n = 1; n <= 8; ++n) {
        std::vector<double> x, w;
        gauss_legendre_01(n, x, w);
        REQUIRE(static_cast<int>(x.size()) == n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += w[static_cast<std::size_t>(i)] *
                                              std::pow(x[static_cast<std::size_t>(i)], k);
            CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("dof map: 1D Hermite chain") {
    mesh::Mesh m = mesh::build_interval_mesh(32.0, 16);
    DofMap dm = build_dof_map(m, mesh::ElementKind::HermiteInterval);
    CHECK(dm.n_dofs == 2 * (16 - 1));
    // Interior elements carry 4 free DOFs, the two end elements 2.
    for (int e = 0; e < 16; ++e) {
        const auto free = dm.free_dofs_of_element(e);
        CHECK(static_cast<int>(free.size()) == (e == 0 || e == 15 ? 2 : 4));
    }
    // Deterministic lexicographic numbering by (vertex, derivative tag).
    for (int j = 0; j + 1 < dm.n_dofs; ++j) {
        const auto a = std::make_pair(dm.dof_vertex[static_cast<std::size_t>(j)],
                                      dm.dof_deriv[static_cast<std::size_t>(j)]);
        const auto b = std::make_pair(dm.dof_vertex[static_cast<std::size_t>(j + 1)],
                                      dm.dof_deriv[static_cast<std::size_t>(j + 1)]);
        CHECK(a < b);
    }
}

TEST_CASE("dof map: 1D P1 single element has no free DOFs") {
    mesh::Mesh m = mesh::build_interval_mesh(1.0, 1);
    DofMap dm = build_dof_map(m, mesh::ElementKind::P1Interval);
    CHECK(dm.n_dofs == 0);
}

TEST_CASE("dof map: 2D P1 unit square k=10 has 81 free DOFs") {
    mesh::Mesh m = mesh::build_rect_mesh(0.5, 0.5, 10);
    DofMap dm = build_dof_map(m, mesh::ElementKind::P1Triangle);
    CHECK(dm.n_dofs == 81);
}

TEST_CASE("assembly: u^2 on 1D P1 gives h/3 diagonal coefficient") {
    mesh::Mesh m = mesh::build_interval_mesh(1.0, 2);  // h = 1
    DofMap dm = build_dof_map(m, mesh::ElementKind::P1Interval);
    REQUIRE(dm.n_dofs == 1);
    poly::VarRegistry reg;
    FieldSymbols sym;
    Polynomial integrand = parse_with(reg, mesh::ElementKind::P1Interval, "u^2", sym);
    auto fs = assemble_element_objectives(integrand, m, dm, mesh::ElementKind::P1Interval, sym);
    REQUIRE(fs.size() == 2);
    // Element 0: u = xi0 * t on length-1 element, integral = h/3 * xi0^2.
    CHECK(fs[0].terms().at(poly::Monomial{{0, 2}}) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(fs[1].terms().at(poly::Monomial{{0, 2}}) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("assembly: two-well on P1 triangle has degree 4 and f_e(0) = area*4") {
    mesh::Mesh m = mesh::build_rect_mesh(0.5, 0.5, 4);
    DofMap dm = build_dof_map(m, mesh::ElementKind::P1Triangle);
    poly::VarRegistry reg;
    FieldSymbols sym;
    Polynomial integrand = parse_with(reg, mesh::ElementKind::P1Triangle,
                                      "0.01*(ux^2+uy^2) + (u+1)^2*(u-2)^2", sym);
    auto fs = assemble_element_objectives(integrand, m, dm, mesh::ElementKind::P1Triangle, sym);
    const double area = 0.5 * 0.125 * 0.125 * 4;  // two triangles per grid cell
    for (std::size_t e = 0; e < fs.size(); ++e) {
        // Elements with a free DOF see the full quartic; fully-boundary
        // elements reduce to the constant.
        if (!dm.free_dofs_of_element(static_cast<int>(e)).empty()) CHECK(fs[e].degree() == 4);
        CHECK(fs[e].constant_term() == doctest::Approx(area * 4.0).epsilon(1e-12));
    }
}

TEST_CASE("assembly rejects unsupported derivative symbols") {
    mesh::Mesh m = mesh::build_interval_mesh(1.0, 4);
    DofMap dm = build_dof_map(m, mesh::ElementKind::P1Interval);
    poly::VarRegistry reg;
    // Declare uxx by hand so the parse succeeds but assembly must refuse it.
    auto sym = FieldSymbols::declare(reg, mesh::ElementKind::P1Interval);
    sym.uxx = reg.declare("uxx");
    Polynomial bad = poly::parse_polynomial("uxx^2", reg);
    CHECK_THROWS_WITH_AS(
        assemble_element_objectives(bad, m, dm, mesh::ElementKind::P1Interval, sym),
        doctest::Contains("uxx"), std::exception);
}

TEST_CASE("energy: Swift-Hohenberg assembly matches Simpson oracle on random DOFs") {
    mesh::Mesh m = mesh::build_interval_mesh(2.0, 5);
    DofMap dm = build_dof_map(m, mesh::ElementKind::HermiteInterval);
    poly::VarRegistry reg;
    FieldSymbols sym;
    Polynomial integrand = parse_with(reg, mesh::ElementKind::HermiteInterval,
                                      "(uxx+u)^2 - 0.3*u^2 - 1.2*u^3 + 0.5*u^4", sym);
    auto fs = assemble_element_objectives(integrand, m, dm, mesh::ElementKind::HermiteInterval, sym);
    Pop pop = build_pop(fs, dm, ConstraintKind::PerDofBox, BoundRule::Constant, 4.0, m);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int it = 0; it < 10; ++it) {
        std::vector<double> dofs(static_cast<std::size_t>(dm.n_dofs));
        for (double& d : dofs) d = val(rng);
        const double assembled = evaluate_energy(dofs, pop);
        const double oracle = simpson_energy_1d(integrand, sym, m, dm,
                                                mesh::ElementKind::HermiteInterval, dofs, 128);
        CHECK(assembled == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("energy: x-dependent integrand matches Simpson oracle") {
    mesh::Mesh m = mesh::build_interval_mesh(1.0, 4);
    DofMap dm = build_dof_map(m, mesh::ElementKind::P1Interval);
    poly::VarRegistry reg;
    FieldSymbols sym;
    Polynomial integrand = parse_with(reg, mesh::ElementKind::P1Interval,
                                      "x^2*u^2 + ux^2 - x*u", sym);
    auto fs = assemble_element_objectives(integrand, m, dm, mesh::ElementKind::P1Interval, sym);
    Pop pop = build_pop(fs, dm, ConstraintKind::PerDofBox, BoundRule::Constant, 4.0, m);
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int it = 0; it < 5; ++it) {
        std::vector<double> dofs(static_cast<std::size_t>(dm.n_dofs));
        for (double& d : dofs) d = val(rng);
        const double oracle =
            simpson_energy_1d(integrand, sym, m, dm, mesh::ElementKind::P1Interval, dofs, 256);
        CHECK(evaluate_energy(dofs, pop) == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("energy at zero: two-well gives 4, Swift-Hohenberg gives 0") {
    {
        mesh::Mesh m = mesh::build_rect_mesh(0.5, 0.5, 4);
        DofMap dm = build_dof_map(m, mesh::ElementKind::P1Triangle);
        poly::VarRegistry reg;
        FieldSymbols sym;
        Polynomial integrand = parse_with(reg, mesh::ElementKind::P1Triangle,
                                          "0.01*(ux^2+uy^2) + (u+1)^2*(u-2)^2", sym);
        auto fs = assemble_element_objectives(integrand, m, dm, mesh::ElementKind::P1Triangle, sym);
        Pop pop = build_pop(fs, dm, ConstraintKind::PerDofBox, BoundRule::OverH, std::sqrt(2.0), m);
        std::vector<double> zero(static_cast<std::size_t>(dm.n_dofs), 0.0);
        CHECK(evaluate_energy(zero, pop) == doctest::Approx(4.0).epsilon(1e-12));
    }
    {
        mesh::Mesh m = mesh::build_interval_mesh(32.0, 16);
        DofMap dm = build_dof_map(m, mesh::ElementKind::HermiteInterval);
        poly::VarRegistry reg;
        FieldSymbols sym;
        Polynomial integrand = parse_with(reg, mesh::ElementKind::HermiteInterval,
                                          "(uxx+u)^2 - 0.3*u^2 - 1.2*u^3 + 0.5*u^4", sym);
        auto fs =
            assemble_element_objectives(integrand, m, dm, mesh::ElementKind::HermiteInterval, sym);
        Pop pop = build_pop(fs, dm, ConstraintKind::PerDofBox, BoundRule::OverH, 2.0, m);
        std::vector<double> zero(static_cast<std::size_t>(dm.n_dofs), 0.0);
        CHECK(evaluate_energy(zero, pop) == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("build_pop bound rules") {
    mesh::Mesh m = mesh::build_interval_mesh(32.0, 16);  // h = 4
    DofMap dm = build_dof_map(m, mesh::ElementKind::HermiteInterval);
    poly::VarRegistry reg;
    FieldSymbols sym;
    Polynomial integrand = parse_with(reg, mesh::ElementKind::HermiteInterval, "u^2", sym);
    auto fs = assemble_element_objectives(integrand, m, dm, mesh::ElementKind::HermiteInterval, sym);
    Pop over_h = build_pop(fs, dm, ConstraintKind::PerDofBox, BoundRule::OverH, 2.0, m);
    CHECK(over_h.bound == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(over_h.scale == doctest::Approx(0.5).epsilon(1e-12));
    Pop constant = build_pop(fs, dm, ConstraintKind::PerDofBox, BoundRule::Constant, 4.0, m);
    CHECK(constant.bound == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("rescaling invariance: grid-search minima agree on a 2-variable POP") {
    mesh::Mesh m = mesh::build_interval_mesh(1.0, 3);
    DofMap dm = build_dof_map(m, mesh::ElementKind::P1Interval);
    REQUIRE(dm.n_dofs == 2);
    poly::VarRegistry reg;
    FieldSymbols sym;
    Polynomial integrand = parse_with(reg, mesh::ElementKind::P1Interval,
                                      "u^4 - u^2 + 0.1*ux^2", sym);
    auto fs = assemble_element_objectives(integrand, m, dm, mesh::ElementKind::P1Interval, sym);
    Pop pop = build_pop(fs, dm, ConstraintKind::PerDofBox, BoundRule::Constant, 2.0, m);
    const int G = 201;
    double min_unscaled = 1e300, min_scaled = 1e300;
    for (int i = 0; i < G; ++i) {
        for (int j = 0; j < G; ++j) {
            const double t0 = -1.0 + 2.0 * i / (G - 1);
            const double t1 = -1.0 + 2.0 * j / (G - 1);
            min_unscaled = std::min(min_unscaled,
                                    evaluate_energy({pop.scale * t0, pop.scale * t1}, pop));
            double scaled = 0.0;
            for (const auto& f : pop.element_objectives) scaled += f.evaluate_dense({t0, t1});
            min_scaled = std::min(min_scaled, scaled);
        }
    }
    CHECK(min_scaled == doctest::Approx(min_unscaled).epsilon(1e-6));
}

TEST_CASE("saturated_interpolate: box clamp") {
    mesh::Mesh m = mesh::build_interval_mesh(1.0, 2);
    DofMap dm = build_dof_map(m, mesh::ElementKind::P1Interval);
    poly::VarRegistry reg;
    FieldSymbols sym;
    Polynomial integrand = parse_with(reg, mesh::ElementKind::P1Interval, "u^2", sym);
    auto fs = assemble_element_objectives(integrand, m, dm, mesh::ElementKind::P1Interval, sym);
    Pop pop = build_pop(fs, dm, ConstraintKind::PerDofBox, BoundRule::Constant, 4.0, m);
    CHECK(saturated_interpolate({3.5}, pop) == std::vector<double>{3.5});
    CHECK(saturated_interpolate({5.0}, pop) == std::vector<double>{4.0});
    CHECK(saturated_interpolate({-5.0}, pop) == std::vector<double>{-4.0});
}

TEST_CASE("saturated_interpolate: ball projection is feasible and idempotent") {
    mesh::Mesh m = mesh::build_interval_mesh(1.0, 4);
    DofMap dm = build_dof_map(m, mesh::ElementKind::P1Interval);
    poly::VarRegistry reg;
    FieldSymbols sym;
    Polynomial integrand = parse_with(reg, mesh::ElementKind::P1Interval, "u^2", sym);
    auto fs = assemble_element_objectives(integrand, m, dm, mesh::ElementKind::P1Interval, sym);
    Pop pop = build_pop(fs, dm, ConstraintKind::PerElementBall, BoundRule::Constant, 1.0, m);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> val(-3.0, 3.0);
    for (int it = 0; it < 20; ++it) {
        std::vector<double> dofs(static_cast<std::size_t>(dm.n_dofs));
        for (double& d : dofs) d = val(rng);
        auto proj = saturated_interpolate(dofs, pop);
        for (std::size_t e = 0; e < pop.element_vars.size(); ++e) {
            double norm2 = 0.0;
            for (int v : pop.element_vars[e]) norm2 += proj[static_cast<std::size_t>(v)] *
                                                       proj[static_cast<std::size_t>(v)];
            CHECK(norm2 <= pop.bound * pop.bound + 1e-9);
        }
        auto twice = saturated_interpolate(proj, pop);
        for (std::size_t i = 0; i < proj.size(); ++i)
            CHECK(twice[i] == doctest::Approx(proj[i]).epsilon(1e-12));
    }
}

TEST_CASE("box saturation idempotence") {
    mesh::Mesh m = mesh::build_interval_mesh(1.0, 6);
    DofMap dm = build_dof_map(m, mesh::ElementKind::P1Interval);
    poly::VarRegistry reg;
    FieldSymbols sym;
    Polynomial integrand = parse_with(reg, mesh::ElementKind::P1Interval, "u^2", sym);
    auto fs = assemble_element_objectives(integrand, m, dm, mesh::ElementKind::P1Interval, sym);
    Pop pop = build_pop(fs, dm, ConstraintKind::PerDofBox, BoundRule::Constant, 0.7, m);
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> val(-3.0, 3.0);
    std::vector<double> dofs(static_cast<std::size_t>(dm.n_dofs));
    for (double& d : dofs) d = val(rng);
    auto once = saturated_interpolate(dofs, pop);
    auto twice = saturated_interpolate(once, pop);
    CHECK(once == twice);
}

TEST_CASE("classical Hermite interpolation of a smooth function stays within bounds") {
    const double ell = 1.0;
    auto u = [&](double x, double) {
        return std::sin(M_PI * x / ell) * (ell * ell - x * x) / (ell * ell);
    };
    auto grad = [&](double x, double) -> std::array<double, 2> {
        const double s = std::sin(M_PI * x / ell), c = std::cos(M_PI * x / ell);
        return {c * M_PI / ell * (ell * ell - x * x) / (ell * ell) - s * 2 * x / (ell * ell), 0.0};
    };
    double prev_err = 1e300;
    for (int n : {8, 16, 32}) {
        mesh::Mesh m = mesh::build_interval_mesh(ell, n);
        DofMap dm = build_dof_map(m, mesh::ElementKind::HermiteInterval);
        poly::VarRegistry reg;
        FieldSymbols sym;
        Polynomial integrand = parse_with(reg, mesh::ElementKind::HermiteInterval, "u^2", sym);
        auto fs =
            assemble_element_objectives(integrand, m, dm, mesh::ElementKind::HermiteInterval, sym);
        Pop pop = build_pop(fs, dm, ConstraintKind::PerDofBox, BoundRule::OverH, 2.0, m);
        auto dofs = interpolate_dofs(m, dm, mesh::ElementKind::HermiteInterval, u, grad);
        // No clamping active for h <= 1.
        auto sat = saturated_interpolate(dofs, pop);
        for (std::size_t i = 0; i < dofs.size(); ++i)
            CHECK(sat[i] == doctest::Approx(dofs[i]).epsilon(1e-14));
        // L2-type error of the interpolant via the u^2 energy of the
        // difference, evaluated nodally: check monotone decay.
        double err = 0.0;
        for (int j = 0; j < dm.n_dofs; ++j) {
            if (dm.dof_deriv[static_cast<std::size_t>(j)] != 0) continue;
            const double x = dm.dof_coords[static_cast<std::size_t>(j)][0];
            err = std::max(err, std::abs(dofs[static_cast<std::size_t>(j)] - u(x, 0.0)));
        }
        CHECK(err <= 1e-12);  // nodal interpolation is exact at nodes
        // Midpoint errors decay under refinement.
        double mid_err = 0.0;
        for (std::size_t e = 0; e < m.elements.size(); ++e) {
            const double x0 = m.vertices[static_cast<std::size_t>(m.elements[e][0])][0];
            const double x1 = m.vertices[static_cast<std::size_t>(m.elements[e][1])][0];
            const double xm = 0.5 * (x0 + x1), len = x1 - x0;
            auto basis = mesh::reference_basis(mesh::ElementKind::HermiteInterval);
            double val = 0.0;
            const auto& gd = dm.element_dofs[e];
            for (std::size_t i = 0; i < gd.size(); ++i) {
                if (gd[i] < 0) continue;
                val += dofs[static_cast<std::size_t>(gd[i])] *
                       std::pow(len, basis.length_scaling_power[i]) *
                       basis.functions[i].evaluate({{mesh::kRefT, 0.5}});
            }
            mid_err = std::max(mid_err, std::abs(val - u(xm, 0.0)));
        }
        CHECK(mid_err < prev_err);
        prev_err = mid_err;
    }
}
