#include "varimin/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace varimin::discretize {

using mesh::ElementKind;
using poly::Polynomial;
using poly::VarId;

FieldSymbols FieldSymbols::declare(poly::VarRegistry& reg, ElementKind kind) {
    const auto info = mesh::element_kind_info(kind);
    FieldSymbols s;
    s.x = reg.declare("x");
    s.u = reg.declare("u");
    if (info.dim == 1) {
        s.ux = reg.declare("ux");
        if (info.derivative_order >= 1) s.uxx = reg.declare("uxx");
    } else {
        s.y = reg.declare("y");
        s.ux = reg.declare("ux");
        s.uy = reg.declare("uy");
    }
    return s;
}

DofMap build_dof_map(const mesh::Mesh& m, ElementKind kind) {
    const auto info = mesh::element_kind_info(kind);
    if (info.dim != m.dim)
        throw std::invalid_argument("element kind dimension does not match mesh dimension");
    const int per_vertex = (kind == ElementKind::HermiteInterval) ? 2 : 1;

    // Global numbering: lexicographic by (vertex index, derivative tag),
    // skipping eliminated boundary DOFs.
    const int nv = static_cast<int>(m.vertices.size());
    std::vector<int> global(static_cast<std::size_t>(nv) * per_vertex, -1);
    DofMap dm;
    for (int v = 0; v < nv; ++v) {
        if (m.boundary_vertices.count(v)) continue;  // u = 0 (and slope = 0)
        for (int d = 0; d < per_vertex; ++d) {
            global[static_cast<std::size_t>(v) * per_vertex + d] = dm.n_dofs++;
            dm.dof_vertex.push_back(v);
            dm.dof_deriv.push_back(d);
            dm.dof_coords.push_back(m.vertices[static_cast<std::size_t>(v)]);
        }
    }
    for (const auto& el : m.elements) {
        std::vector<int> local;
        for (int v : el)
            for (int d = 0; d < per_vertex; ++d)
                local.push_back(global[static_cast<std::size_t>(v) * per_vertex + d]);
        dm.element_dofs.push_back(std::move(local));
    }
    return dm;
}

std::vector<int> DofMap::free_dofs_of_element(int e) const {
    std::vector<int> out;
    for (int g : element_dofs.at(static_cast<std::size_t>(e)))
        if (g >= 0) out.push_back(g);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(static_cast<std::size_t>(n));
    weights.resize(static_cast<std::size_t>(n));
    // Newton iteration on Legendre roots in [-1,1], then map to [0,1].
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 + x);
        weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    std::reverse(nodes.begin(), nodes.end());
    std::reverse(weights.begin(), weights.end());
}

namespace {

void check_symbols(const Polynomial& integrand, ElementKind kind, const FieldSymbols& sym) {
    std::vector<VarId> allowed;
    for (VarId v : {sym.x, sym.y, sym.u, sym.ux, sym.uy, sym.uxx})
        if (v >= 0) allowed.push_back(v);
    const auto info = mesh::element_kind_info(kind);
    auto symbol_name = [&](VarId v) -> std::string {
        if (v == sym.x) return "x";
        if (v == sym.y) return "y";
        if (v == sym.u) return "u";
        if (v == sym.ux) return "ux";
        if (v == sym.uy) return "uy";
        if (v == sym.uxx) return "uxx";
        return "var#" + std::to_string(v);
    };
    for (VarId v : integrand.variables()) {
        bool ok = std::find(allowed.begin(), allowed.end(), v) != allowed.end();
        if (ok && v == sym.uxx && info.derivative_order < 1) ok = false;
        if (!ok)
            throw std::invalid_argument("integrand symbol '" + symbol_name(v) +
                                        "' is not representable by this element kind");
    }
}

}  // namespace

std::vector<Polynomial> assemble_element_objectives(const Polynomial& integrand,
                                                    const mesh::Mesh& m, const DofMap& dm,
                                                    ElementKind kind, const FieldSymbols& sym) {
    check_symbols(integrand, kind, sym);
    const auto info = mesh::element_kind_info(kind);
    const auto basis = mesh::reference_basis(kind);
    const int s = info.dofs_per_element;

    std::vector<VarId> usyms;
    for (VarId v : {sym.u, sym.ux, sym.uy, sym.uxx})
        if (v >= 0) usyms.push_back(v);
    std::vector<VarId> xsyms;
    for (VarId v : {sym.x, sym.y})
        if (v >= 0) xsyms.push_back(v);
    const int deg_u = integrand.degree_in(usyms);
    const int deg_x = integrand.degree_in(xsyms);
    const int needed = deg_u * info.poly_degree + deg_x;

    // Reference basis values and derivatives as polynomials.
    std::vector<Polynomial> dt(basis.functions.size()), ds(basis.functions.size()),
        dtt(basis.functions.size());
    for (std::size_t i = 0; i < basis.functions.size(); ++i) {
        dt[i] = basis.functions[i].differentiate(mesh::kRefT);
        ds[i] = basis.functions[i].differentiate(mesh::kRefS);
        dtt[i] = dt[i].differentiate(mesh::kRefT);
    }

    std::vector<Polynomial> out;
    out.reserve(m.elements.size());

    if (m.dim == 1) {
        std::vector<double> qn, qw;
        gauss_legendre_01(std::max(1, (needed + 2) / 2 + 1), qn, qw);
        for (std::size_t e = 0; e < m.elements.size(); ++e) {
            const auto& el = m.elements[e];
            const double x0 = m.vertices[static_cast<std::size_t>(el[0])][0];
            const double x1 = m.vertices[static_cast<std::size_t>(el[1])][0];
            const double len = x1 - x0;
            const auto& gdofs = dm.element_dofs[e];
            Polynomial fe;
            for (std::size_t q = 0; q < qn.size(); ++q) {
                std::map<VarId, double> ref{{mesh::kRefT, qn[q]}};
                std::map<VarId, Polynomial> subst;
                subst[sym.x] = Polynomial(x0 + len * qn[q]);
                Polynomial up, uxp, uxxp;
                for (int i = 0; i < s; ++i) {
                    if (gdofs[static_cast<std::size_t>(i)] < 0) continue;  // pinned to 0
                    const Polynomial xi =
                        Polynomial::variable(gdofs[static_cast<std::size_t>(i)]);
                    const double sc =
                        std::pow(len, basis.length_scaling_power[static_cast<std::size_t>(i)]);
                    up += xi * (sc * basis.functions[static_cast<std::size_t>(i)].evaluate(ref));
                    uxp += xi * (sc / len * dt[static_cast<std::size_t>(i)].evaluate(ref));
                    if (sym.uxx >= 0)
                        uxxp += xi *
                                (sc / (len * len) * dtt[static_cast<std::size_t>(i)].evaluate(ref));
                }
                subst[sym.u] = up;
                if (sym.ux >= 0) subst[sym.ux] = uxp;
                if (sym.uxx >= 0) subst[sym.uxx] = uxxp;
                fe += integrand.substitute_linear(subst) * (qw[q] * len);
            }
            out.push_back(std::move(fe));
        }
        return out;
    }

    // 2D triangles: Duffy-collapsed tensor Gauss rule, exact for the needed
    // total degree.
    std::vector<double> qn, qw;
    gauss_legendre_01(std::max(1, (needed + 3) / 2 + 1), qn, qw);
    for (std::size_t e = 0; e < m.elements.size(); ++e) {
        const auto& el = m.elements[e];
        const auto& p0 = m.vertices[static_cast<std::size_t>(el[0])];
        const auto& p1 = m.vertices[static_cast<std::size_t>(el[1])];
        const auto& p2 = m.vertices[static_cast<std::size_t>(el[2])];
        // x = p0 + B * (s, t)
        const double b00 = p1[0] - p0[0], b01 = p2[0] - p0[0];
        const double b10 = p1[1] - p0[1], b11 = p2[1] - p0[1];
        const double det = b00 * b11 - b01 * b10;
        const double adet = std::abs(det);
        // inverse-transpose of B for gradient push-forward
        const double it00 = b11 / det, it01 = -b10 / det;
        const double it10 = -b01 / det, it11 = b00 / det;
        const auto& gdofs = dm.element_dofs[e];
        Polynomial fe;
        for (std::size_t qa = 0; qa < qn.size(); ++qa)
            for (std::size_t qb = 0; qb < qn.size(); ++qb) {
                const double sq = qn[qa];
                const double tq = qn[qb] * (1.0 - qn[qa]);
                const double w = qw[qa] * qw[qb] * (1.0 - qn[qa]) * adet;
                std::map<VarId, double> ref{{mesh::kRefS, sq}, {mesh::kRefT, tq}};
                std::map<VarId, Polynomial> subst;
                subst[sym.x] = Polynomial(p0[0] + b00 * sq + b01 * tq);
                subst[sym.y] = Polynomial(p0[1] + b10 * sq + b11 * tq);
                Polynomial up, uxp, uyp;
                for (int i = 0; i < s; ++i) {
                    if (gdofs[static_cast<std::size_t>(i)] < 0) continue;
                    const Polynomial xi =
                        Polynomial::variable(gdofs[static_cast<std::size_t>(i)]);
                    const double gs = ds[static_cast<std::size_t>(i)].evaluate(ref);
                    const double gt = dt[static_cast<std::size_t>(i)].evaluate(ref);
                    up += xi * basis.functions[static_cast<std::size_t>(i)].evaluate(ref);
                    uxp += xi * (it00 * gs + it01 * gt);
                    uyp += xi * (it10 * gs + it11 * gt);
                }
                subst[sym.u] = up;
                if (sym.ux >= 0) subst[sym.ux] = uxp;
                if (sym.uy >= 0) subst[sym.uy] = uyp;
                fe += integrand.substitute_linear(subst) * w;
            }
        out.push_back(std::move(fe));
    }
    return out;
}

Pop build_pop(const std::vector<Polynomial>& f_list, const DofMap& dm, ConstraintKind ck,
              BoundRule rule, double c, const mesh::Mesh& m) {
    if (c <= 0) throw std::invalid_argument("bound constant must be positive");
    Pop pop;
    pop.n_vars = dm.n_dofs;
    pop.constraint_kind = ck;
    pop.bound = (rule == BoundRule::OverH) ? c / m.h : c;
    pop.scale = pop.bound;
    pop.element_objectives_unscaled = f_list;
    for (std::size_t e = 0; e < f_list.size(); ++e) {
        pop.element_vars.push_back(dm.free_dofs_of_element(static_cast<int>(e)));
        std::map<VarId, Polynomial> subst;
        for (int j : pop.element_vars.back())
            subst[j] = Polynomial::variable(j) * pop.scale;
        pop.element_objectives.push_back(f_list[e].substitute_linear(subst));
    }
    return pop;
}

double evaluate_energy(const std::vector<double>& dofs, const Pop& pop) {
    if (static_cast<int>(dofs.size()) != pop.n_vars)
        throw std::invalid_argument("DOF vector length mismatch");
    double sum = 0.0;
    for (const auto& fe : pop.element_objectives_unscaled) sum += fe.evaluate_dense(dofs);
    return sum;
}

std::vector<double> saturated_interpolate(std::vector<double> dofs, const Pop& pop) {
    if (static_cast<int>(dofs.size()) != pop.n_vars)
        throw std::invalid_argument("DOF vector length mismatch");
    const double b = pop.bound;
    if (pop.constraint_kind == ConstraintKind::PerDofBox) {
        for (double& v : dofs) v = std::clamp(v, -b, b);
        return dofs;
    }
    // Per-element radial projection, shared entries averaged; iterate to a
    // fixed point so repeated application is a no-op.
    for (int it = 0; it < 200; ++it) {
        std::vector<double> acc(dofs.size(), 0.0);
        std::vector<int> cnt(dofs.size(), 0);
        for (const auto& ev : pop.element_vars) {
            double r2 = 0.0;
            for (int j : ev) r2 += dofs[static_cast<std::size_t>(j)] * dofs[static_cast<std::size_t>(j)];
            const double r = std::sqrt(r2);
            const double f = (r > b) ? b / r : 1.0;
            for (int j : ev) {
                acc[static_cast<std::size_t>(j)] += f * dofs[static_cast<std::size_t>(j)];
                cnt[static_cast<std::size_t>(j)] += 1;
            }
        }
        double change = 0.0;
        for (std::size_t j = 0; j < dofs.size(); ++j) {
            double v = cnt[j] ? acc[j] / cnt[j] : dofs[j];
            change = std::max(change, std::abs(v - dofs[j]));
            dofs[j] = v;
        }
        if (change < 1e-13) break;
    }
    return dofs;
}

std::vector<double> interpolate_dofs(
    const mesh::Mesh& m, const DofMap& dm, mesh::ElementKind kind,
    const std::function<double(double, double)>& value,
    const std::function<std::array<double, 2>(double, double)>& gradient) {
    (void)m;
    std::vector<double> out(static_cast<std::size_t>(dm.n_dofs), 0.0);
    const bool needs_grad = (kind == ElementKind::HermiteInterval);
    if (needs_grad && !gradient)
        throw std::invalid_argument("gradient callback required for derivative DOFs");
    for (int j = 0; j < dm.n_dofs; ++j) {
        const auto& c = dm.dof_coords[static_cast<std::size_t>(j)];
        if (dm.dof_deriv[static_cast<std::size_t>(j)] == 0)
            out[static_cast<std::size_t>(j)] = value(c[0], c[1]);
        else
            out[static_cast<std::size_t>(j)] = gradient(c[0], c[1])[0];
    }
    return out;
}

}  // namespace varimin::discretize
