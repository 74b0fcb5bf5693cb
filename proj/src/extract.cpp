#include "varimin/extract.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace varimin::extract {

using discretize::DofMap;
using discretize::Pop;
using mesh::ElementKind;
using poly::Polynomial;
using poly::VarId;

ApproxMinimizer extract_minimizer(const relax::SdpSolution& sol, const relax::MomentBasis& basis,
                                  const Pop& pop, const DofMap& dm, const mesh::Mesh& m,
                                  ElementKind kind, double gap_fraction) {
    if (sol.status == relax::SolveStatus::InfeasibleDetected)
        throw std::runtime_error("extract_minimizer: solver reported infeasibility");
    ApproxMinimizer out;
    out.dofmap = &dm;
    out.mesh_ptr = &m;
    out.kind = kind;
    out.lambda = sol.lambda;
    out.dofs.assign(static_cast<std::size_t>(pop.n_vars), 0.0);
    for (int j = 0; j < pop.n_vars; ++j) {
        const int idx = basis.first_moment_index[static_cast<std::size_t>(j)];
        if (idx >= 0) out.dofs[static_cast<std::size_t>(j)] =
            pop.scale * sol.y[static_cast<std::size_t>(idx)];
    }
    out.dofs = discretize::saturated_interpolate(std::move(out.dofs), pop);
    out.energy = discretize::evaluate_energy(out.dofs, pop);
    out.gap_warning = (out.energy - out.lambda) > gap_fraction * std::max(1.0, std::abs(out.lambda));
    return out;
}

SampleValue sample_function(const ApproxMinimizer& am, double x, double y) {
    const mesh::Mesh& m = *am.mesh_ptr;
    const DofMap& dm = *am.dofmap;
    const auto basis = mesh::reference_basis(am.kind);
    SampleValue sv;
    if (m.dim == 1) {
        const double tol = 1e-12 * (1.0 + std::abs(x));
        for (std::size_t e = 0; e < m.elements.size(); ++e) {
            const double x0 = m.vertices[static_cast<std::size_t>(m.elements[e][0])][0];
            const double x1 = m.vertices[static_cast<std::size_t>(m.elements[e][1])][0];
            if (x < x0 - tol || x > x1 + tol) continue;
            const double len = x1 - x0;
            const double t = std::clamp((x - x0) / len, 0.0, 1.0);
            std::map<VarId, double> pt{{mesh::kRefT, t}};
            const auto& gd = dm.element_dofs[e];
            for (std::size_t i = 0; i < gd.size(); ++i) {
                if (gd[i] < 0) continue;
                const double d = am.dofs[static_cast<std::size_t>(gd[i])];
                const double sc = std::pow(len, basis.length_scaling_power[i]);
                sv.value += d * sc * basis.functions[i].evaluate(pt);
                sv.gradient[0] +=
                    d * sc / len * basis.functions[i].differentiate(mesh::kRefT).evaluate(pt);
            }
            return sv;
        }
        throw std::invalid_argument("sample point outside the domain");
    }
    for (std::size_t e = 0; e < m.elements.size(); ++e) {
        const auto& el = m.elements[e];
        const auto& p0 = m.vertices[static_cast<std::size_t>(el[0])];
        const auto& p1 = m.vertices[static_cast<std::size_t>(el[1])];
        const auto& p2 = m.vertices[static_cast<std::size_t>(el[2])];
        const double b00 = p1[0] - p0[0], b01 = p2[0] - p0[0];
        const double b10 = p1[1] - p0[1], b11 = p2[1] - p0[1];
        const double det = b00 * b11 - b01 * b10;
        const double s = ((x - p0[0]) * b11 - (y - p0[1]) * b01) / det;
        const double t = (-(x - p0[0]) * b10 + (y - p0[1]) * b00) / det;
        const double tol = 1e-10;
        if (s < -tol || t < -tol || s + t > 1.0 + tol) continue;
        std::map<VarId, double> pt{{mesh::kRefS, s}, {mesh::kRefT, t}};
        const double it00 = b11 / det, it01 = -b10 / det;
        const double it10 = -b01 / det, it11 = b00 / det;
        const auto& gd = dm.element_dofs[e];
        for (std::size_t i = 0; i < gd.size(); ++i) {
            if (gd[i] < 0) continue;
            const double d = am.dofs[static_cast<std::size_t>(gd[i])];
            const double gs = basis.functions[i].differentiate(mesh::kRefS).evaluate(pt);
            const double gt = basis.functions[i].differentiate(mesh::kRefT).evaluate(pt);
            sv.value += d * basis.functions[i].evaluate(pt);
            sv.gradient[0] += d * (it00 * gs + it01 * gt);
            sv.gradient[1] += d * (it10 * gs + it11 * gt);
        }
        return sv;
    }
    throw std::invalid_argument("sample point outside the domain");
}

namespace {

bool separable_convex_flag(const Polynomial& integrand, const discretize::FieldSymbols& sym) {
    std::vector<VarId> derivs;
    for (VarId v : {sym.ux, sym.uy, sym.uxx})
        if (v >= 0) derivs.push_back(v);
    if (derivs.empty()) return true;
    auto is_deriv = [&](VarId v) {
        return std::find(derivs.begin(), derivs.end(), v) != derivs.end();
    };
    // No mixed u * derivative monomials; derivative dependence at most
    // quadratic with x-independent coefficients.
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(static_cast<int>(derivs.size()),
                                                 static_cast<int>(derivs.size()));
    auto pos = [&](VarId v) {
        return static_cast<int>(std::find(derivs.begin(), derivs.end(), v) - derivs.begin());
    };
    for (const auto& [mono, coeff] : integrand.terms()) {
        bool has_u = false, has_d = false, has_x = false;
        int ddeg = 0;
        for (const auto& [v, e] : mono) {
            if (v == sym.u) has_u = true;
            if (is_deriv(v)) {
                has_d = true;
                ddeg += e;
            }
            if (v == sym.x || v == sym.y) has_x = true;
        }
        if (has_u && has_d) return false;
        if (!has_d) continue;
        if (ddeg > 2 || has_x || static_cast<int>(mono.size()) > 2) return false;
        if (ddeg == 1) continue;  // linear derivative terms do not affect convexity
        if (mono.size() == 1) {
            hess(pos(mono[0].first), pos(mono[0].first)) += 2.0 * coeff;
        } else {
            hess(pos(mono[0].first), pos(mono[1].first)) += coeff;
            hess(pos(mono[1].first), pos(mono[0].first)) += coeff;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -1e-12;
}

}  // namespace

Report optimality_report(const ApproxMinimizer& m, const sparsity::CliqueSet& cs,
                         const Polynomial& integrand, const discretize::FieldSymbols& sym) {
    Report r;
    r.lambda = m.lambda;
    r.energy = m.energy;
    r.gap = m.energy - m.lambda;
    r.gap_warning = m.gap_warning;
    r.separable_convex = separable_convex_flag(integrand, sym);
    r.clique_count = static_cast<int>(cs.cliques.size());
    r.clique_max_size = cs.max_size();
    r.clique_avg_size = cs.avg_size();
    return r;
}

int count_peaks(const ApproxMinimizer& am, int samples, double amplitude_fraction) {
    const mesh::Mesh& m = *am.mesh_ptr;
    if (m.dim != 1) throw std::invalid_argument("count_peaks supports 1D only");
    const double x0 = m.vertices.front()[0];
    const double x1 = m.vertices.back()[0];
    std::vector<double> v(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const double x = x0 + (x1 - x0) * i / (samples - 1);
        v[static_cast<std::size_t>(i)] = sample_function(am, x).value;
    }
    const double vmax = *std::max_element(v.begin(), v.end());
    if (vmax <= 0.0) return 0;
    const double thresh = amplitude_fraction * vmax;
    int peaks = 0;
    for (int i = 1; i + 1 < samples; ++i)
        if (v[static_cast<std::size_t>(i)] > thresh &&
            v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(i - 1)] &&
            v[static_cast<std::size_t>(i)] >= v[static_cast<std::size_t>(i + 1)])
            ++peaks;
    return peaks;
}

}  // namespace varimin::extract
