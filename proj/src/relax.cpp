#include "varimin/relax.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace varimin::relax {

using poly::Monomial;
using poly::Polynomial;

int MomentBasis::lookup(const Monomial& m) const {
    auto it = index.find(m);
    if (it == index.end())
        throw std::logic_error("moment basis: monomial not supported on any clique");
    return it->second;
}

namespace {

void enumerate_exponents(const std::vector<int>& vars, std::size_t pos, int remaining,
                         Monomial& current, std::vector<Monomial>& out) {
    if (pos == vars.size()) {
        if (remaining == 0) out.push_back(current);
        return;
    }
    if (pos + 1 == vars.size()) {
        if (remaining > 0) {
            current.emplace_back(vars[pos], remaining);
            out.push_back(current);
            current.pop_back();
        } else {
            out.push_back(current);
        }
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        if (e > 0) {
            current.emplace_back(vars[pos], e);
            enumerate_exponents(vars, pos + 1, remaining - e, current, out);
            current.pop_back();
        } else {
            enumerate_exponents(vars, pos + 1, remaining, current, out);
        }
    }
}

}  // namespace

std::vector<Monomial> clique_monomials(const std::vector<int>& vars, int max_degree) {
    std::vector<Monomial> out;
    Monomial cur;
    for (int d = 0; d <= max_degree; ++d) enumerate_exponents(vars, 0, d, cur, out);
    return out;
}

MomentBasis build_moment_basis(const sparsity::CliqueSet& cs, int omega, int n_vars,
                               int objective_degree) {
    const int needed = std::max(2, objective_degree);
    if (2 * omega < needed)
        throw std::invalid_argument("relaxation order too small: need omega >= " +
                                    std::to_string((needed + 1) / 2));
    MomentBasis b;
    b.omega = omega;
    for (const auto& clique : cs.cliques)
        for (const auto& m : clique_monomials(clique, 2 * omega)) {
            auto [it, inserted] = b.index.try_emplace(m, static_cast<int>(b.monomials.size()));
            if (inserted) b.monomials.push_back(m);
        }
    if (b.monomials.empty() || !b.monomials.front().empty()) {
        // ensure the constant monomial exists even for an empty clique set
        auto [it, inserted] = b.index.try_emplace(Monomial{}, static_cast<int>(b.monomials.size()));
        if (inserted) b.monomials.push_back({});
    }
    b.unit_index = b.index.at(Monomial{});
    b.first_moment_index.assign(static_cast<std::size_t>(n_vars), -1);
    for (int j = 0; j < n_vars; ++j) {
        auto it = b.index.find(Monomial{{j, 1}});
        if (it != b.index.end()) b.first_moment_index[static_cast<std::size_t>(j)] = it->second;
    }
    return b;
}

std::vector<std::vector<int>> moment_matrix_structure(const std::vector<int>& clique,
                                                      const MomentBasis& basis) {
    const auto mons = clique_monomials(clique, basis.omega);
    const std::size_t r = mons.size();
    std::vector<std::vector<int>> m(r, std::vector<int>(r));
    for (std::size_t a = 0; a < r; ++a)
        for (std::size_t bi = a; bi < r; ++bi) {
            int idx = basis.lookup(poly::monomial_mul(mons[a], mons[bi]));
            m[a][bi] = idx;
            m[bi][a] = idx;
        }
    return m;
}

std::vector<std::vector<LinearForm>> localizing_matrix_structure(const std::vector<int>& clique,
                                                                 const Polynomial& g,
                                                                 const MomentBasis& basis) {
    const int d = (g.degree() + 1) / 2;
    if (basis.omega < d)
        throw std::invalid_argument("localizing matrix needs omega >= ceil(deg(g)/2)");
    const auto mons = clique_monomials(clique, basis.omega - d);
    const std::size_t r = mons.size();
    std::vector<std::vector<LinearForm>> m(r, std::vector<LinearForm>(r));
    for (std::size_t a = 0; a < r; ++a)
        for (std::size_t bi = a; bi < r; ++bi) {
            LinearForm form;
            const Monomial ab = poly::monomial_mul(mons[a], mons[bi]);
            for (const auto& [gm, gc] : g.terms())
                form.emplace_back(basis.lookup(poly::monomial_mul(gm, ab)), gc);
            m[a][bi] = form;
            m[bi][a] = std::move(form);
        }
    return m;
}

MomentBasis basis_for(const discretize::Pop& pop, const sparsity::CliqueSet& cs, int omega) {
    int deg = 0;
    for (const auto& fe : pop.element_objectives) deg = std::max(deg, fe.degree());
    return build_moment_basis(cs, omega, pop.n_vars, deg);
}

SdpProblem assemble_sdp(const discretize::Pop& pop, const sparsity::CliqueSet& cs, int omega) {
    MomentBasis basis = basis_for(pop, cs, omega);
    SdpProblem p;
    p.n_moments = basis.size();
    p.normalization = basis.unit_index;
    p.objective.assign(static_cast<std::size_t>(p.n_moments), 0.0);

    // Riesz coefficients of Phi. Every monomial of f_e lives on the clique
    // the element is assigned to; elements with no free DOFs contribute a
    // constant through the normalization moment.
    for (std::size_t e = 0; e < pop.element_objectives.size(); ++e) {
        const auto& fe = pop.element_objectives[e];
        for (const auto& [m, c] : fe.terms())
            p.objective[static_cast<std::size_t>(basis.lookup(m))] += c;
    }

    // Moment blocks, by clique index.
    for (std::size_t k = 0; k < cs.cliques.size(); ++k) {
        const auto mons = clique_monomials(cs.cliques[k], omega);
        SdpBlock blk;
        blk.size = static_cast<int>(mons.size());
        blk.provenance = "moment clique " + std::to_string(k);
        for (std::size_t a = 0; a < mons.size(); ++a)
            for (std::size_t bi = a; bi < mons.size(); ++bi)
                blk.entries.push_back({static_cast<int>(a), static_cast<int>(bi),
                                       basis.lookup(poly::monomial_mul(mons[a], mons[bi])), 1.0});
        p.blocks.push_back(std::move(blk));
    }

    // Localizing blocks. Variables are rescaled so the feasible set is the
    // unit box / unit balls.
    auto add_localizing = [&](std::size_t k, const Polynomial& g, const std::string& tag) {
        const int d = (g.degree() + 1) / 2;
        const auto mons = clique_monomials(cs.cliques[k], omega - d);
        SdpBlock blk;
        blk.size = static_cast<int>(mons.size());
        blk.provenance = tag;
        for (std::size_t a = 0; a < mons.size(); ++a)
            for (std::size_t bi = a; bi < mons.size(); ++bi) {
                const Monomial ab = poly::monomial_mul(mons[a], mons[bi]);
                for (const auto& [gm, gc] : g.terms())
                    blk.entries.push_back({static_cast<int>(a), static_cast<int>(bi),
                                           basis.lookup(poly::monomial_mul(gm, ab)), gc});
            }
        p.blocks.push_back(std::move(blk));
    };

    if (pop.constraint_kind == discretize::ConstraintKind::PerDofBox) {
        for (std::size_t k = 0; k < cs.cliques.size(); ++k)
            for (int j : cs.cliques[k]) {
                Polynomial g(1.0);
                g -= Polynomial::variable(j) * Polynomial::variable(j);
                add_localizing(k, g, "loc clique " + std::to_string(k) + " var " +
                                         std::to_string(j));
            }
    } else {
        for (std::size_t e = 0; e < pop.element_vars.size(); ++e) {
            const int k = cs.element_assignment[e];
            if (k < 0) continue;
            Polynomial g(1.0);
            for (int j : pop.element_vars[e])
                g -= Polynomial::variable(j) * Polynomial::variable(j);
            add_localizing(static_cast<std::size_t>(k), g,
                           "loc clique " + std::to_string(k) + " elem " + std::to_string(e));
        }
    }
    return p;
}

std::vector<double> dirac_moments(const MomentBasis& basis, const std::vector<double>& t) {
    std::vector<double> y(static_cast<std::size_t>(basis.size()), 0.0);
    for (int i = 0; i < basis.size(); ++i) {
        double v = 1.0;
        for (const auto& [var, e] : basis.monomials[static_cast<std::size_t>(i)])
            v *= std::pow(t.at(static_cast<std::size_t>(var)), e);
        y[static_cast<std::size_t>(i)] = v;
    }
    return y;
}

std::string dump_sdp(const SdpProblem& p) {
    std::ostringstream os;
    os << "moments " << p.n_moments << "\n";
    os << "normalization " << p.normalization << "\n";
    os << "objective";
    for (std::size_t i = 0; i < p.objective.size(); ++i)
        if (p.objective[i] != 0.0) os << " " << i << ":" << p.objective[i];
    os << "\n";
    os << "blocks " << p.blocks.size() << "\n";
    for (const auto& b : p.blocks) {
        os << "block " << b.size << " " << b.provenance << "\n";
        for (const auto& t : b.entries)
            os << t.row << " " << t.col << " " << t.y_index << " " << t.coeff << "\n";
    }
    return os.str();
}

}  // namespace varimin::relax
