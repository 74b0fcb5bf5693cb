#pragma once

#include <map>
#include <string>
#include <vector>

#include "varimin/discretize.hpp"
#include "varimin/sparsity.hpp"

namespace varimin::relax {

/// Bijection between canonical exponent keys supported on single cliques
/// (degree <= 2*omega) and dense moment-variable indices. Indices are
/// assigned clique by clique, graded-lex within each clique, first
/// occurrence wins, so monomials shared by overlapping cliques get one index.
struct MomentBasis {
    int omega = 0;
    std::map<poly::Monomial, int> index;
    std::vector<poly::Monomial> monomials;  ///< inverse of index
    int unit_index = -1;
    std::vector<int> first_moment_index;  ///< per POP variable, index of e_j

    int size() const { return static_cast<int>(monomials.size()); }
    int lookup(const poly::Monomial& m) const;
};

MomentBasis build_moment_basis(const sparsity::CliqueSet& cs, int omega, int n_vars,
                               int objective_degree = 2);

/// Monomials of total degree <= max_degree in `vars`, graded-lex.
std::vector<poly::Monomial> clique_monomials(const std::vector<int>& vars, int max_degree);

/// Symbolic moment matrix: entry (a,b) is the moment index of
/// monomial_a * monomial_b.
std::vector<std::vector<int>> moment_matrix_structure(const std::vector<int>& clique,
                                                      const MomentBasis& basis);

/// Entry of a localizing matrix: sparse linear form in y.
using LinearForm = std::vector<std::pair<int, double>>;

std::vector<std::vector<LinearForm>> localizing_matrix_structure(const std::vector<int>& clique,
                                                                 const poly::Polynomial& g,
                                                                 const MomentBasis& basis);

struct BlockTriplet {
    int row, col;   ///< row <= col; symmetric counterpart implicit
    int y_index;
    double coeff;
};

struct SdpBlock {
    int size = 0;
    std::vector<BlockTriplet> entries;  ///< S(y)_rc = sum coeff * y[y_index]
    std::string provenance;
};

/// Block LMI program: minimize c . y subject to every block PSD and
/// y[normalization] = 1.
struct SdpProblem {
    int n_moments = 0;
    std::vector<double> objective;  ///< dense c
    std::vector<SdpBlock> blocks;
    int normalization = -1;
};

enum class SolveStatus { Optimal, MaxIter, InfeasibleDetected };

struct SdpSolution {
    SolveStatus status = SolveStatus::MaxIter;
    double lambda = 0.0;      ///< objective value
    std::vector<double> y;    ///< moment vector
    double affine_violation = 0.0;
    double min_block_eig = 0.0;
    int iterations = 0;
    double wall_time = 0.0;
};

SdpProblem assemble_sdp(const discretize::Pop& pop, const sparsity::CliqueSet& cs, int omega);

/// Moment vector of a Dirac measure at a (scaled) feasible point.
std::vector<double> dirac_moments(const MomentBasis& basis, const std::vector<double>& t);

/// Moment basis used by assemble_sdp for the same inputs (needed to read
/// first moments out of a solution).
MomentBasis basis_for(const discretize::Pop& pop, const sparsity::CliqueSet& cs, int omega);

/// Documented sparse text dump of the assembled SDP for external
/// cross-checking.
std::string dump_sdp(const SdpProblem& p);

}  // namespace varimin::relax
