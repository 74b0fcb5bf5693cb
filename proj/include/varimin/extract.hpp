#pragma once

#include <string>
#include <vector>

#include "varimin/discretize.hpp"
#include "varimin/relax.hpp"

namespace varimin::extract {

/// FE function built from the first moments of an SDP solution, with its
/// energy and the relaxation lower bound.
struct ApproxMinimizer {
    std::vector<double> dofs;  ///< unscaled, saturated into the feasible set
    double energy = 0.0;       ///< Phi(dofs)
    double lambda = 0.0;       ///< SDP lower bound
    bool gap_warning = false;  ///< energy - lambda above the gap threshold
    const discretize::DofMap* dofmap = nullptr;
    const mesh::Mesh* mesh_ptr = nullptr;
    mesh::ElementKind kind = mesh::ElementKind::P1Interval;
};

/// Reads first moments, unscales, saturates, evaluates the energy. The gap
/// warning threshold defaults to 5% of max(1, |lambda|).
ApproxMinimizer extract_minimizer(const relax::SdpSolution& sol, const relax::MomentBasis& basis,
                                  const discretize::Pop& pop, const discretize::DofMap& dm,
                                  const mesh::Mesh& m, mesh::ElementKind kind,
                                  double gap_fraction = 0.05);

struct SampleValue {
    double value = 0.0;
    std::array<double, 2> gradient{0.0, 0.0};  ///< where the kind supports it
};

/// Evaluates the reconstructed FE function (and first derivatives where the
/// element kind carries them) at a point inside the domain closure.
SampleValue sample_function(const ApproxMinimizer& m, double x, double y = 0.0);

struct Report {
    double lambda = 0.0;
    double energy = 0.0;
    double gap = 0.0;
    bool gap_warning = false;
    bool separable_convex = false;  ///< no mixed u-derivative terms, convex
                                    ///< quadratic derivative part
    int clique_count = 0;
    int clique_max_size = 0;
    double clique_avg_size = 0.0;
};

Report optimality_report(const ApproxMinimizer& m, const sparsity::CliqueSet& cs,
                         const poly::Polynomial& integrand, const discretize::FieldSymbols& sym);

/// Counts local maxima of the reconstructed 1D function exceeding
/// `amplitude_fraction` of the global max, on a uniform sampling grid.
int count_peaks(const ApproxMinimizer& m, int samples = 2000, double amplitude_fraction = 0.25);

}  // namespace varimin::extract
