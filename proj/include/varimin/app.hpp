#pragma once

#include <optional>
#include <string>
#include <vector>

#include "varimin/extract.hpp"
#include "varimin/gradflow.hpp"
#include "varimin/sdpsolve.hpp"

namespace varimin::app {

enum class CliqueStrategy { Element, ChordalRip };

/// Parsed problem specification: bracketed sections, key = value lines.
struct ProblemSpec {
    // [problem]
    int dim = 1;
    double half_length = 1.0;  ///< 1D domain half-length
    double lx = 0.5, ly = 0.5;  ///< 2D domain half-lengths
    std::string integrand;

    // [discretization]
    mesh::ElementKind element = mesh::ElementKind::P1Interval;
    int n_elements = 16;  ///< 1D element count, or 2D grid parameter k
    discretize::ConstraintKind bound_kind = discretize::ConstraintKind::PerDofBox;
    discretize::BoundRule bound_rule = discretize::BoundRule::OverH;
    double bound_c = 1.0;

    // [relaxation]
    int omega = 2;
    CliqueStrategy cliques = CliqueStrategy::Element;

    // [solver]
    double eps_abs = 1e-6;
    double eps_rel = 1e-6;
    int max_iter = 200000;

    // [outputs]
    std::string out_dir = "out";
    bool emit_plot = false;

    /// Effective configuration in the spec file format; re-parses to an
    /// identical spec.
    std::string to_string() const;

    bool operator==(const ProblemSpec&) const = default;
};

ProblemSpec parse_spec_text(const std::string& text);
ProblemSpec parse_spec(const std::string& path);

/// Everything built up to (but not including) the SDP solve.
struct Problem {
    ProblemSpec spec;
    poly::VarRegistry registry;
    discretize::FieldSymbols symbols;
    poly::Polynomial integrand;
    mesh::Mesh msh;
    discretize::DofMap dofmap;
    discretize::Pop pop;
    sparsity::CliqueSet cliques;
};

Problem build_problem(const ProblemSpec& spec);

struct PipelineResult {
    relax::SdpSolution solution;
    extract::ApproxMinimizer minimizer;
    extract::Report report;
    int n_moments = 0;
    double beta = 0.0;
    double t_assemble = 0.0, t_sparsity = 0.0, t_relax = 0.0, t_solve = 0.0, t_extract = 0.0;
    int exit_code = 0;  ///< 0 optimal, 2 max_iter
};

/// Full discretize -> sparsify -> relax -> solve -> extract pipeline.
/// When `out_dir` is non-empty, writes summary.json, dofs.csv and (1D, when
/// enabled) plot.svg there.
PipelineResult run_pipeline(const Problem& prob, const std::string& out_dir);

struct SweepCell {
    double h = 0.0;
    int mesh_n = 0;
    int omega = 0;
    std::optional<double> lambda;  ///< nullopt on failure (recorded as NA)
    double wall_time = 0.0;
};

/// Table of lambda over (mesh size, omega); rows written to sweep.csv in
/// out_dir when non-empty.
std::vector<SweepCell> sweep(const ProblemSpec& spec, const std::vector<int>& omegas,
                             const std::vector<int>& mesh_ns, const std::string& out_dir);

struct GradFlowSummary {
    std::vector<double> steady_energies;   ///< one per run, flow endpoint
    std::vector<double> distinct_energies; ///< deduplicated at 1e-4 relative
    int runs_converged = 0;
};

GradFlowSummary run_gradflow(const Problem& prob, int runs, unsigned seed, double dt, double tol,
                             int max_steps, const std::string& out_dir);

std::string summary_json(const Problem& prob, const PipelineResult& res);
void write_dofs_csv(const Problem& prob, const std::vector<double>& dofs,
                    const std::string& path);
void write_line_plot_svg(const extract::ApproxMinimizer& m, const std::string& path,
                         int samples = 600);

}  // namespace varimin::app
