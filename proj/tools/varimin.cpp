#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "varimin/app.hpp"

using namespace varimin;

int main(int argc, char** argv) {
    CLI::App cli{"Global minimization of integral functionals via sparse moment relaxations"};
    cli.require_subcommand(1);

    std::string spec_path, out_dir;
    int omega_override = -1, mesh_override = -1;

    auto* solve = cli.add_subcommand("solve", "Run the full relaxation pipeline on a spec");
    solve->add_option("spec", spec_path, "Problem spec file")->required();
    solve->add_option("--omega", omega_override, "Override relaxation order");
    solve->add_option("--mesh-n", mesh_override, "Override mesh element count");
    solve->add_option("--out", out_dir, "Output directory (default from spec)");

    std::vector<int> omegas, mesh_ns;
    auto* sweep_cmd = cli.add_subcommand("sweep", "Lambda table over mesh sizes and orders");
    sweep_cmd->add_option("spec", spec_path, "Problem spec file")->required();
    sweep_cmd->add_option("--omegas", omegas, "Relaxation orders")->required()->delimiter(',');
    sweep_cmd->add_option("--mesh-ns", mesh_ns, "Mesh element counts")->required()->delimiter(',');
    sweep_cmd->add_option("--out", out_dir, "Output directory (default from spec)");

    int runs = 100;
    unsigned seed = 1;
    double dt = -1.0, flow_tol = 1e-7;
    int flow_steps = 200000;
    auto* gf = cli.add_subcommand("gradflow", "Gradient-flow baseline from random initial data");
    gf->add_option("spec", spec_path, "Problem spec file")->required();
    gf->add_option("--runs", runs, "Number of random initial conditions");
    gf->add_option("--seed", seed, "Base RNG seed");
    gf->add_option("--dt", dt, "Time step (default 1e-2 in 1D, 1e-3 in 2D)");
    gf->add_option("--tol", flow_tol, "Steady-state residual tolerance");
    gf->add_option("--max-steps", flow_steps, "Step cap per run");
    gf->add_option("--out", out_dir, "Output directory (default from spec)");

    auto* rip = cli.add_subcommand("check-rip", "Report clique statistics and the RIP check");
    rip->add_option("spec", spec_path, "Problem spec file")->required();

    CLI11_PARSE(cli, argc, argv);

    try {
        app::ProblemSpec spec = app::parse_spec(spec_path);
        if (omega_override > 0) spec.omega = omega_override;
        if (mesh_override > 0) spec.n_elements = mesh_override;
        if (!out_dir.empty()) spec.out_dir = out_dir;

        if (solve->parsed()) {
            app::Problem prob = app::build_problem(spec);
            app::PipelineResult res = app::run_pipeline(prob, spec.out_dir);
            std::cout << app::summary_json(prob, res) << "\n";
            if (res.exit_code == 2)
                std::cerr << "warning: solver hit the iteration cap; lambda is approximate\n";
            return res.exit_code;
        }
        if (sweep_cmd->parsed()) {
            auto cells = app::sweep(spec, omegas, mesh_ns, spec.out_dir);
            std::printf("%10s %8s %6s %14s %10s\n", "h", "mesh_n", "omega", "lambda", "time[s]");
            for (const auto& c : cells) {
                if (c.lambda)
                    std::printf("%10.4g %8d %6d %14.6f %10.2f\n", c.h, c.mesh_n, c.omega,
                                *c.lambda, c.wall_time);
                else
                    std::printf("%10.4g %8d %6d %14s %10.2f\n", c.h, c.mesh_n, c.omega, "NA",
                                c.wall_time);
            }
            return 0;
        }
        if (gf->parsed()) {
            if (dt <= 0) dt = spec.dim == 1 ? 1e-2 : 1e-3;
            app::Problem prob = app::build_problem(spec);
            auto summary = app::run_gradflow(prob, runs, seed, dt, flow_tol, flow_steps,
                                             spec.out_dir);
            std::cout << "runs: " << runs << "  converged: " << summary.runs_converged
                      << "  seed: " << seed << "\n";
            std::cout << "distinct steady energies:\n";
            for (double e : summary.distinct_energies) std::printf("  %.8f\n", e);
            return 0;
        }
        // check-rip
        app::Problem prob = app::build_problem(spec);
        const auto& cs = prob.cliques;
        std::cout << "cliques: " << cs.cliques.size() << "  max size: " << cs.max_size()
                  << "  avg size: " << cs.avg_size() << "\n";
        auto order = sparsity::check_rip(cs.cliques);
        if (order) {
            std::cout << "running intersection property: satisfied\nordering:";
            for (int i : *order) std::cout << " " << i;
            std::cout << "\n";
        } else {
            std::cout << "running intersection property: NOT satisfied\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
