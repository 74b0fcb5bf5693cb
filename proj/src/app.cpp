#include "varimin/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace varimin::app {

namespace {

using json = nlohmann::ordered_json;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw std::runtime_error("spec line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

double parse_double(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(line, "expected a number, got '" + v + "'");
    }
}

int parse_int(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const int i = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        fail(line, "expected an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, int line) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail(line, "expected true or false, got '" + v + "'");
}

struct KindNames {
    mesh::ElementKind kind;
    const char* spec_name;
};

mesh::ElementKind element_from_name(const std::string& name, int dim, int line) {
    if (name == "p1") return dim == 1 ? mesh::ElementKind::P1Interval : mesh::ElementKind::P1Triangle;
    if (name == "hermite") {
        if (dim != 1) fail(line, "element 'hermite' requires dim = 1");
        return mesh::ElementKind::HermiteInterval;
    }
    fail(line, "unknown element '" + name + "' (expected p1 or hermite)");
}

std::string element_name(mesh::ElementKind k) {
    return k == mesh::ElementKind::HermiteInterval ? "hermite" : "p1";
}

void validate(const ProblemSpec& spec) {
    if (spec.dim != 1 && spec.dim != 2) throw std::runtime_error("spec: dim must be 1 or 2");
    if (spec.n_elements < 1) throw std::runtime_error("spec: n_elements must be positive");
    if (spec.bound_c <= 0) throw std::runtime_error("spec: bound_c must be positive");
    if (spec.omega < 1) throw std::runtime_error("spec: omega must be at least 1");
    if (spec.integrand.empty()) throw std::runtime_error("spec: integrand is required");
    const auto info = mesh::element_kind_info(spec.element);
    if (info.dim != spec.dim) throw std::runtime_error("spec: element kind does not match dim");

    // The integrand must only use symbols the element kind can represent.
    poly::VarRegistry full;
    std::vector<std::string> all_names{"x", "y", "u", "ux", "uy", "uxx"};
    for (const auto& n : all_names) full.declare(n);
    poly::Polynomial p = poly::parse_polynomial(spec.integrand, full);

    poly::VarRegistry supported_reg;
    auto sym = discretize::FieldSymbols::declare(supported_reg, spec.element);
    (void)sym;
    for (poly::VarId v : p.variables()) {
        const std::string& n = full.name(v);
        if (!supported_reg.find(n))
            throw std::runtime_error("spec: integrand uses symbol '" + n +
                                     "' unsupported by element '" + element_name(spec.element) +
                                     "'");
    }
}

}  // namespace

std::string ProblemSpec::to_string() const {
    std::ostringstream os;
    os << "[problem]\n";
    os << "dim = " << dim << "\n";
    if (dim == 1) {
        os << "half_length = " << fmt_double(half_length) << "\n";
    } else {
        os << "lx = " << fmt_double(lx) << "\n";
        os << "ly = " << fmt_double(ly) << "\n";
    }
    os << "integrand = \"" << integrand << "\"\n\n";
    os << "[discretization]\n";
    os << "element = " << element_name(element) << "\n";
    os << "n_elements = " << n_elements << "\n";
    os << "bound_kind = "
       << (bound_kind == discretize::ConstraintKind::PerDofBox ? "box" : "ball") << "\n";
    os << "bound_rule = " << (bound_rule == discretize::BoundRule::OverH ? "over_h" : "const")
       << "\n";
    os << "bound_c = " << fmt_double(bound_c) << "\n\n";
    os << "[relaxation]\n";
    os << "omega = " << omega << "\n";
    os << "cliques = " << (cliques == CliqueStrategy::Element ? "element" : "chordal-rip")
       << "\n\n";
    os << "[solver]\n";
    os << "eps_abs = " << fmt_double(eps_abs) << "\n";
    os << "eps_rel = " << fmt_double(eps_rel) << "\n";
    os << "max_iter = " << max_iter << "\n\n";
    os << "[outputs]\n";
    os << "dir = \"" << out_dir << "\"\n";
    os << "plot = " << (emit_plot ? "true" : "false") << "\n";
    return os.str();
}

ProblemSpec parse_spec_text(const std::string& text) {
    ProblemSpec spec;
    std::istringstream is(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        // Strip comments, respecting quoted strings.
        bool in_quotes = false;
        std::string s;
        for (char c : raw) {
            if (c == '"') in_quotes = !in_quotes;
            if (c == '#' && !in_quotes) break;
            s.push_back(c);
        }
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated section header");
            section = s.substr(1, s.size() - 2);
            if (section != "problem" && section != "discretization" && section != "relaxation" &&
                section != "solver" && section != "outputs")
                fail(line, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = unquote(trim(s.substr(eq + 1)));
        if (section.empty()) fail(line, "key '" + key + "' outside any section");

        if (section == "problem") {
            if (key == "dim") spec.dim = parse_int(val, line);
            else if (key == "half_length") spec.half_length = parse_double(val, line);
            else if (key == "lx") spec.lx = parse_double(val, line);
            else if (key == "ly") spec.ly = parse_double(val, line);
            else if (key == "integrand") spec.integrand = val;
            else fail(line, "unknown key '" + key + "' in [problem]");
        } else if (section == "discretization") {
            if (key == "element") spec.element = element_from_name(val, spec.dim, line);
            else if (key == "n_elements") spec.n_elements = parse_int(val, line);
            else if (key == "bound_kind") {
                if (val == "box") spec.bound_kind = discretize::ConstraintKind::PerDofBox;
                else if (val == "ball") spec.bound_kind = discretize::ConstraintKind::PerElementBall;
                else fail(line, "bound_kind must be box or ball");
            } else if (key == "bound_rule") {
                if (val == "over_h") spec.bound_rule = discretize::BoundRule::OverH;
                else if (val == "const") spec.bound_rule = discretize::BoundRule::Constant;
                else fail(line, "bound_rule must be over_h or const");
            } else if (key == "bound_c") spec.bound_c = parse_double(val, line);
            else fail(line, "unknown key '" + key + "' in [discretization]");
        } else if (section == "relaxation") {
            if (key == "omega") spec.omega = parse_int(val, line);
            else if (key == "cliques") {
                if (val == "element") spec.cliques = CliqueStrategy::Element;
                else if (val == "chordal-rip") spec.cliques = CliqueStrategy::ChordalRip;
                else fail(line, "cliques must be element or chordal-rip");
            } else fail(line, "unknown key '" + key + "' in [relaxation]");
        } else if (section == "solver") {
            if (key == "eps_abs") spec.eps_abs = parse_double(val, line);
            else if (key == "eps_rel") spec.eps_rel = parse_double(val, line);
            else if (key == "max_iter") spec.max_iter = parse_int(val, line);
            else fail(line, "unknown key '" + key + "' in [solver]");
        } else {
            if (key == "dir") spec.out_dir = val;
            else if (key == "plot") spec.emit_plot = parse_bool(val, line);
            else fail(line, "unknown key '" + key + "' in [outputs]");
        }
    }
    validate(spec);
    return spec;
}

ProblemSpec parse_spec(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open spec file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return parse_spec_text(os.str());
}

Problem build_problem(const ProblemSpec& spec) {
    Problem p;
    p.spec = spec;
    p.symbols = discretize::FieldSymbols::declare(p.registry, spec.element);
    p.integrand = poly::parse_polynomial(spec.integrand, p.registry);
    p.msh = spec.dim == 1 ? mesh::build_interval_mesh(spec.half_length, spec.n_elements)
                          : mesh::build_rect_mesh(spec.lx, spec.ly, spec.n_elements);
    p.dofmap = discretize::build_dof_map(p.msh, spec.element);
    auto f_list =
        discretize::assemble_element_objectives(p.integrand, p.msh, p.dofmap, spec.element,
                                                p.symbols);
    p.pop = discretize::build_pop(f_list, p.dofmap, spec.bound_kind, spec.bound_rule, spec.bound_c,
                                  p.msh);
    p.cliques = spec.cliques == CliqueStrategy::Element ? sparsity::element_cliques(p.dofmap)
                                                        : sparsity::chordal_rip_cliques(p.pop);
    return p;
}

PipelineResult run_pipeline(const Problem& prob, const std::string& out_dir) {
    PipelineResult res;
    res.beta = prob.pop.bound;

    double t0 = now_seconds();
    relax::MomentBasis basis = relax::basis_for(prob.pop, prob.cliques, prob.spec.omega);
    relax::SdpProblem sdp = relax::assemble_sdp(prob.pop, prob.cliques, prob.spec.omega);
    res.n_moments = sdp.n_moments;
    res.t_relax = now_seconds() - t0;

    sdpsolve::SolverSettings settings;
    settings.eps_abs = prob.spec.eps_abs;
    settings.eps_rel = prob.spec.eps_rel;
    settings.max_iter = prob.spec.max_iter;
    t0 = now_seconds();
    res.solution = sdpsolve::solve(sdp, settings);
    res.t_solve = now_seconds() - t0;

    t0 = now_seconds();
    res.minimizer = extract::extract_minimizer(res.solution, basis, prob.pop, prob.dofmap,
                                               prob.msh, prob.spec.element);
    res.report = extract::optimality_report(res.minimizer, prob.cliques, prob.integrand,
                                            prob.symbols);
    res.t_extract = now_seconds() - t0;

    res.exit_code = res.solution.status == relax::SolveStatus::Optimal ? 0 : 2;

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(out_dir + "/summary.json") << summary_json(prob, res) << "\n";
        write_dofs_csv(prob, res.minimizer.dofs, out_dir + "/dofs.csv");
        if (prob.spec.dim == 1 && prob.spec.emit_plot)
            write_line_plot_svg(res.minimizer, out_dir + "/plot.svg");
    }
    return res;
}

std::string summary_json(const Problem& prob, const PipelineResult& res) {
    json j;
    j["lambda"] = res.solution.lambda;
    j["energy"] = res.minimizer.energy;
    j["gap"] = res.report.gap;
    j["gap_warning"] = res.report.gap_warning;
    j["separable_convex"] = res.report.separable_convex;
    j["problem"] = {
        {"dim", prob.spec.dim},
        {"element", prob.spec.element == mesh::ElementKind::HermiteInterval ? "hermite" : "p1"},
        {"n_elements", static_cast<int>(prob.msh.elements.size())},
        {"h", prob.msh.h},
        {"n_dofs", prob.dofmap.n_dofs},
        {"beta", res.beta},
        {"omega", prob.spec.omega},
        {"n_moments", res.n_moments},
    };
    j["cliques"] = {
        {"strategy", prob.spec.cliques == CliqueStrategy::Element ? "element" : "chordal-rip"},
        {"count", res.report.clique_count},
        {"max_size", res.report.clique_max_size},
        {"avg_size", res.report.clique_avg_size},
        {"rip", prob.cliques.rip_ordering.has_value()},
    };
    const char* status = res.solution.status == relax::SolveStatus::Optimal ? "optimal"
                         : res.solution.status == relax::SolveStatus::MaxIter ? "max_iter"
                                                                              : "infeasible";
    j["solver"] = {
        {"status", status},
        {"iterations", res.solution.iterations},
        {"affine_violation", res.solution.affine_violation},
        {"min_block_eig", res.solution.min_block_eig},
    };
    j["timings"] = {
        {"relax", res.t_relax},
        {"solve", res.t_solve},
        {"extract", res.t_extract},
    };
    j["exit_code"] = res.exit_code;
    return j.dump(2);
}

void write_dofs_csv(const Problem& prob, const std::vector<double>& dofs,
                    const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << (prob.spec.dim == 1 ? "dof_index,x,deriv_tag,value\n" : "dof_index,x,y,deriv_tag,value\n");
    for (std::size_t j = 0; j < dofs.size(); ++j) {
        f << j << "," << fmt_double(prob.dofmap.dof_coords[j][0]);
        if (prob.spec.dim == 2) f << "," << fmt_double(prob.dofmap.dof_coords[j][1]);
        f << "," << prob.dofmap.dof_deriv[j] << "," << fmt_double(dofs[j]) << "\n";
    }
}

void write_line_plot_svg(const extract::ApproxMinimizer& m, const std::string& path,
                         int samples) {
    const mesh::Mesh& msh = *m.mesh_ptr;
    const double x0 = msh.vertices.front()[0];
    const double x1 = msh.vertices.back()[0];
    std::vector<double> xs(static_cast<std::size_t>(samples)), vs(static_cast<std::size_t>(samples));
    double vmin = 0.0, vmax = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = x0 + (x1 - x0) * i / (samples - 1);
        xs[static_cast<std::size_t>(i)] = x;
        const double v = extract::sample_function(m, x).value;
        vs[static_cast<std::size_t>(i)] = v;
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (vmax - vmin < 1e-12) vmax = vmin + 1.0;
    const double W = 720, H = 360, pad = 40;
    auto px = [&](double x) { return pad + (W - 2 * pad) * (x - x0) / (x1 - x0); };
    auto py = [&](double v) { return H - pad - (H - 2 * pad) * (v - vmin) / (vmax - vmin); };
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (vmin < 0 && vmax > 0)
        f << "<line x1=\"" << px(x0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(x1) << "\" y2=\""
          << py(0) << "\" stroke=\"#bbb\"/>\n";
    f << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i < samples; ++i)
        f << px(xs[static_cast<std::size_t>(i)]) << "," << py(vs[static_cast<std::size_t>(i)])
          << " ";
    f << "\"/>\n";
    f << "<text x=\"" << pad << "\" y=\"" << pad - 12 << "\" font-size=\"12\">u(x), ["
      << fmt_double(vmin) << ", " << fmt_double(vmax) << "]</text>\n";
    f << "</svg>\n";
}

std::vector<SweepCell> sweep(const ProblemSpec& spec, const std::vector<int>& omegas,
                             const std::vector<int>& mesh_ns, const std::string& out_dir) {
    if (omegas.empty() || mesh_ns.empty())
        throw std::invalid_argument("sweep: omega and mesh lists must be non-empty");
    std::vector<SweepCell> cells;
    for (int n : mesh_ns) {
        ProblemSpec cell_spec = spec;
        cell_spec.n_elements = n;
        for (int w : omegas) {
            cell_spec.omega = w;
            SweepCell cell;
            cell.mesh_n = n;
            cell.omega = w;
            const double t0 = now_seconds();
            try {
                Problem prob = build_problem(cell_spec);
                cell.h = prob.msh.h;
                PipelineResult res = run_pipeline(prob, "");
                cell.lambda = res.solution.lambda;
            } catch (const std::exception&) {
                cell.lambda = std::nullopt;
            }
            cell.wall_time = now_seconds() - t0;
            cells.push_back(cell);
        }
    }
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream f(out_dir + "/sweep.csv");
        f << "h,mesh_n";
        for (int w : omegas) f << ",lambda_omega" << w << ",time_omega" << w;
        f << "\n";
        std::size_t i = 0;
        for (int n : mesh_ns) {
            f << fmt_double(cells[i].h) << "," << n;
            for (std::size_t k = 0; k < omegas.size(); ++k, ++i) {
                if (cells[i].lambda) f << "," << fmt_double(*cells[i].lambda);
                else f << ",NA";
                f << "," << fmt_double(cells[i].wall_time);
            }
            f << "\n";
        }
    }
    return cells;
}

GradFlowSummary run_gradflow(const Problem& prob, int runs, unsigned seed, double dt, double tol,
                             int max_steps, const std::string& out_dir) {
    gradflow::GradientFlow flow(prob.pop, prob.dofmap, prob.msh, prob.spec.element, dt);
    GradFlowSummary out;
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    for (int r = 0; r < runs; ++r) {
        auto u0 = flow.random_initial(seed + static_cast<unsigned>(r));
        auto steady = flow.run_to_steady(std::move(u0), tol, max_steps);
        out.steady_energies.push_back(steady.energy);
        if (steady.converged) ++out.runs_converged;
        if (!out_dir.empty()) {
            char name[32];
            std::snprintf(name, sizeof name, "run_%03d.csv", r);
            write_dofs_csv(prob, steady.dofs, out_dir + "/" + name);
        }
    }
    std::vector<double> sorted = out.steady_energies;
    std::sort(sorted.begin(), sorted.end());
    for (double e : sorted) {
        if (out.distinct_energies.empty() ||
            std::abs(e - out.distinct_energies.back()) > 1e-4 * std::max(1.0, std::abs(e)))
            out.distinct_energies.push_back(e);
    }
    if (!out_dir.empty()) {
        json j;
        j["runs"] = runs;
        j["seed"] = seed;
        j["dt"] = dt;
        j["runs_converged"] = out.runs_converged;
        j["distinct_steady_energies"] = out.distinct_energies;
        std::ofstream(out_dir + "/gradflow.json") << j.dump(2) << "\n";
    }
    return out;
}

}  // namespace varimin::app
