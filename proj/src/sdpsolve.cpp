#include "varimin/sdpsolve.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace varimin::sdpsolve {

using relax::SdpProblem;
using relax::SdpSolution;
using relax::SolveStatus;

Eigen::MatrixXd psd_project(const Eigen::MatrixXd& m) {
    if (!m.allFinite()) throw std::invalid_argument("psd_project: non-finite entries");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

Eigen::MatrixXd block_matrix(const relax::SdpBlock& b, const std::vector<double>& y) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(b.size, b.size);
    for (const auto& t : b.entries) {
        const double v = t.coeff * y[static_cast<std::size_t>(t.y_index)];
        m(t.row, t.col) += v;
        if (t.row != t.col) m(t.col, t.row) += v;
    }
    return m;
}

}  // namespace

Residuals residuals(const SdpProblem& p, const std::vector<double>& y) {
    if (static_cast<int>(y.size()) != p.n_moments)
        throw std::invalid_argument("residuals: moment vector length mismatch");
    Residuals r;
    r.affine_violation = std::abs(y[static_cast<std::size_t>(p.normalization)] - 1.0);
    r.min_block_eig = 0.0;
    for (const auto& b : p.blocks) {
        Eigen::MatrixXd m = block_matrix(b, y);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
        r.min_block_eig = std::min(r.min_block_eig, es.eigenvalues().minCoeff());
    }
    for (std::size_t i = 0; i < y.size(); ++i) r.objective += p.objective[i] * y[i];
    return r;
}

SdpSolution solve(const SdpProblem& p, const SolverSettings& s) {
    const auto t_start = std::chrono::steady_clock::now();
    const int M = p.n_moments;
    const int fixed = p.normalization;
    const double sqrt2 = std::sqrt(2.0);

    // svec offsets per block
    std::vector<int> offset(p.blocks.size() + 1, 0);
    for (std::size_t b = 0; b < p.blocks.size(); ++b)
        offset[b + 1] = offset[b] + p.blocks[b].size * (p.blocks[b].size + 1) / 2;
    const int rows = offset.back();

    // A y = svec(blocks); split off the pinned normalization column.
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd a_fixed = Eigen::VectorXd::Zero(rows);
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
        const int n = p.blocks[b].size;
        auto svec_row = [&](int r, int c) {
            // upper triangle (r <= c), column-major packing
            return offset[b] + c * (c + 1) / 2 + r;
        };
        for (const auto& t : p.blocks[b].entries) {
            const double v = (t.row == t.col) ? t.coeff : t.coeff * sqrt2;
            const int row = svec_row(t.row, t.col);
            if (t.y_index == fixed)
                a_fixed[row] += v;
            else
                trips.emplace_back(row, t.y_index, v);
        }
        (void)n;
    }
    Eigen::SparseMatrix<double> A(rows, M);
    A.setFromTriplets(trips.begin(), trips.end());
    // (the pinned column stays zero inside A)

    // Objective, scaled for conditioning; lambda is reported unscaled.
    Eigen::VectorXd c = Eigen::VectorXd::Zero(M);
    for (int i = 0; i < M; ++i) c[i] = p.objective[static_cast<std::size_t>(i)];
    double cscale = std::max(1.0, c.cwiseAbs().maxCoeff());
    Eigen::VectorXd ch = c / cscale;
    ch[fixed] = 0.0;

    // Normal-equations factorization, reused every iteration. The pinned
    // coordinate gets a unit diagonal so the system stays nonsingular.
    Eigen::SparseMatrix<double> G(M, M);
    G = Eigen::SparseMatrix<double>(A.transpose()) * A;
    for (int i = 0; i < M; ++i) G.coeffRef(i, i) += (i == fixed) ? 1.0 : 1e-12;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(G);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("sdpsolve: failed to factorize normal equations");

    Eigen::VectorXd y = Eigen::VectorXd::Zero(M);
    y[fixed] = 1.0;
    Eigen::VectorXd slack = Eigen::VectorXd::Zero(rows);   // s
    Eigen::VectorXd dual = Eigen::VectorXd::Zero(rows);    // scaled dual z
    Eigen::VectorXd Ay = a_fixed;
    double rho = s.rho;

    SdpSolution sol;
    sol.status = SolveStatus::MaxIter;

    auto unsvec_project = [&](Eigen::VectorXd& w) {
        for (std::size_t b = 0; b < p.blocks.size(); ++b) {
            const int n = p.blocks[b].size;
            Eigen::MatrixXd m(n, n);
            int idx = offset[b];
            for (int cc = 0; cc < n; ++cc)
                for (int rr = 0; rr <= cc; ++rr, ++idx) {
                    const double v = w[idx];
                    if (rr == cc) {
                        m(rr, cc) = v;
                    } else {
                        m(rr, cc) = v / sqrt2;
                        m(cc, rr) = v / sqrt2;
                    }
                }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
            Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
            Eigen::MatrixXd proj =
                es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
            idx = offset[b];
            for (int cc = 0; cc < n; ++cc)
                for (int rr = 0; rr <= cc; ++rr, ++idx)
                    w[idx] = (rr == cc) ? proj(rr, cc) : proj(rr, cc) * sqrt2;
        }
    };

    Eigen::VectorXd s_prev = slack;
    int it = 0;
    for (it = 1; it <= s.max_iter; ++it) {
        // y-update: argmin ch'y + rho/2 ||Ay + a_fixed - (s - z)||^2
        Eigen::VectorXd v = slack - dual - a_fixed;
        Eigen::VectorXd rhs = A.transpose() * v - ch / rho;
        rhs[fixed] = 1.0;
        y = ldlt.solve(rhs);
        y[fixed] = 1.0;
        Ay = A * y + a_fixed;

        // s-update with over-relaxation, then dual update
        Eigen::VectorXd Ay_rel = s.over_relaxation * Ay + (1.0 - s.over_relaxation) * slack;
        s_prev = slack;
        slack = Ay_rel + dual;
        unsvec_project(slack);
        dual += Ay_rel - slack;

        if (it % s.check_interval != 0 && it != s.max_iter) continue;

        const double prim = (Ay - slack).norm();
        const double dres = rho * (A.transpose() * (slack - s_prev)).norm();
        const double prim_tol = s.eps_abs * std::sqrt(static_cast<double>(rows)) +
                                s.eps_rel * std::max(Ay.norm(), slack.norm());
        const double dual_tol = s.eps_abs * std::sqrt(static_cast<double>(M)) +
                                s.eps_rel * rho * (A.transpose() * dual).norm();
        if (s.verbosity > 0 && it % (s.check_interval * 40) == 0)
            std::printf("  it %7d  prim %.3e  dual %.3e  rho %.2e  obj %.8f\n", it, prim, dres,
                        rho, cscale * ch.dot(y));
        if (prim <= prim_tol && dres <= dual_tol) {
            sol.status = SolveStatus::Optimal;
            break;
        }
        if (!y.allFinite() || y.norm() > 1e10) {
            sol.status = SolveStatus::InfeasibleDetected;
            break;
        }
        if (s.adaptive_rho) {
            if (prim > 10.0 * dres && rho < 1e6) {
                rho *= 2.0;
                dual *= 0.5;
            } else if (dres > 10.0 * prim && rho > 1e-6) {
                rho *= 0.5;
                dual *= 2.0;
            }
        }
    }

    sol.iterations = std::min(it, s.max_iter);
    sol.y.assign(y.data(), y.data() + M);
    Residuals r = residuals(p, sol.y);
    sol.lambda = r.objective;
    sol.affine_violation = r.affine_violation;
    sol.min_block_eig = r.min_block_eig;
    sol.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return sol;
}

}  // namespace sdpsolve

