#pragma once

#include <Eigen/Dense>

#include "varimin/relax.hpp"

namespace varimin::sdpsolve {

struct SolverSettings {
    double eps_abs = 1e-6;
    double eps_rel = 1e-6;
    int max_iter = 200000;
    double rho = 1.0;            ///< initial ADMM penalty
    bool adaptive_rho = true;    ///< rebalance on primal/dual residual ratio
    double over_relaxation = 1.6;
    int check_interval = 25;     ///< residual/stopping check cadence
    int verbosity = 0;
};

/// Euclidean projection onto the PSD cone: eigendecomposition with negative
/// eigenvalues clipped to zero. Throws on non-finite entries.
Eigen::MatrixXd psd_project(const Eigen::MatrixXd& m);

struct Residuals {
    double affine_violation = 0.0;  ///< |y[normalization] - 1|
    double min_block_eig = 0.0;     ///< most negative block eigenvalue
    double objective = 0.0;
};

/// Exact recomputation from problem data, independent of solver internals.
Residuals residuals(const relax::SdpProblem& p, const std::vector<double>& y);

/// Operator-splitting solve: alternating projections onto the product of PSD
/// cones and the affine set, with dual updates. Deterministic for fixed
/// settings.
relax::SdpSolution solve(const relax::SdpProblem& p, const SolverSettings& s = {});

}  // namespace varimin::sdpsolve
