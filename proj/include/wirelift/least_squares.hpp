#pragma once

#include <Eigen/Core>

#include <functional>

namespace wirelift {

// Residual callback: fills r (size rows) and J (rows x cols) at x.
using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd& jac)>;

struct LeastSquaresOptions {
    int max_iters = 200;
    // Stop as soon as the RMS residual drops below this.
    double target_rms = 1e-12;
    // Stop when an accepted step improves the cost by less than this
    // fraction for `stall_limit` consecutive iterations.
    double stall_ratio = 1e-9;
    int stall_limit = 6;
};

struct LeastSquaresResult {
    Eigen::VectorXd x;
    double rms = 0.0;
    int iterations = 0;
    // Non-finite residuals or an unrecoverable step.
    bool failed = false;
};

// Levenberg-Marquardt minimisation of 0.5 |r(x)|^2 from x0. Underdetermined
// problems take the minimum-norm damped step (J^T (J J^T + mu I)^-1 r), so
// warm starts move as little as possible.
LeastSquaresResult minimize_least_squares(const ResidualFn& fn, Eigen::VectorXd x0, Eigen::Index rows,
                                          const LeastSquaresOptions& options = {});

} // namespace wirelift
