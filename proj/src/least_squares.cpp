#include "wirelift/least_squares.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace wirelift {

namespace {

double rms_of(const Eigen::VectorXd& r)
{
    return r.size() == 0 ? 0.0 : std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
}

Eigen::VectorXd damped_step(const Eigen::MatrixXd& jac, const Eigen::VectorXd& r, double mu)
{
    if (jac.rows() < jac.cols()) {
        Eigen::MatrixXd a = jac * jac.transpose();
        a.diagonal().array() += mu;
        return -(jac.transpose() * a.ldlt().solve(r));
    }
    Eigen::MatrixXd a = jac.transpose() * jac;
    a.diagonal().array() += mu;
    return -a.ldlt().solve(jac.transpose() * r);
}

} // namespace

LeastSquaresResult minimize_least_squares(const ResidualFn& fn, Eigen::VectorXd x0, Eigen::Index rows,
                                          const LeastSquaresOptions& options)
{
    LeastSquaresResult out;
    const Eigen::Index cols = x0.size();
    Eigen::VectorXd r(rows);
    Eigen::MatrixXd jac(rows, cols);
    Eigen::VectorXd r_trial(rows);
    Eigen::MatrixXd jac_trial(rows, cols);

    Eigen::VectorXd x = std::move(x0);
    fn(x, r, jac);
    if (!r.allFinite() || !jac.allFinite()) {
        out.x = x;
        out.rms = std::numeric_limits<double>::infinity();
        out.failed = true;
        return out;
    }
    double cost = r.squaredNorm();
    double mu = 1e-3 * std::max(1.0, jac.cwiseAbs2().colwise().sum().maxCoeff());
    int stalled = 0;

    int iter = 0;
    for (; iter < options.max_iters; ++iter) {
        if (rms_of(r) < options.target_rms) {
            break;
        }
        bool accepted = false;
        while (!accepted) {
            const Eigen::VectorXd step = damped_step(jac, r, mu);
            if (!step.allFinite()) {
                mu *= 10.0;
            } else {
                const Eigen::VectorXd x_trial = x + step;
                fn(x_trial, r_trial, jac_trial);
                const double cost_trial = r_trial.allFinite() ? r_trial.squaredNorm() : INFINITY;
                if (cost_trial < cost) {
                    const double gain = (cost - cost_trial) / std::max(cost, 1e-300);
                    stalled = gain < options.stall_ratio ? stalled + 1 : 0;
                    x = x_trial;
                    r.swap(r_trial);
                    jac.swap(jac_trial);
                    cost = cost_trial;
                    mu = std::max(mu * 0.3, 1e-15);
                    accepted = true;
                } else {
                    mu *= 10.0;
                }
            }
            if (mu > 1e16) {
                break;
            }
        }
        if (!accepted || stalled >= options.stall_limit) {
            ++iter;
            break;
        }
    }

    out.x = std::move(x);
    out.rms = rms_of(r);
    out.iterations = iter;
    out.failed = !std::isfinite(out.rms);
    return out;
}

} // namespace wirelift
