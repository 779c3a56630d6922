#include "wirelift/selector.hpp"

#include "wirelift/least_squares.hpp"
#include "wirelift/random.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace wirelift {

SelectionState::SelectionState(int n, DepthVector z0, std::uint64_t seed)
    : num_vars(n), z_est(std::move(z0)), rng_seed(seed)
{
    matching.eq_of_var.assign(static_cast<std::size_t>(n), -1);
}

void SelectionState::accept(ResidualEquation eq, Matching m, DepthVector z)
{
    accepted.push_back(std::move(eq));
    matching = std::move(m);
    z_est = std::move(z);
    assert(accepted.size() <= static_cast<std::size_t>(num_vars));
    assert(matching.var_of_eq.size() == accepted.size());
}

std::optional<Matching> augment_matching(const SelectionState& state, const ResidualEquation& eq)
{
    if (state.accepted.size() >= static_cast<std::size_t>(state.num_vars)) {
        return std::nullopt;
    }
    Matching m = state.matching;
    const int new_slot = static_cast<int>(state.accepted.size());
    m.var_of_eq.push_back(-1);
    std::vector<char> visited(static_cast<std::size_t>(state.num_vars), 0);

    auto vars_of = [&](int slot) -> const std::vector<int>& {
        return slot == new_slot ? eq.vars() : state.accepted[slot].vars();
    };
    std::function<bool(int)> try_slot = [&](int slot) {
        for (int v : vars_of(slot)) {
            if (visited[v]) {
                continue;
            }
            visited[v] = 1;
            if (m.eq_of_var[v] < 0 || try_slot(m.eq_of_var[v])) {
                m.eq_of_var[v] = slot;
                m.var_of_eq[slot] = v;
                return true;
            }
        }
        return false;
    };
    if (!try_slot(new_slot)) {
        return std::nullopt;
    }
    return m;
}

bool check_structural(const SelectionState& state, const ResidualEquation& eq)
{
    return augment_matching(state, eq).has_value();
}

ConsistencyResult check_consistent(const SelectionState& state, const ResidualEquation& eq, const SelectorConfig& cfg)
{
    const auto rows = static_cast<Eigen::Index>(state.accepted.size() + 1);
    auto residuals = [&](const Eigen::VectorXd& z, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        jac.setZero();
        for (Eigen::Index k = 0; k < rows; ++k) {
            const ResidualEquation& e = k + 1 == rows ? eq : state.accepted[static_cast<std::size_t>(k)];
            r[k] = e.value(z) / e.scale;
            e.add_gradient(z, jac.row(k), 1.0 / e.scale);
        }
    };
    LeastSquaresOptions opts;
    opts.max_iters = cfg.max_ls_iters;
    opts.target_rms = 1e-14;
    const LeastSquaresResult ls = minimize_least_squares(residuals, state.z_est, rows, opts);
    ConsistencyResult out;
    out.z = ls.x;
    out.rms = ls.rms;
    out.consistent = !ls.failed && ls.rms < cfg.eps_cons && ls.x.minCoeff() > cfg.min_depth_ratio * ls.x.maxCoeff();
    return out;
}

namespace {

// |diag(R)| of the QR of the row-normalised gradients of accepted + eq at z,
// eq last. Empty when eq's gradient vanishes.
Eigen::VectorXd stacked_pivots(const SelectionState& state, const ResidualEquation& eq, const DepthVector& z)
{
    const auto k = static_cast<Eigen::Index>(state.accepted.size());
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(state.num_vars, k + 1);
    for (Eigen::Index i = 0; i <= k; ++i) {
        const ResidualEquation& e = i == k ? eq : state.accepted[static_cast<std::size_t>(i)];
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(state.num_vars);
        e.add_gradient(z, row);
        const double norm = row.norm();
        if (i == k && row.cwiseAbs().maxCoeff() < 1e-14) {
            return {};
        }
        if (norm > 0.0) {
            row /= norm;
        }
        cols.col(i) = row.transpose();
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(cols);
    return qr.matrixQR().diagonal().head(k + 1).cwiseAbs();
}

} // namespace

double redundancy_measure(const SelectionState& state, const ResidualEquation& eq, const DepthVector& z)
{
    const Eigen::VectorXd pivots = stacked_pivots(state, eq, z);
    return pivots.size() == 0 ? 0.0 : pivots[pivots.size() - 1];
}

bool check_not_redundant(const SelectionState& state, const ResidualEquation& eq, const DepthVector& z,
                         const SelectorConfig& cfg, double ls_rms)
{
    if (state.accepted.size() >= static_cast<std::size_t>(state.num_vars)) {
        return false;
    }
    // The accepted rows moved with z, so all of them must stay independent.
    const Eigen::VectorXd pivots = stacked_pivots(state, eq, z);
    return pivots.size() > 0 && pivots.minCoeff() >= std::max(cfg.eps_qr, cfg.qr_noise * std::sqrt(ls_rms));
}

SelectionResult select_in_order(const std::vector<ConstraintCandidate>& cands, const std::vector<int>& order,
                                const LineDrawing& d, const DepthVector& z0, const SelectorConfig& cfg)
{
    int anchor = -1;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (cands[i].kind == ConstraintKind::Anchor) {
            if (anchor >= 0) {
                throw std::invalid_argument("select_constraints: more than one anchor in the pool");
            }
            anchor = static_cast<int>(i);
        }
    }
    if (anchor < 0) {
        throw std::invalid_argument("select_constraints: pool has no anchor");
    }
    if (static_cast<std::size_t>(z0.size()) != d.vertices.size() || !(z0.array() > 0.0).all()) {
        throw std::invalid_argument("select_constraints: initial depths must be positive, one per vertex");
    }

    EquationSystem pool = build_system(cands, d);
    assign_scales(pool.equations, z0);
    std::vector<std::vector<int>> by_candidate(cands.size());
    for (const auto& eq : pool.equations) {
        by_candidate[static_cast<std::size_t>(eq.source())].push_back(eq.id);
    }

    std::vector<int> stream{anchor};
    for (int c : order) {
        if (c != anchor) {
            stream.push_back(c);
        }
    }

    const int m = static_cast<int>(d.vertices.size());
    SelectionState state(m, z0);
    SelectionResult out;
    for (int c : stream) {
        bool took_any = false;
        for (int id : by_candidate[static_cast<std::size_t>(c)]) {
            if (static_cast<int>(state.accepted.size()) == m) {
                break;
            }
            const ResidualEquation& eq = pool.equations[static_cast<std::size_t>(id)];
            auto matching = augment_matching(state, eq);
            if (!matching) {
                continue;
            }
            ConsistencyResult cons = check_consistent(state, eq, cfg);
            if (!cons.consistent) {
                continue;
            }
            if (!check_not_redundant(state, eq, cons.z, cfg, cons.rms)) {
                continue;
            }
            state.accept(eq, std::move(*matching), std::move(cons.z));
            took_any = true;
        }
        if (took_any) {
            out.selected_candidates.push_back(c);
        }
        if (static_cast<int>(state.accepted.size()) == m) {
            break;
        }
    }

    out.solvable = static_cast<int>(state.accepted.size()) == m;
    out.system.num_vars = m;
    out.system.equations = std::move(state.accepted);
    out.z_est = std::move(state.z_est);
    return out;
}

SelectionResult select_constraints(const std::vector<ConstraintCandidate>& cands, const LineDrawing& d,
                                   const DepthVector& z0, std::uint64_t seed, const SelectorConfig& cfg)
{
    std::vector<int> order;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (cands[i].kind != ConstraintKind::Anchor) {
            order.push_back(static_cast<int>(i));
        }
    }
    Rng rng(seed);
    rng.shuffle(order);
    return select_in_order(cands, order, d, z0, cfg);
}

} // namespace wirelift
