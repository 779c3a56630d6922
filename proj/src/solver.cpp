#include "wirelift/solver.hpp"

#include "wirelift/random.hpp"

#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wirelift {

InitStrategy InitStrategy::parse(const std::string& text)
{
    if (text == "identity") {
        return {InitKind::Identity, 0.0};
    }
    if (text == "random") {
        return {InitKind::Random, 0.0};
    }
    if (text == "predicted") {
        return {InitKind::Predicted, 0.0};
    }
    const std::string prefix = "gtnoise:";
    if (text.rfind(prefix, 0) == 0) {
        std::size_t used = 0;
        const std::string rest = text.substr(prefix.size());
        double sigma = 0.0;
        try {
            sigma = std::stod(rest, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != rest.size() || !(sigma >= 0.0)) {
            throw std::invalid_argument("bad gtnoise sigma in '" + text + "'");
        }
        return {InitKind::GTNoise, sigma};
    }
    throw std::invalid_argument("unknown init strategy '" + text + "'");
}

std::string InitStrategy::to_string() const
{
    switch (kind) {
    case InitKind::Identity:
        return "identity";
    case InitKind::Random:
        return "random";
    case InitKind::Predicted:
        return "predicted";
    case InitKind::GTNoise: {
        nlohmann::json j = sigma;
        return "gtnoise:" + j.dump();
    }
    }
    return "?";
}

std::uint64_t attempt_seed(std::uint64_t run_seed, int attempt)
{
    return mix_seed(run_seed, static_cast<std::uint64_t>(attempt));
}

std::uint64_t attempt_init_seed(std::uint64_t run_seed, int attempt)
{
    return mix_seed(attempt_seed(run_seed, attempt), 1);
}

DepthVector make_initial(const LineDrawing& d, const InitStrategy& strategy, std::uint64_t seed)
{
    const auto n = static_cast<Eigen::Index>(d.vertices.size());
    Rng rng(seed);
    switch (strategy.kind) {
    case InitKind::Identity:
        if (!d.gt_depths || d.gt_depths->empty()) {
            throw std::invalid_argument("identity init needs gt_depths");
        }
        return DepthVector::Constant(n, d.gt_depths->front());
    case InitKind::Random: {
        DepthVector z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            z[i] = rng.uniform(5.0, 7.0);
        }
        return z;
    }
    case InitKind::Predicted:
        if (!d.predicted_depths) {
            throw std::invalid_argument("predicted init needs predicted_depths");
        }
        return Eigen::Map<const Eigen::VectorXd>(d.predicted_depths->data(), n);
    case InitKind::GTNoise: {
        if (!d.gt_depths) {
            throw std::invalid_argument("gtnoise init needs gt_depths");
        }
        DepthVector z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double noise = strategy.sigma > 0.0 ? strategy.sigma * rng.normal() : 0.0;
            z[i] = std::max((*d.gt_depths)[static_cast<std::size_t>(i)] + noise, 1e-3);
        }
        return z;
    }
    }
    return DepthVector::Zero(n);
}

namespace {

struct ScaledSystem {
    const EquationSystem& sys;
    int calls = 0;

    int operator()(const Eigen::VectorXd& z, Eigen::VectorXd& f)
    {
        ++calls;
        f = sys.values(z, true);
        return f.allFinite() ? 0 : -1;
    }
    int df(const Eigen::VectorXd& z, Eigen::MatrixXd& jac)
    {
        jac = sys.jacobian(z, true);
        return jac.allFinite() ? 0 : -1;
    }
};

// Adapter for Eigen's LevenbergMarquardt, which wants inputs()/values().
struct ScaledSystemLm : ScaledSystem {
    int inputs() const { return sys.num_vars; }
    int values() const { return static_cast<int>(sys.equations.size()); }
};

} // namespace

SystemSolveResult solve_system(const EquationSystem& sys, const DepthVector& z0, const SolveConfig& cfg)
{
    if (static_cast<int>(sys.equations.size()) != sys.num_vars || z0.size() != sys.num_vars) {
        throw std::invalid_argument("solve_system: system must be square and match z0");
    }
    SystemSolveResult out;
    Eigen::VectorXd z = z0;
    if (sys.num_vars == 0) {
        out.converged = true;
        out.z = z;
        return out;
    }

    if (cfg.method == SolverMethod::Hybrid) {
        ScaledSystem fn{sys};
        Eigen::HybridNonLinearSolver<ScaledSystem> solver(fn);
        solver.parameters.maxfev = cfg.max_iters;
        solver.parameters.xtol = cfg.f_tol;
        const auto status = solver.solve(z);
        out.reason = "hybrj status " + std::to_string(static_cast<int>(status));
    } else {
        ScaledSystemLm fn{{sys}};
        Eigen::LevenbergMarquardt<ScaledSystemLm> solver(fn);
        solver.parameters.maxfev = cfg.max_iters;
        solver.parameters.xtol = cfg.f_tol;
        solver.parameters.ftol = cfg.f_tol;
        const auto status = solver.minimize(z);
        out.reason = "lmder status " + std::to_string(static_cast<int>(status));
    }

    const Eigen::VectorXd f = sys.values(z, true);
    out.z = z;
    if (!z.allFinite() || !f.allFinite()) {
        out.residual_inf = std::numeric_limits<double>::infinity();
        out.reason += ", non-finite";
        return out;
    }
    out.residual_inf = f.cwiseAbs().maxCoeff();
    out.converged = out.residual_inf < cfg.root_tol;
    return out;
}

std::string to_string(SolveStatus status)
{
    switch (status) {
    case SolveStatus::Solved:
        return "solved";
    case SolveStatus::SolverFail:
        return "solver_fail";
    case SolveStatus::Unsolvable:
        return "unsolvable";
    }
    return "?";
}

int count_satisfied(const std::vector<ConstraintCandidate>& pool, const LineDrawing& d, const DepthVector& z,
                    const DepthVector& z0, double sat_tol)
{
    if (!(z.array() > 0.0).all()) {
        return 0;
    }
    int count = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        bool ok = true;
        for (const auto& eq : candidate_equations(pool[i], d, static_cast<int>(i))) {
            const double s = std::max(1.0, std::abs(eq.value(z0)));
            if (!(std::abs(eq.value(z)) / s < sat_tol)) {
                ok = false;
                break;
            }
        }
        count += ok ? 1 : 0;
    }
    return count;
}

std::vector<ConstraintCandidate> with_anchor(std::vector<ConstraintCandidate> pool, const LineDrawing& d)
{
    const auto anchors = std::count_if(pool.begin(), pool.end(),
                                       [](const ConstraintCandidate& c) { return c.kind == ConstraintKind::Anchor; });
    if (anchors == 1) {
        return pool;
    }
    pool.erase(std::remove_if(pool.begin(), pool.end(),
                              [](const ConstraintCandidate& c) { return c.kind == ConstraintKind::Anchor; }),
               pool.end());
    const double value = d.gt_depths ? d.gt_depths->front() : d.camera.center_distance;
    pool.push_back(make_anchor(0, value, Provenance::System));
    return pool;
}

SolveOutcome reconstruct(const LineDrawing& d, const std::vector<ConstraintCandidate>& pool, const SolveConfig& cfg)
{
    if (pool.empty()) {
        throw std::invalid_argument("reconstruct: empty candidate pool");
    }
    if (cfg.n_restarts < 1) {
        throw std::invalid_argument("reconstruct: n_restarts must be at least 1");
    }
    SolveOutcome out;
    bool any_selection = false;
    for (int t = 0; t < cfg.n_restarts; ++t) {
        const DepthVector z0 = make_initial(d, cfg.init, attempt_init_seed(cfg.seed, t));
        AttemptRecord rec;
        rec.index = t;
        const SelectionResult sel = select_constraints(pool, d, z0, attempt_seed(cfg.seed, t), cfg.selector);
        rec.selection_solvable = sel.solvable;
        rec.selected = sel.selected_candidates;
        if (sel.solvable) {
            any_selection = true;
            const SystemSolveResult res = solve_system(sel.system, z0, cfg);
            rec.converged = res.converged;
            if (res.converged) {
                rec.z = res.z;
                rec.satisfied_count = count_satisfied(pool, d, res.z, z0, cfg.sat_tol);
                if (out.chosen_attempt < 0 || rec.satisfied_count > out.satisfied_count) {
                    out.chosen_attempt = t;
                    out.satisfied_count = rec.satisfied_count;
                    out.z = res.z;
                }
            }
        }
        out.attempts.push_back(std::move(rec));
    }
    if (out.chosen_attempt >= 0) {
        out.status = SolveStatus::Solved;
    } else {
        out.status = any_selection ? SolveStatus::SolverFail : SolveStatus::Unsolvable;
    }
    return out;
}

nlohmann::json outcome_to_json(const SolveOutcome& outcome)
{
    using nlohmann::json;
    json j;
    j["status"] = to_string(outcome.status);
    j["chosen_attempt"] = outcome.chosen_attempt;
    j["satisfied_count"] = outcome.satisfied_count;
    if (outcome.z) {
        j["depths"] = std::vector<double>(outcome.z->begin(), outcome.z->end());
    }
    json attempts = json::array();
    for (const auto& a : outcome.attempts) {
        json ja;
        ja["index"] = a.index;
        ja["selection_solvable"] = a.selection_solvable;
        ja["selected"] = a.selected;
        ja["converged"] = a.converged;
        ja["satisfied_count"] = a.satisfied_count;
        if (a.z) {
            ja["depths"] = std::vector<double>(a.z->begin(), a.z->end());
        }
        attempts.push_back(ja);
    }
    j["attempts"] = attempts;
    return j;
}

} // namespace wirelift
