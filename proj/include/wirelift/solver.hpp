#pragma once

#include "wirelift/constraint_catalog.hpp"
#include "wirelift/drawing.hpp"
#include "wirelift/selector.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wirelift {

enum class InitKind { Identity, Random, Predicted, GTNoise };

struct InitStrategy {
    InitKind kind = InitKind::GTNoise;
    double sigma = 0.05;

    // "identity", "random", "predicted" or "gtnoise:<sigma>".
    static InitStrategy parse(const std::string& text);
    std::string to_string() const;
};

enum class SolverMethod { Hybrid, LevenbergMarquardt };

struct SolveConfig {
    int n_restarts = 1;
    InitStrategy init;
    int max_iters = 500;
    double f_tol = 1e-12;
    double sat_tol = 1e-6;
    std::uint64_t seed = 0;
    SolverMethod method = SolverMethod::Hybrid;
    // A root is accepted when the scaled residual infinity norm is below this.
    double root_tol = 1e-8;
    SelectorConfig selector;
};

// Seeds of attempt t within a reconstruct run: selection order and init.
std::uint64_t attempt_seed(std::uint64_t run_seed, int attempt);
std::uint64_t attempt_init_seed(std::uint64_t run_seed, int attempt);

// Identity: every depth set to gt_depths[0]. Random: i.i.d. uniform on
// [5, 7]. GTNoise: gt_depths plus N(0, sigma^2), clamped at 1e-3.
// Predicted: predicted_depths. Throws std::invalid_argument when the
// required field is missing.
DepthVector make_initial(const LineDrawing& d, const InitStrategy& strategy, std::uint64_t seed);

struct SystemSolveResult {
    bool converged = false;
    DepthVector z;
    double residual_inf = 0.0;
    std::string reason;
};

// Powell hybrid (MINPACK hybrj) on the square system, or Levenberg-Marquardt
// when cfg.method says so. Residuals are divided by each equation's scale.
SystemSolveResult solve_system(const EquationSystem& sys, const DepthVector& z0, const SolveConfig& cfg);

enum class SolveStatus { Solved, SolverFail, Unsolvable };
std::string to_string(SolveStatus status);

struct AttemptRecord {
    int index = 0;
    bool selection_solvable = false;
    // Pool indices of the candidates that contributed equations.
    std::vector<int> selected;
    bool converged = false;
    std::optional<DepthVector> z;
    int satisfied_count = 0;
};

struct SolveOutcome {
    SolveStatus status = SolveStatus::Unsolvable;
    std::optional<DepthVector> z;
    int satisfied_count = 0;
    int chosen_attempt = -1;
    std::vector<AttemptRecord> attempts;
};

// Number of pool candidates whose equations all have |f_k(z)| / s_k below
// sat_tol, with s_k taken at z0. Zero when any depth is non-positive.
int count_satisfied(const std::vector<ConstraintCandidate>& pool, const LineDrawing& d, const DepthVector& z,
                    const DepthVector& z0, double sat_tol);

// N rounds of select-then-solve, keeping the root that satisfies the most
// pool candidates (earliest attempt on ties).
SolveOutcome reconstruct(const LineDrawing& d, const std::vector<ConstraintCandidate>& pool, const SolveConfig& cfg);

// Pool with exactly one anchor: existing anchors are kept only if there is
// exactly one; otherwise a System anchor on vertex 0 is added, valued at
// gt_depths[0] when present and at the camera's center distance otherwise.
std::vector<ConstraintCandidate> with_anchor(std::vector<ConstraintCandidate> pool, const LineDrawing& d);

nlohmann::json outcome_to_json(const SolveOutcome& outcome);

} // namespace wirelift
