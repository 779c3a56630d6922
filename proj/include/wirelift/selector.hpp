#pragma once

#include "wirelift/constraint_catalog.hpp"
#include "wirelift/drawing.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace wirelift {

struct SelectorConfig {
    // Consistent iff the RMS of scaled residuals after least squares is below this.
    double eps_cons = 1e-7;
    // The least-squares point must also keep every depth above this fraction
    // of the largest one. Collapsing depths satisfy homogeneous rows trivially.
    double min_depth_ratio = 0.05;
    // Non-redundant iff |last diagonal of R| is at least this.
    double eps_qr = 1e-8;
    // The pivot must also reach qr_noise * sqrt(rms) of the least-squares
    // point it is taken at. A row tangent to the accepted solution set is
    // only resolved to about sqrt(rms) there, so smaller pivots are noise.
    double qr_noise = 10.0;
    int max_ls_iters = 200;
};

// Equation -> variable assignment over the accepted equations.
struct Matching {
    std::vector<int> var_of_eq;
    std::vector<int> eq_of_var;
};

struct SelectionState {
    explicit SelectionState(int num_vars, DepthVector z0, std::uint64_t seed = 0);

    int num_vars;
    std::vector<ResidualEquation> accepted;
    Matching matching;
    DepthVector z_est;
    std::uint64_t rng_seed;

    // Appends eq with the matching and estimate produced by the checks.
    void accept(ResidualEquation eq, Matching m, DepthVector z);
};

// Matching extended by one augmenting path from eq, or nullopt when
// accepted + eq cannot all be matched to distinct variables.
std::optional<Matching> augment_matching(const SelectionState& state, const ResidualEquation& eq);

bool check_structural(const SelectionState& state, const ResidualEquation& eq);

struct ConsistencyResult {
    bool consistent = false;
    DepthVector z;
    double rms = 0.0;
};

// Least squares over accepted + eq (scaled residuals), warm-started at z_est.
ConsistencyResult check_consistent(const SelectionState& state, const ResidualEquation& eq,
                                   const SelectorConfig& cfg = {});

// QR of the transposed, row-normalised Jacobian of accepted + eq at z, eq
// last. Non-redundant iff every |R(i,i)| reaches the threshold, since the
// accepted rows are re-evaluated at the new z. ls_rms is the least-squares
// RMS reached at z (0 for an exact point).
bool check_not_redundant(const SelectionState& state, const ResidualEquation& eq, const DepthVector& z,
                         const SelectorConfig& cfg = {}, double ls_rms = 0.0);

// |R(K,K)| for the stacked rows, eq last. Exposed for diagnostics.
double redundancy_measure(const SelectionState& state, const ResidualEquation& eq, const DepthVector& z);

struct SelectionResult {
    bool solvable = false;
    EquationSystem system;
    // Indices into the candidate list, in acceptance order, without repeats.
    std::vector<int> selected_candidates;
    DepthVector z_est;
};

// Streams the anchor then the shuffled remaining candidates through the
// structural, consistency and redundancy checks until num_vars equations
// are accepted. Not solvable when the pool runs out first.
SelectionResult select_constraints(const std::vector<ConstraintCandidate>& cands, const LineDrawing& d,
                                   const DepthVector& z0, std::uint64_t seed, const SelectorConfig& cfg = {});

// Same loop over an explicit candidate order (no shuffle); the anchor is
// still streamed first.
SelectionResult select_in_order(const std::vector<ConstraintCandidate>& cands, const std::vector<int>& order,
                                const LineDrawing& d, const DepthVector& z0, const SelectorConfig& cfg = {});

} // namespace wirelift
