#pragma once

#include "wirelift/detectors.hpp"
#include "wirelift/drawing.hpp"
#include "wirelift/solver.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wirelift {

enum class TaxonomyLabel { Success, Unsolvable, Fail, WrongI, WrongII, WrongIII };

constexpr std::size_t kNumLabels = 6;
const std::array<TaxonomyLabel, kNumLabels>& all_labels();
std::string to_string(TaxonomyLabel label);

// max_i |z_i - gt_i| < tau. Throws std::invalid_argument on length mismatch.
bool is_success(const DepthVector& z, const DepthVector& gt, double tau = 1e-3);

// Success, then Unsolvable / Fail by status, then WrongIII (some unchosen
// attempt hit the ground truth), then WrongII (some solvable attempt selected
// only ground-truth candidates besides the anchor), else WrongI.
// Throws std::invalid_argument when the drawing has no gt_depths.
TaxonomyLabel classify(const SolveOutcome& outcome, const LineDrawing& d, const std::vector<ConstraintCandidate>& pool,
                       double tau = 1e-3);

struct CorpusItem {
    std::string name;
    std::string family;
    LineDrawing drawing;
};

// Reads manifest.json when present, otherwise every *.json in name order.
std::vector<CorpusItem> load_corpus(const std::filesystem::path& dir);

// Constraint sources: "gt", "heuristic", "jlinkage", "true2form", "file".
const std::vector<std::string>& known_sources();
void check_source(const std::string& source);

struct EvalConfig {
    DetectorConfig detector;
    SolveConfig solver;
    std::uint64_t seed = 0;
    int jobs = 1;
    double tau = 1e-3;
    // Add face-planarity candidates from the drawing's faces to detector pools.
    bool detector_planarity = true;
    // Noise of the fallback baseline for true2form when no predicted depths exist.
    double true2form_baseline_sigma = 0.05;
};

// Per-drawing seed, shared by every cell so that N = 1 is a prefix of N > 1.
std::uint64_t drawing_seed(std::uint64_t seed, std::size_t index);

// Baseline depths for true2form: predicted_depths when present, otherwise
// gt_depths plus Gaussian noise of cfg.true2form_baseline_sigma.
DepthVector true2form_baseline(const LineDrawing& d, const EvalConfig& cfg, std::uint64_t seed);

// Candidate pool for one drawing and source, with exactly one anchor.
std::vector<ConstraintCandidate> candidate_pool(const LineDrawing& d, const std::string& source, const EvalConfig& cfg,
                                                std::uint64_t seed);

struct AblationGrid {
    std::vector<std::string> sources{"gt"};
    std::vector<InitStrategy> inits{InitStrategy{}};
    std::vector<int> restarts{1};
};

struct DrawingResult {
    std::string name;
    TaxonomyLabel label = TaxonomyLabel::WrongI;
    std::string status;
    // Max depth error of the chosen root; empty when no root was chosen.
    std::optional<double> max_error;
    int satisfied_count = 0;
    int chosen_attempt = -1;
    double init_error = 0.0;
};

struct CellResult {
    std::string source;
    InitStrategy init;
    int n_restarts = 1;
    std::array<int, kNumLabels> counts{};
    double success_rate = 0.0;
    // Mean over drawings and vertices of |z0 - gt| for the first attempt.
    double mean_init_error = 0.0;
    std::vector<DrawingResult> drawings;
};

struct AblationReport {
    std::uint64_t seed = 0;
    double tau = 1e-3;
    std::size_t corpus_size = 0;
    std::vector<CellResult> cells;
    std::optional<double> seconds;
};

AblationReport run_ablation(const std::vector<CorpusItem>& corpus, const AblationGrid& grid, const EvalConfig& cfg);

const CellResult* find_cell(const AblationReport& report, const std::string& source, const std::string& init,
                            int n_restarts);

nlohmann::json report_to_json(const AblationReport& report);
std::string report_csv(const AblationReport& report);
// log10-spaced bins of the chosen root's max depth error, per cell.
std::string histogram_csv(const AblationReport& report);

// Closed form of E|U[5,7] - g| for a fixed g.
double expected_random_init_error(double g);

struct DetectionTally {
    std::string method;
    ConstraintKind kind = ConstraintKind::Parallel;
    int true_positives = 0;
    int predicted = 0;
    int ground_truth = 0;

    DetectionScore score() const { return score_from_counts(true_positives, predicted, ground_truth); }
};

// Pooled detection counts over the corpus for the classical detectors.
std::vector<DetectionTally> tally_detection(const std::vector<CorpusItem>& corpus, const std::vector<std::string>& methods,
                                            const EvalConfig& cfg);

} // namespace wirelift
