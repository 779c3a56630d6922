#pragma once

#include "wirelift/drawing.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace wirelift {

struct JLinkageConfig {
    int num_hypotheses = 500;
    // Degrees.
    double consistency_threshold = 2.0;
    std::uint64_t seed = 0;
};

struct True2FormConfig {
    double w_c = 1.0;
    // Degrees; width of the Gaussian likelihood and the acceptance cut.
    double sigma_alpha = 10.0;
    int max_iters = 4;
};

struct DetectorConfig {
    // Degrees.
    double parallel_angle_max = 15.0;
    double perpendicular_angle_min = 20.0;
    JLinkageConfig jlinkage;
    True2FormConfig true2form;

    // Throws std::invalid_argument unless 0 < parallel < perpendicular < 90.
    void validate() const;
};

struct DetectionResult {
    std::vector<ConstraintCandidate> candidates;
    std::vector<std::string> warnings;
    bool diverged = false;
};

// Acute angle in degrees between the image directions of two edge chords.
double image_angle_deg(const LineDrawing& d, const Edge& a, const Edge& b);

// Angle thresholds on every unordered chord pair.
DetectionResult detect_heuristic(const LineDrawing& d, const DetectorConfig& cfg);

// Vanishing points by J-Linkage clustering of chord lines, then the most
// orthogonal triple of vanishing directions for perpendicular pairs.
DetectionResult detect_jlinkage(const LineDrawing& d, const DetectorConfig& cfg);

// Iterative reweighted reconstruction from a baseline depth estimate;
// parallel pairs first, then perpendicular.
DetectionResult detect_true2form(const LineDrawing& d, const DepthVector& z0, const DetectorConfig& cfg);

// Pairs (i, j), i != j, predicted from both query edges.
std::vector<ConstraintCandidate> symmetry_filter(const std::map<int, std::vector<int>>& pred, ConstraintKind kind,
                                                 Provenance provenance = Provenance::Predicted);

struct DetectionScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int true_positives = 0;
    int predicted = 0;
    int ground_truth = 0;
};

DetectionScore score_from_counts(int true_positives, int predicted, int ground_truth);

// Set-based precision/recall/F1 over pairs of one kind.
DetectionScore score_detection(const std::vector<ConstraintCandidate>& pred, const std::vector<ConstraintCandidate>& gt,
                               ConstraintKind kind);

} // namespace wirelift
