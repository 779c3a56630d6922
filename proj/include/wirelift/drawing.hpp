#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wirelift {

// Image-plane frame: right-handed camera frame, optical axis +Z pointing
// toward the object, image coordinates in the same units as the focal length.
struct Camera {
    double focal_length = 5.0;
    double center_distance = 6.0;
};

struct Vertex2D {
    double x = 0.0;
    double y = 0.0;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

enum class EdgeKind { Segment, Arc };

struct ArcParams {
    Point2 center;
    Point2 mid;
    friend bool operator==(const ArcParams&, const ArcParams&) = default;
};

// An edge's index is its position in LineDrawing::edges.
struct Edge {
    EdgeKind kind = EdgeKind::Segment;
    std::array<int, 2> endpoints{0, 0};
    std::optional<ArcParams> arc;

    friend bool operator==(const Edge&, const Edge&) = default;
};

enum class ConstraintKind { Parallel, Perpendicular, EqualLength, FacePlanarity, Anchor };

enum class Provenance { GroundTruth, Heuristic, JLinkage, True2Form, Predicted, System };

// Pairwise kinds reference two edges, FacePlanarity one face, Anchor one
// vertex. Equality ignores provenance: two candidates describing the same
// relation are the same constraint.
struct ConstraintCandidate {
    ConstraintKind kind = ConstraintKind::Parallel;
    std::vector<int> entities;
    Provenance provenance = Provenance::System;
    std::optional<double> anchor_value;

    friend bool operator==(const ConstraintCandidate& a, const ConstraintCandidate& b);
};

bool is_pairwise(ConstraintKind kind);

// Sorts pairwise entity indices ascending. Idempotent.
ConstraintCandidate canonicalize(ConstraintCandidate c);

// Strict weak order on (kind, canonical entities), for set operations.
bool candidate_less(const ConstraintCandidate& a, const ConstraintCandidate& b);

ConstraintCandidate make_pair_candidate(ConstraintKind kind, int e0, int e1, Provenance provenance);
ConstraintCandidate make_anchor(int vertex, double value, Provenance provenance);

std::string_view to_string(ConstraintKind kind);
std::string_view to_string(Provenance provenance);
std::string_view to_string(EdgeKind kind);
ConstraintKind parse_constraint_kind(std::string_view text);
Provenance parse_provenance(std::string_view text);
EdgeKind parse_edge_kind(std::string_view text);

using DepthVector = Eigen::VectorXd;

struct LineDrawing {
    std::vector<Vertex2D> vertices;
    std::vector<Edge> edges;
    Camera camera;
    std::optional<std::vector<std::vector<int>>> faces;
    std::optional<std::vector<double>> gt_depths;
    std::vector<ConstraintCandidate> constraints;
    std::optional<std::vector<double>> predicted_depths;

    std::size_t num_vertices() const { return vertices.size(); }

    // Constraints whose provenance is GroundTruth.
    std::vector<ConstraintCandidate> gt_constraints() const;
    std::vector<ConstraintCandidate> constraints_from(Provenance provenance) const;

    std::optional<DepthVector> gt_depth_vector() const;
};

// Throws FormatError naming the first offending element.
void validate(const LineDrawing& d);

// Pinhole projection (f X/Z, f Y/Z). Throws DomainError for Z <= 0.
Eigen::Vector2d project(const Eigen::Vector3d& point, const Camera& camera);

// Inverse of project at a given depth. Throws DomainError for depth <= 0.
Eigen::Vector3d unproject(const Vertex2D& v, double depth, const Camera& camera);

// Viewing ray (x/f, y/f, 1); the 3D vertex is depth * ray.
Eigen::Vector3d view_ray(const Vertex2D& v, const Camera& camera);

// Replaces an arc by the segment joining its endpoints. Throws DomainError
// for segments.
Edge arc_chord(const Edge& e);

// Every edge as a straight segment (arcs replaced by chords).
std::vector<Edge> chord_edges(const LineDrawing& d);

// 3D vertex positions implied by a depth vector.
std::vector<Eigen::Vector3d> lift(const LineDrawing& d, const DepthVector& z);

} // namespace wirelift
