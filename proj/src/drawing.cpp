#include "wirelift/drawing.hpp"

#include "wirelift/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace wirelift {

bool is_pairwise(ConstraintKind kind)
{
    return kind == ConstraintKind::Parallel || kind == ConstraintKind::Perpendicular ||
           kind == ConstraintKind::EqualLength;
}

ConstraintCandidate canonicalize(ConstraintCandidate c)
{
    if (is_pairwise(c.kind)) {
        std::sort(c.entities.begin(), c.entities.end());
    }
    return c;
}

bool operator==(const ConstraintCandidate& a, const ConstraintCandidate& b)
{
    const auto ca = canonicalize(a);
    const auto cb = canonicalize(b);
    return ca.kind == cb.kind && ca.entities == cb.entities && ca.anchor_value == cb.anchor_value;
}

bool candidate_less(const ConstraintCandidate& a, const ConstraintCandidate& b)
{
    const auto ca = canonicalize(a);
    const auto cb = canonicalize(b);
    return std::tie(ca.kind, ca.entities) < std::tie(cb.kind, cb.entities);
}

ConstraintCandidate make_pair_candidate(ConstraintKind kind, int e0, int e1, Provenance provenance)
{
    return canonicalize(ConstraintCandidate{kind, {e0, e1}, provenance, std::nullopt});
}

ConstraintCandidate make_anchor(int vertex, double value, Provenance provenance)
{
    return ConstraintCandidate{ConstraintKind::Anchor, {vertex}, provenance, value};
}

std::string_view to_string(ConstraintKind kind)
{
    switch (kind) {
    case ConstraintKind::Parallel:
        return "parallel";
    case ConstraintKind::Perpendicular:
        return "perpendicular";
    case ConstraintKind::EqualLength:
        return "equal_length";
    case ConstraintKind::FacePlanarity:
        return "face_planarity";
    case ConstraintKind::Anchor:
        return "anchor";
    }
    return "?";
}

std::string_view to_string(Provenance provenance)
{
    switch (provenance) {
    case Provenance::GroundTruth:
        return "ground_truth";
    case Provenance::Heuristic:
        return "heuristic";
    case Provenance::JLinkage:
        return "jlinkage";
    case Provenance::True2Form:
        return "true2form";
    case Provenance::Predicted:
        return "predicted";
    case Provenance::System:
        return "system";
    }
    return "?";
}

std::string_view to_string(EdgeKind kind)
{
    return kind == EdgeKind::Segment ? "segment" : "arc";
}

ConstraintKind parse_constraint_kind(std::string_view text)
{
    for (auto k : {ConstraintKind::Parallel, ConstraintKind::Perpendicular, ConstraintKind::EqualLength,
                   ConstraintKind::FacePlanarity, ConstraintKind::Anchor}) {
        if (to_string(k) == text) {
            return k;
        }
    }
    throw FormatError("unknown constraint kind '" + std::string(text) + "'");
}

Provenance parse_provenance(std::string_view text)
{
    for (auto p : {Provenance::GroundTruth, Provenance::Heuristic, Provenance::JLinkage,
                   Provenance::True2Form, Provenance::Predicted, Provenance::System}) {
        if (to_string(p) == text) {
            return p;
        }
    }
    throw FormatError("unknown provenance '" + std::string(text) + "'");
}

EdgeKind parse_edge_kind(std::string_view text)
{
    if (text == "segment") {
        return EdgeKind::Segment;
    }
    if (text == "arc") {
        return EdgeKind::Arc;
    }
    throw FormatError("unknown edge kind '" + std::string(text) + "'");
}

std::vector<ConstraintCandidate> LineDrawing::gt_constraints() const
{
    return constraints_from(Provenance::GroundTruth);
}

std::vector<ConstraintCandidate> LineDrawing::constraints_from(Provenance provenance) const
{
    std::vector<ConstraintCandidate> out;
    for (const auto& c : constraints) {
        if (c.provenance == provenance) {
            out.push_back(c);
        }
    }
    return out;
}

std::optional<DepthVector> LineDrawing::gt_depth_vector() const
{
    if (!gt_depths) {
        return std::nullopt;
    }
    return Eigen::Map<const Eigen::VectorXd>(gt_depths->data(), static_cast<Eigen::Index>(gt_depths->size()));
}

namespace {

std::string at(std::string_view what, std::size_t index)
{
    return std::string(what) + " " + std::to_string(index) + ": ";
}

void check_depth_list(const std::vector<double>& depths, std::size_t n, std::string_view key)
{
    if (depths.size() != n) {
        throw FormatError(std::string(key) + ": length " + std::to_string(depths.size()) + " != vertex count " +
                          std::to_string(n));
    }
    for (std::size_t i = 0; i < depths.size(); ++i) {
        if (!(depths[i] > 0.0) || !std::isfinite(depths[i])) {
            throw FormatError(at(key, i) + "depth must be positive and finite");
        }
    }
}

} // namespace

void validate(const LineDrawing& d)
{
    if (!(d.camera.focal_length > 0.0)) {
        throw FormatError("camera: focal_length must be positive");
    }
    if (!(d.camera.center_distance > 0.0)) {
        throw FormatError("camera: center_distance must be positive");
    }
    const auto nv = static_cast<int>(d.vertices.size());
    for (std::size_t i = 0; i < d.vertices.size(); ++i) {
        if (!std::isfinite(d.vertices[i].x) || !std::isfinite(d.vertices[i].y)) {
            throw FormatError(at("vertex", i) + "non-finite coordinate");
        }
    }

    using EdgeKey = std::tuple<int, int, EdgeKind, double, double, double, double>;
    std::set<EdgeKey> seen;
    for (std::size_t j = 0; j < d.edges.size(); ++j) {
        const Edge& e = d.edges[j];
        for (int v : e.endpoints) {
            if (v < 0 || v >= nv) {
                throw FormatError(at("edge", j) + "endpoint " + std::to_string(v) + " out of range (" +
                                  std::to_string(nv) + " vertices)");
            }
        }
        if (e.endpoints[0] == e.endpoints[1]) {
            throw FormatError(at("edge", j) + "endpoints must be distinct");
        }
        if ((e.kind == EdgeKind::Arc) != e.arc.has_value()) {
            throw FormatError(at("edge", j) + "arc parameters present iff kind is arc");
        }
        EdgeKey key{std::min(e.endpoints[0], e.endpoints[1]), std::max(e.endpoints[0], e.endpoints[1]), e.kind,
                    0.0, 0.0, 0.0, 0.0};
        if (e.arc) {
            const auto& a = d.vertices[e.endpoints[0]];
            const auto& b = d.vertices[e.endpoints[1]];
            const double ux = b.x - a.x, uy = b.y - a.y;
            const double wx = e.arc->mid.x - a.x, wy = e.arc->mid.y - a.y;
            const double cross = ux * wy - uy * wx;
            if (std::abs(cross) <= 1e-12 * std::hypot(ux, uy) * std::hypot(wx, wy)) {
                throw FormatError(at("edge", j) + "arc midpoint collinear with endpoints");
            }
            std::get<3>(key) = e.arc->center.x;
            std::get<4>(key) = e.arc->center.y;
            std::get<5>(key) = e.arc->mid.x;
            std::get<6>(key) = e.arc->mid.y;
        }
        if (!seen.insert(key).second) {
            throw FormatError(at("edge", j) + "duplicates an earlier edge");
        }
    }

    const std::size_t nfaces = d.faces ? d.faces->size() : 0;
    if (d.faces) {
        for (std::size_t k = 0; k < d.faces->size(); ++k) {
            const auto& face = (*d.faces)[k];
            if (face.size() < 3) {
                throw FormatError(at("face", k) + "needs at least 3 vertices");
            }
            for (int v : face) {
                if (v < 0 || v >= nv) {
                    throw FormatError(at("face", k) + "vertex " + std::to_string(v) + " out of range");
                }
            }
        }
    }
    if (d.gt_depths) {
        check_depth_list(*d.gt_depths, d.vertices.size(), "gt_depths");
    }
    if (d.predicted_depths) {
        check_depth_list(*d.predicted_depths, d.vertices.size(), "predicted_depths");
    }

    const auto ne = static_cast<int>(d.edges.size());
    for (std::size_t k = 0; k < d.constraints.size(); ++k) {
        const auto& c = d.constraints[k];
        const std::string where = at("constraint", k);
        if (c.anchor_value.has_value() != (c.kind == ConstraintKind::Anchor)) {
            throw FormatError(where + "anchor_value present iff kind is anchor");
        }
        if (is_pairwise(c.kind)) {
            if (c.entities.size() != 2 || c.entities[0] == c.entities[1]) {
                throw FormatError(where + "pairwise constraint needs two distinct edges");
            }
            for (int e : c.entities) {
                if (e < 0 || e >= ne) {
                    throw FormatError(where + "edge " + std::to_string(e) + " out of range");
                }
            }
        } else if (c.kind == ConstraintKind::FacePlanarity) {
            if (c.entities.size() != 1 || c.entities[0] < 0 || static_cast<std::size_t>(c.entities[0]) >= nfaces) {
                throw FormatError(where + "face planarity needs one valid face index");
            }
            if ((*d.faces)[c.entities[0]].size() < 4) {
                throw FormatError(where + "face planarity needs a face with at least 4 vertices");
            }
        } else {
            if (c.entities.size() != 1 || c.entities[0] < 0 || c.entities[0] >= nv) {
                throw FormatError(where + "anchor needs one valid vertex index");
            }
        }
    }
}

Eigen::Vector2d project(const Eigen::Vector3d& point, const Camera& camera)
{
    if (!(point.z() > 0.0)) {
        throw DomainError("project: depth must be positive");
    }
    return {camera.focal_length * point.x() / point.z(), camera.focal_length * point.y() / point.z()};
}

Eigen::Vector3d view_ray(const Vertex2D& v, const Camera& camera)
{
    return {v.x / camera.focal_length, v.y / camera.focal_length, 1.0};
}

Eigen::Vector3d unproject(const Vertex2D& v, double depth, const Camera& camera)
{
    if (!(depth > 0.0)) {
        throw DomainError("unproject: depth must be positive");
    }
    return {v.x * depth / camera.focal_length, v.y * depth / camera.focal_length, depth};
}

Edge arc_chord(const Edge& e)
{
    if (e.kind != EdgeKind::Arc) {
        throw DomainError("arc_chord: edge is already a segment");
    }
    return Edge{EdgeKind::Segment, e.endpoints, std::nullopt};
}

std::vector<Edge> chord_edges(const LineDrawing& d)
{
    std::vector<Edge> out;
    out.reserve(d.edges.size());
    for (const auto& e : d.edges) {
        out.push_back(e.kind == EdgeKind::Arc ? arc_chord(e) : e);
    }
    return out;
}

std::vector<Eigen::Vector3d> lift(const LineDrawing& d, const DepthVector& z)
{
    std::vector<Eigen::Vector3d> out;
    out.reserve(d.vertices.size());
    for (std::size_t i = 0; i < d.vertices.size(); ++i) {
        out.push_back(z[static_cast<Eigen::Index>(i)] * view_ray(d.vertices[i], d.camera));
    }
    return out;
}

} // namespace wirelift
