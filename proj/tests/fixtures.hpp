#pragma once

#include "wirelift/constraint_catalog.hpp"
#include "wirelift/drawing.hpp"
#include "wirelift/random.hpp"
#include "wirelift/scene_synth.hpp"
#include "wirelift/solver.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <vector>

namespace fixtures {

using namespace wirelift;

// Drawing with m vertices and no edges, for equations built by hand.
inline LineDrawing bare_drawing(int m)
{
    LineDrawing d;
    for (int i = 0; i < m; ++i) {
        d.vertices.push_back(Vertex2D{0.1 * i, -0.05 * i});
    }
    return d;
}

// sum_i coefs[i] * Z_i + constant, as a degree-free equation.
inline ResidualEquation linear_equation(const std::vector<double>& coefs, double constant, int source = 0)
{
    Polynomial p = Polynomial::constant(constant);
    for (std::size_t i = 0; i < coefs.size(); ++i) {
        if (coefs[i] != 0.0) {
            p += Polynomial::variable(static_cast<int>(i), coefs[i]);
        }
    }
    return ResidualEquation(p, ConstraintKind::Anchor, source, 0, std::nullopt);
}

inline Scene cuboid_scene(std::uint64_t seed = 7)
{
    SceneSpec spec = random_spec(SceneFamily::Cuboid, seed);
    spec.size_params = {1.0, 1.4, 0.7};
    return generate_scene(spec);
}

// Axis-aligned cuboid seen from an oblique octant with no roll.
inline Scene oblique_cuboid()
{
    SceneSpec spec;
    spec.family = SceneFamily::Cuboid;
    spec.size_params = {1.0, 1.4, 0.7};
    spec.pose.euler = {0.55, -0.6, 0.3};
    spec.seed = 11;
    return generate_scene(spec);
}

// Irregular tetrahedron in camera coordinates: no parallel, perpendicular,
// equal-length or planarity relation among its edges.
inline Scene tetrahedron_scene()
{
    const std::vector<Eigen::Vector3d> verts{
        {0.05, 0.1, 5.3}, {1.1, 0.25, 6.4}, {-0.45, 0.95, 6.7}, {0.3, -0.8, 6.9}};
    Scene scene;
    LineDrawing& d = scene.drawing;
    std::vector<double> depths;
    for (const auto& v : verts) {
        const Eigen::Vector2d p = project(v, d.camera);
        d.vertices.push_back(Vertex2D{p.x(), p.y()});
        depths.push_back(v.z());
    }
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            d.edges.push_back(Edge{EdgeKind::Segment, {i, j}, std::nullopt});
        }
    }
    d.faces = std::vector<std::vector<int>>{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    d.gt_depths = depths;
    scene.gt_constraints = label_constraints(verts, d.edges, *d.faces);
    scene.gt_constraints.push_back(make_anchor(0, depths.front(), Provenance::GroundTruth));
    d.constraints = scene.gt_constraints;
    scene.gt = *d.gt_depth_vector();
    return scene;
}

inline Scene disjoint_scene()
{
    SceneSpec spec = random_spec(SceneFamily::Cuboid, 21);
    spec.parts = 2;
    return generate_scene(spec);
}

// Anchor plus equal-length pairs between edges whose 3D lengths differ, so
// every selection that reaches m equations rests on false constraints.
inline std::vector<ConstraintCandidate> false_length_pool(const Scene& scene)
{
    const auto pts = lift(scene.drawing, scene.gt);
    std::vector<ConstraintCandidate> pool{make_anchor(0, scene.gt[0], Provenance::GroundTruth)};
    const auto& edges = scene.drawing.edges;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        for (std::size_t j = i + 1; j < edges.size(); ++j) {
            const double li = (pts[edges[i].endpoints[1]] - pts[edges[i].endpoints[0]]).norm();
            const double lj = (pts[edges[j].endpoints[1]] - pts[edges[j].endpoints[0]]).norm();
            if (std::abs(li - lj) > 0.1 * std::max(li, lj)) {
                pool.push_back(make_pair_candidate(ConstraintKind::EqualLength, static_cast<int>(i),
                                                   static_cast<int>(j), Provenance::Heuristic));
            }
        }
    }
    return pool;
}

// Ground-truth pool solved from a wide GTNoise init; the seed is frozen at a
// value where the only attempt converges to a root other than the ground truth.
struct WideNoiseCase {
    Scene scene;
    SolveConfig cfg;
};

inline constexpr std::uint64_t kWideNoiseSeed = 0;

inline WideNoiseCase wide_noise_case(std::uint64_t seed = kWideNoiseSeed)
{
    WideNoiseCase c{cuboid_scene(3), SolveConfig{}};
    c.cfg.init = InitStrategy{InitKind::GTNoise, 1.5};
    c.cfg.n_restarts = 1;
    c.cfg.seed = seed;
    return c;
}

// Independent 3D oracle for one catalog residual, from unprojected vertices.
inline std::vector<double> oracle_residual(const ConstraintCandidate& c, const LineDrawing& d, const DepthVector& z)
{
    auto point = [&](int v) { return unproject(d.vertices[v], z[v], d.camera); };
    auto edge = [&](int e) {
        const auto& ep = d.edges[e].endpoints;
        return Eigen::Vector3d(point(ep[1]) - point(ep[0]));
    };
    switch (c.kind) {
    case ConstraintKind::Parallel: {
        const Eigen::Vector3d x = edge(c.entities[0]).cross(edge(c.entities[1]));
        return {x.x(), x.y(), x.z()};
    }
    case ConstraintKind::Perpendicular: {
        const auto& a = d.edges[c.entities[0]].endpoints;
        const auto& b = d.edges[c.entities[1]].endpoints;
        const bool shared = a[0] == b[0] || a[0] == b[1] || a[1] == b[0] || a[1] == b[1];
        const double dp = edge(c.entities[0]).dot(edge(c.entities[1]));
        if (!shared) {
            return {dp};
        }
        // Shared-vertex form: minus the dot product of the two edges taken
        // outward from the shared vertex.
        const int v2 = (a[0] == b[0] || a[0] == b[1]) ? a[0] : a[1];
        const int v1 = a[0] == v2 ? a[1] : a[0];
        const int v3 = b[0] == v2 ? b[1] : b[0];
        return {-(point(v1) - point(v2)).dot(point(v3) - point(v2))};
    }
    case ConstraintKind::EqualLength:
        return {edge(c.entities[0]).squaredNorm() - edge(c.entities[1]).squaredNorm()};
    case ConstraintKind::FacePlanarity: {
        const auto& f = (*d.faces)[c.entities[0]];
        std::vector<double> out;
        const Eigen::Vector3d p1 = point(f[0]);
        Eigen::Matrix3d m;
        m.col(0) = point(f[1]) - p1;
        m.col(1) = point(f[2]) - p1;
        for (std::size_t k = 3; k < f.size(); ++k) {
            m.col(2) = point(f[k]) - p1;
            out.push_back(m.determinant());
        }
        return out;
    }
    case ConstraintKind::Anchor:
        return {z[c.entities[0]] - *c.anchor_value};
    }
    return {};
}

// Scale of an oracle value for relative comparisons: the same expression
// with every product taken in absolute value.
inline double oracle_magnitude(const ConstraintCandidate& c, const LineDrawing& d, const DepthVector& z)
{
    double s = 0.0;
    for (int v = 0; v < static_cast<int>(d.vertices.size()); ++v) {
        s = std::max(s, unproject(d.vertices[v], z[v], d.camera).norm());
    }
    const int degree = c.kind == ConstraintKind::FacePlanarity ? 3 : c.kind == ConstraintKind::Anchor ? 1 : 2;
    return std::pow(2.0 * s, degree);
}

// Random drawing with generic vertex positions, a quad face and a pentagon
// face, and depths in [3, 9].
struct RandomConfig {
    LineDrawing drawing;
    DepthVector z;
    std::vector<ConstraintCandidate> candidates;
};

inline RandomConfig random_config(std::uint64_t seed)
{
    Rng rng(seed);
    RandomConfig rc;
    LineDrawing& d = rc.drawing;
    d.camera.focal_length = rng.uniform(1.0, 8.0);
    const int m = 6 + static_cast<int>(rng.below(5));
    for (int i = 0; i < m; ++i) {
        d.vertices.push_back(Vertex2D{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
    }
    for (int i = 0; i < m; ++i) {
        d.edges.push_back(Edge{EdgeKind::Segment, {i, (i + 1) % m}, std::nullopt});
    }
    d.edges.push_back(Edge{EdgeKind::Segment, {0, 3}, std::nullopt});
    d.edges.push_back(Edge{EdgeKind::Segment, {1, 4}, std::nullopt});
    d.faces = std::vector<std::vector<int>>{{0, 1, 2, 3}, {1, 2, 3, 4, 5}};
    rc.z = DepthVector(m);
    for (int i = 0; i < m; ++i) {
        rc.z[i] = rng.uniform(3.0, 9.0);
    }
    const int ne = static_cast<int>(d.edges.size());
    for (int k = 0; k < 4; ++k) {
        const int a = static_cast<int>(rng.below(ne));
        int b = static_cast<int>(rng.below(ne - 1));
        if (b >= a) {
            ++b;
        }
        const auto& ea = d.edges[a].endpoints;
        const auto& eb = d.edges[b].endpoints;
        const bool both = (ea[0] == eb[0] && ea[1] == eb[1]) || (ea[0] == eb[1] && ea[1] == eb[0]);
        rc.candidates.push_back(make_pair_candidate(ConstraintKind::Parallel, a, b, Provenance::System));
        rc.candidates.push_back(make_pair_candidate(ConstraintKind::EqualLength, a, b, Provenance::System));
        if (!both) {
            rc.candidates.push_back(make_pair_candidate(ConstraintKind::Perpendicular, a, b, Provenance::System));
        }
    }
    // One shared-vertex and one disjoint perpendicular pair on every config.
    rc.candidates.push_back(make_pair_candidate(ConstraintKind::Perpendicular, 0, 1, Provenance::System));
    rc.candidates.push_back(make_pair_candidate(ConstraintKind::Perpendicular, 0, 3, Provenance::System));
    rc.candidates.push_back(ConstraintCandidate{ConstraintKind::FacePlanarity, {0}, Provenance::System, std::nullopt});
    rc.candidates.push_back(ConstraintCandidate{ConstraintKind::FacePlanarity, {1}, Provenance::System, std::nullopt});
    rc.candidates.push_back(make_anchor(static_cast<int>(rng.below(m)), rng.uniform(3.0, 9.0), Provenance::System));
    return rc;
}

} // namespace fixtures
