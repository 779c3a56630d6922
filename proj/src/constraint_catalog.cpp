#include "wirelift/constraint_catalog.hpp"

#include "wirelift/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wirelift {

ResidualEquation::ResidualEquation(const Polynomial& poly, ConstraintKind kind, int source, int component,
                                   std::optional<int> degree)
    : terms_(poly.terms()), vars_(poly.variables()), kind_(kind), source_(source), component_(component),
      degree_(degree)
{
}

double ResidualEquation::value(const DepthVector& z) const
{
    double sum = 0.0;
    for (const auto& t : terms_) {
        double m = t.coef;
        for (int v : t.vars) {
            if (v >= 0) {
                m *= z[v];
            }
        }
        sum += m;
    }
    return sum;
}

void ResidualEquation::add_gradient(const DepthVector& z, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, double scale) const
{
    for (const auto& t : terms_) {
        for (int slot = 0; slot < 3; ++slot) {
            if (t.vars[slot] < 0) {
                continue;
            }
            double m = t.coef * scale;
            for (int other = 0; other < 3; ++other) {
                if (other != slot && t.vars[other] >= 0) {
                    m *= z[t.vars[other]];
                }
            }
            row[t.vars[slot]] += m;
        }
    }
}

std::vector<double> ResidualEquation::gradient(const DepthVector& z) const
{
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(z.size());
    add_gradient(z, row);
    std::vector<double> out;
    out.reserve(vars_.size());
    for (int v : vars_) {
        out.push_back(row[v]);
    }
    return out;
}

Eigen::VectorXd EquationSystem::values(const DepthVector& z, bool scaled) const
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(equations.size()));
    for (std::size_t k = 0; k < equations.size(); ++k) {
        const auto& eq = equations[k];
        out[static_cast<Eigen::Index>(k)] = eq.value(z) / (scaled ? eq.scale : 1.0);
    }
    return out;
}

Eigen::MatrixXd EquationSystem::jacobian(const DepthVector& z, bool scaled) const
{
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(equations.size()), num_vars);
    for (std::size_t k = 0; k < equations.size(); ++k) {
        const auto& eq = equations[k];
        eq.add_gradient(z, jac.row(static_cast<Eigen::Index>(k)), scaled ? 1.0 / eq.scale : 1.0);
    }
    return jac;
}

namespace {

const Edge& edge_at(const LineDrawing& d, int index)
{
    if (index < 0 || static_cast<std::size_t>(index) >= d.edges.size()) {
        throw DomainError("edge index " + std::to_string(index) + " out of range");
    }
    return d.edges[index];
}

void require_pair(const ConstraintCandidate& c, ConstraintKind kind)
{
    if (c.kind != kind || c.entities.size() != 2) {
        throw DomainError(std::string("expected a ") + std::string(to_string(kind)) + " candidate on two edges");
    }
}

PolyVec3 lifted(const LineDrawing& d, int vertex)
{
    return lifted_vertex(vertex, view_ray(d.vertices[vertex], d.camera));
}

// Pb - Pa for edge endpoints (a, b).
PolyVec3 edge_vector(const LineDrawing& d, const Edge& e)
{
    return lifted(d, e.endpoints[1]) - lifted(d, e.endpoints[0]);
}

void require_nonzero_projection(const LineDrawing& d, const Edge& e, int index)
{
    const auto& a = d.vertices[e.endpoints[0]];
    const auto& b = d.vertices[e.endpoints[1]];
    if (a.x == b.x && a.y == b.y) {
        throw DomainError("edge " + std::to_string(index) + " projects to zero length");
    }
}

} // namespace

std::vector<ResidualEquation> perpendicular_residual(const ConstraintCandidate& c, const LineDrawing& d, int source)
{
    require_pair(c, ConstraintKind::Perpendicular);
    const Edge& e0 = edge_at(d, c.entities[0]);
    const Edge& e1 = edge_at(d, c.entities[1]);
    const auto [a, b] = e0.endpoints;
    const auto [p, q] = e1.endpoints;
    const bool share_a = (a == p || a == q);
    const bool share_b = (b == p || b == q);
    if (share_a && share_b) {
        throw DomainError("perpendicular: edges " + std::to_string(c.entities[0]) + " and " +
                          std::to_string(c.entities[1]) + " share both endpoints");
    }

    Polynomial poly;
    if (share_a || share_b) {
        // Shared vertex V2 with outer endpoints V1 (first edge) and V3 (second
        // edge): (V1 - V2) . (V2 - V3), which expands to the four-term form
        // ((x1x2+y1y2)/f^2+1) Z1Z2 - ((x1x3+y1y3)/f^2+1) Z1Z3
        //   - ((x2^2+y2^2)/f^2+1) Z2^2 + ((x2x3+y2y3)/f^2+1) Z2Z3.
        const int v2 = share_a ? a : b;
        const int v1 = share_a ? b : a;
        const int v3 = (p == v2) ? q : p;
        poly = dot(lifted(d, v1) - lifted(d, v2), lifted(d, v2) - lifted(d, v3));
    } else {
        poly = dot(edge_vector(d, e0), edge_vector(d, e1));
    }
    return {ResidualEquation(poly, ConstraintKind::Perpendicular, source, 0, 2)};
}

std::vector<ResidualEquation> parallel_residual(const ConstraintCandidate& c, const LineDrawing& d, int source)
{
    require_pair(c, ConstraintKind::Parallel);
    const Edge& e0 = edge_at(d, c.entities[0]);
    const Edge& e1 = edge_at(d, c.entities[1]);
    require_nonzero_projection(d, e0, c.entities[0]);
    require_nonzero_projection(d, e1, c.entities[1]);
    const PolyVec3 x = cross(edge_vector(d, e0), edge_vector(d, e1));
    std::vector<ResidualEquation> out;
    for (int comp = 0; comp < 3; ++comp) {
        out.emplace_back(x[comp], ConstraintKind::Parallel, source, comp, 2);
    }
    return out;
}

std::vector<ResidualEquation> equal_length_residual(const ConstraintCandidate& c, const LineDrawing& d, int source)
{
    require_pair(c, ConstraintKind::EqualLength);
    const Edge& e0 = edge_at(d, c.entities[0]);
    const Edge& e1 = edge_at(d, c.entities[1]);
    require_nonzero_projection(d, e0, c.entities[0]);
    require_nonzero_projection(d, e1, c.entities[1]);
    const PolyVec3 u = edge_vector(d, e0);
    const PolyVec3 w = edge_vector(d, e1);
    return {ResidualEquation(dot(u, u) - dot(w, w), ConstraintKind::EqualLength, source, 0, 2)};
}

std::vector<ResidualEquation> planarity_residual(const ConstraintCandidate& c, const LineDrawing& d, int source)
{
    if (c.kind != ConstraintKind::FacePlanarity || c.entities.size() != 1) {
        throw DomainError("expected a face_planarity candidate on one face");
    }
    if (!d.faces || c.entities[0] < 0 || static_cast<std::size_t>(c.entities[0]) >= d.faces->size()) {
        throw DomainError("face index " + std::to_string(c.entities[0]) + " out of range");
    }
    const auto& face = (*d.faces)[c.entities[0]];
    const std::size_t p = face.size();
    if (p < 4) {
        return {};
    }

    // Pivot triple: the first (in face order) whose viewing rays are not
    // coplanar, i.e. whose image points are not collinear.
    std::array<std::size_t, 3> pivot{};
    bool found = false;
    for (std::size_t i = 0; i < p && !found; ++i) {
        for (std::size_t j = i + 1; j < p && !found; ++j) {
            for (std::size_t k = j + 1; k < p && !found; ++k) {
                const Eigen::Vector3d ri = view_ray(d.vertices[face[i]], d.camera);
                const Eigen::Vector3d rj = view_ray(d.vertices[face[j]], d.camera);
                const Eigen::Vector3d rk = view_ray(d.vertices[face[k]], d.camera);
                const double det = ri.dot(rj.cross(rk));
                if (std::abs(det) > 1e-9 * ri.norm() * rj.norm() * rk.norm()) {
                    pivot = {i, j, k};
                    found = true;
                }
            }
        }
    }
    if (!found) {
        throw DomainError("face " + std::to_string(c.entities[0]) + ": all vertex triples are collinear in the image");
    }

    const PolyVec3 v1 = lifted(d, face[pivot[0]]);
    const PolyVec3 u = lifted(d, face[pivot[1]]) - v1;
    const PolyVec3 w = lifted(d, face[pivot[2]]) - v1;
    const PolyVec3 n = cross(u, w);
    std::vector<ResidualEquation> out;
    int comp = 0;
    for (std::size_t k = 0; k < p; ++k) {
        if (k == pivot[0] || k == pivot[1] || k == pivot[2]) {
            continue;
        }
        out.emplace_back(dot(n, lifted(d, face[k]) - v1), ConstraintKind::FacePlanarity, source, comp++, 3);
    }
    return out;
}

ResidualEquation anchor_residual(const ConstraintCandidate& c, int source)
{
    if (c.kind != ConstraintKind::Anchor || c.entities.size() != 1 || !c.anchor_value) {
        throw DomainError("expected an anchor candidate with a value");
    }
    if (!(*c.anchor_value > 0.0)) {
        throw DomainError("anchor value must be positive");
    }
    const Polynomial poly = Polynomial::variable(c.entities[0]) - Polynomial::constant(*c.anchor_value);
    return ResidualEquation(poly, ConstraintKind::Anchor, source, 0, std::nullopt);
}

std::vector<ResidualEquation> candidate_equations(const ConstraintCandidate& c, const LineDrawing& d, int source)
{
    switch (c.kind) {
    case ConstraintKind::Parallel:
        return parallel_residual(c, d, source);
    case ConstraintKind::Perpendicular:
        return perpendicular_residual(c, d, source);
    case ConstraintKind::EqualLength:
        return equal_length_residual(c, d, source);
    case ConstraintKind::FacePlanarity:
        return planarity_residual(c, d, source);
    case ConstraintKind::Anchor:
        return {anchor_residual(c, source)};
    }
    return {};
}

EquationSystem build_system(const std::vector<ConstraintCandidate>& cands, const LineDrawing& d)
{
    EquationSystem sys;
    sys.num_vars = static_cast<int>(d.vertices.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
        for (auto& eq : candidate_equations(cands[i], d, static_cast<int>(i))) {
            eq.id = static_cast<int>(sys.equations.size());
            sys.equations.push_back(std::move(eq));
        }
    }
    return sys;
}

void assign_scales(std::vector<ResidualEquation>& equations, const DepthVector& z0)
{
    for (auto& eq : equations) {
        eq.scale = std::max(1.0, std::abs(eq.value(z0)));
    }
}

} // namespace wirelift
