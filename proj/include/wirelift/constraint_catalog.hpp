#pragma once

#include "wirelift/drawing.hpp"
#include "wirelift/polynomial.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace wirelift {

// One scalar equation f_k(Z) = 0 derived from a candidate. All non-anchor
// equations are homogeneous polynomials in Z (degree 2 or 3); the anchor is
// affine and has no homogeneity degree.
class ResidualEquation {
public:
    ResidualEquation(const Polynomial& poly, ConstraintKind kind, int source, int component,
                     std::optional<int> degree);

    double value(const DepthVector& z) const;

    // Partial derivatives, aligned with vars().
    std::vector<double> gradient(const DepthVector& z) const;

    // Adds scale * gradient into a dense Jacobian row.
    void add_gradient(const DepthVector& z, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, double scale = 1.0) const;

    const std::vector<int>& vars() const { return vars_; }
    const std::vector<Polynomial::Term>& terms() const { return terms_; }
    ConstraintKind kind() const { return kind_; }
    std::optional<int> degree() const { return degree_; }

    // Index of the originating candidate in the list passed to build_system.
    int source() const { return source_; }
    // Position of this equation among the candidate's equations.
    int component() const { return component_; }

    int id = 0;
    // Residual scale s_k = max(1, |f_k(Z0)|); 1 until assigned.
    double scale = 1.0;

private:
    std::vector<Polynomial::Term> terms_;
    std::vector<int> vars_;
    ConstraintKind kind_;
    int source_;
    int component_;
    std::optional<int> degree_;
};

struct EquationSystem {
    std::vector<ResidualEquation> equations;
    int num_vars = 0;

    Eigen::VectorXd values(const DepthVector& z, bool scaled = false) const;
    Eigen::MatrixXd jacobian(const DepthVector& z, bool scaled = false) const;
};

// Residual builders. `source` is recorded on the emitted equations.
std::vector<ResidualEquation> perpendicular_residual(const ConstraintCandidate& c, const LineDrawing& d, int source = 0);
std::vector<ResidualEquation> parallel_residual(const ConstraintCandidate& c, const LineDrawing& d, int source = 0);
std::vector<ResidualEquation> equal_length_residual(const ConstraintCandidate& c, const LineDrawing& d, int source = 0);
std::vector<ResidualEquation> planarity_residual(const ConstraintCandidate& c, const LineDrawing& d, int source = 0);
ResidualEquation anchor_residual(const ConstraintCandidate& c, int source = 0);

// Dispatch on kind.
std::vector<ResidualEquation> candidate_equations(const ConstraintCandidate& c, const LineDrawing& d, int source = 0);

// Equations ordered by (candidate order, component order); ids are positions.
EquationSystem build_system(const std::vector<ConstraintCandidate>& cands, const LineDrawing& d);

// Sets s_k = max(1, |f_k(z0)|) on every equation.
void assign_scales(std::vector<ResidualEquation>& equations, const DepthVector& z0);

} // namespace wirelift
