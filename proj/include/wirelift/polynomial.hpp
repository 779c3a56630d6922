#pragma once

#include <Eigen/Core>

#include <array>
#include <map>
#include <vector>

namespace wirelift {

// Polynomial of degree <= 3 in the depth variables, stored as a sparse list of
// monomials. Unused variable slots hold -1 and sort first, so a degree-d
// monomial keeps its variables in the last d slots.
class Polynomial {
public:
    using Key = std::array<int, 3>;

    struct Term {
        double coef;
        Key vars;
    };

    Polynomial() = default;

    static Polynomial constant(double c);
    static Polynomial variable(int index, double coef = 1.0);

    Polynomial& operator+=(const Polynomial& other);
    Polynomial& operator-=(const Polynomial& other);
    Polynomial& operator*=(double s);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

    // Terms with exactly-zero coefficients are dropped.
    std::vector<Term> terms() const;

    // Sorted, unique variable indices that appear with a nonzero coefficient.
    std::vector<int> variables() const;

    // Largest monomial degree, or -1 for the zero polynomial.
    int degree() const;

    // True when every monomial has the same degree.
    bool homogeneous() const;

private:
    std::map<Key, double> coef_;
};

// 3-vector of polynomials; lets residuals be written as vector algebra over
// lifted vertices Z_i * ray_i.
using PolyVec3 = std::array<Polynomial, 3>;

PolyVec3 lifted_vertex(int index, const Eigen::Vector3d& ray);
PolyVec3 operator-(const PolyVec3& a, const PolyVec3& b);
Polynomial dot(const PolyVec3& a, const PolyVec3& b);
PolyVec3 cross(const PolyVec3& a, const PolyVec3& b);

} // namespace wirelift
