#include "wirelift/polynomial.hpp"

#include <algorithm>
#include <stdexcept>

namespace wirelift {

namespace {

int key_degree(const Polynomial::Key& k)
{
    return static_cast<int>(std::count_if(k.begin(), k.end(), [](int v) { return v >= 0; }));
}

} // namespace

Polynomial Polynomial::constant(double c)
{
    Polynomial p;
    p.coef_[{-1, -1, -1}] = c;
    return p;
}

Polynomial Polynomial::variable(int index, double coef)
{
    Polynomial p;
    p.coef_[{-1, -1, index}] = coef;
    return p;
}

Polynomial& Polynomial::operator+=(const Polynomial& other)
{
    for (const auto& [k, c] : other.coef_) {
        coef_[k] += c;
    }
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other)
{
    for (const auto& [k, c] : other.coef_) {
        coef_[k] -= c;
    }
    return *this;
}

Polynomial& Polynomial::operator*=(double s)
{
    for (auto& [k, c] : coef_) {
        c *= s;
    }
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b)
{
    Polynomial out;
    for (const auto& [ka, ca] : a.coef_) {
        for (const auto& [kb, cb] : b.coef_) {
            std::array<int, 6> merged{};
            int n = 0;
            for (int v : ka) {
                if (v >= 0) {
                    merged[n++] = v;
                }
            }
            for (int v : kb) {
                if (v >= 0) {
                    merged[n++] = v;
                }
            }
            if (n > 3) {
                throw std::logic_error("Polynomial: degree above 3");
            }
            Polynomial::Key key{-1, -1, -1};
            std::sort(merged.begin(), merged.begin() + n);
            std::copy(merged.begin(), merged.begin() + n, key.begin() + (3 - n));
            out.coef_[key] += ca * cb;
        }
    }
    return out;
}

std::vector<Polynomial::Term> Polynomial::terms() const
{
    std::vector<Term> out;
    for (const auto& [k, c] : coef_) {
        if (c != 0.0) {
            out.push_back(Term{c, k});
        }
    }
    return out;
}

std::vector<int> Polynomial::variables() const
{
    std::vector<int> vars;
    for (const auto& t : terms()) {
        for (int v : t.vars) {
            if (v >= 0) {
                vars.push_back(v);
            }
        }
    }
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

int Polynomial::degree() const
{
    int d = -1;
    for (const auto& t : terms()) {
        d = std::max(d, key_degree(t.vars));
    }
    return d;
}

bool Polynomial::homogeneous() const
{
    const auto ts = terms();
    return std::all_of(ts.begin(), ts.end(), [&](const Term& t) { return key_degree(t.vars) == key_degree(ts.front().vars); });
}

PolyVec3 lifted_vertex(int index, const Eigen::Vector3d& ray)
{
    return {Polynomial::variable(index, ray.x()), Polynomial::variable(index, ray.y()),
            Polynomial::variable(index, ray.z())};
}

PolyVec3 operator-(const PolyVec3& a, const PolyVec3& b)
{
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

Polynomial dot(const PolyVec3& a, const PolyVec3& b)
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

PolyVec3 cross(const PolyVec3& a, const PolyVec3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

} // namespace wirelift
