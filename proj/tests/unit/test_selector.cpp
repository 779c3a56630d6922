#include "fixtures.hpp"

#include "wirelift/selector.hpp"

#include <Eigen/SVD>
#include <doctest.h>

#include <numeric>

using namespace wirelift;
using fixtures::linear_equation;

namespace {

// Runs the three checks and accepts on success; returns whether accepted.
bool offer(SelectionState& state, const ResidualEquation& eq)
{
    auto m = augment_matching(state, eq);
    if (!m) {
        return false;
    }
    const auto cons = check_consistent(state, eq);
    if (!cons.consistent || !check_not_redundant(state, eq, cons.z)) {
        return false;
    }
    state.accept(eq, *m, cons.z);
    return true;
}

// Hall's condition by enumeration: every subset S of equations touches at
// least |S| variables.
bool hall_holds(const std::vector<std::vector<int>>& eq_vars)
{
    const std::size_t n = eq_vars.size();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        unsigned touched = 0;
        int size = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                ++size;
                for (int v : eq_vars[i]) {
                    touched |= 1u << v;
                }
            }
        }
        if (std::popcount(touched) < size) {
            return false;
        }
    }
    return true;
}

std::vector<int> identity_order(std::size_t n)
{
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    return order;
}

// Equations of a selected system re-matched from scratch.
bool saturating(const EquationSystem& sys)
{
    SelectionState st(sys.num_vars, DepthVector::Ones(sys.num_vars));
    for (const auto& eq : sys.equations) {
        auto m = augment_matching(st, eq);
        if (!m) {
            return false;
        }
        st.accepted.push_back(eq);
        st.matching = *m;
    }
    return true;
}

} // namespace

TEST_SUITE("selector")
{
    TEST_CASE("Z1 + Z2 = 1 and Z1 + Z2 = -1 are inconsistent")
    {
        SelectionState st(2, DepthVector::Constant(2, 0.3));
        REQUIRE(offer(st, linear_equation({1, 1}, -1)));
        const auto eq = linear_equation({1, 1}, 1);
        REQUIRE(check_structural(st, eq));
        CHECK_FALSE(check_consistent(st, eq).consistent);
    }

    TEST_CASE("2 Z1 + 2 Z2 = 2 is redundant after Z1 + Z2 = 1")
    {
        SelectionState st(2, DepthVector::Constant(2, 0.3));
        REQUIRE(offer(st, linear_equation({1, 1}, -1)));
        const auto eq = linear_equation({2, 2}, -2);
        REQUIRE(check_structural(st, eq));
        const auto cons = check_consistent(st, eq);
        REQUIRE(cons.consistent);
        CHECK(redundancy_measure(st, eq, cons.z) < 1e-8);
        CHECK_FALSE(check_not_redundant(st, eq, cons.z));
    }

    TEST_CASE("three equations on two variables fail structurally")
    {
        SelectionState st(3, DepthVector::Constant(3, 0.3));
        REQUIRE(offer(st, linear_equation({1, 1, 0}, -1)));
        REQUIRE(offer(st, linear_equation({1, -1, 0}, 0)));
        CHECK_FALSE(check_structural(st, linear_equation({3, 1, 0}, -2)));
        CHECK(st.accepted.size() == 2);
    }

    TEST_CASE("equation over a fresh variable")
    {
        SelectionState st(3, DepthVector::Constant(3, 0.3));
        REQUIRE(offer(st, linear_equation({1, 1, 0}, -1)));
        const auto eq = linear_equation({0, 0, 1}, -4);
        CHECK(check_structural(st, eq));
        const auto cons = check_consistent(st, eq);
        REQUIRE(cons.consistent);
        CHECK(check_not_redundant(st, eq, cons.z));
        CHECK(cons.z[2] == doctest::Approx(4.0));
    }

    TEST_CASE("structural check agrees with Hall's condition on 4 variables")
    {
        Rng rng(31);
        for (int trial = 0; trial < 300; ++trial) {
            SelectionState st(4, DepthVector::Ones(4));
            std::vector<std::vector<int>> accepted_vars;
            for (int k = 0; k < 6; ++k) {
                std::vector<double> coefs(4, 0.0);
                std::vector<int> vars;
                for (int v = 0; v < 4; ++v) {
                    if (rng.uniform() < 0.4) {
                        coefs[v] = 1.0;
                        vars.push_back(v);
                    }
                }
                if (vars.empty()) {
                    continue;
                }
                const auto eq = linear_equation(coefs, 0.0);
                auto all = accepted_vars;
                all.push_back(vars);
                const bool expect = all.size() <= 4 && hall_holds(all);
                const auto m = augment_matching(st, eq);
                CHECK(m.has_value() == expect);
                if (m) {
                    st.accepted.push_back(eq);
                    st.matching = *m;
                    accepted_vars = all;
                }
            }
        }
    }

    TEST_CASE("perfect matching on K variables blocks another equation on them")
    {
        SelectionState st(4, DepthVector::Ones(4));
        for (const auto& c : std::vector<std::vector<double>>{{1, 1, 0, 0}, {0, 1, 1, 0}, {1, 0, 1, 0}}) {
            const auto eq = linear_equation(c, 0.0);
            auto m = augment_matching(st, eq);
            REQUIRE(m);
            st.accepted.push_back(eq);
            st.matching = *m;
        }
        CHECK_FALSE(check_structural(st, linear_equation({1, 1, 1, 0}, 0.0)));
        CHECK(check_structural(st, linear_equation({1, 0, 0, 1}, 0.0)));
    }

    TEST_CASE("single equation at ground truth is consistent and barely moves")
    {
        const Scene scene = fixtures::cuboid_scene();
        for (const auto& c : scene.gt_constraints) {
            for (const auto& eq : candidate_equations(c, scene.drawing)) {
                SelectionState st(static_cast<int>(scene.gt.size()), scene.gt);
                const auto cons = check_consistent(st, eq);
                CHECK(cons.consistent);
                CHECK((cons.z - scene.gt).cwiseAbs().maxCoeff() < 1e-6);
            }
        }
    }

    TEST_CASE("third cross-product component is redundant on parallel edges")
    {
        for (std::uint64_t s = 0; s < 20; ++s) {
            auto rc = fixtures::random_config(500 + s);
            // Move vertex 3 so edge 2 (2-3) is parallel to edge 0 (0-1) in 3D.
            const auto& cam = rc.drawing.camera;
            const auto& vs = rc.drawing.vertices;
            const Eigen::Vector3d u = unproject(vs[1], rc.z[1], cam) - unproject(vs[0], rc.z[0], cam);
            Eigen::Vector3d p3 = unproject(vs[2], rc.z[2], cam) + 0.8 * u;
            if (p3.z() < 1.0) {
                p3 = unproject(vs[2], rc.z[2], cam) - 0.8 * u;
            }
            const Eigen::Vector2d q = project(p3, cam);
            rc.drawing.vertices[3] = Vertex2D{q.x(), q.y()};
            rc.z[3] = p3.z();
            const auto eqs = parallel_residual(make_pair_candidate(ConstraintKind::Parallel, 0, 2, Provenance::System),
                                               rc.drawing);
            SelectionState st(static_cast<int>(rc.z.size()), rc.z);
            REQUIRE(offer(st, eqs[0]));
            REQUIRE(offer(st, eqs[1]));
            const auto cons = check_consistent(st, eqs[2]);
            REQUIRE(cons.consistent);
            CHECK_FALSE(check_not_redundant(st, eqs[2], cons.z));
        }
    }

    TEST_CASE("false 60 degree perpendicular is inconsistent on a near-determined system")
    {
        SceneSpec spec = random_spec(SceneFamily::NPrism, 4);
        spec.size_params = {3, 1.0, 1.3};
        const Scene scene = generate_scene(spec);
        const auto sel = select_constraints(with_anchor(scene.gt_constraints, scene.drawing), scene.drawing, scene.gt, 1);
        REQUIRE(sel.solvable);
        // Two edges of a triangular cap meet at 60 degrees.
        const auto pts = lift(scene.drawing, scene.gt);
        auto dir = [&](std::size_t e) {
            const auto& ep = scene.drawing.edges[e].endpoints;
            return Eigen::Vector3d(pts[ep[1]] - pts[ep[0]]).normalized();
        };
        int e0 = -1, e1 = -1;
        for (std::size_t i = 0; i < scene.drawing.edges.size() && e0 < 0; ++i) {
            for (std::size_t j = i + 1; j < scene.drawing.edges.size(); ++j) {
                if (std::abs(std::abs(dir(i).dot(dir(j))) - 0.5) < 1e-9) {
                    e0 = static_cast<int>(i);
                    e1 = static_cast<int>(j);
                    break;
                }
            }
        }
        REQUIRE(e0 >= 0);
        const auto false_eq = perpendicular_residual(
            make_pair_candidate(ConstraintKind::Perpendicular, e0, e1, Provenance::Heuristic), scene.drawing)[0];
        SelectionState st(sel.system.num_vars, scene.gt);
        for (std::size_t k = 0; k + 1 < sel.system.equations.size(); ++k) {
            const auto& eq = sel.system.equations[k];
            const auto m = augment_matching(st, eq);
            REQUIRE(m);
            st.accepted.push_back(eq);
            st.matching = *m;
        }
        CHECK_FALSE(check_consistent(st, false_eq).consistent);
    }

    TEST_CASE("ground-truth cuboid selects exactly m equations")
    {
        const Scene scene = fixtures::cuboid_scene();
        const auto pool = with_anchor(scene.gt_constraints, scene.drawing);
        const DepthVector z0 = make_initial(scene.drawing, InitStrategy{InitKind::GTNoise, 0.05}, 3);
        const auto sel = select_constraints(pool, scene.drawing, z0, 9);
        REQUIRE(sel.solvable);
        CHECK(sel.system.equations.size() == scene.gt.size());
        CHECK(sel.system.equations.front().kind() == ConstraintKind::Anchor);
        CHECK(saturating(sel.system));
        CHECK(sel.system.values(scene.gt).cwiseAbs().maxCoeff() < 1e-9);
    }

    TEST_CASE("tetrahedron is unsolvable")
    {
        const Scene scene = fixtures::tetrahedron_scene();
        CHECK(scene.gt_constraints.size() == 1);
        const auto sel = select_constraints(scene.gt_constraints, scene.drawing, scene.gt, 0);
        CHECK_FALSE(sel.solvable);
    }

    TEST_CASE("disjoint parts are unsolvable")
    {
        const Scene scene = fixtures::disjoint_scene();
        const auto pool = with_anchor(scene.gt_constraints, scene.drawing);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto sel = select_constraints(pool, scene.drawing, scene.gt, seed);
            CHECK_FALSE(sel.solvable);
            CHECK(sel.system.equations.size() < scene.gt.size());
        }
        // Far starts leave the least-squares point short of the second part's
        // scale direction; tangent rows must still be refused there.
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const DepthVector z0 = make_initial(scene.drawing, InitStrategy{InitKind::Random, 0.0}, seed);
            CHECK_FALSE(select_constraints(pool, scene.drawing, z0, seed).solvable);
        }
    }

    TEST_CASE("pivot below the least-squares noise floor is redundant")
    {
        SelectionState st(2, DepthVector::Constant(2, 0.5));
        REQUIRE(offer(st, linear_equation({1.0, 1.0}, -1.0)));
        const auto eq = linear_equation({1.0, 1.0 + 1e-5}, -1.0, 1);
        const DepthVector z = st.z_est;
        const double pivot = redundancy_measure(st, eq, z);
        REQUIRE(pivot > 1e-8);
        REQUIRE(pivot < 1e-5);
        CHECK(check_not_redundant(st, eq, z, {}, 0.0));
        CHECK_FALSE(check_not_redundant(st, eq, z, {}, 1e-12));
        SelectorConfig plain;
        plain.qr_noise = 0.0;
        CHECK(check_not_redundant(st, eq, z, plain, 1e-12));
    }

    TEST_CASE("solvable selections are nonsingular at the ground truth")
    {
        for (const Scene& scene : {fixtures::cuboid_scene(), fixtures::oblique_cuboid(), fixtures::cuboid_scene(3)}) {
            const auto pool = with_anchor(scene.gt_constraints, scene.drawing);
            for (std::uint64_t seed = 0; seed < 15; ++seed) {
                const DepthVector z0 = make_initial(scene.drawing, InitStrategy{InitKind::GTNoise, 0.1}, seed);
                const auto sel = select_constraints(pool, scene.drawing, z0, seed);
                if (!sel.solvable) {
                    continue;
                }
                const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sel.system.jacobian(scene.gt, true));
                CHECK(svd.singularValues().minCoeff() > 1e-6);
            }
        }
    }

    TEST_CASE("a false constraint streamed first is accepted")
    {
        const Scene scene = fixtures::oblique_cuboid();
        const auto pts = lift(scene.drawing, scene.gt);
        std::vector<ConstraintCandidate> pool;
        // Any GT-parallel pair declared perpendicular is false.
        for (const auto& c : scene.gt_constraints) {
            if (c.kind == ConstraintKind::Parallel) {
                pool.push_back(make_pair_candidate(ConstraintKind::Perpendicular, c.entities[0], c.entities[1],
                                                   Provenance::Heuristic));
                break;
            }
        }
        for (const auto& c : scene.gt_constraints) {
            pool.push_back(c);
        }
        const auto sel = select_in_order(pool, identity_order(pool.size()), scene.drawing, scene.gt);
        REQUIRE_FALSE(sel.selected_candidates.empty());
        CHECK(std::find(sel.selected_candidates.begin(), sel.selected_candidates.end(), 0) !=
              sel.selected_candidates.end());
    }

    TEST_CASE("anchor is streamed first whatever the order")
    {
        const Scene scene = fixtures::cuboid_scene();
        const auto& pool = scene.gt_constraints;
        auto order = identity_order(pool.size());
        std::reverse(order.begin(), order.end());
        std::rotate(order.begin(), order.begin() + 1, order.end());
        const auto sel = select_in_order(pool, order, scene.drawing, scene.gt);
        REQUIRE_FALSE(sel.selected_candidates.empty());
        CHECK(pool[sel.selected_candidates.front()].kind == ConstraintKind::Anchor);
    }

    TEST_CASE("selection is deterministic and never exceeds m")
    {
        for (std::uint64_t s = 0; s < 10; ++s) {
            const auto family = all_scene_families()[s % all_scene_families().size()];
            const Scene scene = generate_scene(random_spec(family, 40 + s));
            const auto pool = with_anchor(scene.gt_constraints, scene.drawing);
            const DepthVector z0 = make_initial(scene.drawing, InitStrategy{InitKind::GTNoise, 0.05}, s);
            const auto a = select_constraints(pool, scene.drawing, z0, s);
            const auto b = select_constraints(pool, scene.drawing, z0, s);
            CHECK(a.selected_candidates == b.selected_candidates);
            CHECK(a.solvable == b.solvable);
            CHECK(a.system.equations.size() <= scene.gt.size());
            CHECK(saturating(a.system));
        }
    }

    TEST_CASE("more than one anchor is rejected")
    {
        const Scene scene = fixtures::cuboid_scene();
        auto pool = scene.gt_constraints;
        pool.push_back(make_anchor(1, scene.gt[1], Provenance::System));
        CHECK_THROWS_AS(select_constraints(pool, scene.drawing, scene.gt, 0), std::invalid_argument);
    }
}
