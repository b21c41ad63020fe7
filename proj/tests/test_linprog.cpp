// Simplex solver: spec examples, exactness, and duality spot-checks.
#include "doctest.h"

#include "qk/linprog.hpp"
#include "test_helpers.hpp"

using qk::testing::rq;

#include <random>

using namespace qk;

TEST_CASE("lp: maximize x subject to x <= 1") {
    LinearProgram<Rat> lp;
    lp.c = {Rat(1)};
    lp.a_le = Mat<Rat>{{Rat(1)}};
    lp.b_le = {Rat(1)};
    auto res = solve_lp(lp);
    REQUIRE(res.status == LpStatus::optimal);
    CHECK(res.value == Rat(1));
    CHECK(res.x[0] == Rat(1));
}

TEST_CASE("lp: infeasible box") {
    // x >= 0 and x <= -1
    LinearProgram<Rat> lp;
    lp.c = {Rat(0)};
    lp.a_le = Mat<Rat>{{Rat(1)}};
    lp.b_le = {Rat(-1)};
    auto res = solve_lp(lp);
    CHECK(res.status == LpStatus::infeasible);
}

TEST_CASE("lp: unbounded") {
    LinearProgram<Rat> lp;
    lp.c = {Rat(1)};
    auto res = solve_lp(lp);
    CHECK(res.status == LpStatus::unbounded);
}

TEST_CASE("lp: free variable reaches a negative optimum") {
    // minimize y subject to y >= -3 (y free)
    LinearProgram<Rat> lp;
    lp.maximize = false;
    lp.c = {Rat(1)};
    lp.free_var = {true};
    lp.a_le = Mat<Rat>{{Rat(-1)}};
    lp.b_le = {Rat(3)};
    auto res = solve_lp(lp);
    REQUIRE(res.status == LpStatus::optimal);
    CHECK(res.value == Rat(-3));
}

TEST_CASE("lp: equality system with the coin witness structure") {
    // feasibility of P'2 = P2 T^T over substochastic T, |E|=2, M2=4, M'=3
    const Rat p2[2][4] = {{rq(18, 100), rq(12, 100), rq(12, 100), rq(8, 100)},
                          {rq(8, 100), rq(12, 100), rq(12, 100), rq(18, 100)}};
    const Rat p2p[2][3] = {{rq(18, 100), rq(24, 100), rq(8, 100)},
                           {rq(8, 100), rq(24, 100), rq(18, 100)}};
    LinearProgram<Rat> lp;
    lp.c.assign(12, Rat(0));  // T is 3x4
    lp.a_eq = Mat<Rat>(6, 12);
    lp.b_eq.resize(6);
    for (int e = 0; e < 2; ++e)
        for (int m = 0; m < 3; ++m) {
            for (int k = 0; k < 4; ++k) lp.a_eq(e * 3 + m, m * 4 + k) = p2[e][k];
            lp.b_eq[e * 3 + m] = p2p[e][m];
        }
    lp.a_le = Mat<Rat>(4, 12);
    lp.b_le.assign(4, Rat(1));
    for (int k = 0; k < 4; ++k)
        for (int m = 0; m < 3; ++m) lp.a_le(k, m * 4 + k) = Rat(1);

    auto res = solve_lp(lp);
    REQUIRE(res.status == LpStatus::optimal);
    // substituting the point back satisfies everything exactly
    for (int e = 0; e < 2; ++e)
        for (int m = 0; m < 3; ++m) {
            Rat acc(0);
            for (int k = 0; k < 4; ++k) acc += p2[e][k] * res.x[m * 4 + k];
            CHECK(acc == p2p[e][m]);
        }
    // the hand-written counting matrix is itself feasible
    const Rat t2[3][4] = {{Rat(1), Rat(0), Rat(0), Rat(0)},
                          {Rat(0), Rat(1), Rat(1), Rat(0)},
                          {Rat(0), Rat(0), Rat(0), Rat(1)}};
    for (int e = 0; e < 2; ++e)
        for (int m = 0; m < 3; ++m) {
            Rat acc(0);
            for (int k = 0; k < 4; ++k) acc += p2[e][k] * t2[m][k];
            CHECK(acc == p2p[e][m]);
        }
}

TEST_CASE("lp: exact primal-dual agreement on random instances") {
    testing::RatGen gen(20260808);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = static_cast<std::size_t>(gen.integer(1, 3));
        const std::size_t m = static_cast<std::size_t>(gen.integer(1, 3));
        // primal: max c.x st A x <= b, x >= 0, plus sum(x) <= 10 for boundedness
        LinearProgram<Rat> primal;
        primal.c.resize(n);
        for (auto& v : primal.c) v = gen.rat(5, 3);
        primal.a_le = Mat<Rat>(m + 1, n);
        primal.b_le.resize(m + 1);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) primal.a_le(i, j) = gen.rat(4, 2);
            primal.b_le[i] = gen.positive_rat(8, 2);
        }
        for (std::size_t j = 0; j < n; ++j) primal.a_le(m, j) = Rat(1);
        primal.b_le[m] = Rat(10);

        // dual: min b.y st A^T y >= c, y >= 0
        LinearProgram<Rat> dual;
        dual.maximize = false;
        dual.c = primal.b_le;
        dual.a_le = Mat<Rat>(n, m + 1);
        dual.b_le.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < m + 1; ++i) dual.a_le(j, i) = -primal.a_le(i, j);
            dual.b_le[j] = -primal.c[j];
        }

        auto pres = solve_lp(primal);
        auto dres = solve_lp(dual);
        REQUIRE(pres.status == LpStatus::optimal);
        REQUIRE(dres.status == LpStatus::optimal);
        CHECK(pres.value == dres.value);
    }
}

TEST_CASE("lp: float mode solves within tolerance") {
    LinearProgram<double> lp;
    lp.c = {3.0, 2.0};
    lp.a_le = Mat<double>{{1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}};
    lp.b_le = {4.0, 2.0, 3.0};
    auto res = solve_lp(lp);
    REQUIRE(res.status == LpStatus::optimal);
    CHECK(res.value == doctest::Approx(10.0));
    CHECK(res.x[0] == doctest::Approx(2.0));
    CHECK(res.x[1] == doctest::Approx(2.0));
}

TEST_CASE("lp: degenerate equality cascade stays finite") {
    // many redundant equalities sharing one solution
    LinearProgram<Rat> lp;
    lp.maximize = false;
    const std::size_t n = 6;
    lp.c.assign(n, Rat(1));
    lp.a_eq = Mat<Rat>(4, n);
    lp.b_eq.assign(4, Rat(0));
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t j = 0; j < n; ++j) lp.a_eq(r, j) = (j % (r + 1) == 0) ? Rat(1) : Rat(-1);
    auto res = solve_lp(lp);
    REQUIRE(res.status == LpStatus::optimal);
    CHECK(res.value == Rat(0));
}
