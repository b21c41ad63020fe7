// Eigendecomposition and the alternating-projection PSD solver.
#include "doctest.h"

#include "qk/eig.hpp"
#include "qk/psd.hpp"
#include "qk/opt_tasks.hpp"
#include "test_helpers.hpp"

using namespace qk;

namespace {

Mat<Cx<double>> real_mat(std::initializer_list<std::initializer_list<double>> rows) {
    Mat<Cx<double>> m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& r : rows) {
        std::size_t j = 0;
        for (double v : r) m(i, j++) = {v, 0.0};
        ++i;
    }
    return m;
}

}  // namespace

TEST_CASE("eig: identity and diag(1,-1)") {
    auto e1 = eig_herm(real_mat({{1, 0}, {0, 1}}));
    CHECK(e1.values[0] == doctest::Approx(1.0));
    CHECK(e1.values[1] == doctest::Approx(1.0));
    auto e2 = eig_herm(real_mat({{1, 0}, {0, -1}}));
    CHECK(e2.values[0] == doctest::Approx(1.0));
    CHECK(e2.values[1] == doctest::Approx(-1.0));
}

TEST_CASE("eig: rejects non-Hermitian input") {
    auto m = real_mat({{1, 2}, {0, 1}});
    CHECK_THROWS_WITH_AS(eig_herm(m), doctest::Contains("Hermitian"), error);
}

TEST_CASE("eig: reconstruction residual on random 5x5") {
    testing::RatGen gen(11);
    for (int t = 0; t < 20; ++t) {
        auto m = gen.hermitian(5);
        auto e = eig_herm(m);
        CHECK(reconstruction_residual(e, m) <= 1e-10);
    }
}

TEST_CASE("psd: nuclear norm of diag(1,-1) is 2") {
    auto x = real_mat({{1, 0}, {0, -1}});
    CHECK(trace_distance_psd(x) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("psd: zero matrix gives zero") {
    Mat<Cx<double>> x(2, 2);
    CHECK(trace_distance_psd(x) == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("psd: random 3x3 matches the eigenvalue oracle within 1e-6") {
    testing::RatGen gen(12);
    for (int t = 0; t < 6; ++t) {
        auto x = gen.hermitian(3);
        double oracle = 0.0;
        for (double v : eigvals_herm(x)) oracle += std::fabs(v);
        CHECK(trace_distance_psd(x) == doctest::Approx(oracle).epsilon(0).scale(1).epsilon(1e-6));
    }
}

TEST_CASE("psd: nuclear-norm agreement up to 8x8") {
    testing::RatGen gen(13);
    for (std::size_t n : {4u, 6u, 8u}) {
        auto x = gen.hermitian(n);
        double oracle = 0.0;
        for (double v : eigvals_herm(x)) oracle += std::fabs(v);
        PsdOptions opts;
        opts.tol = 1e-7;
        double got = trace_distance_psd(x, opts);
        CHECK(std::fabs(got - oracle) <= 2e-6);
    }
}

TEST_CASE("psd: equality constraints are honored") {
    // minimize y11 + y22 st [[y11, 0.5],[0.5, y22]] psd and y11 = 2 y22
    PsdProgram prog;
    prog.num_vars = 2;
    prog.objective = {1.0, 1.0};
    prog.objective_lower_bound = 0.0;
    PsdBlockMap b;
    b.constant = real_mat({{0, 0.5}, {0.5, 0}});
    b.coeff = {real_mat({{1, 0}, {0, 0}}), real_mat({{0, 0}, {0, 1}})};
    prog.blocks.push_back(std::move(b));
    prog.eq = Mat<double>{{1.0, -2.0}};
    prog.eq_rhs = {0.0};
    auto res = solve_psd_program(prog);
    REQUIRE(res.status == PsdStatus::solved);
    // optimum: y11 y22 >= 1/4 with y11 = 2 y22 -> y22 = 1/sqrt(8)
    const double y22 = 1.0 / std::sqrt(8.0);
    CHECK(res.value == doctest::Approx(3.0 * y22).epsilon(1e-4));
    CHECK(std::fabs(res.y[0] - 2.0 * res.y[1]) <= 1e-7);
}

TEST_CASE("psd: dimension cap is enforced") {
    PsdProgram prog;
    prog.num_vars = 1;
    prog.objective = {0.0};
    PsdBlockMap b;
    b.constant = Mat<Cx<double>>(65, 65);
    b.coeff = {Mat<Cx<double>>(65, 65)};
    prog.blocks.push_back(std::move(b));
    CHECK_THROWS_AS(solve_psd_program(prog), error);
}

TEST_CASE("pinv and wave_factor recover gram factors") {
    testing::RatGen gen(14);
    auto h = gen.hermitian(4);
    auto g = clamp_psd(h);
    auto psi = wave_factor(g);
    // psi psi^dagger == g
    double worst = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            Cx<double> acc{0, 0};
            for (std::size_t k = 0; k < psi.cols(); ++k) acc += psi(i, k) * conj(psi(j, k));
            Cx<double> d = acc - g(i, j);
            worst = std::max(worst, std::hypot(d.re, d.im));
        }
    CHECK(worst <= 1e-10);
    // pinv gives a left-inverse on the column space
    auto k = pinv(psi) * psi;
    CHECK(sv_max(k) <= 1.0 + 1e-9);
}
