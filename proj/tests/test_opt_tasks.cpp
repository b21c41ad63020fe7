// Payoff programs against exhaustive oracles, trace distance, feasibility.
#include "doctest.h"

#include "qk/evolution.hpp"
#include "qk/opt_tasks.hpp"
#include "test_helpers.hpp"

using namespace qk;
using qk::testing::rq;

namespace {

const EnvSpace kEnv2 = EnvSpace::simple({"0", "1"});

// Exhaustive oracle: best payoff over deterministic kernels M -> C u {abstain}.
Rat enumerate_payoff(const Mat<Rat>& p, const Mat<Rat>& v) {
    const std::size_t n_m = p.cols(), n_c = v.cols(), n_e = p.rows();
    Rat best(0);
    std::vector<std::size_t> choice(n_m, 0);  // 0 = abstain, 1..C = output
    for (;;) {
        Rat value(0);
        for (std::size_t m = 0; m < n_m; ++m) {
            if (choice[m] == 0) continue;
            for (std::size_t e = 0; e < n_e; ++e) value += p(e, m) * v(e, choice[m] - 1);
        }
        if (value > best) best = value;
        std::size_t i = 0;
        while (i < n_m && ++choice[i] > n_c) choice[i++] = 0;
        if (i == n_m) break;
    }
    return best;
}

PayoffSpec<Rat> identity_spec() {
    PayoffSpec<Rat> spec;
    spec.outputs = EnvFactor{"C", {"guessH", "guessT"}};
    spec.utility = Mat<Rat>{{rq(1), rq(0)}, {rq(0), rq(1)}};
    return spec;
}

ClassicalSok<Rat> coin_after(int flips) {
    auto scen = coin_scenario<Rat>(rq(3, 5), {rq(1, 2), rq(1, 2)});
    auto s = canonicalize(scen.s0);
    for (int i = 0; i < flips; ++i) s = canonicalize(mul(scen.q, s));
    return s;
}

}  // namespace

TEST_CASE("output_feasible: trivial extension and trace obstruction") {
    testing::RatGen gen(71);
    auto s = gen.nonzero_classical(kEnv2);
    auto x1 = EnvSpace::simple({"*"}, "X");
    auto candidate = at_output(s, x1.factors()[0], "*");
    CHECK(output_feasible(s, candidate).related);

    auto heavy = at_output(scalar_mul(rq(2), s), x1.factors()[0], "*");
    CHECK_FALSE(output_feasible(s, heavy).related);
}

TEST_CASE("output_feasible: encoding the flip result is reachable") {
    auto one_flip = coin_after(1);
    // candidate over E x X with X recording the flip: two columns, each the
    // posterior placed at its own x
    EnvFactor x{"X", {"h", "t"}};
    auto big = EnvSpace::product(kEnv2, EnvSpace::from_factors({x}));
    std::vector<std::vector<Rat>> cols;
    {
        std::vector<Rat> ch(4, rq(0)), ct(4, rq(0));
        ch[0] = rq(3, 10);  // (e=0, h)
        ch[2] = rq(2, 10);  // (e=1, h)
        ct[1] = rq(2, 10);
        ct[3] = rq(3, 10);
        cols = {ch, ct};
    }
    auto candidate = ClassicalSok<Rat>::from_columns(big, cols);
    auto one_flip_env = ClassicalSok<Rat>::from_columns(
        kEnv2, {{rq(3, 10), rq(2, 10)}, {rq(2, 10), rq(3, 10)}});
    CHECK(output_feasible(one_flip_env, candidate).related);
}

TEST_CASE("payoff_average: one flip gives 0.6, the kernel is an argmax") {
    auto one_flip = coin_after(1);
    // rebase labels to match the utility rows
    auto s = ClassicalSok<Rat>::from_columns(kEnv2, {{rq(3, 10), rq(2, 10)}, {rq(2, 10), rq(3, 10)}});
    auto res = payoff_average(s, identity_spec());
    CHECK(res.value == rq(3, 5));
    CHECK(res.value == enumerate_payoff(canonicalize(s).representative(), identity_spec().utility));
}

TEST_CASE("payoff_average: all-zero utility yields zero") {
    PayoffSpec<Rat> spec;
    spec.outputs = EnvFactor{"C", {"c0"}};
    spec.utility = Mat<Rat>(2, 1);
    auto res = payoff_average(coin_after(1), spec);
    CHECK(res.value == rq(0));
}

TEST_CASE("payoff_average: three flips give the majority-vote value 0.648") {
    auto s = ClassicalSok<Rat>::from_columns(
        kEnv2, {{rq(108, 1000), rq(32, 1000)},   // hhh / count 3
                {rq(216, 1000), rq(144, 1000)},  // two heads (3 ways merged)
                {rq(144, 1000), rq(216, 1000)},
                {rq(32, 1000), rq(108, 1000)}});
    auto res = payoff_average(s, identity_spec());
    CHECK(res.value == rq(648, 1000));
    CHECK(res.value == enumerate_payoff(canonicalize(s).representative(), identity_spec().utility));
    // and the library state built by multiplication agrees
    auto built = coin_after(3);
    CHECK(payoff_average(built, identity_spec()).value == rq(648, 1000));
}

TEST_CASE("payoff_average: LP equals exhaustive enumeration on a rational grid") {
    testing::RatGen gen(72);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n_e = static_cast<std::size_t>(gen.integer(1, 3));
        const std::size_t n_m = static_cast<std::size_t>(gen.integer(1, 4));
        const std::size_t n_c = static_cast<std::size_t>(gen.integer(1, 3));
        auto env = EnvSpace::indexed(n_e);
        std::vector<std::vector<Rat>> cols(n_m, std::vector<Rat>(n_e));
        for (auto& col : cols)
            for (auto& x : col) x = gen.rat(4, 4);
        auto s = ClassicalSok<Rat>::from_columns(env, cols);
        if (s.is_zero()) continue;
        PayoffSpec<Rat> spec;
        spec.outputs.name = "C";
        for (std::size_t c = 0; c < n_c; ++c) spec.outputs.labels.push_back("c" + std::to_string(c));
        spec.utility = Mat<Rat>(n_e, n_c);
        for (std::size_t e = 0; e < n_e; ++e)
            for (std::size_t c = 0; c < n_c; ++c)
                spec.utility(e, c) = Rat(gen.rat(8, 4) - rq(1));  // payoffs may be negative
        auto lp_val = payoff_average(s, spec).value;
        auto oracle = enumerate_payoff(canonicalize(s).representative(), spec.utility);
        CHECK(lp_val == oracle);
    }
}

TEST_CASE("payoff monotone under the order: more knowledge never hurts") {
    testing::RatGen gen(73);
    for (int t = 0; t < 10; ++t) {
        auto b = gen.nonzero_classical(kEnv2);
        auto a = gen.forget(b);
        auto spec = identity_spec();
        CHECK(payoff_average(a, spec).value <= payoff_average(b, spec).value);
    }
}

TEST_CASE("achievable payoffs form a convex set: kernel mixing") {
    auto s = coin_after(1);
    auto spec = identity_spec();
    auto full = payoff_average(s, spec);
    // mix the optimal kernel with abstention: value scales linearly
    const auto p = canonicalize(s).representative();
    Rat mixed(0);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t m = 0; m < p.cols(); ++m)
            for (std::size_t e = 0; e < 2; ++e)
                mixed += Rat(full.kernel(c, m) / 2) * p(e, m) * spec.utility(e, c);
    CHECK(mixed == Rat(full.value / 2));
}

TEST_CASE("payoff_worstcase: symmetric coin equals the average case") {
    auto s = coin_after(1);
    auto avg = payoff_average(s, identity_spec());
    auto worst = payoff_worstcase(s, identity_spec());
    CHECK(Rat(2 * worst.value) == avg.value);  // each row carries half the mass
    CHECK(worst.value == rq(3, 10));
}

TEST_CASE("payoff_worstcase: zero utility and asymmetric prior") {
    PayoffSpec<Rat> zero_spec;
    zero_spec.outputs = EnvFactor{"C", {"c0", "c1"}};
    zero_spec.utility = Mat<Rat>(2, 2);
    CHECK(payoff_worstcase(coin_after(1), zero_spec).value == rq(0));

    // prior (3/4, 1/4), one flip; oracle: max-min over a fine kernel grid
    auto scen = coin_scenario<Rat>(rq(3, 5), {rq(3, 4), rq(1, 4)});
    auto s = canonicalize(mul(scen.q, scen.s0));
    auto res = payoff_worstcase(s, identity_spec());
    const auto p = canonicalize(s).representative();
    Rat best(0);
    const long grid = 132;
    for (long ka = 0; ka <= grid; ++ka)
        for (long kb = 0; kb <= grid; ++kb) {
            // K[0,m] = ka/grid for the first column, kb/grid for the second
            Rat r0 = Rat(rq(ka, grid) * p(0, 0)) + Rat(rq(kb, grid) * p(0, 1));
            Rat r1 = Rat(rq(grid - ka, grid) * p(1, 0)) + Rat(rq(grid - kb, grid) * p(1, 1));
            Rat worst = r0 < r1 ? r0 : r1;
            if (worst > best) best = worst;
        }
    CHECK(res.value == best);
    CHECK(res.value == rq(9, 44));
}

TEST_CASE("quantum payoff: discriminating orthogonal pure states is perfect") {
    auto s = QuantumSok<double>(kEnv2, Mat<Cx<double>>{{{0.5, 0.0}, {0.0, 0.0}},
                                                       {{0.0, 0.0}, {0.5, 0.0}}},
                                false);
    PayoffSpec<double> spec;
    spec.outputs = EnvFactor{"C", {"g0", "g1"}};
    spec.utility = Mat<double>{{1.0, 0.0}, {0.0, 1.0}};
    auto res = payoff_average(s, spec);
    CHECK(res.value == doctest::Approx(1.0).epsilon(1e-5));
    auto worst = payoff_worstcase(s, spec);
    CHECK(worst.value == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("trace_distance: identical states give zero") {
    testing::RatGen gen(74);
    auto s = gen.nonzero_classical(kEnv2);
    auto res = trace_distance(s, s);
    CHECK(res.value == rq(0));
    CHECK(res.delta.is_zero());
    CHECK(res.residual == 0.0);
}

TEST_CASE("trace_distance: distinguishable points have distance 2") {
    auto a = embed_point<Rat>(kEnv2, "0");
    auto b = embed_point<Rat>(kEnv2, "1");
    auto res = trace_distance(a, b);
    CHECK(res.value == rq(2));
    CHECK(trace(res.delta) == rq(2));
    // brute force over the indicator+uniform dictionary confirms optimality
    Dictionary<Rat> d;
    d.env = kEnv2;
    d.columns = {{rq(1), rq(0)}, {rq(0), rq(1)}, {rq(1, 2), rq(1, 2)}};
    auto res2 = trace_distance(a, b, std::make_optional(d));
    CHECK(res2.value == rq(2));
}

TEST_CASE("trace_distance: symmetry and growth monotonicity in the dictionary") {
    testing::RatGen gen(75);
    for (int t = 0; t < 8; ++t) {
        auto a = gen.nonzero_classical(kEnv2), b = gen.nonzero_classical(kEnv2);
        auto ab = trace_distance(a, b);
        auto ba = trace_distance(b, a);
        CHECK(ab.value == ba.value);
        CHECK(ab.residual <= 1e-9);
        // identity of indiscernibles on canonical forms
        if (ab.value == rq(0)) CHECK(canonical_equal(a, b));
        // a larger dictionary can only tighten the upper bound
        auto bigger = build_dictionary<Rat>(kEnv2, {&a, &b}, 3);
        CHECK(trace_distance(a, b, std::make_optional(bigger)).value <= ab.value);
    }
}

TEST_CASE("trace_distance quantum: closed form, metric axioms, psd agreement") {
    auto e0 = embed_point_q<double>(kEnv2, "0");
    auto e1 = embed_point_q<double>(kEnv2, "1");
    CHECK(trace_distance(e0, e1).value == doctest::Approx(2.0));

    testing::RatGen gen(76);
    for (int t = 0; t < 6; ++t) {
        auto g1 = QuantumSok<double>(kEnv2, clamp_psd(gen.hermitian(2)), false);
        auto g2 = QuantumSok<double>(kEnv2, clamp_psd(gen.hermitian(2)), false);
        auto g3 = QuantumSok<double>(kEnv2, clamp_psd(gen.hermitian(2)), false);
        auto d12 = trace_distance(g1, g2).value;
        auto d21 = trace_distance(g2, g1).value;
        CHECK(d12 == doctest::Approx(d21));
        CHECK(trace_distance(g1, g1).value == doctest::Approx(0.0));
        CHECK(trace_distance(g1, g3).value <= d12 + trace_distance(g2, g3).value + 1e-12);
        // independent route through the PSD program
        double psd_val = trace_distance_psd(g1.gram() - g2.gram());
        CHECK(std::fabs(psd_val - d12) <= 1e-6);
    }
}

TEST_CASE("payoff grows monotonically with the number of observations") {
    auto scen = coin_scenario<Rat>(rq(3, 5), {rq(1, 2), rq(1, 2)});
    auto spec = identity_spec();
    Rat prev(0);
    auto state = canonicalize(scen.s0);
    for (int n = 0; n <= 4; ++n) {
        auto value = payoff_average(state, spec).value;
        CHECK(value >= prev);
        prev = value;
        state = canonicalize(mul(scen.q, state));
    }
}
