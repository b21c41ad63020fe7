// Evolution: laws, steps, simulation, lazy observation, the Poisson series.
#include "doctest.h"

#include "qk/evolution.hpp"
#include "test_helpers.hpp"

using namespace qk;
using qk::testing::rq;

namespace {

CoinScenario<Rat> coin() { return coin_scenario<Rat>(rq(3, 5), {rq(1, 2), rq(1, 2)}); }

ClassicalSok<Rat> golden_one_flip() {
    return ClassicalSok<Rat>::from_columns(EnvSpace::simple({"HeadsBiased", "TailsBiased"}),
                                           {{rq(3, 10), rq(2, 10)}, {rq(2, 10), rq(3, 10)}});
}

}  // namespace

TEST_CASE("law validation: column sums and negativity") {
    auto env = EnvSpace::simple({"0", "1"});
    EnvFactor in_reg{"I", {"i0"}}, out_reg{"O", {"o0"}};
    Mat<Rat> ok(2, 2);
    ok(0, 0) = rq(1);
    ok(1, 1) = rq(1, 2);
    ClassicalLaw<Rat> law(env, in_reg, out_reg, ok);
    CHECK(law.blockdiag_in_env());
    Mat<Rat> too_big(2, 2);
    too_big(0, 0) = rq(3, 2);
    CHECK_THROWS_AS(ClassicalLaw<Rat>(env, in_reg, out_reg, too_big), error);
    Mat<Rat> negative(2, 2);
    negative(0, 0) = rq(-1, 2);
    CHECK_THROWS_AS(ClassicalLaw<Rat>(env, in_reg, out_reg, negative), error);
}

TEST_CASE("apply_law: identity law with trivial registers is a no-op") {
    auto env = EnvSpace::simple({"0", "1"});
    EnvFactor in_reg{"I", {"i0"}}, out_reg{"O", {"o0"}};
    ClassicalLaw<Rat> law(env, in_reg, out_reg, Mat<Rat>::identity(2, rq(1)));
    testing::RatGen gen(61);
    auto s = gen.classical(env);
    auto lifted = at_output(s, out_reg, "o0");
    auto evolved = partial_trace(apply_law(law, lifted), "I");
    CHECK(canonical_equal(evolved, s));
}

TEST_CASE("apply_law: coin observation produces the golden posterior") {
    auto scen = coin();
    auto lifted = at_output(scen.s0, scen.observe_law.output(), "go");
    auto evolved = apply_law(scen.observe_law, lifted);
    CHECK(trace(evolved) == rq(1));
    auto reduced = partial_trace(evolved, "I");
    CHECK(canonical_equal(reduced, golden_one_flip()));
    CHECK(eval(reduced) == std::vector<Rat>{rq(1, 2), rq(1, 2)});
}

TEST_CASE("apply_law: linear on random pairs") {
    auto scen = coin();
    testing::RatGen gen(62);
    auto env_eo = scen.observe_law.output_env();
    for (int t = 0; t < 15; ++t) {
        auto a = gen.classical(env_eo), b = gen.classical(env_eo);
        CHECK(canonical_equal(apply_law(scen.observe_law, add(a, b)),
                              add(apply_law(scen.observe_law, a), apply_law(scen.observe_law, b))));
    }
}

TEST_CASE("step: idle leaves the state unchanged, observe updates it") {
    auto scen = coin();
    auto idle = at_output(scen.s0, scen.law.output(), "idle");
    CHECK(canonical_equal(step(scen.s0, idle, scen.law), canonicalize(scen.s0)));

    auto observe = at_output(scen.s0, scen.law.output(), "obs");
    auto s1 = step(scen.s0, observe, scen.law);
    CHECK(canonical_equal(s1, golden_one_flip()));

    auto observe2 = at_output(s1, scen.law.output(), "obs");
    auto s2 = step(s1, observe2, scen.law);
    auto p2prime = ClassicalSok<Rat>::from_columns(
        scen.env, {{rq(18, 100), rq(8, 100)}, {rq(24, 100), rq(24, 100)}, {rq(8, 100), rq(18, 100)}});
    CHECK(canonical_equal(s2, p2prime));
}

TEST_CASE("step: infeasible outputs are rejected with a diagnostic") {
    auto scen = coin();
    auto oversized = at_output(scalar_mul(rq(2), scen.s0), scen.law.output(), "obs");
    CHECK_THROWS_AS(step(scen.s0, oversized, scen.law), error);
}

TEST_CASE("step commutes with equivalence") {
    auto scen = coin();
    testing::RatGen gen(63);
    for (int t = 0; t < 10; ++t) {
        auto s = gen.nonzero_classical(scen.env);
        // an equivalent representative via a column split
        auto split = add(scalar_mul(rq(1, 2), s), scalar_mul(rq(1, 2), s));
        REQUIRE(canonical_equal(s, split));
        auto out1 = at_output(s, scen.law.output(), "obs");
        auto out2 = at_output(split, scen.law.output(), "obs");
        CHECK(canonical_equal(step(s, out1, scen.law), step(split, out2, scen.law)));
    }
}

TEST_CASE("simulate: idle plans fix the state; observation accumulates") {
    auto scen = coin();
    AlgorithmPlan<ClassicalSok<Rat>> idle_plan;
    idle_plan.initial = scen.s0;
    for (int k = 0; k < 4; ++k) idle_plan.steps.push_back(at_output(scen.s0, scen.law.output(), "idle"));
    auto sim = simulate(idle_plan, scen.law, scen.s0);
    REQUIRE(sim.states.size() == 5);
    for (const auto& s : sim.states) CHECK(canonical_equal(s, canonicalize(scen.s0)));
    CHECK(sim.accumulation_ok);
    CHECK(sim.per_env_ok);
    CHECK(sim.witness_constraint_ok);

    AlgorithmPlan<ClassicalSok<Rat>> obs_plan;
    obs_plan.initial = scen.s0;
    obs_plan.steps.push_back(at_output(scen.s0, scen.law.output(), "obs"));
    obs_plan.steps.push_back(at_output(golden_one_flip(), scen.law.output(), "obs"));
    auto sim2 = simulate(obs_plan, scen.law, scen.s0);
    auto p2prime = ClassicalSok<Rat>::from_columns(
        scen.env, {{rq(18, 100), rq(8, 100)}, {rq(24, 100), rq(24, 100)}, {rq(8, 100), rq(18, 100)}});
    CHECK(canonical_equal(sim2.states.back(), p2prime));
    CHECK(trace(sim2.accumulated) == rq(2));
    CHECK(sim2.accumulation_ok);
    CHECK(sim2.per_env_ok);
    CHECK(sim2.witness_constraint_ok);
}

TEST_CASE("lazy_observation: golden conditional matrix and edge cases") {
    auto scen = coin();
    auto lazy = lazy_observation(scen.q, rq(1, 4));
    auto canon = canonicalize(lazy);
    // 1/4 Q + 3/4 1 = [[.15,.10,.75],[.10,.15,.75]]
    REQUIRE(canon.columns().size() == 3);
    auto rep = canon.representative();
    // canonical order sorts by distribution
    CHECK(rep(0, 0) == rq(10, 100));
    CHECK(rep(1, 0) == rq(15, 100));
    CHECK(rep(0, 1) == rq(75, 100));
    CHECK(rep(1, 1) == rq(75, 100));
    CHECK(rep(0, 2) == rq(15, 100));
    CHECK(rep(1, 2) == rq(10, 100));

    CHECK(canonical_equal(lazy_observation(scen.q, rq(1)), scen.q));
    auto never = lazy_observation(scen.q, rq(0));
    CHECK(canonical_equal(never, embed_real<Rat>(scen.env, rq(1))));
    // multiplying by it never changes the state
    CHECK(canonical_equal(mul(never, scen.s0), canonicalize(scen.s0)));
    CHECK_THROWS_AS(lazy_observation(scen.q, rq(5, 4)), error);
}

TEST_CASE("counting suffices: n flips canonicalize to n+1 columns") {
    auto scen = coin();
    auto state = canonicalize(scen.s0);
    for (int n = 1; n <= 6; ++n) {
        state = canonicalize(mul(scen.q, state));
        CHECK(state.columns().size() == static_cast<std::size_t>(n + 1));
    }
}

TEST_CASE("poisson_series: coefficients, t=0, and the resummation identity") {
    auto scen = coin();
    auto res = poisson_series(scen.q, scen.s0, rq(1), SeriesTruncation{20});
    // k-th coefficient is exactly 1/k! at rt = 1 (prefactor e^{-1} symbolic)
    Rat fact(1);
    for (long k = 0; k <= 20; ++k) {
        if (k > 0) fact *= Rat(k);
        CHECK(res.coefficients[static_cast<std::size_t>(k)] == Rat(1) / fact);
    }
    CHECK(res.tail_bound >= 0.0);

    // t = 0 reproduces S(0) exactly for any truncation
    auto at0 = poisson_series(scen.q, scen.s0, rq(0), SeriesTruncation{3});
    CHECK(canonical_equal(at0.sum, canonicalize(scen.s0)));
    CHECK(at0.prefactor == 1.0);

    // unit multiplier: truncated trace equals tr(S0) * sum_k (rt)^k / k!
    auto unit = embed_real<Rat>(scen.env, rq(1));
    auto ser = poisson_series(unit, scen.s0, rq(2), SeriesTruncation{6});
    Rat expect(0), term(1);
    for (long k = 0; k <= 6; ++k) {
        if (k > 0) term = Rat(term * rq(2) / Rat(k));
        expect += term;
    }
    CHECK(trace(ser.sum) == Rat(trace(scen.s0) * expect));
    // trace of the truncated series stays within the tail bound of tr S(0)
    const double full = scalar_traits<Rat>::to_double(trace(scen.s0));
    const double got = ser.prefactor * scalar_traits<Rat>::to_double(trace(ser.sum));
    CHECK(full - got <= ser.tail_bound + 1e-12);
    CHECK(got <= full + 1e-12);

    CHECK_THROWS_AS(poisson_series(scen.q, scen.s0, rq(1), SeriesTruncation{1}, 1e-9), error);
}

TEST_CASE("contractivity: laws never increase total probability") {
    auto scen = coin();
    testing::RatGen gen(64);
    auto env_eo = scen.law.output_env();
    for (int t = 0; t < 15; ++t) {
        auto s = gen.classical(env_eo);
        CHECK(trace(apply_law(scen.law, s)) <= trace(s));
    }
}

TEST_CASE("coin_scenario: golden matrices") {
    auto scen = coin();
    auto q_rep = canonicalize(scen.q).representative();
    CHECK(q_rep(0, 0) == rq(2, 5));
    CHECK(q_rep(1, 0) == rq(3, 5));
    CHECK(q_rep(0, 1) == rq(3, 5));
    CHECK(q_rep(1, 1) == rq(2, 5));
    CHECK(scen.law.blockdiag_in_env());
    CHECK(scen.observe_law.blockdiag_in_env());
    CHECK(trace(scen.s0) == rq(1));
}
