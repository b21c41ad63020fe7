// Classical SOK representatives and the algebra operations on them.
#include "doctest.h"

#include "qk/order.hpp"
#include "qk/sok.hpp"
#include "test_helpers.hpp"

using namespace qk;
using qk::testing::rq;

namespace {

const EnvSpace kEnv2 = EnvSpace::simple({"0", "1"});

ClassicalSok<Rat> sok(const EnvSpace& env, std::vector<std::vector<Rat>> cols) {
    return ClassicalSok<Rat>::from_columns(env, cols);
}

ClassicalSok<Rat> half_one() { return sok(kEnv2, {{rq(1, 2), rq(1, 2)}}); }

ClassicalSok<Rat> coin_q() {
    return sok(kEnv2, {{rq(3, 5), rq(2, 5)}, {rq(2, 5), rq(3, 5)}});
}

}  // namespace

TEST_CASE("embed_point: indicator column of weight 1") {
    auto s = embed_point<Rat>(kEnv2, "0");
    REQUIRE(s.columns().size() == 1);
    CHECK(s.columns()[0].weight == rq(1));
    CHECK(s.columns()[0].dist == std::vector<Rat>{rq(1), rq(0)});
    CHECK(trace(s) == rq(1));
    CHECK(eval(s) == std::vector<Rat>{rq(1), rq(0)});
    CHECK_THROWS_AS(embed_point<Rat>(kEnv2, "missing"), error);
}

TEST_CASE("embed_real: all-r column, zero gives the empty SOK") {
    auto s = embed_real<Rat>(kEnv2, rq(1));
    REQUIRE(s.columns().size() == 1);
    CHECK(eval(s) == std::vector<Rat>{rq(1), rq(1)});
    CHECK(trace(s) == rq(2));  // r * |E|
    CHECK(embed_real<Rat>(kEnv2, rq(0)).is_zero());
    CHECK_THROWS_AS(embed_real<Rat>(kEnv2, rq(-1)), error);
}

TEST_CASE("add: direct sum, not entrywise") {
    auto a = sok(kEnv2, {{rq(1, 4), rq(0)}, {rq(0), rq(1, 4)}});
    auto b = sok(kEnv2, {{rq(0), rq(1, 4)}, {rq(1, 4), rq(0)}});
    auto s = add(a, b);
    // the 2x4 block matrix [[.25,0,0,.25],[0,.25,.25,0]]
    auto rep = s.representative();
    REQUIRE(rep.cols() == 4);
    CHECK(rep(0, 0) == rq(1, 4));
    CHECK(rep(1, 1) == rq(1, 4));
    CHECK(rep(1, 2) == rq(1, 4));
    CHECK(rep(0, 3) == rq(1, 4));
    CHECK(rep(0, 1) == rq(0));
    CHECK(trace(s) == trace(a) + trace(b));
}

TEST_CASE("add: S + 0 is S canonically; env mismatch rejected") {
    auto s = coin_q();
    CHECK(canonical_equal(add(s, ClassicalSok<Rat>::zero(kEnv2)), s));
    auto env3 = EnvSpace::simple({"a", "b", "c"});
    CHECK_THROWS_AS(add(s, ClassicalSok<Rat>::zero(env3)), error);
}

TEST_CASE("scalar_mul: zero collapses, weights rescale") {
    auto s = sok(kEnv2, {{rq(1, 4), rq(1, 4)}});
    CHECK(scalar_mul(rq(0), s).is_zero());
    auto doubled = scalar_mul(rq(2), s);
    CHECK(doubled.columns()[0].weight == rq(1));
    CHECK(doubled.columns()[0].dist == s.columns()[0].dist);
    CHECK_THROWS_AS(scalar_mul(rq(-1), s), error);
}

TEST_CASE("mul: golden one-flip state [[.3,.2],[.2,.3]]") {
    auto p = mul(coin_q(), half_one());
    auto rep = canonicalize(p).representative();
    REQUIRE(rep.cols() == 2);
    // canonical order sorts distributions lexicographically: (.4,.6) first
    CHECK(rep(0, 0) == rq(2, 10));
    CHECK(rep(1, 0) == rq(3, 10));
    CHECK(rep(0, 1) == rq(3, 10));
    CHECK(rep(1, 1) == rq(2, 10));
    CHECK(eval(p) == std::vector<Rat>{rq(1, 2), rq(1, 2)});
}

TEST_CASE("mul: two observations equal the binomial representative") {
    auto p2 = mul(coin_q(), mul(coin_q(), half_one()));
    auto binom = sok(kEnv2, {{rq(18, 100), rq(8, 100)},
                             {rq(24, 100), rq(24, 100)},
                             {rq(8, 100), rq(18, 100)}});
    CHECK(canonical_equal(p2, binom));
}

TEST_CASE("mul: unit law against embed_real(1)") {
    testing::RatGen gen(21);
    for (int t = 0; t < 25; ++t) {
        auto s = gen.classical(kEnv2);
        CHECK(canonical_equal(mul(s, embed_real<Rat>(kEnv2, rq(1))), s));
    }
}

TEST_CASE("trace: golden values and product rule on diagonal support") {
    CHECK(trace(half_one()) == rq(1));
    CHECK(trace(ClassicalSok<Rat>::zero(kEnv2)) == rq(0));
    testing::RatGen gen(22);
    for (int t = 0; t < 25; ++t) {
        auto a = gen.classical(kEnv2);
        auto b = gen.classical(kEnv2);
        // trace(ab) = sum_e eval(a)_e eval(b)_e for entrywise products
        Rat expect(0);
        auto ea = eval(a), eb = eval(b);
        for (std::size_t e = 0; e < 2; ++e) expect += ea[e] * eb[e];
        CHECK(trace(mul(a, b)) == expect);
    }
}

TEST_CASE("partial_trace: concentrated column maps to an indicator") {
    auto env = EnvSpace::product(kEnv2, EnvSpace::simple({"x", "y"}, "C"));
    // column concentrated on (e=1, c=x): flat index 1*2+0 = 2
    std::vector<Rat> col(4, rq(0));
    col[2] = rq(1);
    auto s = ClassicalSok<Rat>::from_columns(env, {col});
    auto reduced = partial_trace(s, "C");
    CHECK(canonical_equal(reduced, embed_point<Rat>(kEnv2, "1")));
    CHECK_THROWS_AS(partial_trace(s, "Z"), error);
}

TEST_CASE("partial_trace: preserves trace and is linear") {
    auto env = EnvSpace::product(kEnv2, EnvSpace::simple({"x", "y", "z"}, "C"));
    testing::RatGen gen(23);
    for (int t = 0; t < 25; ++t) {
        auto a = gen.classical(env);
        auto b = gen.classical(env);
        CHECK(trace(partial_trace(a, "C")) == trace(a));
        CHECK(canonical_equal(partial_trace(add(a, b), "C"),
                              add(partial_trace(a, "C"), partial_trace(b, "C"))));
        // eval of the reduction marginalizes eval
        auto ev_full = eval(a);
        auto ev_red = eval(partial_trace(a, "C"));
        for (std::size_t e = 0; e < 2; ++e) {
            Rat sum(0);
            for (std::size_t c = 0; c < 3; ++c) sum += ev_full[e * 3 + c];
            CHECK(ev_red[e] == sum);
        }
    }
}

TEST_CASE("partial_trace: one-point environment reproduces the trace") {
    auto env = EnvSpace::product(EnvSpace::simple({"*"}, "U"), kEnv2);
    testing::RatGen gen(24);
    auto s = gen.classical(env);
    auto reduced = partial_trace(s, "E");
    CHECK(trace(reduced) == trace(s));
    CHECK(eval(reduced)[0] == trace(s));
}

TEST_CASE("canonicalize: merges a redundantly split prior") {
    auto split = sok(kEnv2, {{rq(1, 4), rq(1, 4)}, {rq(1, 8), rq(1, 8)}, {rq(1, 8), rq(1, 8)}});
    auto canon = canonicalize(split);
    REQUIRE(canon.columns().size() == 1);
    CHECK(canon.columns()[0].weight == rq(1));
    CHECK(canon.columns()[0].dist == std::vector<Rat>{rq(1, 2), rq(1, 2)});
    CHECK(canonicalize(canon) == canon);  // idempotent
    CHECK(canonical_equal(split, half_one()));
}

TEST_CASE("ring axioms hold canonically on random instances") {
    testing::RatGen gen(25);
    auto env = EnvSpace::simple({"0", "1", "2"});
    for (int t = 0; t < 60; ++t) {
        auto a = gen.classical(env), b = gen.classical(env), c = gen.classical(env);
        CHECK(canonical_equal(add(a, b), add(b, a)));
        CHECK(canonical_equal(add(add(a, b), c), add(a, add(b, c))));
        CHECK(canonical_equal(mul(a, b), mul(b, a)));
        CHECK(canonical_equal(mul(mul(a, b), c), mul(a, mul(b, c))));
        CHECK(canonical_equal(mul(a, add(b, c)), add(mul(a, b), mul(a, c))));
        auto lambda = gen.rat();
        CHECK(canonical_equal(scalar_mul(lambda, add(a, b)),
                              add(scalar_mul(lambda, a), scalar_mul(lambda, b))));
    }
}

TEST_CASE("embed_real is a ring homomorphism up to equivalence") {
    testing::RatGen gen(26);
    for (int t = 0; t < 25; ++t) {
        auto a = gen.rat(), b = gen.rat();
        CHECK(canonical_equal(mul(embed_real<Rat>(kEnv2, a), embed_real<Rat>(kEnv2, b)),
                              embed_real<Rat>(kEnv2, Rat(a * b))));
        // additivity holds only as equivalence, not raw representative equality
        CHECK(canonical_equal(add(embed_real<Rat>(kEnv2, a), embed_real<Rat>(kEnv2, b)),
                              embed_real<Rat>(kEnv2, Rat(a + b))));
    }
}

TEST_CASE("quasi: additive inverses and product signs") {
    testing::RatGen gen(27);
    for (int t = 0; t < 25; ++t) {
        auto a = gen.classical(kEnv2), b = gen.classical(kEnv2);
        auto x = make_quasi(a, b);
        auto zero = make_quasi(ClassicalSok<Rat>::zero(kEnv2), ClassicalSok<Rat>::zero(kEnv2));
        CHECK(quasi_equivalent(add(x, negate(x)), zero));
        // scalar handling of negative multipliers
        auto y = scalar_mul_quasi(rq(-2), x);
        CHECK(canonical_equal(y.pos, canonicalize(scalar_mul(rq(2), b))));
        CHECK(canonical_equal(y.neg, canonicalize(scalar_mul(rq(2), a))));
    }
    // (A-B)(C-D) = (AC+BD) - (AD+BC) against direct expansion
    auto a = gen.classical(kEnv2), b = gen.classical(kEnv2);
    auto c = gen.classical(kEnv2), d = gen.classical(kEnv2);
    auto prod = mul(make_quasi(a, b), make_quasi(c, d));
    CHECK(canonical_equal(prod.pos, canonicalize(add(mul(a, c), mul(b, d)))));
    CHECK(canonical_equal(prod.neg, canonicalize(add(mul(a, d), mul(b, c)))));
}

TEST_CASE("float mode: canonical merge uses the global tolerance") {
    auto env = kEnv2;
    auto a = ClassicalSok<double>::from_columns(env, {{0.5, 0.5}, {0.5 + 1e-12, 0.5 - 1e-12}});
    auto canon = canonicalize(a);
    CHECK(canon.columns().size() == 1);
    CHECK(canon.columns()[0].weight == doctest::Approx(2.0));
}
