// File formats: mode detection, schema validation, byte-stable round trips.
#include "doctest.h"

#include "qk/csv.hpp"
#include "qk/json_io.hpp"
#include "test_helpers.hpp"

#include <fstream>

using namespace qk;
using qk::testing::rq;

TEST_CASE("parse_rat accepts integers, fractions, decimals, exponents") {
    CHECK(parse_rat("18") == rq(18));
    CHECK(parse_rat("-4/5") == rq(-4, 5));
    CHECK(parse_rat("0.18") == rq(18, 100));
    CHECK(parse_rat("1.2e-3") == rq(12, 10000));
    CHECK(parse_rat("-0.5") == rq(-1, 2));
    CHECK_THROWS_AS(parse_rat("abc"), error);
    CHECK_THROWS_AS(parse_rat("1/0"), error);
}

TEST_CASE("format_rat emits integers, terminating decimals, fractions") {
    CHECK(format_rat(rq(3)) == "3");
    CHECK(format_rat(rq(18, 100)) == "0.18");
    CHECK(format_rat(rq(-1, 2)) == "-0.5");
    CHECK(format_rat(rq(1, 3)) == "1/3");
    CHECK(format_rat(rq(9, 13)) == "9/13");
    // parse inverts format on awkward values
    testing::RatGen gen(91);
    for (int t = 0; t < 200; ++t) {
        Rat v = Rat(gen.rat(50, 7) - gen.rat(50, 13));
        CHECK(parse_rat(format_rat(v)) == v);
    }
}

TEST_CASE("sok files: string numbers select exact mode, raw numbers float") {
    json exact = json::parse(R"({
        "kind": "classical",
        "env": ["HeadsBiased", "TailsBiased"],
        "columns": [{"weight": "1", "p": ["0.5", "0.5"]}]
    })");
    auto v = parse_sok(exact);
    REQUIRE(std::holds_alternative<ClassicalSok<Rat>>(v));
    CHECK(trace(std::get<ClassicalSok<Rat>>(v)) == rq(1));

    json floating = json::parse(R"({
        "kind": "classical",
        "env": ["a", "b"],
        "columns": [{"weight": 1.0, "p": [0.5, 0.5]}]
    })");
    CHECK(std::holds_alternative<ClassicalSok<double>>(parse_sok(floating)));

    json pair_form = json::parse(R"({
        "kind": "classical",
        "env": ["a", "b"],
        "columns": [{"weight": ["1","3"], "p": ["1", "0"]}]
    })");
    auto w = std::get<ClassicalSok<Rat>>(parse_sok(pair_form));
    CHECK(trace(w) == rq(1, 3));
}

TEST_CASE("sok files: quantum grams with complex entries") {
    json q = json::parse(R"({
        "kind": "quantum",
        "env": ["0", "1"],
        "gram": [[ "1", ["0","1","?"] ], [ 0, "1" ]]
    })");
    // malformed complex entry
    CHECK_THROWS_AS(parse_sok(q), error);

    json good = json::parse(R"({
        "kind": "quantum",
        "env": ["0", "1"],
        "gram": [[ "1", ["0", "-0.5"] ], [ ["0", "0.5"], "1" ]]
    })");
    auto v = parse_sok(good);
    REQUIRE(std::holds_alternative<QuantumSok<Rat>>(v));
    const auto& s = std::get<QuantumSok<Rat>>(v);
    CHECK(s.gram()(0, 1).im == rq(-1, 2));
    CHECK(trace(s) == rq(2));
}

TEST_CASE("sok files: schema violations raise parse errors") {
    CHECK_THROWS_AS(parse_sok(json::parse(R"({"env": ["a"]})")), error);
    CHECK_THROWS_AS(parse_sok(json::parse(R"({"kind": "classical", "env": ["a"]})")), error);
    CHECK_THROWS_AS(parse_sok(json::parse(R"({"kind": "navel", "env": ["a"], "columns": []})")),
                    error);
    // negative entries violate the SOK invariant
    CHECK_THROWS_AS(parse_sok(json::parse(
                        R"({"kind":"classical","env":["a"],"columns":[{"weight":"1","p":["-1"]}]})")),
                    error);
}

TEST_CASE("round trip: emit then parse then emit is byte-stable") {
    testing::RatGen gen(92);
    auto env = EnvSpace::simple({"x", "y", "z"});
    for (int t = 0; t < 20; ++t) {
        auto s = canonicalize(gen.classical(env));
        json j1 = emit_sok(s);
        auto back = std::get<ClassicalSok<Rat>>(parse_sok(j1));
        json j2 = emit_sok(back);
        CHECK(j1.dump() == j2.dump());
        CHECK(canonical_equal(s, back));
    }
    for (int t = 0; t < 10; ++t) {
        auto s = gen.quantum(env);
        json j1 = emit_sok(s);
        auto back = std::get<QuantumSok<Rat>>(parse_sok(j1));
        CHECK(emit_sok(back).dump() == j1.dump());
    }
}

TEST_CASE("round trip: product environments keep their registers") {
    auto env = EnvSpace::product(EnvSpace::simple({"HeadsBiased", "TailsBiased"}),
                                 EnvSpace::simple({"idle", "obs"}, "O"));
    auto s = ClassicalSok<Rat>::from_columns(
        env, {{rq(1, 4), rq(1, 4), rq(1, 4), rq(1, 4)}});
    json j1 = emit_sok(s);
    CHECK(j1["registers"]["E"] == 2);
    CHECK(j1["registers"]["O"] == 2);
    auto back = std::get<ClassicalSok<Rat>>(parse_sok(j1));
    CHECK(back.env() == env);
    CHECK(emit_sok(back).dump() == j1.dump());
}

TEST_CASE("law files: parse, validate, emit") {
    json lj = json::parse(R"({
        "kind": "classical", "E": 2, "I": 2, "O": 1,
        "E_labels": ["HeadsBiased", "TailsBiased"],
        "I_labels": ["h", "t"], "O_labels": ["go"],
        "T": [["0.6", "0"], ["0.4", "0"], ["0", "0.4"], ["0", "0.6"]]
    })");
    auto v = parse_law(lj);
    REQUIRE(std::holds_alternative<ClassicalLaw<Rat>>(v));
    const auto& law = std::get<ClassicalLaw<Rat>>(v);
    CHECK(law.blockdiag_in_env());
    CHECK(law.matrix()(0, 0) == rq(3, 5));
    json emitted = emit_law(law);
    auto back = std::get<ClassicalLaw<Rat>>(parse_law(emitted));
    CHECK(back.matrix() == law.matrix());

    json bad = lj;
    bad["T"][0][0] = "1.5";
    CHECK_THROWS_AS(parse_law(bad), error);
}

TEST_CASE("witness files carry the map, its norm, and the direction") {
    Witness<Rat> w;
    w.kind = WitnessKind::classical_substochastic;
    w.t = Mat<Rat>{{rq(1), rq(0)}, {rq(0), rq(1, 2)}};
    w.norm = rq(1);
    json j = emit_witness(w, "a<=b");
    CHECK(j["direction"] == "a<=b");
    CHECK(j["kind"] == "classical-substochastic");
    CHECK(j["T"][1][1] == "0.5");
}

TEST_CASE("mode bridge: exact states convert to float mode") {
    testing::RatGen gen(93);
    auto env = EnvSpace::simple({"a", "b"});
    auto s = gen.nonzero_classical(env);
    auto f = to_float(s);
    CHECK(trace(f) == doctest::Approx(scalar_traits<Rat>::to_double(trace(s))));
    auto q = gen.quantum(env);
    auto qf = to_float(q);
    CHECK(trace(qf) == doctest::Approx(scalar_traits<Rat>::to_double(trace(q))));
}

TEST_CASE("plot tables: deterministic header, empty tables rejected") {
    PlotTable t;
    CHECK_THROWS_AS(emit_plot_data(t, "/tmp/qk_empty_table.csv"), error);
    t.header = {"x", "y"};
    t.rows = {{1.0, 2.0}, {3.0, 4.0}};
    emit_plot_data(t, "/tmp/qk_plot_table.csv");
    std::ifstream in("/tmp/qk_plot_table.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,y");
}
