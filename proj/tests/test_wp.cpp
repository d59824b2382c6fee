#include <doctest.h>

#include "bhl/kripke.hpp"
#include "bhl/wp.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bhl;

namespace {

std::filesystem::path corpus(const char* f) { return std::filesystem::path(BHL_CORPUS_DIR) / f; }

Source load_source(const char* f) {
    std::ifstream in(corpus(f));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_source(ss.str());
}

} // namespace

TEST_CASE("wp of skip is the postcondition") {
    Source s = load_source("wp6.bhp");
    FormP q = parse_formula("x = 1 and P (mu = 0.0)", s.decls);
    CHECK(formula_equal(weakest_pre(s.decls, parse_program("skip", s.decls), q), q));
}

TEST_CASE("wp of an assignment substitutes the expression") {
    Source s = load_source("wp6.bhp");
    FormP q = parse_formula("K (x = 1)", s.decls);
    FormP w = weakest_pre(s.decls, parse_program("x := x + 1", s.decls), q);
    CHECK(print_formula(w) == print_formula(parse_formula("K (x + 1 = 1)", s.decls)));
}

TEST_CASE("wp of a test call moves its history variable and binds the p-value") {
    Source s = load_source("hist_only.bhp");
    register_histories(s.program, s.decls);
    FormP w = weakest_pre(s.decls, s.program, parse_formula("kappa{y : A}", s.decls));
    CHECK(print_formula(w) == "h[y, A] + 1 = 1");
    FormP w2 = weakest_pre(s.decls, s.program, parse_formula("p <= 0.05", s.decls));
    CHECK(print_formula(w2) == "A(y) <= 0.05");
}

TEST_CASE("wp of a sequence composes and parallel composition is sequentialised") {
    Source s = load_source("wp6.bhp");
    FormP q = parse_formula("p + q <= 0.1", s.decls);
    CmdP c1 = parse_program("p := A(y)", s.decls);
    CmdP c2 = parse_program("q := A(z)", s.decls);
    FormP seq = weakest_pre(s.decls, c_seq(c1, c2), q);
    CHECK(formula_equal(seq, weakest_pre(s.decls, c1, weakest_pre(s.decls, c2, q))));
    CHECK(formula_equal(weakest_pre(s.decls, c_par(c1, c2), q), seq));
}

TEST_CASE("wp rejects loops; vc handles annotated ones") {
    Source s = load_source("wp6.bhp");
    CmdP loop = parse_program("while x < 3 invariant x <= 3 { x := x + 1 }", s.decls);
    CHECK_THROWS_AS(weakest_pre(s.decls, loop, f_true()), Error);
    VCSet v = vc_gen(s.decls, loop, parse_formula("x <= 3", s.decls), parse_formula("x = 3", s.decls));
    REQUIRE(v.obligations.size() == 3);
    CHECK(v.obligations[0].name == "entry");
    Scenario sc = load_scenario(corpus("wp6.scn"));
    Model m = build_model(sc);
    for (const auto& o : v.obligations) CHECK_MESSAGE(check_valid(m, o.formula).ok, o.name);
    CHECK_THROWS_AS(vc_gen(s.decls, parse_program("while x < 3 { x := x + 1 }", s.decls), f_true(), f_true()), Error);
}

TEST_CASE("vc of a loop-free program is a single entry obligation") {
    Source s = load_source("wp6.bhp");
    VCSet v = vc_gen(s.decls, parse_program("x := 1; p := A(y)", s.decls), f_true(), parse_formula("x = 1", s.decls));
    REQUIRE(v.obligations.size() == 1);
    CHECK(print_formula(v.obligations[0].formula) == "true -> 1 = 1");
}

TEST_CASE("skip loop with its own invariant yields trivial obligations") {
    Source s = load_source("wp6.bhp");
    FormP inv = parse_formula("x <= 1", s.decls);
    CmdP loop = c_while(parse_term("x < 1", s.decls), c_skip(), inv);
    FormP post = f_and(inv, f_not(guard_formula(parse_term("x < 1", s.decls))));
    VCSet v = vc_gen(s.decls, loop, inv, post);
    for (const auto& o : v.obligations) {
        REQUIRE(o.formula->kind == Formula::Kind::Implies);
        const FormP& lhs = o.formula->subs[0];
        const FormP& rhs = o.formula->subs[1];
        if (o.name.find("preserve") != std::string::npos) {
            // I and e => I
            REQUIRE(lhs->kind == Formula::Kind::And);
            CHECK(formula_equal(lhs->subs[0], rhs));
        } else {
            CHECK(formula_equal(lhs, rhs));
        }
    }
}
