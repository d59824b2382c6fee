#include <doctest.h>

#include "bhl/syntax.hpp"

using namespace bhl;

namespace {

const char* kDrugHeader = R"(
observable y1, y2, y3 : list(real);
observable a12, a13 : prob;
invisible mu1, mu2, mu3 : real;
test z12 = Z(two, sigma = 1.0, pop = (N(mu1, 1.0), N(mu2, 1.0)));
test z13 = Z(two, sigma = 1.0, pop = (N(mu1, 1.0), N(mu3, 1.0)));
)";

Decls drug_decls() {
    Decls d;
    parse_header_into(kDrugHeader, d);
    d.add_history(mk_tuple({mk_var("y1"), mk_var("y2")}), "z12");
    d.add_history(mk_tuple({mk_var("y1"), mk_var("y3")}), "z13");
    return d;
}

} // namespace

TEST_CASE("skip parses to Skip") {
    Decls d;
    CmdP c = parse_program("skip", d);
    CHECK(c->kind == Command::Kind::Skip);
}

TEST_CASE("drug comparison program parses into test calls and a conditional") {
    Source s = parse_source(std::string(kDrugHeader) +
                            "a12 := z12(y1, y2); if a12 < 0.05 { a13 := z13(y1, y3) } else { skip }");
    REQUIRE(s.program->kind == Command::Kind::Seq);
    CHECK(s.program->c1->kind == Command::Kind::Test);
    CHECK(s.program->c1->test == "z12");
    CHECK(s.program->c2->kind == Command::Kind::If);
    CHECK(s.program->c2->c1->kind == Command::Kind::Test);
    CHECK(s.decls.history_names() == std::vector<std::string>{"h[(y1, y2), z12]", "h[(y1, y3), z13]"});
}

TEST_CASE("parallel interference is reported with the variable") {
    Decls d;
    d.obs["x"] = Type::of(Type::Kind::Int);
    try {
        parse_program("x := 1 || x := 2", d);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::Type);
        CHECK(std::string(e.what()).find("{x}") != std::string::npos);
    }
}

TEST_CASE("programs may not touch invisible variables") {
    Decls d = drug_decls();
    CHECK_THROWS_AS(parse_program("a12 := mu1", d), Error);
}

TEST_CASE("updated variables follow the recursive definition") {
    Decls d;
    for (auto v : {"a", "b", "c"}) d.obs[v] = Type::of(Type::Kind::Int);
    d.obs["b"] = Type::of(Type::Kind::Bool);
    CHECK(updated_vars(parse_program("skip", d)).empty());
    CHECK(updated_vars(parse_program("a := 1", d)) == std::set<std::string>{"a"});
    CHECK(updated_vars(parse_program("a := 1; while b { c := 2 }", d)) == std::set<std::string>{"a", "c"});
}

TEST_CASE("possibility is sugar for not-K-not and quantifiers stay outside K") {
    Decls d;
    d.obs["x"] = Type::of(Type::Kind::Int);
    FormP p = parse_formula("P x = 1", d);
    REQUIRE(p->kind == Formula::Kind::Not);
    REQUIRE(p->subs[0]->kind == Formula::Kind::Know);
    CHECK(p->subs[0]->subs[0]->kind == Formula::Kind::Not);
    CHECK(print_formula(p) == "P x = 1");
    CHECK(parse_formula("K x = 1", d)->kind == Formula::Kind::Know);
    CHECK_NOTHROW(parse_formula("forall i. K x = i", d));
    CHECK_THROWS_AS(parse_formula("K (forall i. x = i)", d), Error);
}

TEST_CASE("empty kappa expands to zero histories") {
    Decls d;
    d.obs["y"] = Type::list(Type::of(Type::Kind::Real));
    parse_header_into("test A = LR(lower, p = N(0.0, 1.0), q = N(1.0, 1.0));", d);
    d.add_history(mk_var("y"), "A");
    CHECK(print_formula(expand_sugar(d, parse_formula("kappa{}", d))) == "h[y, A] = 0");
    CHECK(print_formula(expand_sugar(d, parse_formula("kappa{y : A}", d))) == "h[y, A] = 1");
}

TEST_CASE("null hypothesis of the two-sided Z test negates both one-sided alternatives") {
    Decls d = drug_decls();
    CHECK(print_formula(expand_sugar(d, parse_formula("null[z12]", d))) == "not mu1 > mu2 and not mu1 < mu2");
    CHECK(print_formula(expand_sugar(d, parse_formula("alt[z12]", d))) == "mu1 > mu2 or mu1 < mu2");
}

TEST_CASE("belief expands to knowledge of the three-way disjunction") {
    Decls d = drug_decls();
    FormP b = parse_formula("Belief[< 0.05; (y1, y2); z12] mu1 != mu2", d);
    CHECK(print_formula(expand_sugar(d, b)) ==
          "K (mu1 != mu2 or neg[<; (y1, y2); z12](0.05) and (h[(y1, y2), z12] = 1 and h[(y1, y3), z13] = 0) or "
          "not (followed(y1, N(mu1, 1.0)) and followed(y2, N(mu2, 1.0))))");
}

TEST_CASE("expansion is idempotent on core formulas") {
    Decls d = drug_decls();
    FormP f = expand_sugar(d, parse_formula("Belief[<= a12; (y1, y2); z12] alt[z12] and kappa{}", d));
    CHECK_FALSE(has_sugar(f));
    CHECK(formula_equal(expand_sugar(d, f), f));
}

TEST_CASE("free variables of an expanded kappa include every history variable") {
    Decls d = drug_decls();
    auto fv = free_vars(d, parse_formula("kappa{(y1, y2) : z12}", d));
    CHECK(fv == std::set<std::string>{"h[(y1, y2), z12]", "h[(y1, y3), z13]"});
    CHECK(free_vars(d, parse_formula("K a12 = a13", d)) == std::set<std::string>{"a12", "a13"});
}

TEST_CASE("substitution passes through K") {
    Decls d = drug_decls();
    FormP f = parse_formula("K a12 = 1.0", d);
    FormP g = subst(d, f, {{"a12", parse_term("a13 + 1.0", d)}});
    CHECK(print_formula(g) == "K a13 + 1.0 = 1.0");
    FormP k = subst(d, parse_formula("kappa{(y1, y2) : z12}", d),
                    {{"h[(y1, y2), z12]", parse_term("h[(y1, y2), z12] + 1", d)}});
    CHECK(print_formula(k) == "h[(y1, y2), z12] + 1 = 1 and h[(y1, y3), z13] = 0");
}

TEST_CASE("printing then parsing returns the same tree") {
    Decls d = drug_decls();
    for (const char* src : {"a12 := z12(y1, y2); if a12 < 0.05 { a13 := z13(y1, y3) } else { skip }",
                            "(a12 := 0.5; a13 := 0.5); skip", "a12 := 0.1 || a13 := 0.2 || skip",
                            "while a12 > 0.5 invariant a12 >= 0.0 { a12 := a12 / 2.0 }",
                            "assert K a12 = a12; a12 := -(a13) * 2.0 - -1.0"}) {
        CmdP c = parse_program(src, d);
        CAPTURE(print_command(c));
        CHECK(command_equal(parse_program(print_command(c), d), c));
    }
    for (const char* src : {"Belief[<= min(a12, a13); (y1, y2); z12] (mu1 != mu2 -> P mu1 = 0.0)",
                            "(forall i. i >= 0) and not (a12 = 1.0 <-> K a13 < 0.2)",
                            "Possible[< 0.05; (y1, y3); z13; kappa{(y1, y3) : z13}] sampled(y1, N(mu1, 1.0), 10)",
                            "(a12 < a13) = true or (a12 + 1.0) * 2.0 >= 3.0"}) {
        FormP f = parse_formula(src, d);
        CAPTURE(print_formula(f));
        CHECK(formula_equal(parse_formula(print_formula(f), d), f));
    }
}
