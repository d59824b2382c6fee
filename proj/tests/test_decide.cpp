#include <doctest.h>

#include "gen.hpp"

#include "bhl/kripke.hpp"
#include "bhl/proof.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bhl;

namespace {

Decls drug_decls() {
    std::ifstream in(std::filesystem::path(BHL_CORPUS_DIR) / "c_drug.bhp");
    std::stringstream ss;
    ss << in.rdbuf();
    Source s = parse_source(ss.str());
    register_histories(s.program, s.decls);
    return s.decls;
}

FormP F(const Decls& d, const char* s) { return parse_formula(s, d); }

} // namespace

TEST_CASE("normal form: relational atoms are canonical") {
    Decls d = drug_decls();
    CHECK(nf_key(normalize(d, F(d, "a12 > 0.05"))) == "not a12 <= 0.05");
    CHECK(nf_key(normalize(d, F(d, "0.05 >= a12"))) == "a12 <= 0.05");
    CHECK(nf_key(normalize(d, F(d, "a12 != a13"))) == "not a12 = a13");
    CHECK(nf_key(normalize(d, F(d, "a13 = a12"))) == "a12 = a13");
    CHECK(nf_key(normalize(d, F(d, "h[(y1, y2), z12] + 1 = 1"))) == "h[(y1, y2), z12] = 0");
    CHECK(normalize(d, F(d, "h[(y1, y2), z12] + 1 = 0"))->kind == Formula::Kind::False);
    CHECK(normalize(d, F(d, "1 + 1 = 2"))->kind == Formula::Kind::True);
}

TEST_CASE("normal form: connectives are flattened, sorted and deduplicated") {
    Decls d = drug_decls();
    CHECK(same_assertion(d, F(d, "a12 <= 0.05 and (a13 <= 0.05 and a12 <= 0.05)"), F(d, "a13 <= 0.05 and a12 <= 0.05")));
    CHECK(same_assertion(d, F(d, "a12 <= 0.05 -> a13 <= 0.05"), F(d, "a13 <= 0.05 or a12 > 0.05")));
    CHECK(same_assertion(d, F(d, "not K not (mu1 = mu2)"), F(d, "P (mu1 = mu2)")));
    CHECK(normalize(d, F(d, "K true"))->kind == Formula::Kind::True);
    CHECK(normalize(d, F(d, "a12 <= 0.05 and not a12 <= 0.05"))->kind == Formula::Kind::False);
}

TEST_CASE("normal form: shifted history assertion equals the earlier one") {
    Decls d = drug_decls();
    FormP after = F(d, "kappa{(y1, y2) : z12}");
    FormP shifted = subst(d, after, {{"h[(y1, y2), z12]", mk_app("+", {mk_var("h[(y1, y2), z12]"), mk_int(1)})}});
    CHECK(same_assertion(d, shifted, F(d, "kappa{}")));
}

TEST_CASE("decider: propositional tautologies and arithmetic on constants") {
    Decls d = drug_decls();
    SchemaSet none;
    CHECK(prove(d, F(d, "a12 <= 0.05 or not a12 <= 0.05"), none));
    CHECK(prove(d, F(d, "a12 <= 0.01 -> a12 <= 0.05"), none));
    CHECK(prove(d, F(d, "a12 = 0.01 -> a12 < 0.05"), none));
    CHECK(prove(d, F(d, "mu1 > mu2 -> not (mu1 < mu2)"), none));
    CHECK_FALSE(prove(d, F(d, "a12 <= 0.05 -> a12 <= 0.01"), none));
    CHECK_FALSE(prove(d, F(d, "K (mu1 = mu2) -> mu1 = mu2"), none));
}

TEST_CASE("decider: knowledge schemata") {
    Decls d = drug_decls();
    SchemaSet k = SchemaSet::from_names({"K"});
    CHECK(prove(d, F(d, "K (mu1 = mu2) -> mu1 = mu2"), k));
    CHECK(prove(d, F(d, "K (mu1 = mu2) -> K K (mu1 = mu2)"), k));
    CHECK(prove(d, F(d, "P (mu1 = mu2) -> K P (mu1 = mu2)"), k));
    CHECK(prove(d, F(d, "K (mu1 = mu2 and mu1 = mu3) -> K (mu1 = mu2)"), k));
    CHECK(prove(d, F(d, "K (mu1 = mu2) and K (mu1 = mu3) -> K (mu1 = mu2 and mu1 = mu3)"), k));
    CHECK(prove(d, F(d, "P (mu1 != mu2 and mu1 != mu3) -> P (mu1 != mu2 or mu1 != mu3)"), k));
    CHECK_FALSE(prove(d, F(d, "mu1 = mu2 -> K (mu1 = mu2)"), k));
    // knowledge is belief at every level
    CHECK(prove(d, F(d, "K alt[z12] -> Belief[<= 0.05; (y1, y2); z12] alt[z12]"), k));
    // prior beliefs about two-sided hypotheses
    CHECK(prove(d, F(d, "alt[z12] or null[z12]"), k));
    CHECK(prove(d, F(d, "K not lower[z12] <-> K (upper[z12] or (not upper[z12] and not lower[z12]))"), k));
}

TEST_CASE("decider: statistical belief schemata") {
    Decls d = drug_decls();
    SchemaSet sbl = SchemaSet::from_names({"SB-<"});
    CHECK(prove(d, F(d, "Belief[< 0.01; (y1, y2); z12] alt[z12] -> Belief[<= 0.05; (y1, y2); z12] alt[z12]"), sbl));
    CHECK_FALSE(prove(d, F(d, "Belief[<= 0.05; (y1, y2); z12] alt[z12] -> Belief[<= 0.01; (y1, y2); z12] alt[z12]"), sbl));
    CHECK(prove(d, F(d, "Belief[= a12; (y1, y2); z12] alt[z12] and a12 <= 0.05 -> Belief[<= 0.05; (y1, y2); z12] alt[z12]"),
                sbl));
    SchemaSet bht = SchemaSet::from_names({"BHT"});
    CHECK(prove(d, F(d, "kappa{(y1, y2) : z12} -> K kappa{(y1, y2) : z12}"), bht));
    CHECK(prove(d, F(d, "kappa{(y1, y2) : z12} -> Belief[= z12(y1, y2); (y1, y2); z12] alt[z12]"), bht));
    CHECK_FALSE(prove(d, F(d, "kappa{} -> Belief[= z12(y1, y2); (y1, y2); z12] alt[z12]"), bht));
    SchemaSet comb = SchemaSet::from_names({"BHT-and"});
    CHECK(prove(d, F(d, "kappa{(y1, y2) : z12, (y1, y3) : z13} -> "
                        "Belief[<= min(z12(y1, y2), z13(y1, y3)); ((y1, y2), (y1, y3)); both] alt[both]"),
                comb));
}

TEST_CASE("property: every formula the decider proves is valid on the bundled scenarios") {
    gen::Gen g(8128);
    SchemaSet all = SchemaSet::all();
    int proved = 0;
    for (const char* f : {"drugs.scn", "z.scn", "wp6.scn", "hack.scn", "lrt.scn"}) {
        Model m = build_model(load_scenario(std::filesystem::path(BHL_CORPUS_DIR) / f));
        std::vector<std::string> atoms = gen::model_atoms(m);
        for (int i = 0; i < 150; ++i) {
            std::string a = gen::formula_over(g, atoms, 2), b = gen::formula_over(g, atoms, 1);
            // shapes that are often (but not always) theorems, so both outcomes are exercised
            std::string text;
            switch (g.pick(5)) {
            case 0: text = "K " + a + " -> " + a + " or " + b; break;
            case 1: text = "(" + a + ") and (" + b + ") -> K (" + a + ")"; break;
            case 2: text = "P " + a + " -> K P " + a; break;
            case 3: text = "(" + a + ") -> (" + b + ")"; break;
            default: text = "K (" + a + " -> " + b + ") and P " + a + " -> P " + b; break;
            }
            FormP phi = parse_formula(text, m.decls);
            if (!prove(m.decls, phi, all)) continue;
            ++proved;
            INFO(f << ": " << text);
            CHECK(check_valid(m, phi).ok);
        }
    }
    CHECK(proved > 100);
}
