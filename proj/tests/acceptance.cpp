// Acceptance checks: one PASS/FAIL line per criterion.  Exit status is the
// number of failed criteria (0 when everything passes).

#include "gen.hpp"
#include "oracles.hpp"

#include "bhl/kripke.hpp"
#include "bhl/proof.hpp"
#include "bhl/stats.hpp"
#include "bhl/wp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

using namespace bhl;

namespace {

std::filesystem::path corpus(const std::string& f) { return std::filesystem::path(BHL_CORPUS_DIR) / f; }

struct Result {
    bool pass = true;
    std::string summary;
};

void require(Result& r, bool ok, const std::string& what) {
    if (!ok) {
        if (r.pass) r.summary = what;
        else r.summary += "; " + what;
        r.pass = false;
    }
}

std::string fmt(double x) { return format_sig(x, 6); }

// ---------------------------------------------------------------- 1

Result z_kernel() {
    Result r;
    double p196 = stats::std_normal_p_value(Tail::Two, 1.96);
    double p3 = stats::std_normal_p_value(Tail::Two, 3.0);
    double p18 = stats::std_normal_p_value(Tail::Two, 1.8);
    require(r, std::fabs(p196 - 0.05) <= 1e-3, "p(1.96) = " + fmt(p196));
    require(r, p3 < 0.05, "p(3) = " + fmt(p3));
    require(r, p18 > 0.05, "p(1.8) = " + fmt(p18));
    // the same numbers through a declared test on data with those statistics
    Decls d;
    parse_header_into("test z = Z(two, sigma = 1.0);", d);
    auto pv = [&](double t) {
        return stats::p_value(d, "z", Value::tuple({Value::reals({t, t}), Value::reals({0.0, 0.0})})).value;
    };
    require(r, std::fabs(pv(1.96) - p196) < 1e-12 && std::fabs(pv(3.0) - p3) < 1e-12, "declared test disagrees");
    if (r.pass) r.summary = "p(1.96)=" + fmt(p196) + " p(3)=" + fmt(p3) + " p(1.8)=" + fmt(p18);
    return r;
}

// ---------------------------------------------------------------- 2

Result combination_bounds() {
    Result r;
    gen::Gen g(424242);
    const double edge[] = {0.0, 1e-300, 1e-12, 0.5, 1.0 - 1e-12, 1.0};
    int worst = 0;
    for (int i = 0; i < 1000; ++i) {
        double p1 = i < 36 ? edge[i % 6] : g.unit();
        double p2 = i < 36 ? edge[i / 6] : (g.coin() ? g.unit() : std::pow(g.unit(), 8));
        double dis = stats::combine_p_values(stats::Combination::Disjunctive, p1, p2);
        double con = stats::combine_p_values(stats::Combination::Conjunctive, p1, p2);
        bool ok = dis <= p1 + p2 + 1e-12 && con <= std::min(p1, p2) + 1e-12;
        if (!ok && worst++ == 0)
            require(r, false, "p1=" + fmt(p1) + " p2=" + fmt(p2) + " or=" + fmt(dis) + " and=" + fmt(con));
    }
    if (r.pass) r.summary = "1000 pairs, both bounds hold";
    return r;
}

// ---------------------------------------------------------------- 3

Result golden_proofs() {
    Result r;
    int obligations = 0;
    for (const char* f : {"c_drug.bhl", "c_multi.bhl", "ztest.bhl", "lrt.bhl"}) {
        ProofScript s = load_proof_script(corpus(f));
        CheckReport rep = check_proof(s);
        obligations += static_cast<int>(rep.obligations.size());
        require(r, rep.accepted, std::string(f) + " rejected: " + rep.reason);
        require(r, rep.assumed().empty(), std::string(f) + " has assumed obligations");
        if (!rep.accepted || !rep.conclusion) continue;
        if (s.decls.macros.count("post"))
            require(r, same_assertion(s.decls, rep.conclusion->post, s.decls.macros.at("post")),
                    std::string(f) + " concludes a different postcondition");
        // soundness smoke test: the accepted judgment has no counterexample on its scenario
        for (const auto& [id, path] : s.scenarios) {
            Scenario sc = load_scenario(path);
            Scenario init = sc;
            init.run_program = false;
            Model m = build_model(init);
            Verdict v = judgment_holds(m, rep.conclusion->pre, rep.conclusion->prog, rep.conclusion->post,
                                       RunOptions{1000000, Interleaving::All});
            require(r, v.ok, std::string(f) + " accepted but refuted on scenario " + id);
        }
    }
    // the conclusions are the ones the case studies claim
    ProofScript drug = load_proof_script(corpus("c_drug.bhl"));
    require(r, print_formula(drug.decls.macros.at("post")).find("min(a12, a13)") != std::string::npos,
            "drug post does not bound by min(a12, a13)");
    ProofScript multi = load_proof_script(corpus("c_multi.bhl"));
    require(r, print_formula(multi.decls.macros.at("post")).find("a12 + a13") != std::string::npos,
            "multi post does not bound by a12 + a13");
    if (r.pass) r.summary = "4 scripts accepted, 0 assumed, " + std::to_string(obligations) + " obligations";
    return r;
}

// ---------------------------------------------------------------- 4

Result p_hacking() {
    Result r;
    Scenario sc = load_scenario(corpus("hack.scn"));
    sc.run_program = false;
    Model m = build_model(sc);
    Verdict v = judgment_holds(m, m.decls.macros.at("pre"), sc.program, m.decls.macros.at("claim"),
                               RunOptions{1000000, Interleaving::All});
    require(r, !v.ok, "the hacking claim was not refuted");
    if (!v.ok) {
        require(r, v.cex.has_value(), "no counterexample world");
        if (v.cex) {
            const std::string& t = v.cex->description;
            require(r, t.find("history + A1") != std::string::npos && t.find("history + A2") != std::string::npos,
                    "counterexample history lacks one of the tests");
        }
    }
    CheckReport bad = check_proof(load_proof_script(corpus("hack_bad.bhl")));
    require(r, !bad.accepted, "hack_bad.bhl accepted");
    require(r, bad.reason.find("Hist") != std::string::npos, "hack_bad.bhl rejected for another reason: " + bad.reason);
    if (r.pass) r.summary = "claim refuted with a two-test history; hack_bad.bhl rejected at " + bad.path;
    return r;
}

// ---------------------------------------------------------------- 5 and 6

const Model& wp6_model() {
    static Model m = build_model(load_scenario(corpus("wp6.scn")));
    return m;
}

Result wp_oracle() {
    Result r;
    const Model& m = wp6_model();
    require(r, m.worlds.size() == 6, "wp6 scenario has " + std::to_string(m.worlds.size()) + " worlds");
    gen::Gen g(5005);
    int programs = 0, checked = 0, satisfied = 0, disagree = 0, discarded = 0;
    while (programs < 500) {
        int tests = 2;
        std::string src = g.program(3, tests);
        CmdP c;
        try {
            c = parse_program(src, m.decls);
            check_program(c, m.decls);
        } catch (const Error&) {
            ++discarded;
            continue;
        }
        FormP post = parse_formula(g.formula(2), m.decls);
        oracle::Outcome o = oracle::wp_agreement(m, c, post);
        if (!o.agree && disagree++ == 0) require(r, false, o.detail);
        checked += o.checked;
        satisfied += o.satisfied;
        ++programs;
    }
    require(r, satisfied > 0 && satisfied < checked, "vacuous: wp always " + std::string(satisfied ? "true" : "false"));
    if (r.pass)
        r.summary = "500 programs x 6 worlds, 100% agreement (" + std::to_string(satisfied) + "/" +
                    std::to_string(checked) + " wp true, " + std::to_string(discarded) + " ill-typed draws skipped)";
    else
        r.summary += " [" + std::to_string(disagree) + " disagreeing programs]";
    return r;
}

Result par_exchange() {
    Result r;
    const Model& m = wp6_model();
    gen::Gen g(6006);
    int bad = 0;
    for (int i = 0; i < 200; ++i) {
        CmdP c = parse_program(gen::par_program(g), m.decls);
        check_program(c, m.decls);
        oracle::Outcome o = oracle::par_confluence(m.worlds, c, m.decls);
        if (!o.agree && bad++ == 0) require(r, false, o.detail);
    }
    if (r.pass) r.summary = "200 programs, all interleavings match the canonical run";
    return r;
}

// ---------------------------------------------------------------- 7

struct ModalTally {
    int checks = 0;
    int violations = 0;
    std::string first;
};

void valid(const Model& m, const std::string& text, ModalTally& t, const std::string& scenario) {
    ++t.checks;
    Verdict v = check_valid(m, parse_formula(text, m.decls));
    if (!v.ok && t.violations++ == 0) t.first = scenario + ": " + text;
}

// Dataset reference of every declared test that the model's history universe covers.
std::map<std::string, std::string> test_refs(const Decls& d) {
    std::map<std::string, std::string> out;
    for (const auto& [ref, test] : d.histories) out.emplace(test, print_term(ref));
    for (const auto& id : d.test_order) {
        const TestDecl& t = d.test(id);
        if (t.combined() && out.count(t.c1) && out.count(t.c2))
            out.emplace(id, "(" + out.at(t.c1) + ", " + out.at(t.c2) + ")");
    }
    return out;
}

Result modal_suite() {
    Result r;
    ModalTally t;
    int nonvacuous_bht = 0, bht = 0, z_prior = 0;
    std::string vacuous;
    const char* ops[] = {"=", "<=", ">=", "<", ">"};
    const char* eps[] = {"0.01", "0.05", "0.1"};
    std::vector<std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(BHL_CORPUS_DIR))
        if (e.path().extension() == ".scn") files.push_back(e.path().filename().string());
    std::sort(files.begin(), files.end());
    gen::Gen g(7007);
    for (const auto& f : files) {
        Scenario sc = load_scenario(corpus(f));
        Model m = build_model(sc, RunOptions{1000000, Interleaving::All});
        const Decls& d = m.decls;
        std::vector<std::string> atoms = gen::model_atoms(m);
        // S5 for K
        for (int i = 0; i < 25; ++i) {
            std::string a = gen::formula_over(g, atoms, 2), b = gen::formula_over(g, atoms, 2);
            valid(m, "K " + a + " -> " + a, t, f);
            valid(m, "K " + a + " -> K K " + a, t, f);
            valid(m, "not K " + a + " -> K not K " + a, t, f);
            valid(m, "K (" + a + " -> " + b + ") -> (K " + a + " -> K " + b + ")", t, f);
        }
        auto refs = test_refs(d);
        for (const auto& [test, ref] : refs) {
            std::vector<std::string> phis{"alt[" + test + "]", gen::formula_over(g, atoms, 1)};
            for (const auto& phi : phis) {
                for (const char* op : ops)
                    for (const char* e : eps) {
                        std::string hdr = std::string(op) + " " + e + "; " + ref + "; " + test;
                        std::string b = "Belief[" + hdr + "] " + phi, p = "Possible[" + hdr + "] " + phi;
                        valid(m, b + " -> K " + b, t, f);        // SB4
                        valid(m, p + " -> K " + p, t, f);        // SB5
                        valid(m, "K " + phi + " -> " + b, t, f); // SBk
                    }
                for (const char* op : {"<=", "<"})
                    for (int i = 0; i < 3; ++i)
                        for (int j = i; j < 3; ++j) { // SB-<
                            std::string lo = std::string(op) + " " + eps[i] + "; " + ref + "; " + test;
                            std::string hi = std::string(op) + " " + eps[j] + "; " + ref + "; " + test;
                            valid(m, "Belief[" + lo + "] " + phi + " -> Belief[" + hi + "] " + phi, t, f);
                            valid(m, "Possible[" + hi + "] " + phi + " -> Possible[" + lo + "] " + phi, t, f);
                        }
            }
            // BHT and its combinations
            const TestDecl& td = d.test(test);
            std::string kappa, bound;
            if (!td.combined()) {
                kappa = "kappa{" + ref + " : " + test + "}";
                bound = "= " + test + "(" + ref + ")";
            } else if (!d.test(td.c1).combined() && !d.test(td.c2).combined()) {
                const std::string &r1 = refs.at(td.c1), &r2 = refs.at(td.c2);
                kappa = "kappa{" + r1 + " : " + td.c1 + ", " + r2 + " : " + td.c2 + "}";
                std::string a1 = td.c1 + "(" + r1 + ")", a2 = td.c2 + "(" + r2 + ")";
                bound = td.kind == TestDecl::Kind::Or ? "<= " + a1 + " + " + a2 : "<= min(" + a1 + ", " + a2 + ")";
            }
            if (!kappa.empty()) {
                ++bht;
                valid(m, kappa + " -> Belief[" + bound + "; " + ref + "; " + test + "] alt[" + test + "]", t, f);
                if (!check_valid(m, parse_formula("not " + kappa, d)).ok) ++nonvacuous_bht;
                else if (vacuous.empty()) vacuous = f + ": " + kappa;
            }
        }
        // BHκ for the empty history, each single pair and the whole universe
        std::vector<std::string> kappas{"kappa{}"};
        std::string all;
        for (const auto& [ref, test] : d.histories) {
            std::string pair = print_term(ref) + " : " + test;
            kappas.push_back("kappa{" + pair + "}");
            all += (all.empty() ? "" : ", ") + pair;
        }
        kappas.push_back("kappa{" + all + "}");
        for (const auto& k : kappas) {
            valid(m, "(" + k + ") <-> P (" + k + ")", t, f);
            valid(m, "(" + k + ") <-> K (" + k + ")", t, f);
        }
        // prior beliefs for Z tests
        for (const auto& id : d.test_order) {
            const TestDecl& td = d.test(id);
            if (td.kind != TestDecl::Kind::Z || !td.upper || !td.lower) continue;
            ++z_prior;
            std::string u = "upper[" + id + "]", l = "lower[" + id + "]";
            std::string nuh = "(not " + u + " and not " + l + ")";
            valid(m, "(" + u + " or " + l + ") or " + nuh, t, f);
            valid(m, "K not " + l + " <-> K (" + u + " or " + nuh + ")", t, f);
            valid(m, "K not " + u + " <-> K (" + l + " or " + nuh + ")", t, f);
        }
    }
    require(r, t.violations == 0, std::to_string(t.violations) + " violations, first: " + t.first);
    require(r, z_prior > 0, "no Z test with both one-sided alternatives");
    // a singleton history can be unreachable (a test that only ever runs after another), but the
    // instances as a whole must exercise the rule
    require(r, bht > 0 && 2 * nonvacuous_bht >= bht, "most BHT instances are vacuous, e.g. " + vacuous);
    if (r.pass)
        r.summary = std::to_string(files.size()) + " scenarios, " + std::to_string(t.checks) +
                    " instances, 0 violations (" + std::to_string(bht) + " BHT instances, " + std::to_string(nonvacuous_bht) + " with a reachable history; " +
                    std::to_string(z_prior) + " Z tests)";
    return r;
}

// ---------------------------------------------------------------- 8

Result monte_carlo() {
    Result r;
    Decls d;
    parse_header_into("test z = Z(two, sigma = 1.0); test zz = or(z, z);", d);
    std::mt19937_64 rng(20240611);
    std::normal_distribution<double> n01(0.0, 1.0);
    auto sample = [&](int n) {
        std::vector<double> xs(n);
        for (auto& x : xs) x = n01(rng);
        return Value::reals(xs);
    };
    const int trials = 10000, n = 10;
    int z_rej = 0, or_rej = 0, either_rej = 0;
    for (int i = 0; i < trials; ++i) {
        Value a = Value::tuple({sample(n), sample(n)});
        Value b = Value::tuple({sample(n), sample(n)});
        double p1 = stats::p_value(d, "z", a).value;
        double p2 = stats::p_value(d, "z", b).value;
        double por = stats::p_value(d, "zz", Value::tuple({a, b})).value;
        z_rej += p1 <= 0.05;
        either_rej += p1 <= 0.05 || p2 <= 0.05;
        or_rej += por <= 0.05 + 0.05;
    }
    double rz = double(z_rej) / trials, ror = double(or_rej) / trials, re = double(either_rej) / trials;
    auto se = [&](double p) { return std::sqrt(p * (1 - p) / trials); };
    require(r, std::fabs(rz - 0.05) <= 0.01, "Z rejection rate " + fmt(rz));
    require(r, ror <= 0.1 + 3 * se(ror), "disjunctive rejection rate " + fmt(ror));
    require(r, re <= 0.1 + 3 * se(re), "either-test rejection rate " + fmt(re));
    if (r.pass)
        r.summary = "Z rate " + fmt(rz) + "; disjunctive at 0.05+0.05 " + fmt(ror) + "; either test at 0.05 " + fmt(re);
    return r;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Result()> run;
    };
    std::vector<Criterion> cs{
        {1, "Z-test kernel", 0.1, z_kernel},
        {2, "combination bounds", 1.0, combination_bounds},
        {3, "golden proofs", 5.0, golden_proofs},
        {4, "p-hacking detection", 5.0, p_hacking},
        {5, "wp oracle equivalence", 60.0, wp_oracle},
        {6, "Par/Seq exchange", 30.0, par_exchange},
        {7, "modal property suite", 60.0, modal_suite},
        {8, "Monte-Carlo calibration", 120.0, monte_carlo},
    };
    int failed = 0;
    for (const auto& c : cs) {
        auto t0 = std::chrono::steady_clock::now();
        Result r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r.pass = false;
            r.summary = std::string("exception: ") + e.what();
        }
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (s > c.limit_s) {
            r.pass = false;
            r.summary += " (took " + fmt(s) + " s, limit " + fmt(c.limit_s) + " s)";
        }
        failed += !r.pass;
        std::ostringstream line;
        line << (r.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << r.summary << " ["
             << std::fixed;
        line.precision(3);
        line << s << " s]";
        std::cout << line.str() << std::endl;
    }
    return failed;
}
