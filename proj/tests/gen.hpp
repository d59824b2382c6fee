#pragma once

// Hand-rolled random generators shared by the property tests and the
// acceptance binary.  Everything is produced as concrete syntax over the
// vocabulary of corpus/wp6.bhp and parsed back, so the parser is exercised too.

#include "bhl/kripke.hpp"
#include "bhl/syntax.hpp"

#include <map>
#include <set>

#include <random>
#include <string>
#include <vector>

namespace bhl::gen {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
    bool coin() { return pick(2) == 0; }
    double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
    std::mt19937_64& rng() { return rng_; }

    std::string int_expr() {
        switch (pick(4)) {
        case 0: return std::to_string(pick(4));
        case 1: return "x + " + std::to_string(pick(3));
        case 2: return "x - 1";
        default: return "x";
        }
    }

    std::string prob_const() {
        static const char* cs[] = {"0.01", "0.05", "0.2", "0.5", "1.0"};
        return cs[pick(5)];
    }

    std::string guard() {
        switch (pick(5)) {
        case 0: return "x < " + std::to_string(pick(3));
        case 1: return "p <= 0.05";
        case 2: return "r < q";
        case 3: return "x = " + std::to_string(pick(3)) + " or q <= 0.2";
        default: return "not (x >= 1)";
        }
    }

    // One atomic command; `tests_left` bounds the number of test calls.
    std::string atom(int& tests_left) {
        int k = pick(tests_left > 0 ? 8 : 5);
        switch (k) {
        case 0: return "skip";
        case 1: return "x := " + int_expr();
        case 2: return "r := " + prob_const();
        case 3: return "q := r";
        case 4: return "p := min(q, r)";
        case 5: --tests_left; return "p := A(y)";
        case 6: --tests_left; return "q := A(z)";
        default: --tests_left; return "r := B(y, z)";
        }
    }

    // Loop-free program of nesting depth <= depth with at most `tests` test calls.
    std::string program(int depth, int& tests, bool allow_par = true) {
        if (depth <= 0) return atom(tests);
        switch (pick(allow_par ? 5 : 4)) {
        case 0: return atom(tests);
        case 1:
        case 2: return program(depth - 1, tests, allow_par) + "; " + program(depth - 1, tests, allow_par);
        case 3: {
            std::string g = guard();
            std::string a = program(depth - 1, tests, allow_par);
            return "if " + g + " { " + a + " } else { " + program(depth - 1, tests, allow_par) + " }";
        }
        default: return "(" + program(depth - 1, tests, false) + " || " + program(depth - 1, tests, false) + ")";
        }
    }

    std::string atom_formula() {
        switch (pick(14)) {
        case 0: return "x = " + std::to_string(pick(4));
        case 1: return "x <= " + std::to_string(pick(4));
        case 2: return "p <= 0.05";
        case 3: return "r < q";
        case 4: return "q = 1.0";
        case 5: return "kappa{y : A}";
        case 6: return "kappa{}";
        case 7: return "h[y, A] = " + std::to_string(pick(3));
        case 8: return "h[z, A] + h[(y, z), B] <= 1";
        case 9: return "mu = 1.0";
        case 10: return "sampled(y, N(mu, 1.0), 3)";
        case 11: return "neg[<= ; y; A](0.05)";
        case 12: return "Belief[<= 0.05; y; A] alt[A]";
        default: return "p + r <= " + prob_const();
        }
    }

    std::string formula(int depth) {
        if (depth <= 0) return atom_formula();
        switch (pick(7)) {
        case 0: return atom_formula();
        case 1: return "(" + formula(depth - 1) + " and " + formula(depth - 1) + ")";
        case 2: return "(" + formula(depth - 1) + " or " + formula(depth - 1) + ")";
        case 3: return "not " + formula(depth - 1);
        case 4: return "K " + formula(depth - 1);
        case 5: return "P " + formula(depth - 1);
        default: return "(" + formula(depth - 1) + " -> " + formula(depth - 1) + ")";
        }
    }

private:
    std::mt19937_64 rng_;
};

// Atomic formulas over the vocabulary of an arbitrary model: comparisons of
// numeric variables against values that occur in its worlds, history counts,
// hypothesis formulas of the declared tests and κ of the empty history.
inline std::vector<std::string> model_atoms(const Model& m) {
    std::set<std::string> out{"kappa{}"};
    std::map<std::string, std::set<std::string>> seen;
    for (const auto& w : m.worlds)
        for (const auto& [v, val] : w.last().mem)
            if (val.is_numeric() && seen[v].size() < 4) seen[v].insert(val.kind() == Value::Kind::Real ? format_real(val.as_real()) : val.str());
    for (const auto& [v, vals] : seen)
        for (const auto& c : vals) {
            out.insert(v + " = " + c);
            out.insert(v + " <= " + c);
        }
    for (const auto& id : m.decls.test_order) {
        out.insert("alt[" + id + "]");
        const TestDecl& t = m.decls.test(id);
        if (t.combined()) continue;
        if (t.upper) out.insert("upper[" + id + "]");
        if (t.lower) out.insert("lower[" + id + "]");
    }
    return {out.begin(), out.end()};
}

inline std::string formula_over(Gen& g, const std::vector<std::string>& atoms, int depth) {
    auto atom = [&] { return atoms[static_cast<size_t>(g.pick(static_cast<int>(atoms.size())))]; };
    if (depth <= 0) return atom();
    switch (g.pick(7)) {
    case 0: return atom();
    case 1: return "(" + formula_over(g, atoms, depth - 1) + " and " + formula_over(g, atoms, depth - 1) + ")";
    case 2: return "(" + formula_over(g, atoms, depth - 1) + " or " + formula_over(g, atoms, depth - 1) + ")";
    case 3: return "not " + formula_over(g, atoms, depth - 1);
    case 4: return "K " + formula_over(g, atoms, depth - 1);
    case 5: return "P " + formula_over(g, atoms, depth - 1);
    default: return "(" + formula_over(g, atoms, depth - 1) + " -> " + formula_over(g, atoms, depth - 1) + ")";
    }
}

// Programs composed in parallel whose branches respect the restriction that
// neither side updates a variable the other reads or writes.
inline std::string par_program(Gen& g) {
    static const std::vector<std::vector<std::string>> lanes = {
        {"x := x + 1", "x := 2", "skip", "if x < 2 { x := x + 1 } else { skip }"},
        {"p := A(y)", "p := 0.5", "if p <= 0.05 { p := 0.01 } else { skip }"},
        {"q := A(z)", "q := min(q, 0.2)"},
        {"r := B(y, z)", "r := 0.2", "if r < 0.5 { r := 0.01 } else { r := 1.0 }"},
    };
    int a = g.pick(4), b = g.pick(3);
    if (b >= a) ++b;
    auto lane = [&](int i) {
        std::string s;
        int n = 1 + g.pick(3);
        for (int k = 0; k < n; ++k) s += (k ? "; " : "") + lanes[i][g.pick(static_cast<int>(lanes[i].size()))];
        return s;
    };
    std::string body = "(" + lane(a) + " || " + lane(b) + ")";
    if (g.coin()) body = "x := " + std::to_string(g.pick(3)) + "; " + body;
    if (g.coin()) body += "; " + lane(g.pick(4));
    return body;
}

} // namespace bhl::gen
