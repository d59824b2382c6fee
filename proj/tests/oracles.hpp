#pragma once

// Brute-force oracles: execute programs world by world and compare with the
// symbolic answer.  Shared by the property tests and the acceptance binary.

#include "bhl/kripke.hpp"
#include "bhl/semantics.hpp"
#include "bhl/wp.hpp"

#include <string>
#include <vector>

namespace bhl::oracle {

struct Outcome {
    bool agree = true;
    int checked = 0; // base worlds compared
    int satisfied = 0; // of which the precondition held
    std::string detail;
};

// w ⊨ wp(C, φ) iff every final world of C from w satisfies φ, evaluated in the
// base model closed under executions of C.
inline Outcome wp_agreement(const Model& base, const CmdP& c, const FormP& post) {
    Outcome o;
    RunOptions opt{1000000, Interleaving::All};
    bool exhausted = false;
    std::vector<World> worlds = base.worlds;
    std::vector<World> reach = reachable_worlds(c, base.worlds, base.decls, opt, &exhausted);
    worlds.insert(worlds.end(), reach.begin(), reach.end());
    Model m = make_model(base.decls, worlds);
    FormP wp = weakest_pre(base.decls, c, post);
    FormP core = expand_sugar(base.decls, post);
    Checker ck(m);
    for (const auto& w0 : base.worlds) {
        int i = m.find(w0);
        bool lhs = ck.holds(i, wp);
        RunResult r = run(c, w0, base.decls, opt);
        bool rhs = true;
        for (const auto& f : r.finals) rhs = rhs && ck.holds(m.find(f), core);
        ++o.checked;
        o.satisfied += lhs;
        if (lhs != rhs) {
            o.agree = false;
            o.detail = "world " + std::to_string(i) + ": wp says " + (lhs ? "true" : "false") + ", execution says " +
                       (rhs ? "true" : "false") + "\n  C = " + print_command(c) + "\n  post = " + print_formula(post) +
                       "\n  wp = " + print_formula(wp);
            return o;
        }
    }
    return o;
}

// Every interleaving reaches the same memory and history as the canonical run.
inline Outcome par_confluence(const std::vector<World>& from, const CmdP& c, const Decls& d) {
    Outcome o;
    for (const auto& w0 : from) {
        RunResult r = run(c, w0, d, RunOptions{1000000, Interleaving::All});
        World canon = run_canonical(c, w0, d);
        ++o.checked;
        for (const auto& f : r.finals) {
            if (!(f.last().mem == canon.last().mem) || f.last().hist != canon.last().hist) {
                o.agree = false;
                o.detail = "interleaving diverges from the canonical result for " + print_command(c) + "\n" +
                           trace_dump(f, d) + "--- canonical\n" + trace_dump(canon, d);
                return o;
            }
        }
    }
    return o;
}

} // namespace bhl::oracle
