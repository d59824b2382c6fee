#include "bhl/wp.hpp"

namespace bhl {

namespace {

Subst test_subst(const Command& c) {
    std::string h = hist_name(c.ref, c.test);
    return {{c.var, mk_test(c.test, c.ref)}, {h, mk_app("+", {mk_var(h), mk_int(1)})}};
}

FormP wp_core(const Decls& d, const CmdP& c, const FormP& q) {
    using K = Command::Kind;
    switch (c->kind) {
    case K::Skip:
    case K::Assert: return q;
    case K::Assign: return subst(d, q, {{c->var, c->expr}});
    case K::Test: return subst(d, q, test_subst(*c));
    case K::Seq:
    case K::Par: return wp_core(d, c->c1, wp_core(d, c->c2, q));
    case K::If: {
        FormP g = guard_formula(c->expr);
        return f_or(f_and(g, wp_core(d, c->c1, q)), f_and(f_not(g), wp_core(d, c->c2, q)));
    }
    case K::While: break;
    }
    fail(Error::Kind::Proof, "weakest precondition of a loop needs an invariant (use vc)", c->span);
}

struct VcBuilder {
    const Decls& d;
    std::vector<Obligation> out;
    int loops = 0;

    std::string where(const CmdP& c, const std::string& what) {
        return c->span.known() ? what + "@" + c->span.str() : what + "#" + std::to_string(out.size() + 1);
    }

    FormP go(const CmdP& c, const FormP& q) {
        using K = Command::Kind;
        switch (c->kind) {
        case K::Skip: return q;
        case K::Assign:
        case K::Test: return wp_core(d, c, q);
        case K::Assert:
            out.push_back({where(c, "assert"), f_implies(expand_sugar(d, c->inv), q)});
            return expand_sugar(d, c->inv);
        case K::Seq:
        case K::Par: return go(c->c1, go(c->c2, q));
        case K::If: {
            FormP g = guard_formula(c->expr);
            FormP a = go(c->c1, q);
            FormP b = go(c->c2, q);
            return f_or(f_and(g, a), f_and(f_not(g), b));
        }
        case K::While: {
            if (!c->inv) fail(Error::Kind::Proof, "loop without an invariant", c->span);
            int k = ++loops;
            FormP inv = expand_sugar(d, c->inv);
            FormP g = guard_formula(c->expr);
            out.push_back({where(c, "loop" + std::to_string(k) + "-exit"), f_implies(f_and(inv, f_not(g)), q)});
            FormP body = go(c->c1, inv);
            out.push_back({where(c, "loop" + std::to_string(k) + "-preserve"), f_implies(f_and(inv, g), body)});
            return inv;
        }
        }
        return q;
    }
};

} // namespace

FormP weakest_pre(const Decls& d, const CmdP& c, const FormP& post) { return wp_core(d, c, expand_sugar(d, post)); }

VCSet vc_gen(const Decls& d, const CmdP& c, const FormP& pre, const FormP& post) {
    VcBuilder b{d, {}, 0};
    FormP res = b.go(c, expand_sugar(d, post));
    VCSet v;
    v.residual = res;
    v.obligations.push_back({"entry", f_implies(expand_sugar(d, pre), res)});
    // inner obligations are produced back to front; report them in program order
    for (auto it = b.out.rbegin(); it != b.out.rend(); ++it) v.obligations.push_back(*it);
    return v;
}

} // namespace bhl
