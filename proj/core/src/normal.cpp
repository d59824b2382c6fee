#include "bhl/proof.hpp"
#include "bhl/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace bhl {

namespace {

using K = Formula::Kind;

bool is_const(const TermP& t) { return t->kind == Term::Kind::Const; }
bool is_num(const TermP& t) { return is_const(t) && t->value.is_numeric(); }
bool is_app(const TermP& t, const char* f) { return t->kind == Term::Kind::App && t->name == f; }
bool is_hist_var(const TermP& t) { return t->kind == Term::Kind::Var && is_hist_name(t->name); }

TermP with_args(const TermP& t, std::vector<TermP> args) {
    auto u = std::make_shared<Term>(*t);
    u->args = std::move(args);
    return u;
}

TermP fold(const Decls& d, const TermP& t) {
    if (t->kind == Term::Kind::Var || t->kind == Term::Kind::Const) return t;
    std::vector<TermP> args;
    bool all_const = true;
    for (const auto& a : t->args) {
        args.push_back(fold(d, a));
        all_const = all_const && is_const(args.back());
    }
    if (t->kind == Term::Kind::TestApp) return with_args(t, std::move(args));
    const std::string& f = t->name;
    if (all_const && f != "tuple") {
        try {
            return mk_const(eval_term(Memory{}, with_args(t, args), d));
        } catch (const Error&) {
            // e.g. division by zero: keep the term as written
        }
    }
    bool comm = f == "+" || f == "*" || f == "min" || f == "max";
    if (comm && args.size() == 2) {
        bool swap = is_const(args[0]) ? !is_const(args[1])
                                      : !is_const(args[1]) && print_term(args[1]) < print_term(args[0]);
        if (swap) std::swap(args[0], args[1]);
    }
    if ((f == "+" || f == "-") && args.size() == 2 && is_num(args[1])) {
        if (args[1]->value.as_real() == 0.0) return args[0];
        // (t ± c1) ± c2  ->  t + c
        const TermP& in = args[0];
        if ((is_app(in, "+") || is_app(in, "-")) && in->args.size() == 2 && is_num(in->args[1])) {
            TermP c1 = in->name == "+" ? in->args[1] : mk_app("neg", {in->args[1]});
            TermP c2 = f == "+" ? args[1] : mk_app("neg", {args[1]});
            return fold(d, mk_app("+", {in->args[0], mk_app("+", {c1, c2})}));
        }
    }
    return with_args(t, std::move(args));
}

FormP atom(K kind, Cmp op, std::vector<TermP> terms, const std::string& name = {}) {
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->op = op;
    f->terms = std::move(terms);
    f->name = name;
    return f;
}

FormP negate(const FormP& f) {
    if (f->kind == K::True) return f_false();
    if (f->kind == K::False) return f_true();
    if (f->kind == K::Not) return f->subs[0];
    return f_not(f);
}

FormP const_truth(bool b) { return b ? f_true() : f_false(); }

FormP eq_atom(TermP a, TermP b) {
    if (is_const(a) && !is_const(b)) std::swap(a, b);
    else if (!is_const(a) && !is_const(b) && print_term(b) < print_term(a)) std::swap(a, b);
    if (is_hist_var(a) && is_num(b)) {
        double c = b->value.as_real();
        if (c < -kTol || std::fabs(c - std::round(c)) > kTol) return f_false();
    }
    return atom(K::Rel, Cmp::Eq, {a, b});
}

FormP le_atom(TermP a, TermP b) {
    if (is_hist_var(a) && is_num(b) && b->value.as_real() < -kTol) return f_false();
    if (is_num(a) && is_hist_var(b) && a->value.as_real() <= kTol) return f_true();
    return atom(K::Rel, Cmp::Le, {a, b});
}

FormP rel(const Decls& d, Cmp op, TermP a, TermP b) {
    a = fold(d, a);
    b = fold(d, b);
    // move additive constants to the constant side
    for (int i = 0; i < 8; ++i) {
        auto shift = [&](TermP& side, TermP& konst) {
            if (!is_num(konst) || !(is_app(side, "+") || is_app(side, "-")) || side->args.size() != 2 ||
                !is_num(side->args[1]))
                return false;
            konst = fold(d, mk_app(side->name == "+" ? "-" : "+", {konst, side->args[1]}));
            side = side->args[0];
            return true;
        };
        if (!shift(a, b) && !shift(b, a)) break;
    }
    if (is_const(a) && is_const(b)) {
        if (a->value.is_numeric() && b->value.is_numeric()) return const_truth(cmp_apply(op, a->value.as_real(), b->value.as_real()));
        if (op == Cmp::Eq) return const_truth(values_equal(a->value, b->value));
        if (op == Cmp::Ne) return const_truth(!values_equal(a->value, b->value));
    }
    switch (op) {
    case Cmp::Eq: return eq_atom(a, b);
    case Cmp::Ne: return negate(eq_atom(a, b));
    case Cmp::Le: return le_atom(a, b);
    case Cmp::Ge: return le_atom(b, a);
    case Cmp::Lt: return negate(le_atom(b, a));
    case Cmp::Gt: return negate(le_atom(a, b));
    }
    return f_true();
}

FormP neg_atom(const Decls& d, const Formula& f) {
    TermP ref = fold(d, f.terms[0]);
    TermP eps = fold(d, f.terms[1]);
    switch (f.op) {
    case Cmp::Eq:
    case Cmp::Le:
    case Cmp::Lt: return atom(K::Neg, f.op, {ref, eps}, f.name);
    case Cmp::Ge: return f_not(atom(K::Neg, Cmp::Lt, {ref, eps}, f.name));
    case Cmp::Gt: return f_not(atom(K::Neg, Cmp::Le, {ref, eps}, f.name));
    case Cmp::Ne: return f_not(atom(K::Neg, Cmp::Eq, {ref, eps}, f.name));
    }
    return f_true();
}

FormP nary(K kind, const std::vector<FormP>& xs) {
    const K unit = kind == K::And ? K::True : K::False;
    const K zero = kind == K::And ? K::False : K::True;
    std::vector<std::pair<std::string, FormP>> items;
    std::set<std::string> keys;
    auto add = [&](const FormP& x, auto&& self) -> bool {
        if (x->kind == unit) return true;
        if (x->kind == zero) return false;
        if (x->kind == kind) {
            for (const auto& s : x->subs)
                if (!self(s, self)) return false;
            return true;
        }
        std::string k = nf_key(x);
        if (keys.insert(k).second) items.emplace_back(std::move(k), x);
        return true;
    };
    for (const auto& x : xs)
        if (!add(x, add)) return zero == K::True ? f_true() : f_false();
    for (const auto& [k, x] : items)
        if (x->kind == K::Not && keys.count(nf_key(x->subs[0]))) return zero == K::True ? f_true() : f_false();
    if (items.empty()) return unit == K::True ? f_true() : f_false();
    if (items.size() == 1) return items[0].second;
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    auto g = std::make_shared<Formula>();
    g->kind = kind;
    for (auto& [k, x] : items) g->subs.push_back(x);
    return g;
}

FormP nnf(const Decls& d, const FormP& f, bool neg) {
    auto pol = [&](FormP x) { return neg ? negate(x) : x; };
    switch (f->kind) {
    case K::True: return const_truth(!neg);
    case K::False: return const_truth(neg);
    case K::Rel: return pol(rel(d, f->op, f->terms[0], f->terms[1]));
    case K::Neg: return pol(neg_atom(d, *f));
    case K::Sampled:
    case K::Followed: {
        std::vector<TermP> ts;
        for (const auto& t : f->terms) ts.push_back(fold(d, t));
        return pol(atom(f->kind, f->op, std::move(ts)));
    }
    case K::Not: return nnf(d, f->subs[0], !neg);
    case K::And:
    case K::Or: {
        std::vector<FormP> xs;
        for (const auto& s : f->subs) xs.push_back(nnf(d, s, neg));
        return nary((f->kind == K::And) != neg ? K::And : K::Or, xs);
    }
    case K::Implies:
        if (!neg) return nary(K::Or, {nnf(d, f->subs[0], true), nnf(d, f->subs[1], false)});
        return nary(K::And, {nnf(d, f->subs[0], false), nnf(d, f->subs[1], true)});
    case K::Iff: {
        FormP a = nnf(d, f->subs[0], false), na = nnf(d, f->subs[0], true);
        FormP b = nnf(d, f->subs[1], false), nb = nnf(d, f->subs[1], true);
        if (!neg) return nary(K::Or, {nary(K::And, {a, b}), nary(K::And, {na, nb})});
        return nary(K::Or, {nary(K::And, {a, nb}), nary(K::And, {na, b})});
    }
    case K::Know: {
        FormP body = nnf(d, f->subs[0], false);
        FormP k = body->kind == K::True ? f_true() : body->kind == K::False ? f_false() : f_know(body);
        return pol(k);
    }
    case K::Forall:
    case K::Exists: {
        bool all = (f->kind == K::Forall) != neg;
        FormP body = nnf(d, f->subs[0], neg);
        if (body->kind == K::True || body->kind == K::False) return body;
        return all ? f_forall(f->name, body) : f_exists(f->name, body);
    }
    default: break;
    }
    return nnf(d, expand_sugar(d, f), neg);
}

} // namespace

FormP normalize(const Decls& d, const FormP& f) { return nnf(d, expand_sugar(d, f), false); }

std::string nf_key(const FormP& nf) { return print_formula(nf); }

bool same_assertion(const Decls& d, const FormP& a, const FormP& b) {
    return nf_key(normalize(d, a)) == nf_key(normalize(d, b));
}

} // namespace bhl
