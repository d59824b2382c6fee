#include "bhl/syntax.hpp"

#include <algorithm>
#include <cmath>

namespace bhl {

const char* cmp_str(Cmp c) {
    switch (c) {
    case Cmp::Eq: return "=";
    case Cmp::Ne: return "!=";
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Gt: return ">";
    case Cmp::Ge: return ">=";
    }
    return "?";
}

bool cmp_apply(Cmp c, double a, double b) {
    switch (c) {
    case Cmp::Eq: return std::fabs(a - b) <= kTol;
    case Cmp::Ne: return std::fabs(a - b) > kTol;
    case Cmp::Lt: return a < b - kTol;
    case Cmp::Le: return a <= b + kTol;
    case Cmp::Gt: return a > b + kTol;
    case Cmp::Ge: return a >= b - kTol;
    }
    return false;
}

const char* tail_str(Tail t) {
    switch (t) {
    case Tail::Two: return "two";
    case Tail::Upper: return "upper";
    case Tail::Lower: return "lower";
    }
    return "?";
}

// ---------------------------------------------------------------- terms

TermP mk_var(std::string name) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Var;
    t->name = std::move(name);
    return t;
}

TermP mk_const(Value v) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Const;
    t->value = std::move(v);
    return t;
}

TermP mk_int(std::int64_t i) { return mk_const(Value::integer(i)); }
TermP mk_real(double r) { return mk_const(Value::real(r)); }

TermP mk_app(std::string fn, std::vector<TermP> args) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::App;
    t->name = std::move(fn);
    t->args = std::move(args);
    return t;
}

TermP mk_tuple(std::vector<TermP> xs) { return mk_app("tuple", std::move(xs)); }

TermP mk_test(std::string test, TermP ref) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::TestApp;
    t->name = std::move(test);
    t->args = {std::move(ref)};
    return t;
}

bool is_hist_name(const std::string& name) { return name.size() > 2 && name[0] == 'h' && name[1] == '['; }

std::string hist_name(const TermP& ref, const std::string& test) {
    return "h[" + print_term(ref) + ", " + test + "]";
}

bool term_equal(const TermP& a, const TermP& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->name != b->name || a->args.size() != b->args.size()) return false;
    if (a->kind == Term::Kind::Const && !(a->value == b->value)) return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!term_equal(a->args[i], b->args[i])) return false;
    return true;
}

void term_vars(const TermP& t, std::set<std::string>& out) {
    if (t->kind == Term::Kind::Var) out.insert(t->name);
    for (const auto& a : t->args) term_vars(a, out);
}

// ---------------------------------------------------------------- formulas

namespace {

std::shared_ptr<Formula> node(Formula::Kind k) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    return f;
}

} // namespace

FormP f_true() {
    static const FormP t = node(Formula::Kind::True);
    return t;
}

FormP f_false() {
    static const FormP f = node(Formula::Kind::False);
    return f;
}

FormP f_rel(Cmp op, TermP a, TermP b) {
    auto f = node(Formula::Kind::Rel);
    f->op = op;
    f->terms = {std::move(a), std::move(b)};
    return f;
}

FormP f_not(FormP a) {
    auto f = node(Formula::Kind::Not);
    f->subs = {std::move(a)};
    return f;
}

FormP f_and(std::vector<FormP> xs) {
    if (xs.empty()) return f_true();
    if (xs.size() == 1) return xs[0];
    auto f = node(Formula::Kind::And);
    f->subs = std::move(xs);
    return f;
}

FormP f_and(FormP a, FormP b) { return f_and(std::vector<FormP>{std::move(a), std::move(b)}); }

FormP f_or(std::vector<FormP> xs) {
    if (xs.empty()) return f_false();
    if (xs.size() == 1) return xs[0];
    auto f = node(Formula::Kind::Or);
    f->subs = std::move(xs);
    return f;
}

FormP f_or(FormP a, FormP b) { return f_or(std::vector<FormP>{std::move(a), std::move(b)}); }

FormP f_implies(FormP a, FormP b) {
    auto f = node(Formula::Kind::Implies);
    f->subs = {std::move(a), std::move(b)};
    return f;
}

FormP f_iff(FormP a, FormP b) {
    auto f = node(Formula::Kind::Iff);
    f->subs = {std::move(a), std::move(b)};
    return f;
}

FormP f_know(FormP a) {
    auto f = node(Formula::Kind::Know);
    f->subs = {std::move(a)};
    return f;
}

FormP f_poss(FormP a) { return f_not(f_know(f_not(std::move(a)))); }

FormP f_forall(std::string v, FormP body) {
    auto f = node(Formula::Kind::Forall);
    f->name = std::move(v);
    f->subs = {std::move(body)};
    return f;
}

FormP f_exists(std::string v, FormP body) {
    auto f = node(Formula::Kind::Exists);
    f->name = std::move(v);
    f->subs = {std::move(body)};
    return f;
}

FormP f_sampled(TermP ref, TermP pop, TermP n) {
    auto f = node(Formula::Kind::Sampled);
    f->terms = {std::move(ref), std::move(pop), std::move(n)};
    return f;
}

FormP f_followed(TermP ref, TermP pop) {
    auto f = node(Formula::Kind::Followed);
    f->terms = {std::move(ref), std::move(pop)};
    return f;
}

FormP f_neg(Cmp op, TermP ref, std::string test, TermP eps) {
    auto f = node(Formula::Kind::Neg);
    f->op = op;
    f->name = std::move(test);
    f->terms = {std::move(ref), std::move(eps)};
    return f;
}

FormP f_belief(Cmp op, TermP eps, TermP ref, std::string test, FormP phi) {
    auto f = node(Formula::Kind::Belief);
    f->op = op;
    f->name = std::move(test);
    f->terms = {std::move(ref), std::move(eps)};
    f->subs = {std::move(phi)};
    return f;
}

FormP f_belief_k(Cmp op, TermP eps, TermP ref, std::string test, FormP phi, std::vector<TestPair> kappa) {
    auto f = std::const_pointer_cast<Formula>(f_belief(op, std::move(eps), std::move(ref), std::move(test), std::move(phi)));
    f->has_kappa = true;
    f->pairs = std::move(kappa);
    return f;
}

FormP f_kappa(std::vector<TestPair> s) {
    auto f = node(Formula::Kind::Kappa);
    f->pairs = std::move(s);
    return f;
}

FormP f_compds(TermP ref, std::string test) {
    auto f = node(Formula::Kind::Compds);
    f->terms = {std::move(ref)};
    f->name = std::move(test);
    return f;
}

FormP f_hyp(Formula::HypKind k, std::string test) {
    auto f = node(Formula::Kind::Hyp);
    f->hyp = k;
    f->name = std::move(test);
    return f;
}

bool formula_equal(const FormP& a, const FormP& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->name != b->name || a->terms.size() != b->terms.size() ||
        a->subs.size() != b->subs.size() || a->pairs.size() != b->pairs.size() || a->has_kappa != b->has_kappa)
        return false;
    bool uses_op = a->kind == Formula::Kind::Rel || a->kind == Formula::Kind::Neg || a->kind == Formula::Kind::Belief;
    if (uses_op && a->op != b->op) return false;
    if (a->kind == Formula::Kind::Hyp && a->hyp != b->hyp) return false;
    for (size_t i = 0; i < a->terms.size(); ++i)
        if (!term_equal(a->terms[i], b->terms[i])) return false;
    for (size_t i = 0; i < a->subs.size(); ++i)
        if (!formula_equal(a->subs[i], b->subs[i])) return false;
    for (size_t i = 0; i < a->pairs.size(); ++i)
        if (a->pairs[i].second != b->pairs[i].second || !term_equal(a->pairs[i].first, b->pairs[i].first)) return false;
    return true;
}

// ---------------------------------------------------------------- commands

namespace {

std::shared_ptr<Command> cnode(Command::Kind k) {
    auto c = std::make_shared<Command>();
    c->kind = k;
    return c;
}

} // namespace

CmdP c_skip() { return cnode(Command::Kind::Skip); }

CmdP c_assign(std::string v, TermP e) {
    auto c = cnode(Command::Kind::Assign);
    c->var = std::move(v);
    c->expr = std::move(e);
    return c;
}

CmdP c_test(std::string v, std::string test, TermP ref) {
    auto c = cnode(Command::Kind::Test);
    c->var = std::move(v);
    c->test = std::move(test);
    c->ref = std::move(ref);
    return c;
}

CmdP c_seq(CmdP a, CmdP b) {
    auto c = cnode(Command::Kind::Seq);
    c->c1 = std::move(a);
    c->c2 = std::move(b);
    return c;
}

CmdP c_par(CmdP a, CmdP b) {
    auto c = cnode(Command::Kind::Par);
    c->c1 = std::move(a);
    c->c2 = std::move(b);
    return c;
}

CmdP c_if(TermP g, CmdP a, CmdP b) {
    auto c = cnode(Command::Kind::If);
    c->expr = std::move(g);
    c->c1 = std::move(a);
    c->c2 = std::move(b);
    return c;
}

CmdP c_while(TermP g, CmdP body, FormP inv) {
    auto c = cnode(Command::Kind::While);
    c->expr = std::move(g);
    c->c1 = std::move(body);
    c->inv = std::move(inv);
    return c;
}

CmdP c_assert(FormP f) {
    auto c = cnode(Command::Kind::Assert);
    c->inv = std::move(f);
    return c;
}

bool command_equal(const CmdP& a, const CmdP& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->var != b->var || a->test != b->test) return false;
    if (static_cast<bool>(a->expr) != static_cast<bool>(b->expr) || (a->expr && !term_equal(a->expr, b->expr)))
        return false;
    if (static_cast<bool>(a->ref) != static_cast<bool>(b->ref) || (a->ref && !term_equal(a->ref, b->ref))) return false;
    if (static_cast<bool>(a->inv) != static_cast<bool>(b->inv) || (a->inv && !formula_equal(a->inv, b->inv)))
        return false;
    return command_equal(a->c1, b->c1) && command_equal(a->c2, b->c2);
}

CmdP strip_asserts(const CmdP& c) {
    using K = Command::Kind;
    switch (c->kind) {
    case K::Assert: return c_skip();
    case K::Seq: {
        // drop assertions entirely rather than leaving a skip behind
        if (c->c1->kind == K::Assert) return strip_asserts(c->c2);
        if (c->c2->kind == K::Assert) return strip_asserts(c->c1);
        return c_seq(strip_asserts(c->c1), strip_asserts(c->c2));
    }
    case K::Par: return c_par(strip_asserts(c->c1), strip_asserts(c->c2));
    case K::If: return c_if(c->expr, strip_asserts(c->c1), strip_asserts(c->c2));
    case K::While: return c_while(c->expr, strip_asserts(c->c1), c->inv);
    default: return c;
    }
}

std::set<std::string> updated_vars(const CmdP& c) {
    using K = Command::Kind;
    switch (c->kind) {
    case K::Assign:
    case K::Test: return {c->var};
    case K::Seq:
    case K::Par:
    case K::If: {
        auto a = updated_vars(c->c1);
        auto b = updated_vars(c->c2);
        a.insert(b.begin(), b.end());
        return a;
    }
    case K::While: return updated_vars(c->c1);
    default: return {};
    }
}

std::set<std::string> command_vars(const CmdP& c) {
    std::set<std::string> out;
    if (!c || c->kind == Command::Kind::Assert) return out;
    if (!c->var.empty()) out.insert(c->var);
    if (c->expr) term_vars(c->expr, out);
    if (c->ref) term_vars(c->ref, out);
    for (const auto& sub : {c->c1, c->c2}) {
        if (!sub) continue;
        auto s = command_vars(sub);
        out.insert(s.begin(), s.end());
    }
    return out;
}

bool contains_while(const CmdP& c) {
    if (!c) return false;
    if (c->kind == Command::Kind::While) return true;
    return contains_while(c->c1) || contains_while(c->c2);
}

// ---------------------------------------------------------------- declarations

int TestDecl::arity() const {
    switch (kind) {
    case Kind::Z: return 2;
    case Kind::LR:
    case Kind::BF: return 1;
    case Kind::Or:
    case Kind::And: return 2;
    }
    return 1;
}

std::optional<Type> Decls::type_of(const std::string& v) const {
    if (auto it = obs.find(v); it != obs.end()) return it->second;
    if (auto it = inv.find(v); it != inv.end()) return it->second;
    if (is_hist_name(v)) return Type::of(Type::Kind::Nat);
    return std::nullopt;
}

const TestDecl& Decls::test(const std::string& id) const {
    auto it = tests.find(id);
    if (it == tests.end()) fail(Error::Kind::Type, "unknown test '" + id + "'");
    return it->second;
}

void Decls::add_history(const TermP& ref, const std::string& t) {
    if (!has_test(t)) fail(Error::Kind::Type, "unknown test '" + t + "'");
    if (!has_history(hist_name(ref, t))) histories.emplace_back(ref, t);
}

bool Decls::has_history(const std::string& hname) const {
    for (const auto& [r, t] : histories)
        if (hist_name(r, t) == hname) return true;
    return false;
}

std::vector<std::string> Decls::history_names() const {
    std::vector<std::string> out;
    for (const auto& [r, t] : histories) out.push_back(hist_name(r, t));
    return out;
}

// ---------------------------------------------------------------- types

namespace {

Type T(Type::Kind k) { return Type::of(k); }

[[noreturn]] void type_error(const std::string& msg) { fail(Error::Kind::Type, msg); }

Type value_type(const Value& v) {
    switch (v.kind()) {
    case Value::Kind::Bool: return T(Type::Kind::Bool);
    case Value::Kind::Int: return T(v.as_int() >= 0 ? Type::Kind::Nat : Type::Kind::Int);
    case Value::Kind::Real: return T(Type::Kind::Real);
    case Value::Kind::Dist: return T(Type::Kind::Dist);
    case Value::Kind::Tuple: {
        std::vector<Type> ts;
        for (const auto& x : v.elems()) ts.push_back(value_type(x));
        return Type::tuple(ts);
    }
    case Value::Kind::List: {
        Type e = T(Type::Kind::Real);
        if (!v.elems().empty()) e = value_type(v.elems()[0]);
        if (e.is_numeric()) e = T(Type::Kind::Real);
        return Type::list(e);
    }
    case Value::Kind::Undef: break;
    }
    type_error("undefined constant");
}

Type join_numeric(const Type& a, const Type& b, const std::string& op) {
    bool integral_a = a.kind == Type::Kind::Int || a.kind == Type::Kind::Nat;
    bool integral_b = b.kind == Type::Kind::Int || b.kind == Type::Kind::Nat;
    if (op == "/") return T(Type::Kind::Real);
    if (integral_a && integral_b) {
        if (a.kind == Type::Kind::Nat && b.kind == Type::Kind::Nat && (op == "+" || op == "*" || op == "max" || op == "min"))
            return T(Type::Kind::Nat);
        return T(Type::Kind::Int);
    }
    if (a.kind == Type::Kind::Prob && b.kind == Type::Kind::Prob && (op == "min" || op == "max" || op == "*"))
        return T(Type::Kind::Prob);
    return T(Type::Kind::Real);
}

bool comparable(const Type& a, const Type& b) {
    if (a.is_numeric() && b.is_numeric()) return true;
    return assignable(a, b) || assignable(b, a);
}

void check_dataset_ref(const TermP& r, const Decls& d, int arity_hint) {
    (void)arity_hint;
    if (r->kind == Term::Kind::App && r->name == "tuple") {
        for (const auto& a : r->args) check_dataset_ref(a, d, 1);
        return;
    }
    if (r->kind != Term::Kind::Var) return; // substituted references are evaluated as expressions
    auto t = d.type_of(r->name);
    if (!t) type_error("undeclared dataset '" + r->name + "'");
    if (t->kind != Type::Kind::List) type_error("dataset '" + r->name + "' must have a list type, not " + t->str());
}

} // namespace

Type infer_type(const TermP& t, const Decls& d, const std::set<std::string>& intvars) {
    switch (t->kind) {
    case Term::Kind::Var: {
        if (intvars.count(t->name)) return T(Type::Kind::Int);
        auto ty = d.type_of(t->name);
        if (!ty) type_error("undeclared variable '" + t->name + "'");
        return *ty;
    }
    case Term::Kind::Const: return value_type(t->value);
    case Term::Kind::TestApp: {
        const TestDecl& td = d.test(t->name);
        check_dataset_ref(t->args[0], d, td.arity());
        return T(Type::Kind::Prob);
    }
    case Term::Kind::App: break;
    }
    const std::string& f = t->name;
    std::vector<Type> as;
    for (const auto& a : t->args) as.push_back(infer_type(a, d, intvars));
    auto need_num = [&](size_t i) {
        if (!as[i].is_numeric()) type_error("'" + f + "' expects a number, got " + as[i].str());
    };
    auto need_bool = [&](size_t i) {
        if (as[i].kind != Type::Kind::Bool) type_error("'" + f + "' expects a boolean, got " + as[i].str());
    };
    auto need_list = [&](size_t i) {
        if (as[i].kind != Type::Kind::List) type_error("'" + f + "' expects a list, got " + as[i].str());
    };
    if (f == "+" || f == "-" || f == "*" || f == "/" || f == "min" || f == "max") {
        need_num(0);
        need_num(1);
        if (f == "-") return join_numeric(as[0], as[1], f).kind == Type::Kind::Nat ? T(Type::Kind::Int) : join_numeric(as[0], as[1], f);
        return join_numeric(as[0], as[1], f);
    }
    if (f == "neg") {
        need_num(0);
        return as[0].kind == Type::Kind::Nat || as[0].kind == Type::Kind::Int ? T(Type::Kind::Int) : T(Type::Kind::Real);
    }
    if (f == "<" || f == "<=" || f == ">" || f == ">=") {
        need_num(0);
        need_num(1);
        return T(Type::Kind::Bool);
    }
    if (f == "=" || f == "!=") {
        if (!comparable(as[0], as[1])) type_error("cannot compare " + as[0].str() + " with " + as[1].str());
        return T(Type::Kind::Bool);
    }
    if (f == "and" || f == "or") {
        need_bool(0);
        need_bool(1);
        return T(Type::Kind::Bool);
    }
    if (f == "not") {
        need_bool(0);
        return T(Type::Kind::Bool);
    }
    if (f == "mean" || f == "sum") {
        need_list(0);
        return T(Type::Kind::Real);
    }
    if (f == "size") {
        need_list(0);
        return T(Type::Kind::Nat);
    }
    if (f == "abs") {
        need_num(0);
        return as[0].kind == Type::Kind::Int ? T(Type::Kind::Nat) : as[0];
    }
    if (f == "sqrt" || f == "exp" || f == "log") {
        need_num(0);
        return T(Type::Kind::Real);
    }
    if (f == "N" || f == "U") {
        need_num(0);
        need_num(1);
        return T(Type::Kind::Dist);
    }
    if (f == "fst" || f == "snd") {
        if (as[0].kind != Type::Kind::Tuple || as[0].args.size() < 2) type_error("'" + f + "' expects a pair");
        return as[0].args[f == "fst" ? 0 : 1];
    }
    if (f == "nth") {
        need_list(0);
        need_num(1);
        return as[0].args.at(0);
    }
    if (f == "ite") {
        need_bool(0);
        if (as[1].is_numeric() && as[2].is_numeric()) return join_numeric(as[1], as[2], "ite");
        if (!(as[1] == as[2])) type_error("'ite' branches have different types");
        return as[1];
    }
    if (f == "tuple") return Type::tuple(as);
    if (f == "list") {
        Type e = as.empty() ? T(Type::Kind::Real) : as[0];
        for (const auto& a : as)
            if (!comparable(a, e)) type_error("list elements have different types");
        if (e.is_numeric()) e = T(Type::Kind::Real);
        return Type::list(e);
    }
    type_error("unknown function '" + f + "'");
}

namespace {

void check_terms_observable(const TermP& t, const Decls& d, Span sp) {
    std::set<std::string> vs;
    term_vars(t, vs);
    for (const auto& v : vs)
        if (!d.is_obs(v)) fail(Error::Kind::Type, "program uses non-observable variable '" + v + "'", sp);
}

Type typed(const TermP& t, const Decls& d, Span sp) {
    try {
        return infer_type(t, d);
    } catch (const Error& e) {
        if (e.span().known()) throw;
        fail(e.kind(), e.what(), sp);
    }
}

void check_cmd(const CmdP& c, const Decls& d) {
    using K = Command::Kind;
    switch (c->kind) {
    case K::Skip: return;
    case K::Assert: check_formula(c->inv, d); return;
    case K::Assign: {
        if (!d.is_obs(c->var)) fail(Error::Kind::Type, "program assigns non-observable variable '" + c->var + "'", c->span);
        check_terms_observable(c->expr, d, c->span);
        Type te = typed(c->expr, d, c->span);
        Type tv = *d.type_of(c->var);
        if (!assignable(tv, te))
            fail(Error::Kind::Type, "cannot assign " + te.str() + " to '" + c->var + "' of type " + tv.str(), c->span);
        return;
    }
    case K::Test: {
        if (!d.is_obs(c->var)) fail(Error::Kind::Type, "program assigns non-observable variable '" + c->var + "'", c->span);
        check_terms_observable(c->ref, d, c->span);
        Type tv = *d.type_of(c->var);
        if (!assignable(tv, T(Type::Kind::Prob)))
            fail(Error::Kind::Type, "p-value target '" + c->var + "' has type " + tv.str(), c->span);
        typed(mk_test(c->test, c->ref), d, c->span);
        return;
    }
    case K::If:
    case K::While: {
        check_terms_observable(c->expr, d, c->span);
        if (typed(c->expr, d, c->span).kind != Type::Kind::Bool)
            fail(Error::Kind::Type, "guard is not boolean", c->span);
        check_cmd(c->c1, d);
        if (c->c2) check_cmd(c->c2, d);
        if (c->inv) check_formula(c->inv, d);
        return;
    }
    case K::Seq: check_cmd(c->c1, d), check_cmd(c->c2, d); return;
    case K::Par: {
        check_cmd(c->c1, d);
        check_cmd(c->c2, d);
        auto u1 = updated_vars(c->c1), u2 = updated_vars(c->c2);
        auto v1 = command_vars(c->c1), v2 = command_vars(c->c2);
        std::set<std::string> bad;
        for (const auto& x : u1)
            if (v2.count(x)) bad.insert(x);
        for (const auto& x : u2)
            if (v1.count(x)) bad.insert(x);
        if (!bad.empty()) {
            std::string list;
            for (const auto& x : bad) list += (list.empty() ? "" : ", ") + x;
            fail(Error::Kind::Type, "parallel interference on {" + list + "}", c->span);
        }
        return;
    }
    }
}

void check_form(const FormP& f, const Decls& d, std::set<std::string>& ints, int modal) {
    using K = Formula::Kind;
    switch (f->kind) {
    case K::Forall:
    case K::Exists: {
        if (modal > 0) fail(Error::Kind::Syntax, "quantifier inside K");
        if (d.declared(f->name)) fail(Error::Kind::Type, "int variable '" + f->name + "' clashes with a program variable");
        bool fresh = ints.insert(f->name).second;
        check_form(f->subs[0], d, ints, modal);
        if (fresh) ints.erase(f->name);
        return;
    }
    case K::Know:
    case K::Belief:
        for (const auto& t : f->terms) infer_type(t, d, ints);
        if (f->kind == K::Belief) d.test(f->name);
        check_form(f->subs[0], d, ints, modal + 1);
        return;
    case K::Rel: {
        Type a = infer_type(f->terms[0], d, ints), b = infer_type(f->terms[1], d, ints);
        if (f->op == Cmp::Eq || f->op == Cmp::Ne) {
            if (!comparable(a, b)) type_error("cannot compare " + a.str() + " with " + b.str());
        } else if (!a.is_numeric() || !b.is_numeric()) {
            type_error("ordering requires numbers, got " + a.str() + " and " + b.str());
        }
        return;
    }
    case K::Neg:
    case K::Compds:
    case K::Hyp: d.test(f->name); [[fallthrough]];
    default:
        for (const auto& s : f->subs) check_form(s, d, ints, modal);
        for (const auto& [r, t] : f->pairs) d.test(t), (void)r;
        return;
    }
}

} // namespace

void check_program(const CmdP& c, const Decls& d) { check_cmd(c, d); }

void check_formula(const FormP& f, const Decls& d) {
    std::set<std::string> ints;
    check_form(f, d, ints, 0);
}

FormP guard_formula(const TermP& e) {
    if (e->kind == Term::Kind::Const && e->value.kind() == Value::Kind::Bool)
        return e->value.as_bool() ? f_true() : f_false();
    if (e->kind == Term::Kind::App) {
        const std::string& f = e->name;
        if (f == "and") return f_and(guard_formula(e->args[0]), guard_formula(e->args[1]));
        if (f == "or") return f_or(guard_formula(e->args[0]), guard_formula(e->args[1]));
        if (f == "not") return f_not(guard_formula(e->args[0]));
        static const std::map<std::string, Cmp> rel = {{"=", Cmp::Eq}, {"!=", Cmp::Ne}, {"<", Cmp::Lt},
                                                       {"<=", Cmp::Le}, {">", Cmp::Gt}, {">=", Cmp::Ge}};
        if (auto it = rel.find(f); it != rel.end()) return f_rel(it->second, e->args[0], e->args[1]);
    }
    return f_rel(Cmp::Eq, e, mk_const(Value::boolean(true)));
}

// ---------------------------------------------------------------- sugar

std::vector<TestPair> list_tests(const Decls& d, const TermP& ref, const std::string& test) {
    const TestDecl& td = d.test(test);
    if (!td.combined()) return {{ref, test}};
    if (ref->kind != Term::Kind::App || ref->name != "tuple" || ref->args.size() != 2)
        fail(Error::Kind::Type, "combined test '" + test + "' needs a pair of dataset references");
    auto a = list_tests(d, ref->args[0], td.c1);
    auto b = list_tests(d, ref->args[1], td.c2);
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

FormP kappa_formula(const Decls& d, const std::vector<TestPair>& s) {
    std::map<std::string, std::int64_t> count;
    for (const auto& [r, t] : s) {
        std::string h = hist_name(r, t);
        if (!d.has_history(h)) fail(Error::Kind::Type, "kappa mentions " + h + ", which is outside the declared history universe");
        ++count[h];
    }
    std::vector<FormP> eqs;
    for (const auto& h : d.history_names()) {
        auto it = count.find(h);
        eqs.push_back(f_rel(Cmp::Eq, mk_var(h), mk_int(it == count.end() ? 0 : it->second)));
    }
    return f_and(eqs);
}

FormP compds_formula(const Decls& d, const TermP& ref, const std::string& test) {
    std::vector<FormP> xs;
    for (const auto& [r, t] : list_tests(d, ref, test)) {
        const TestDecl& td = d.test(t);
        if (td.pops.empty()) continue;
        if (td.arity() == 1) {
            xs.push_back(f_followed(r, td.pops[0]));
            continue;
        }
        if (r->kind != Term::Kind::App || r->name != "tuple" || static_cast<int>(r->args.size()) != td.arity())
            fail(Error::Kind::Type, "test '" + t + "' needs " + std::to_string(td.arity()) + " dataset references");
        for (size_t i = 0; i < r->args.size(); ++i) xs.push_back(f_followed(r->args[i], td.pops[i]));
    }
    return f_and(xs);
}

FormP hypothesis(const Decls& d, const std::string& test, Formula::HypKind k) {
    using H = Formula::HypKind;
    const TestDecl& td = d.test(test);
    if (td.combined()) {
        if (k == H::Upper || k == H::Lower)
            fail(Error::Kind::Type, "combined test '" + test + "' has no one-sided hypothesis");
        FormP a = hypothesis(d, td.c1, k), b = hypothesis(d, td.c2, k);
        bool disj = (td.kind == TestDecl::Kind::Or) == (k == H::Alt);
        return disj ? f_or(a, b) : f_and(a, b);
    }
    switch (k) {
    case H::Upper:
        if (!td.upper) fail(Error::Kind::Type, "test '" + test + "' declares no upper alternative");
        return td.upper;
    case H::Lower:
        if (!td.lower) fail(Error::Kind::Type, "test '" + test + "' declares no lower alternative");
        return td.lower;
    case H::Alt:
        if (td.alt) return td.alt;
        if (td.tail == Tail::Upper && td.upper) return td.upper;
        if (td.tail == Tail::Lower && td.lower) return td.lower;
        if (td.upper && td.lower) return f_or(td.upper, td.lower);
        fail(Error::Kind::Type, "test '" + test + "' declares no alternative hypothesis");
    case H::Null:
        if (td.upper && td.lower) return f_and(f_not(td.upper), f_not(td.lower));
        if (td.alt) return f_not(td.alt);
        fail(Error::Kind::Type, "test '" + test + "' declares no hypotheses");
    }
    return f_true();
}

FormP expand_sugar(const Decls& d, const FormP& f) {
    using K = Formula::Kind;
    switch (f->kind) {
    case K::Belief: {
        const TermP& ref = f->terms[0];
        std::vector<TestPair> s = f->has_kappa ? f->pairs : list_tests(d, ref, f->name);
        FormP unlucky = f_and(f_neg(f->op, ref, f->name, f->terms[1]), kappa_formula(d, s));
        FormP body = f_or({expand_sugar(d, f->subs[0]), unlucky, f_not(compds_formula(d, ref, f->name))});
        return f_know(body);
    }
    case K::Kappa: return kappa_formula(d, f->pairs);
    case K::Compds: return compds_formula(d, f->terms[0], f->name);
    case K::Hyp: return expand_sugar(d, hypothesis(d, f->name, f->hyp));
    default: break;
    }
    if (f->subs.empty()) return f;
    bool changed = false;
    std::vector<FormP> subs;
    for (const auto& s : f->subs) {
        subs.push_back(expand_sugar(d, s));
        changed |= subs.back() != s;
    }
    if (!changed) return f;
    auto g = std::make_shared<Formula>(*f);
    g->subs = std::move(subs);
    return g;
}

bool has_sugar(const FormP& f) {
    using K = Formula::Kind;
    if (f->kind == K::Belief || f->kind == K::Kappa || f->kind == K::Compds || f->kind == K::Hyp) return true;
    for (const auto& s : f->subs)
        if (has_sugar(s)) return true;
    return false;
}

namespace {

void collect_free(const FormP& f, std::set<std::string>& bound, std::set<std::string>& out) {
    for (const auto& t : f->terms) {
        std::set<std::string> vs;
        term_vars(t, vs);
        for (const auto& v : vs)
            if (!bound.count(v)) out.insert(v);
    }
    if (f->kind == Formula::Kind::Forall || f->kind == Formula::Kind::Exists) {
        bool fresh = bound.insert(f->name).second;
        collect_free(f->subs[0], bound, out);
        if (fresh) bound.erase(f->name);
        return;
    }
    for (const auto& s : f->subs) collect_free(s, bound, out);
}

} // namespace

std::set<std::string> free_vars(const Decls& d, const FormP& f) {
    std::set<std::string> bound, out;
    collect_free(expand_sugar(d, f), bound, out);
    return out;
}

TermP subst_term(const TermP& t, const Subst& s) {
    if (t->kind == Term::Kind::Var) {
        auto it = s.find(t->name);
        return it == s.end() ? t : it->second;
    }
    if (t->args.empty()) return t;
    bool changed = false;
    std::vector<TermP> args;
    for (const auto& a : t->args) {
        args.push_back(subst_term(a, s));
        changed |= args.back() != a;
    }
    if (!changed) return t;
    auto u = std::make_shared<Term>(*t);
    u->args = std::move(args);
    return u;
}

namespace {

FormP subst_core(const FormP& f, const Subst& s) {
    if (f->kind == Formula::Kind::Forall || f->kind == Formula::Kind::Exists) {
        if (s.count(f->name)) {
            Subst inner = s;
            inner.erase(f->name);
            auto g = std::make_shared<Formula>(*f);
            g->subs = {subst_core(f->subs[0], inner)};
            return g;
        }
    }
    bool changed = false;
    std::vector<TermP> terms;
    for (const auto& t : f->terms) {
        terms.push_back(subst_term(t, s));
        changed |= terms.back() != t;
    }
    std::vector<FormP> subs;
    for (const auto& x : f->subs) {
        subs.push_back(subst_core(x, s));
        changed |= subs.back() != x;
    }
    if (!changed) return f;
    auto g = std::make_shared<Formula>(*f);
    g->terms = std::move(terms);
    g->subs = std::move(subs);
    return g;
}

} // namespace

FormP subst(const Decls& d, const FormP& f, const Subst& s) { return subst_core(expand_sugar(d, f), s); }

} // namespace bhl
