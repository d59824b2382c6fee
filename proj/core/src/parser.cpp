#include "bhl/syntax.hpp"

#include "lexer.hpp"

#include <set>

namespace bhl {

namespace {

using detail::Token;

const std::set<std::string> kReserved = {
    "skip",  "if",       "else",    "while",   "invariant", "assert", "true",  "false", "not",
    "and",   "or",       "K",       "P",       "forall",    "exists", "Belief", "Possible",
    "sampled", "followed", "neg",   "kappa",   "compds",    "upper",  "lower", "alt",   "null"};

bool is_relop(const std::string& s) {
    return s == "=" || s == "!=" || s == "<" || s == "<=" || s == ">" || s == ">=";
}

Cmp relop_of(const std::string& s) {
    if (s == "=") return Cmp::Eq;
    if (s == "!=") return Cmp::Ne;
    if (s == "<") return Cmp::Lt;
    if (s == "<=") return Cmp::Le;
    if (s == ">") return Cmp::Gt;
    return Cmp::Ge;
}

struct Backtrack {};

class Parser {
public:
    Parser(const std::string& src, Decls* d) : toks_(detail::tokenize(src)), d_(d) {}

    // ------------------------------------------------------------ token helpers
    const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool punct(const std::string& s, size_t k = 0) const {
        return peek(k).kind == Token::Kind::Punct && peek(k).text == s;
    }
    bool ident(const std::string& s, size_t k = 0) const {
        return peek(k).kind == Token::Kind::Ident && peek(k).text == s;
    }
    bool at_end() const { return peek().kind == Token::Kind::End; }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    [[noreturn]] void error(const std::string& msg) const {
        std::string found = at_end() ? "end of input" : "'" + peek().text + "'";
        fail(Error::Kind::Syntax, msg + " (found " + found + ")", peek().span);
    }
    void expect(const std::string& s) {
        if (!punct(s)) error("expected '" + s + "'");
        next();
    }
    std::string expect_ident() {
        if (peek().kind != Token::Kind::Ident) error("expected an identifier");
        return next().text;
    }
    std::string expect_name() {
        std::string s = expect_ident();
        if (kReserved.count(s)) fail(Error::Kind::Syntax, "'" + s + "' is a reserved word", toks_[pos_ - 1].span);
        return s;
    }
    void expect_end() {
        if (!at_end()) error("unexpected trailing input");
    }

    // ------------------------------------------------------------ terms
    TermP expr() { return or_expr(); }

    TermP or_expr() {
        TermP t = and_expr();
        while (ident("or")) {
            next();
            t = mk_app("or", {t, and_expr()});
        }
        return t;
    }
    TermP and_expr() {
        TermP t = not_expr();
        while (ident("and")) {
            next();
            t = mk_app("and", {t, not_expr()});
        }
        return t;
    }
    TermP not_expr() {
        if (ident("not")) {
            next();
            return mk_app("not", {not_expr()});
        }
        return rel_expr();
    }
    TermP rel_expr() {
        TermP t = add_expr();
        if (peek().kind == Token::Kind::Punct && is_relop(peek().text)) {
            std::string op = next().text;
            t = mk_app(op, {t, add_expr()});
        }
        return t;
    }
    TermP add_expr() {
        TermP t = mul_expr();
        while (punct("+") || punct("-")) {
            std::string op = next().text;
            t = mk_app(op, {t, mul_expr()});
        }
        return t;
    }
    TermP mul_expr() {
        TermP t = unary();
        while (punct("*") || punct("/")) {
            std::string op = next().text;
            t = mk_app(op, {t, unary()});
        }
        return t;
    }
    TermP unary() {
        if (punct("-")) {
            next();
            TermP t = unary();
            if (t->kind == Term::Kind::Const && t->value.kind() == Value::Kind::Int)
                return mk_int(-t->value.as_int());
            if (t->kind == Term::Kind::Const && t->value.kind() == Value::Kind::Real)
                return mk_real(-t->value.as_real());
            return mk_app("neg", {t});
        }
        return primary();
    }

    static bool all_const(const std::vector<TermP>& xs) {
        for (const auto& x : xs)
            if (x->kind != Term::Kind::Const) return false;
        return true;
    }

    TermP primary() {
        const Token& t = peek();
        if (t.kind == Token::Kind::Int) {
            next();
            return mk_int(t.inum);
        }
        if (t.kind == Token::Kind::Real) {
            next();
            return mk_real(t.num);
        }
        if (ident("true") || ident("false")) {
            bool b = next().text == "true";
            return mk_const(Value::boolean(b));
        }
        if (punct("(")) {
            next();
            std::vector<TermP> xs{expr()};
            bool tuple = false;
            while (punct(",")) {
                next();
                tuple = true;
                if (punct(")")) break;
                xs.push_back(expr());
            }
            expect(")");
            if (!tuple) return xs[0];
            if (all_const(xs)) {
                std::vector<Value> vs;
                for (const auto& x : xs) vs.push_back(x->value);
                return mk_const(Value::tuple(vs));
            }
            return mk_tuple(xs);
        }
        if (punct("[")) {
            next();
            std::vector<TermP> xs;
            if (!punct("]")) {
                xs.push_back(expr());
                while (punct(",")) {
                    next();
                    xs.push_back(expr());
                }
            }
            expect("]");
            if (all_const(xs)) {
                std::vector<Value> vs;
                for (const auto& x : xs) vs.push_back(x->value);
                return mk_const(Value::list(vs));
            }
            return mk_app("list", xs);
        }
        if (t.kind != Token::Kind::Ident) error("expected a term");
        Span sp = t.span;
        std::string name = next().text;
        if (name == "h" && punct("[")) {
            next();
            TermP r = ref();
            expect(",");
            std::string test = expect_ident();
            expect("]");
            if (d_ && !d_->has_test(test)) fail(Error::Kind::Syntax, "unknown test '" + test + "'", sp);
            return mk_var(hist_name(r, test));
        }
        if (kReserved.count(name)) fail(Error::Kind::Syntax, "unexpected keyword '" + name + "' in term", sp);
        if (punct("(")) {
            if (d_ && d_->has_test(name)) {
                next();
                std::vector<TermP> rs{ref()};
                while (punct(",")) {
                    next();
                    rs.push_back(ref());
                }
                expect(")");
                TermP r = rs.size() == 1 ? rs[0] : mk_tuple(rs);
                check_test_arity(name, r, sp);
                return mk_test(name, r);
            }
            next();
            std::vector<TermP> args;
            if (!punct(")")) {
                args.push_back(expr());
                while (punct(",")) {
                    next();
                    args.push_back(expr());
                }
            }
            expect(")");
            if (name == "N" || name == "U") {
                if (args.size() != 2) fail(Error::Kind::Syntax, name + " expects 2 arguments", sp);
                if (all_const(args)) {
                    Dist dd{name == "N" ? Dist::Kind::Normal : Dist::Kind::Uniform, args[0]->value.as_real(),
                            args[1]->value.as_real()};
                    return mk_const(Value::dist(dd));
                }
            }
            if (!known_function(name, args.size()))
                fail(Error::Kind::Syntax, "unknown function '" + name + "/" + std::to_string(args.size()) + "'", sp);
            return mk_app(name, args);
        }
        if (d_ && !d_->declared(name) && !bound_.count(name))
            fail(Error::Kind::Syntax, "undeclared variable '" + name + "'", sp);
        return mk_var(name);
    }

    static bool known_function(const std::string& f, size_t n) {
        static const std::map<std::string, size_t> fns = {
            {"mean", 1}, {"size", 1}, {"sum", 1}, {"abs", 1}, {"sqrt", 1}, {"exp", 1}, {"log", 1},
            {"fst", 1},  {"snd", 1},  {"min", 2}, {"max", 2}, {"nth", 2},  {"ite", 3}, {"N", 2}, {"U", 2}};
        if (f == "list") return true;
        auto it = fns.find(f);
        return it != fns.end() && it->second == n;
    }

    void check_test_arity(const std::string& test, const TermP& r, Span sp) const {
        if (!d_) return;
        const TestDecl& td = d_->test(test);
        int n = td.arity();
        bool is_tuple = r->kind == Term::Kind::App && r->name == "tuple";
        if (n == 1 && is_tuple) fail(Error::Kind::Syntax, "test '" + test + "' takes one dataset", sp);
        if (n > 1 && (!is_tuple || static_cast<int>(r->args.size()) != n))
            fail(Error::Kind::Syntax, "test '" + test + "' takes " + std::to_string(n) + " datasets", sp);
    }

    // dataset reference: variable or tuple of references
    TermP ref() {
        if (punct("(")) {
            next();
            std::vector<TermP> xs{ref()};
            while (punct(",")) {
                next();
                xs.push_back(ref());
            }
            expect(")");
            return xs.size() == 1 ? xs[0] : mk_tuple(xs);
        }
        Span sp = peek().span;
        std::string v = expect_name();
        if (d_ && !d_->is_obs(v)) fail(Error::Kind::Syntax, "dataset '" + v + "' is not an observable variable", sp);
        return mk_var(v);
    }

    // ------------------------------------------------------------ formulas
    FormP formula() {
        FormP a = implication();
        if (punct("<->")) {
            next();
            return f_iff(a, implication());
        }
        return a;
    }
    FormP implication() {
        FormP a = disjunction();
        if (punct("->")) {
            next();
            return f_implies(a, implication());
        }
        return a;
    }
    FormP disjunction() {
        std::vector<FormP> xs{conjunction()};
        while (ident("or")) {
            next();
            xs.push_back(conjunction());
        }
        return xs.size() == 1 ? xs[0] : f_or(xs);
    }
    FormP conjunction() {
        std::vector<FormP> xs{unary_f()};
        while (ident("and")) {
            next();
            xs.push_back(unary_f());
        }
        return xs.size() == 1 ? xs[0] : f_and(xs);
    }

    struct BeliefHead {
        Cmp op;
        TermP eps;
        TermP ref;
        std::string test;
        bool has_kappa = false;
        std::vector<TestPair> kappa;
    };

    BeliefHead belief_head() {
        BeliefHead h;
        expect("[");
        if (peek().kind != Token::Kind::Punct || !is_relop(peek().text)) error("expected a comparison operator");
        h.op = relop_of(next().text);
        if (h.op == Cmp::Ne) error("'!=' is not a belief comparison");
        h.eps = add_expr();
        expect(";");
        h.ref = ref();
        expect(";");
        Span sp = peek().span;
        h.test = expect_ident();
        if (d_ && !d_->has_test(h.test)) fail(Error::Kind::Syntax, "unknown test '" + h.test + "'", sp);
        if (punct(";")) {
            next();
            if (!ident("kappa")) error("expected 'kappa'");
            next();
            h.has_kappa = true;
            h.kappa = pairs();
        }
        expect("]");
        return h;
    }

    std::vector<TestPair> pairs() {
        expect("{");
        std::vector<TestPair> out;
        if (!punct("}")) {
            while (true) {
                // `(ref, A)` is accepted as an alternative spelling of `ref : A`.
                if (punct("(")) {
                    size_t save = pos_;
                    next();
                    TermP r = ref();
                    if (punct(",") && peek(1).kind == Token::Kind::Ident && d_ && d_->has_test(peek(1).text) &&
                        punct(")", 2)) {
                        next();
                        out.emplace_back(r, next().text);
                        next();
                        if (!punct(",")) break;
                        next();
                        continue;
                    }
                    pos_ = save;
                }
                TermP r = ref();
                expect(":");
                Span sp = peek().span;
                std::string t = expect_ident();
                if (d_ && !d_->has_test(t)) fail(Error::Kind::Syntax, "unknown test '" + t + "'", sp);
                out.emplace_back(r, t);
                if (!punct(",")) break;
                next();
            }
        }
        expect("}");
        return out;
    }

    FormP unary_f() {
        if (ident("not")) {
            next();
            return f_not(unary_f());
        }
        if (ident("K") || ident("P")) {
            bool k = next().text == "K";
            ++modal_;
            FormP a = unary_f();
            --modal_;
            return k ? f_know(a) : f_poss(a);
        }
        if (ident("forall") || ident("exists")) {
            Span sp = peek().span;
            bool all = next().text == "forall";
            if (modal_ > 0) fail(Error::Kind::Syntax, "quantifier inside K", sp);
            std::string v = expect_name();
            if (d_ && d_->declared(v)) fail(Error::Kind::Syntax, "int variable '" + v + "' clashes with a program variable", sp);
            expect(".");
            bool fresh = bound_.insert(v).second;
            FormP body = formula();
            if (fresh) bound_.erase(v);
            return all ? f_forall(v, body) : f_exists(v, body);
        }
        if (ident("Belief") || ident("Possible")) {
            bool belief = next().text == "Belief";
            BeliefHead h = belief_head();
            ++modal_;
            FormP a = unary_f();
            --modal_;
            if (belief)
                return h.has_kappa ? f_belief_k(h.op, h.eps, h.ref, h.test, a, h.kappa)
                                   : f_belief(h.op, h.eps, h.ref, h.test, a);
            FormP na = f_not(a);
            FormP b = h.has_kappa ? f_belief_k(h.op, h.eps, h.ref, h.test, na, h.kappa)
                                  : f_belief(h.op, h.eps, h.ref, h.test, na);
            return f_not(b);
        }
        return atom();
    }

    bool continues_term() const {
        if (peek().kind != Token::Kind::Punct) return false;
        const std::string& s = peek().text;
        return is_relop(s) || s == "+" || s == "-" || s == "*" || s == "/";
    }

    FormP atom() {
        if (punct("(")) {
            size_t save = pos_;
            try {
                next();
                FormP f = formula();
                if (!punct(")")) throw Backtrack{};
                next();
                if (continues_term()) throw Backtrack{};
                return f;
            } catch (const Backtrack&) {
                pos_ = save;
            } catch (const Error&) {
                pos_ = save;
            }
        }
        if (punct("$")) {
            next();
            Span sp = peek().span;
            std::string m = expect_ident();
            if (!d_ || !d_->macros.count(m)) fail(Error::Kind::Syntax, "undefined macro '$" + m + "'", sp);
            FormP f = d_->macros.at(m);
            if (modal_ > 0 && has_quantifier(f)) fail(Error::Kind::Syntax, "quantifier inside K", sp);
            return f;
        }
        if (peek().kind == Token::Kind::Ident) {
            const std::string& w = peek().text;
            Span sp = peek().span;
            if ((w == "true" || w == "false") && !(peek(1).kind == Token::Kind::Punct && is_relop(peek(1).text))) {
                next();
                return w == "true" ? f_true() : f_false();
            }
            if (w == "sampled") {
                next();
                expect("(");
                TermP r = ref();
                expect(",");
                TermP pop = expr();
                expect(",");
                TermP n = expr();
                expect(")");
                return f_sampled(r, pop, n);
            }
            if (w == "followed") {
                next();
                expect("(");
                TermP r = ref();
                expect(",");
                TermP pop = expr();
                expect(")");
                return f_followed(r, pop);
            }
            if (w == "neg") {
                next();
                expect("[");
                if (peek().kind != Token::Kind::Punct || !is_relop(peek().text)) error("expected a comparison operator");
                Cmp op = relop_of(next().text);
                expect(";");
                TermP r = ref();
                expect(";");
                Span tsp = peek().span;
                std::string t = expect_ident();
                if (d_ && !d_->has_test(t)) fail(Error::Kind::Syntax, "unknown test '" + t + "'", tsp);
                expect("]");
                expect("(");
                TermP eps = expr();
                expect(")");
                return f_neg(op, r, t, eps);
            }
            if (w == "kappa") {
                next();
                return f_kappa(pairs());
            }
            if (w == "compds") {
                next();
                expect("(");
                TermP r = ref();
                expect(",");
                Span tsp = peek().span;
                std::string t = expect_ident();
                if (d_ && !d_->has_test(t)) fail(Error::Kind::Syntax, "unknown test '" + t + "'", tsp);
                expect(")");
                return f_compds(r, t);
            }
            if (w == "upper" || w == "lower" || w == "alt" || w == "null") {
                next();
                expect("[");
                Span tsp = peek().span;
                std::string t = expect_ident();
                if (d_ && !d_->has_test(t)) fail(Error::Kind::Syntax, "unknown test '" + t + "'", tsp);
                expect("]");
                Formula::HypKind k = w == "upper"   ? Formula::HypKind::Upper
                                     : w == "lower" ? Formula::HypKind::Lower
                                     : w == "alt"   ? Formula::HypKind::Alt
                                                    : Formula::HypKind::Null;
                return f_hyp(k, t);
            }
            if (kReserved.count(w) && w != "true" && w != "false")
                fail(Error::Kind::Syntax, "unexpected keyword '" + w + "'", sp);
        }
        TermP a = add_expr();
        if (peek().kind == Token::Kind::Punct && is_relop(peek().text)) {
            Cmp op = relop_of(next().text);
            return f_rel(op, a, add_expr());
        }
        return f_rel(Cmp::Eq, a, mk_const(Value::boolean(true)));
    }

    static bool has_quantifier(const FormP& f) {
        if (f->kind == Formula::Kind::Forall || f->kind == Formula::Kind::Exists) return true;
        for (const auto& s : f->subs)
            if (has_quantifier(s)) return true;
        return false;
    }

    // ------------------------------------------------------------ commands
    CmdP program() {
        CmdP c = par();
        if (punct(";")) {
            next();
            if (at_end() || punct("}") || punct(")")) return c;
            return c_seq(c, program());
        }
        return c;
    }
    CmdP par() {
        CmdP c = stmt();
        if (punct("||")) {
            next();
            return c_par(c, par());
        }
        return c;
    }
    CmdP block() {
        expect("{");
        CmdP c = punct("}") ? c_skip() : program();
        expect("}");
        return c;
    }
    CmdP with_span(CmdP c, Span sp) {
        auto m = std::make_shared<Command>(*c);
        m->span = sp;
        return m;
    }
    CmdP stmt() {
        Span sp = peek().span;
        if (ident("skip")) {
            next();
            return with_span(c_skip(), sp);
        }
        if (ident("if")) {
            next();
            TermP g = expr();
            CmdP a = block();
            CmdP b = c_skip();
            if (ident("else")) {
                next();
                b = ident("if") ? stmt() : block();
            }
            return with_span(c_if(g, a, b), sp);
        }
        if (ident("while")) {
            next();
            TermP g = expr();
            FormP inv;
            if (ident("invariant")) {
                next();
                inv = formula();
            }
            return with_span(c_while(g, block(), inv), sp);
        }
        if (ident("assert")) {
            next();
            return with_span(c_assert(formula()), sp);
        }
        if (punct("{")) return block();
        if (punct("(")) {
            next();
            CmdP c = program();
            expect(")");
            return c;
        }
        std::string v = expect_name();
        if (d_ && !d_->declared(v)) fail(Error::Kind::Syntax, "undeclared variable '" + v + "'", sp);
        expect(":=");
        TermP e = expr();
        if (e->kind == Term::Kind::TestApp) return with_span(c_test(v, e->name, e->args[0]), sp);
        return with_span(c_assign(v, e), sp);
    }

    // ------------------------------------------------------------ header
    Type type() {
        if (punct("(")) {
            next();
            std::vector<Type> ts{type()};
            while (punct("*")) {
                next();
                ts.push_back(type());
            }
            expect(")");
            return ts.size() == 1 ? ts[0] : Type::tuple(ts);
        }
        std::string w = expect_ident();
        if (w == "bool") return Type::of(Type::Kind::Bool);
        if (w == "int") return Type::of(Type::Kind::Int);
        if (w == "nat") return Type::of(Type::Kind::Nat);
        if (w == "real") return Type::of(Type::Kind::Real);
        if (w == "prob") return Type::of(Type::Kind::Prob);
        if (w == "dist") return Type::of(Type::Kind::Dist);
        if (w == "list") {
            expect("(");
            Type t = type();
            expect(")");
            return Type::list(t);
        }
        fail(Error::Kind::Syntax, "unknown type '" + w + "'", toks_[pos_ - 1].span);
    }

    static bool is_decl_keyword(const std::string& w) {
        return w == "observable" || w == "invisible" || w == "test" || w == "history" || w == "define" ||
               w == "int_bound";
    }

    bool at_decl() const {
        return peek().kind == Token::Kind::Ident && is_decl_keyword(peek().text) &&
               !(peek(1).kind == Token::Kind::Punct && peek(1).text == ":=");
    }

    void declaration() {
        Span sp = peek().span;
        std::string w = next().text;
        if (w == "observable" || w == "invisible") {
            std::vector<std::pair<std::string, Span>> names;
            do {
                if (!names.empty()) next();
                Span vs = peek().span;
                names.emplace_back(expect_name(), vs);
            } while (punct(","));
            expect(":");
            Type t = type();
            for (auto& [n, vs] : names) {
                if (n == "h") fail(Error::Kind::Syntax, "'h' is reserved for history variables", vs);
                if (d_->declared(n)) fail(Error::Kind::Syntax, "variable '" + n + "' declared twice", vs);
                (w == "observable" ? d_->obs : d_->inv)[n] = t;
            }
        } else if (w == "test") {
            test_decl(sp);
        } else if (w == "history") {
            for (auto& [r, t] : pairs_plain()) d_->add_history(r, t);
        } else if (w == "define") {
            std::string n = expect_name();
            expect("=");
            d_->macros[n] = formula();
        } else if (w == "int_bound") {
            if (peek().kind != Token::Kind::Int) error("expected an integer bound");
            d_->int_bound = static_cast<int>(next().inum);
        }
        expect(";");
    }

    std::vector<TestPair> pairs_plain() {
        std::vector<TestPair> out;
        while (true) {
            TermP r = ref();
            expect(":");
            Span sp = peek().span;
            std::string t = expect_ident();
            if (!d_->has_test(t)) fail(Error::Kind::Syntax, "unknown test '" + t + "'", sp);
            out.emplace_back(r, t);
            if (!punct(",")) break;
            next();
        }
        return out;
    }

    double const_number(const TermP& t, Span sp) {
        if (t->kind != Term::Kind::Const || !t->value.is_numeric()) fail(Error::Kind::Syntax, "expected a number", sp);
        return t->value.as_real();
    }

    void test_decl(Span sp) {
        TestDecl td;
        td.id = expect_name();
        if (d_->has_test(td.id)) fail(Error::Kind::Syntax, "test '" + td.id + "' declared twice", sp);
        expect("=");
        std::string kind = expect_ident();
        if (kind == "Z") td.kind = TestDecl::Kind::Z;
        else if (kind == "LR") td.kind = TestDecl::Kind::LR, td.tail = Tail::Lower;
        else if (kind == "BF") td.kind = TestDecl::Kind::BF, td.tail = Tail::Lower;
        else if (kind == "or") td.kind = TestDecl::Kind::Or;
        else if (kind == "and") td.kind = TestDecl::Kind::And;
        else fail(Error::Kind::Syntax, "unknown test kind '" + kind + "' (Z, LR, BF, or, and)", sp);
        expect("(");
        std::vector<std::string> positional;
        bool have_p = false, have_q = false;
        while (!punct(")")) {
            Span asp = peek().span;
            if (peek().kind == Token::Kind::Ident && peek(1).kind == Token::Kind::Punct && peek(1).text == ":") {
                std::string key = next().text;
                next();
                FormP f = formula();
                if (key == "upper") td.upper = f;
                else if (key == "lower") td.lower = f;
                else if (key == "alt") td.alt = f;
                else fail(Error::Kind::Syntax, "unknown hypothesis key '" + key + "'", asp);
            } else if (peek().kind == Token::Kind::Ident && peek(1).kind == Token::Kind::Punct && peek(1).text == "=") {
                std::string key = next().text;
                next();
                TermP v = expr();
                if (key == "sigma") td.sigma = const_number(v, asp);
                else if (key == "sigma2") td.bf_sigma2 = const_number(v, asp);
                else if (key == "samples") td.mc_samples = static_cast<int>(const_number(v, asp));
                else if (key == "seed") td.seed = static_cast<std::uint64_t>(const_number(v, asp));
                else if (key == "pop") {
                    if (v->kind == Term::Kind::App && v->name == "tuple") td.pops = v->args;
                    else if (v->kind == Term::Kind::Const && v->value.kind() == Value::Kind::Tuple)
                        for (const auto& x : v->value.elems()) td.pops.push_back(mk_const(x));
                    else td.pops = {v};
                } else if (key == "p" || key == "q") {
                    if (v->kind != Term::Kind::Const || v->value.kind() != Value::Kind::Dist)
                        fail(Error::Kind::Syntax, "expected a constant distribution", asp);
                    (key == "p" ? td.p : td.q) = v->value.as_dist();
                    (key == "p" ? have_p : have_q) = true;
                } else if (key == "null_prior" || key == "alt_prior") {
                    if (v->kind != Term::Kind::Const || v->value.kind() != Value::Kind::Tuple || v->value.elems().size() != 2)
                        fail(Error::Kind::Syntax, "expected (mean, variance)", asp);
                    double m = v->value.elems()[0].as_real(), s2 = v->value.elems()[1].as_real();
                    if (key == "null_prior") td.null_mu0 = m, td.null_tau2 = s2;
                    else td.alt_mu0 = m, td.alt_tau2 = s2;
                } else fail(Error::Kind::Syntax, "unknown test parameter '" + key + "'", asp);
            } else {
                positional.push_back(expect_ident());
            }
            if (!punct(",")) break;
            next();
        }
        expect(")");
        if (td.combined()) {
            if (positional.size() != 2) fail(Error::Kind::Syntax, "combination takes two test ids", sp);
            for (const auto& c : positional)
                if (!d_->has_test(c)) fail(Error::Kind::Syntax, "unknown component test '" + c + "'", sp);
            td.c1 = positional[0];
            td.c2 = positional[1];
        } else {
            for (const auto& p : positional) {
                if (p == "two") td.tail = Tail::Two;
                else if (p == "upper") td.tail = Tail::Upper;
                else if (p == "lower") td.tail = Tail::Lower;
                else fail(Error::Kind::Syntax, "unknown test option '" + p + "'", sp);
            }
            if (td.kind == TestDecl::Kind::LR && !(have_p && have_q))
                fail(Error::Kind::Syntax, "likelihood-ratio test needs p and q densities", sp);
            if (!td.pops.empty() && static_cast<int>(td.pops.size()) != td.arity())
                fail(Error::Kind::Syntax, "population count does not match the test arity", sp);
            if (td.kind == TestDecl::Kind::Z && td.sigma <= 0) fail(Error::Kind::Syntax, "sigma must be positive", sp);
            // Z tests derive the one-sided alternatives from the population means
            if (td.kind == TestDecl::Kind::Z && td.pops.size() == 2) {
                auto mean_of = [](const TermP& p) -> TermP {
                    if (p->kind == Term::Kind::App && p->name == "N") return p->args[0];
                    return nullptr;
                };
                TermP m1 = mean_of(td.pops[0]), m2 = mean_of(td.pops[1]);
                if (m1 && m2) {
                    if (!td.upper) td.upper = f_rel(Cmp::Gt, m1, m2);
                    if (!td.lower) td.lower = f_rel(Cmp::Lt, m1, m2);
                }
            }
        }
        d_->tests[td.id] = td;
        d_->test_order.push_back(td.id);
    }

    void header() {
        while (at_decl()) declaration();
    }

    size_t pos_ = 0;
    std::vector<Token> toks_;
    Decls* d_;
    std::set<std::string> bound_;
    int modal_ = 0;

};

} // namespace

void register_histories(const CmdP& c, Decls& d) {
    if (!c) return;
    if (c->kind == Command::Kind::Test) d.add_history(c->ref, c->test);
    register_histories(c->c1, d);
    register_histories(c->c2, d);
}

Source parse_source(const std::string& text) {
    Source s;
    Parser p(text, &s.decls);
    p.header();
    if (!p.at_end()) {
        s.program = p.program();
        p.expect_end();
        register_histories(s.program, s.decls);
        check_program(s.program, s.decls);
    }
    for (const auto& [id, td] : s.decls.tests) {
        (void)id;
        if (td.upper) check_formula(td.upper, s.decls);
        if (td.lower) check_formula(td.lower, s.decls);
    }
    return s;
}

void parse_header_into(const std::string& text, Decls& d) {
    Parser p(text, &d);
    p.header();
    p.expect_end();
}

CmdP parse_program(const std::string& text, const Decls& d) {
    Parser p(text, const_cast<Decls*>(&d));
    CmdP c = p.program();
    p.expect_end();
    check_program(c, d);
    return c;
}

FormP parse_formula(const std::string& text, const Decls& d) {
    Parser p(text, const_cast<Decls*>(&d));
    FormP f = p.formula();
    p.expect_end();
    return f;
}

TermP parse_term(const std::string& text, const Decls& d) {
    Parser p(text, const_cast<Decls*>(&d));
    TermP t = p.expr();
    p.expect_end();
    return t;
}

Type parse_type(const std::string& text) {
    Decls d;
    Parser p(text, &d);
    Type t = p.type();
    p.expect_end();
    return t;
}

} // namespace bhl
