#include "bhl/syntax.hpp"

namespace bhl {

namespace {

// Term precedence levels, loosest first.
enum TermPrec { kOr = 1, kAnd, kNot, kRel, kAdd, kMul, kUnary, kPrimary };

int term_prec(const TermP& t) {
    if (t->kind == Term::Kind::Const) {
        // negative literals print with a leading '-'
        if (t->value.is_numeric() && t->value.as_real() < 0) return kUnary;
        return kPrimary;
    }
    if (t->kind != Term::Kind::App) return kPrimary;
    const std::string& f = t->name;
    if (f == "or") return kOr;
    if (f == "and") return kAnd;
    if (f == "not") return kNot;
    if (f == "=" || f == "!=" || f == "<" || f == "<=" || f == ">" || f == ">=") return kRel;
    if (f == "+" || f == "-") return kAdd;
    if (f == "*" || f == "/") return kMul;
    if (f == "neg") return kUnary;
    return kPrimary;
}

std::string term_at(const TermP& t, int min_prec);

std::string ref_str(const TermP& r) {
    if (r->kind == Term::Kind::App && r->name == "tuple") {
        std::string s = "(";
        for (size_t i = 0; i < r->args.size(); ++i) s += (i ? ", " : "") + ref_str(r->args[i]);
        return s + ")";
    }
    return term_at(r, kPrimary);
}

std::string term_raw(const TermP& t) {
    switch (t->kind) {
    case Term::Kind::Var: return t->name;
    case Term::Kind::Const: return t->value.str();
    case Term::Kind::TestApp: {
        const TermP& r = t->args[0];
        if (r->kind == Term::Kind::App && r->name == "tuple") return t->name + ref_str(r);
        return t->name + "(" + ref_str(r) + ")";
    }
    case Term::Kind::App: break;
    }
    const std::string& f = t->name;
    int p = term_prec(t);
    if (f == "not") return "not " + term_at(t->args[0], kNot);
    if (f == "neg") return "-" + term_at(t->args[0], kUnary + 1);
    if (p == kRel) return term_at(t->args[0], kRel + 1) + " " + f + " " + term_at(t->args[1], kRel + 1);
    if (p != kPrimary) return term_at(t->args[0], p) + " " + f + " " + term_at(t->args[1], p + 1);
    std::string open = "(", close = ")", head = f;
    if (f == "tuple") head = "";
    if (f == "list") head = "", open = "[", close = "]";
    std::string s = head + open;
    for (size_t i = 0; i < t->args.size(); ++i) s += (i ? ", " : "") + term_at(t->args[i], kOr);
    if (f == "tuple" && t->args.size() == 1) s += ",";
    return s + close;
}

std::string term_at(const TermP& t, int min_prec) {
    std::string s = term_raw(t);
    return term_prec(t) < min_prec ? "(" + s + ")" : s;
}

// Formula precedence levels.
enum FormPrec { fQuant = 0, fIff, fImp, fOr, fAnd, fUnary, fAtom };

bool is_poss(const FormP& f) {
    return f->kind == Formula::Kind::Not && f->subs[0]->kind == Formula::Kind::Know &&
           f->subs[0]->subs[0]->kind == Formula::Kind::Not;
}
bool is_possible_belief(const FormP& f) {
    return f->kind == Formula::Kind::Not && f->subs[0]->kind == Formula::Kind::Belief &&
           f->subs[0]->subs[0]->kind == Formula::Kind::Not;
}

int form_prec(const FormP& f) {
    switch (f->kind) {
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: return fQuant;
    case Formula::Kind::Iff: return fIff;
    case Formula::Kind::Implies: return fImp;
    case Formula::Kind::Or: return fOr;
    case Formula::Kind::And: return fAnd;
    case Formula::Kind::Not:
    case Formula::Kind::Know:
    case Formula::Kind::Belief: return fUnary;
    default: return fAtom;
    }
}

std::string form_at(const FormP& f, int min_prec);

std::string pairs_str(const std::vector<TestPair>& ps) {
    std::string s = "{";
    for (size_t i = 0; i < ps.size(); ++i) s += (i ? ", " : "") + ref_str(ps[i].first) + " : " + ps[i].second;
    return s + "}";
}

std::string belief_head(const Formula& b, const char* word) {
    std::string s = std::string(word) + "[" + cmp_str(b.op) + " " + term_at(b.terms[1], kAdd) + "; " +
                    ref_str(b.terms[0]) + "; " + b.name;
    if (b.has_kappa) s += "; kappa" + pairs_str(b.pairs);
    return s + "]";
}

std::string form_raw(const FormP& f) {
    using K = Formula::Kind;
    switch (f->kind) {
    case K::True: return "true";
    case K::False: return "false";
    case K::Rel: return term_at(f->terms[0], kAdd) + " " + cmp_str(f->op) + " " + term_at(f->terms[1], kAdd);
    case K::Sampled:
        return "sampled(" + ref_str(f->terms[0]) + ", " + term_at(f->terms[1], kOr) + ", " +
               term_at(f->terms[2], kOr) + ")";
    case K::Followed: return "followed(" + ref_str(f->terms[0]) + ", " + term_at(f->terms[1], kOr) + ")";
    case K::Neg:
        return std::string("neg[") + cmp_str(f->op) + "; " + ref_str(f->terms[0]) + "; " + f->name + "](" +
               term_at(f->terms[1], kOr) + ")";
    case K::Not:
        if (is_poss(f)) return "P " + form_at(f->subs[0]->subs[0]->subs[0], fUnary);
        if (is_possible_belief(f))
            return belief_head(*f->subs[0], "Possible") + " " + form_at(f->subs[0]->subs[0]->subs[0], fUnary);
        return "not " + form_at(f->subs[0], fUnary);
    case K::And:
    case K::Or: {
        std::string s;
        int p = form_prec(f);
        for (size_t i = 0; i < f->subs.size(); ++i)
            s += (i ? (f->kind == K::And ? " and " : " or ") : "") + form_at(f->subs[i], p + 1);
        return s;
    }
    case K::Implies: return form_at(f->subs[0], fImp + 1) + " -> " + form_at(f->subs[1], fImp);
    case K::Iff: return form_at(f->subs[0], fImp) + " <-> " + form_at(f->subs[1], fImp);
    case K::Know: return "K " + form_at(f->subs[0], fUnary);
    case K::Forall: return "forall " + f->name + ". " + form_at(f->subs[0], fQuant);
    case K::Exists: return "exists " + f->name + ". " + form_at(f->subs[0], fQuant);
    case K::Belief: return belief_head(*f, "Belief") + " " + form_at(f->subs[0], fUnary);
    case K::Kappa: return "kappa" + pairs_str(f->pairs);
    case K::Compds: return "compds(" + ref_str(f->terms[0]) + ", " + f->name + ")";
    case K::Hyp: {
        const char* w = f->hyp == Formula::HypKind::Upper   ? "upper"
                        : f->hyp == Formula::HypKind::Lower ? "lower"
                        : f->hyp == Formula::HypKind::Alt   ? "alt"
                                                            : "null";
        return std::string(w) + "[" + f->name + "]";
    }
    }
    return "?";
}

std::string form_at(const FormP& f, int min_prec) {
    std::string s = form_raw(f);
    return form_prec(f) < min_prec ? "(" + s + ")" : s;
}

enum CmdPrec { cSeq = 0, cPar, cStmt };

int cmd_prec(const CmdP& c) {
    if (c->kind == Command::Kind::Seq) return cSeq;
    if (c->kind == Command::Kind::Par) return cPar;
    return cStmt;
}

std::string cmd_at(const CmdP& c, int min_prec);

std::string cmd_raw(const CmdP& c) {
    using K = Command::Kind;
    switch (c->kind) {
    case K::Skip: return "skip";
    case K::Assign: return c->var + " := " + term_at(c->expr, kOr);
    case K::Test: return c->var + " := " + term_raw(mk_test(c->test, c->ref));
    case K::Seq: return cmd_at(c->c1, cPar) + "; " + cmd_at(c->c2, cSeq);
    case K::Par: return cmd_at(c->c1, cStmt) + " || " + cmd_at(c->c2, cPar);
    case K::If:
        return "if " + term_at(c->expr, kOr) + " { " + cmd_at(c->c1, cSeq) + " } else { " + cmd_at(c->c2, cSeq) + " }";
    case K::While: {
        std::string s = "while " + term_at(c->expr, kOr);
        if (c->inv) s += " invariant " + form_at(c->inv, fQuant);
        return s + " { " + cmd_at(c->c1, cSeq) + " }";
    }
    case K::Assert: return "assert " + form_at(c->inv, fQuant);
    }
    return "?";
}

std::string cmd_at(const CmdP& c, int min_prec) {
    std::string s = cmd_raw(c);
    return cmd_prec(c) < min_prec ? "(" + s + ")" : s;
}

} // namespace

std::string print_term(const TermP& t) { return term_at(t, kOr); }

std::string print_formula(const FormP& f) { return form_at(f, fQuant); }

std::string print_command(const CmdP& c) { return cmd_at(c, cSeq); }

} // namespace bhl
