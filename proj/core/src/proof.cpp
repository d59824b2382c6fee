#include "bhl/proof.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace bhl {

// ---------------------------------------------------------------- directives

Directive Directive::parse(const std::string& text) {
    auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t"), b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string t = trim(text);
    Directive d;
    if (t.empty() || t == "auto") return d;
    if (t == "assume") {
        d.kind = Kind::Assume;
        return d;
    }
    if (t == "prop") {
        d.kind = Kind::Schema;
        return d;
    }
    if (t == "scenario") {
        d.kind = Kind::Scenario;
        return d;
    }
    auto open = t.find('(');
    if (open == std::string::npos || t.back() != ')') fail(Error::Kind::Syntax, "bad discharge directive '" + text + "'");
    std::string head = trim(t.substr(0, open));
    std::string body = t.substr(open + 1, t.size() - open - 2);
    std::vector<std::string> args;
    std::stringstream ss(body);
    for (std::string a; std::getline(ss, a, ',');)
        if (!trim(a).empty()) args.push_back(trim(a));
    if (head == "schema") {
        d.kind = Kind::Schema;
        d.schemas = args;
        SchemaSet::from_names(args); // validate names early
    } else if (head == "scenario") {
        d.kind = Kind::Scenario;
        if (args.size() > 1) fail(Error::Kind::Syntax, "scenario(...) takes one id");
        if (!args.empty()) d.scenario = args[0];
    } else {
        fail(Error::Kind::Syntax, "unknown discharge directive '" + head + "' (schema, scenario, assume)");
    }
    return d;
}

std::string Directive::str() const {
    switch (kind) {
    case Kind::Auto: return "auto";
    case Kind::Assume: return "assume";
    case Kind::Scenario: return "scenario(" + scenario + ")";
    case Kind::Schema: {
        if (schemas.empty()) return "prop";
        std::string s = "schema(";
        for (size_t i = 0; i < schemas.size(); ++i) s += (i ? ", " : "") + schemas[i];
        return s + ")";
    }
    }
    return "?";
}

const char* ob_status_str(ObStatus s) {
    switch (s) {
    case ObStatus::Discharged: return "Discharged";
    case ObStatus::Assumed: return "Assumed";
    case ObStatus::Refuted: return "Refuted";
    case ObStatus::Failed: return "Failed";
    }
    return "?";
}

// ---------------------------------------------------------------- derived rules

namespace {

[[noreturn]] void proof_error(const std::string& msg) { fail(Error::Kind::Proof, msg); }

const std::string& param(const std::map<std::string, std::string>& p, const std::string& key, const std::string& rule) {
    auto it = p.find(key);
    if (it == p.end()) proof_error(rule + " needs parameter '" + key + "'");
    return it->second;
}

FormP param_formula(const Decls& d, const std::map<std::string, std::string>& p, const std::string& key) {
    auto it = p.find(key);
    return it == p.end() ? f_true() : parse_formula(it->second, d);
}

void require_fresh(const Decls& d, const std::string& rule, const std::vector<std::string>& names,
                   const std::vector<std::pair<std::string, FormP>>& in) {
    for (const auto& [what, f] : in) {
        if (!f) continue;
        std::set<std::string> fv = free_vars(d, f);
        for (const auto& n : names)
            if (fv.count(n)) proof_error(rule + ": " + n + " must not occur free in " + what);
    }
}

std::optional<FormP> maybe_hyp(const Decls& d, const std::string& test, Formula::HypKind k) {
    const TestDecl& td = d.test(test);
    if (k == Formula::HypKind::Upper && !td.upper) return std::nullopt;
    if (k == Formula::HypKind::Lower && !td.lower) return std::nullopt;
    return f_hyp(k, test);
}

} // namespace

DerivedInstance apply_derived(const Decls& d, const std::string& rule, const CmdP& prog,
                              const std::map<std::string, std::string>& params) {
    using H = Formula::HypKind;
    if (!prog || prog->kind != Command::Kind::Test) proof_error(rule + " applies to a single test call v := A(y)");
    const std::string& alpha = prog->var;
    const std::string& test = prog->test;
    const TermP& ref = prog->ref;
    const std::string h = hist_name(ref, test);
    FormP psi = param_formula(d, params, "psi");
    DerivedInstance out;
    FormP meaning;

    if (rule == "Two-HT" || rule == "Low-HT" || rule == "Up-HT") {
        const TestDecl& td = d.test(test);
        if (td.combined()) proof_error(rule + " needs an atomic test, '" + test + "' is a combination");
        Tail want = rule == "Two-HT" ? Tail::Two : rule == "Low-HT" ? Tail::Lower : Tail::Upper;
        if (td.tail != want)
            proof_error(rule + " needs a " + tail_str(want) + "-tailed test; '" + test + "' is " + tail_str(td.tail) + "-tailed");
        std::optional<FormP> lower = maybe_hyp(d, test, H::Lower), upper = maybe_hyp(d, test, H::Upper);
        if (want == Tail::Lower && !lower) lower = f_hyp(H::Alt, test);
        if (want == Tail::Upper && !upper) upper = f_hyp(H::Alt, test);
        if (want == Tail::Two && (!lower || !upper))
            proof_error(rule + " needs the test to declare both one-sided alternatives");
        FormP phi_l = lower.value_or(f_false()), phi_u = upper.value_or(f_false());
        require_fresh(d, rule, {alpha, h}, {{"psi", psi}, {"the lower alternative", phi_l}, {"the upper alternative", phi_u}});
        FormP believed = want == Tail::Two ? f_hyp(H::Alt, test) : want == Tail::Lower ? phi_l : phi_u;
        out.conclusion.pre = f_and(psi, f_kappa({}));
        out.conclusion.post =
            f_and({psi, f_kappa({{ref, test}}), f_belief(Cmp::Eq, mk_var(alpha), ref, test, believed)});
        FormP pl = f_poss(phi_l), pu = f_poss(phi_u);
        if (want == Tail::Lower) pu = f_not(pu);
        if (want == Tail::Upper) pl = f_not(pl);
        meaning = f_implies(psi, f_and({f_compds(ref, test), pl, pu}));
    } else if (rule == "Mult-or" || rule == "Mult-and") {
        const std::string& comb = param(params, "test", rule);
        const std::string& test1 = param(params, "test1", rule);
        TermP alpha1 = parse_term(param(params, "alpha1", rule), d);
        TermP ref1 = parse_term(param(params, "ref1", rule), d);
        const TestDecl& td = d.test(comb);
        bool is_or = rule == "Mult-or";
        if (td.kind != (is_or ? TestDecl::Kind::Or : TestDecl::Kind::And))
            proof_error(rule + " needs a " + (is_or ? "disjunctive" : "conjunctive") + " combination; '" + comb + "' is not");
        if (td.c1 != test1 || td.c2 != test)
            proof_error(rule + ": '" + comb + "' combines " + td.c1 + " and " + td.c2 + ", not " + test1 + " and " + test);
        Cmp op = Cmp::Eq;
        if (auto it = params.find("premise_op"); it != params.end()) {
            if (it->second == "<=") op = Cmp::Le;
            else if (it->second != "=") proof_error(rule + ": premise_op must be '=' or '<='");
        }
        FormP phi1 = hypothesis(d, test1, H::Alt), phi2 = hypothesis(d, test, H::Alt);
        std::set<std::string> a1;
        term_vars(alpha1, a1);
        if (a1.count(alpha)) proof_error(rule + ": the second p-value variable " + alpha + " occurs in the first bound");
        require_fresh(d, rule, {alpha, h}, {{"psi", psi}, {"the first alternative", phi1}, {"the second alternative", phi2}});
        TermP both_ref = mk_tuple({ref1, ref});
        TermP bound = is_or ? mk_app("+", {alpha1, mk_var(alpha)}) : mk_app("min", {alpha1, mk_var(alpha)});
        out.conclusion.pre = f_and({psi, f_kappa({{ref1, test1}}), f_belief(op, alpha1, ref1, test1, f_hyp(H::Alt, test1))});
        out.conclusion.post = f_and({psi, f_kappa({{ref1, test1}, {ref, test}}),
                                     f_belief(Cmp::Le, bound, both_ref, comb, f_hyp(H::Alt, comb))});
        meaning = f_implies(psi, f_and(f_compds(ref, test), f_poss(f_hyp(H::Alt, comb))));
    } else {
        proof_error("unknown derived rule '" + rule + "'");
    }
    out.conclusion.prog = prog;

    ProofNode hist;
    hist.rule = "Hist";
    hist.prog = prog;
    hist.post = out.conclusion.post;
    ProofNode conseq;
    conseq.rule = "Conseq";
    conseq.pre = out.conclusion.pre;
    conseq.prog = prog;
    conseq.post = out.conclusion.post;
    conseq.premises.push_back(std::move(hist));
    out.expansion = std::move(conseq);
    FormP hist_pre = subst(d, out.conclusion.post,
                           {{alpha, mk_test(test, ref)}, {h, mk_app("+", {mk_var(h), mk_int(1)})}});
    out.obligations = {f_implies(out.conclusion.pre, hist_pre), meaning};
    return out;
}

// ---------------------------------------------------------------- checking

namespace {

struct Partial {
    FormP pre;
    CmdP prog;
    FormP post;
};

struct Underdetermined {
    std::string what;
};

struct Rejection {
    std::string reason;
    std::string path;
};

bool is_derived(const std::string& r) {
    return r == "Two-HT" || r == "Low-HT" || r == "Up-HT" || r == "Mult-or" || r == "Mult-and";
}

class TreeChecker {
public:
    TreeChecker(const Decls& d, const ScenarioResolver& res, CheckReport& rep) : d_(d), res_(res), rep_(rep) {}

    Judgment check(const ProofNode& n, const Partial& exp, const std::string& path) {
        try {
            return check_rule(n, exp, path);
        } catch (const Error& e) {
            if (e.kind() == Error::Kind::Io) throw;
            throw Rejection{e.what(), path};
        }
    }

private:
    FormP pick(const FormP& mine, const FormP& ctx, const char* what, const std::string& path) {
        if (mine && ctx && !same_assertion(d_, mine, ctx))
            throw Rejection{std::string("stated ") + what + " '" + print_formula(mine) +
                                "' differs from the one the context requires '" + print_formula(ctx) + "'",
                            path};
        return mine ? mine : ctx;
    }

    CmdP pick_prog(const CmdP& mine, const CmdP& ctx, const std::string& path) {
        if (mine && ctx && !command_equal(strip_asserts(mine), strip_asserts(ctx)))
            throw Rejection{"stated program '" + print_command(mine) + "' differs from the context's '" +
                                print_command(ctx) + "'",
                            path};
        CmdP c = mine ? mine : ctx;
        if (!c) throw Underdetermined{"program"};
        return strip_asserts(c);
    }

    void require_kind(const CmdP& c, Command::Kind k, const std::string& rule, const std::string& path) {
        if (c->kind != k) throw Rejection{rule + " does not apply to '" + print_command(c) + "'", path};
    }

    void require_premises(const ProofNode& n, size_t k, const std::string& path) {
        if (n.premises.size() != k)
            throw Rejection{n.rule + " takes " + std::to_string(k) + " premise(s), found " + std::to_string(n.premises.size()),
                            path};
    }

    void same_or_reject(const FormP& want, const FormP& got, const std::string& msg, const std::string& path) {
        if (!same_assertion(d_, want, got))
            throw Rejection{msg + ": required '" + print_formula(want) + "', found '" + print_formula(got) + "'", path};
    }

    std::string child(const std::string& path, size_t i, const ProofNode& c) {
        return path + "/" + std::to_string(i) + ":" + c.rule;
    }

    // Record a side obligation; `lhs => rhs` identities discharge themselves
    // and do not consume a side-condition entry.
    void obligation(const ProofNode& n, size_t& next_side, const std::string& path, const std::string& name,
                    const FormP& lhs, const FormP& rhs) {
        FormP f = f_implies(lhs, rhs);
        if (same_assertion(d_, lhs, rhs)) {
            rep_.obligations.push_back({path, name, f, ObStatus::Discharged, "identity", ""});
            return;
        }
        const SideCondition* sc = next_side < n.side.size() ? &n.side[next_side] : nullptr;
        ++next_side;
        discharge(path, name, f, sc);
    }

    void discharge(const std::string& path, const std::string& name, const FormP& f, const SideCondition* sc) {
        if (sc && sc->formula && !same_assertion(d_, sc->formula, f))
            throw Rejection{"side condition '" + print_formula(sc->formula) + "' is not the obligation '" +
                                print_formula(f) + "' (" + name + ")",
                            path};
        Directive dir = sc ? sc->discharge : Directive{};
        ObligationResult r{path, name, f, ObStatus::Failed, dir.str(), ""};
        switch (dir.kind) {
        case Directive::Kind::Assume: r.status = ObStatus::Assumed; break;
        case Directive::Kind::Auto:
        case Directive::Kind::Schema: {
            SchemaSet s = SchemaSet::from_names(dir.schemas);
            if (prove(d_, f, s)) {
                r.status = ObStatus::Discharged;
                if (dir.kind == Directive::Kind::Auto) r.route = "prop";
            } else {
                r.detail = dir.kind == Directive::Kind::Auto
                               ? "no discharge directive, and propositional reasoning does not establish it"
                               : "the schemata " + s.str() + " do not establish it";
            }
            break;
        }
        case Directive::Kind::Scenario: {
            const Model* m = res_ ? res_(dir.scenario) : nullptr;
            if (!m) {
                r.detail = "unknown scenario '" + dir.scenario + "'";
                break;
            }
            Verdict v = check_valid(*m, f);
            if (v.ok) {
                r.status = ObStatus::Discharged;
                for (const auto& w : null_world_warnings(*m, f)) r.detail += (r.detail.empty() ? "" : "; ") + w;
            } else {
                r.status = ObStatus::Refuted;
                r.detail = v.cex ? v.cex->description : "counterexample";
            }
            break;
        }
        }
        rep_.obligations.push_back(std::move(r));
    }

    // Check a premise, retrying with more context when it cannot determine its own conclusion.
    Judgment check_flexible(const ProofNode& p, const std::vector<Partial>& tries, const std::string& path) {
        for (size_t i = 0; i < tries.size(); ++i) {
            size_t mark = rep_.obligations.size();
            try {
                return check(p, tries[i], path);
            } catch (const Underdetermined& u) {
                rep_.obligations.resize(mark);
                if (i + 1 == tries.size()) throw Rejection{p.rule + " cannot determine its " + u.what, path};
            }
        }
        throw Rejection{"premise is underdetermined", path};
    }

    Judgment check_rule(const ProofNode& n, const Partial& exp, const std::string& path) {
        const std::string& r = n.rule;
        size_t side = 0;
        CmdP c = pick_prog(n.prog, exp.prog, path);
        FormP pre = pick(n.pre, exp.pre, "precondition", path);
        FormP post = pick(n.post, exp.post, "postcondition", path);
        Judgment j;
        j.prog = c;

        if (r == "Skip") {
            require_kind(c, Command::Kind::Skip, r, path);
            require_premises(n, 0, path);
            if (!pre && !post) throw Underdetermined{"pre/postcondition"};
            j.pre = pre ? pre : post;
            j.post = post ? post : pre;
            same_or_reject(j.pre, j.post, "Skip needs equal pre- and postconditions", path);
        } else if (r == "UpdVar") {
            require_kind(c, Command::Kind::Assign, r, path);
            require_premises(n, 0, path);
            if (!post) throw Underdetermined{"postcondition"};
            check_program(c, d_);
            FormP req = subst(d_, post, {{c->var, c->expr}});
            if (pre) same_or_reject(req, pre, "UpdVar precondition must be the postcondition with " + c->var + " replaced", path);
            j.pre = pre ? pre : req;
            j.post = post;
        } else if (r == "Hist") {
            require_kind(c, Command::Kind::Test, r, path);
            require_premises(n, 0, path);
            if (!post) throw Underdetermined{"postcondition"};
            check_hist_side(c, path);
            std::string h = hist_name(c->ref, c->test);
            FormP req = subst(d_, post, {{c->var, mk_test(c->test, c->ref)}, {h, mk_app("+", {mk_var(h), mk_int(1)})}});
            if (pre)
                same_or_reject(req, pre,
                               "Hist precondition must be the postcondition with " + c->var + " := " +
                                   print_term(mk_test(c->test, c->ref)) + " and " + h + " incremented",
                               path);
            j.pre = pre ? pre : req;
            j.post = post;
        } else if (r == "Seq") {
            require_kind(c, Command::Kind::Seq, r, path);
            require_premises(n, 2, path);
            std::string p0 = child(path, 0, n.premises[0]), p1 = child(path, 1, n.premises[1]);
            size_t mark = rep_.obligations.size();
            Judgment j1, j2;
            try {
                j1 = check(n.premises[0], {pre, c->c1, nullptr}, p0);
                j2 = check(n.premises[1], {j1.post, c->c2, post}, p1);
            } catch (const Underdetermined&) {
                rep_.obligations.resize(mark);
                j2 = check_flexible(n.premises[1], {{nullptr, c->c2, post}}, p1);
                j1 = check_flexible(n.premises[0], {{pre, c->c1, j2.pre}}, p0);
            }
            j.pre = j1.pre;
            j.post = j2.post;
        } else if (r == "If") {
            require_kind(c, Command::Kind::If, r, path);
            require_premises(n, 2, path);
            if (!pre) throw Underdetermined{"precondition"};
            FormP g = guard_formula(c->expr);
            Judgment j1 = check(n.premises[0], {f_and(pre, g), c->c1, post}, child(path, 0, n.premises[0]));
            Judgment j2 = check(n.premises[1], {f_and(pre, f_not(g)), c->c2, j1.post}, child(path, 1, n.premises[1]));
            j.pre = pre;
            j.post = j2.post;
        } else if (r == "Loop") {
            require_kind(c, Command::Kind::While, r, path);
            require_premises(n, 1, path);
            FormP inv = pre ? pre : c->inv;
            if (!inv) throw Underdetermined{"invariant"};
            FormP g = guard_formula(c->expr);
            FormP want_post = f_and(inv, f_not(g));
            if (post) same_or_reject(want_post, post, "Loop postcondition must be invariant and not guard", path);
            check(n.premises[0], {f_and(inv, g), c->c1, inv}, child(path, 0, n.premises[0]));
            j.pre = inv;
            j.post = post ? post : want_post;
        } else if (r == "Conseq") {
            require_premises(n, 1, path);
            std::string p0 = child(path, 0, n.premises[0]);
            Judgment jp = check_flexible(n.premises[0],
                                         {{nullptr, c, nullptr}, {pre, c, nullptr}, {nullptr, c, post}, {pre, c, post}}, p0);
            j.pre = pre ? pre : jp.pre;
            j.post = post ? post : jp.post;
            obligation(n, side, path, "strengthen precondition", j.pre, jp.pre);
            obligation(n, side, path, "weaken postcondition", jp.post, j.post);
        } else if (r == "Par") {
            require_kind(c, Command::Kind::Par, r, path);
            require_premises(n, 1, path);
            check_program(c, d_); // the parallel restriction
            Judgment jp = check(n.premises[0], {pre, c_seq(c->c1, c->c2), post}, child(path, 0, n.premises[0]));
            j.pre = jp.pre;
            j.post = jp.post;
        } else if (r == "Lemma") {
            require_premises(n, 0, path);
            if (!pre || !post) throw Underdetermined{"pre/postcondition"};
            j.pre = pre;
            j.post = post;
            ObligationResult o{path, "lemma " + (n.lemma.empty() ? std::string("(unnamed)") : n.lemma),
                               f_implies(pre, post), ObStatus::Assumed, "assume",
                               "{" + print_formula(pre) + "} " + print_command(c) + " {" + print_formula(post) + "}"};
            rep_.obligations.push_back(std::move(o));
        } else if (is_derived(r)) {
            require_premises(n, 0, path);
            DerivedInstance inst = apply_derived(d_, r, c, n.params);
            if (pre) same_or_reject(inst.conclusion.pre, pre, r + " precondition", path);
            if (post) same_or_reject(inst.conclusion.post, post, r + " postcondition", path);
            if (n.side.size() > 2)
                throw Rejection{r + " has two side conditions (pre-obligation, meaningfulness); found " +
                                    std::to_string(n.side.size()),
                                path};
            ProofNode ex = inst.expansion;
            if (!n.side.empty()) ex.side = {n.side[0]};
            check(ex, {}, path + "/expand:Conseq");
            discharge(path, "meaningfulness", inst.obligations[1], n.side.size() > 1 ? &n.side[1] : nullptr);
            j = inst.conclusion;
        } else {
            throw Rejection{"unknown rule '" + r + "'", path};
        }
        if (side < n.side.size() && !is_derived(r))
            throw Rejection{r + " produced " + std::to_string(side) + " side condition(s) but the script lists " +
                                std::to_string(n.side.size()),
                            path};
        return j;
    }

    void check_hist_side(const CmdP& c, const std::string& path) {
        std::string h = hist_name(c->ref, c->test);
        if (!d_.has_history(h)) throw Rejection{h + " is not in the declared history universe", path};
        if (d_.test(c->test).combined()) throw Rejection{"Hist applies to atomic tests only", path};
        std::vector<TermP> leaves{c->ref};
        while (!leaves.empty()) {
            TermP t = leaves.back();
            leaves.pop_back();
            if (t->kind == Term::Kind::App && t->name == "tuple") {
                leaves.insert(leaves.end(), t->args.begin(), t->args.end());
                continue;
            }
            auto ty = t->kind == Term::Kind::Var ? d_.type_of(t->name) : std::nullopt;
            if (!ty || ty->kind != Type::Kind::List || !d_.is_obs(t->name))
                throw Rejection{"dataset reference " + print_term(t) + " must be an observable list", path};
        }
        auto vt = d_.type_of(c->var);
        if (!vt || !d_.is_obs(c->var) || (vt->kind != Type::Kind::Prob && vt->kind != Type::Kind::Real))
            throw Rejection{"p-value variable " + c->var + " must be an observable of type prob or real", path};
    }

    const Decls& d_;
    const ScenarioResolver& res_;
    CheckReport& rep_;
};

} // namespace

CheckReport check_proof(const Decls& d, const ProofNode& root, const ScenarioResolver& scenarios,
                        const std::optional<Judgment>& expected) {
    CheckReport rep;
    TreeChecker tc(d, scenarios, rep);
    Partial exp;
    if (expected) exp = {expected->pre, expected->prog, expected->post};
    try {
        rep.conclusion = tc.check(root, exp, root.rule);
    } catch (const Rejection& r) {
        rep.accepted = false;
        rep.reason = r.reason;
        rep.path = r.path;
        return rep;
    } catch (const Underdetermined& u) {
        rep.accepted = false;
        rep.reason = root.rule + " cannot determine its " + u.what;
        rep.path = root.rule;
        return rep;
    }
    rep.accepted = true;
    for (const auto& o : rep.obligations) {
        if (o.status == ObStatus::Refuted || o.status == ObStatus::Failed) {
            rep.accepted = false;
            rep.reason = std::string("side condition ") + ob_status_str(o.status) + " (" + o.name + "): " + o.detail;
            rep.path = o.path;
            break;
        }
    }
    return rep;
}

// ---------------------------------------------------------------- reports

int CheckReport::count(ObStatus s) const {
    int n = 0;
    for (const auto& o : obligations) n += o.status == s;
    return n;
}

std::vector<std::string> CheckReport::assumed() const {
    std::vector<std::string> out;
    for (const auto& o : obligations)
        if (o.status == ObStatus::Assumed) out.push_back(o.path + ": " + o.name);
    return out;
}

std::vector<std::string> CheckReport::scenarios_checked() const {
    std::vector<std::string> out;
    for (const auto& o : obligations)
        if (o.route.rfind("scenario", 0) == 0) out.push_back(o.path + ": " + o.name + " [" + o.route + "]");
    return out;
}

std::string CheckReport::text() const {
    std::ostringstream os;
    os << "verdict: " << (accepted ? "Accepted" : "Rejected") << "\n";
    if (!accepted) os << "reason: " << reason << "\nat: " << path << "\n";
    if (conclusion)
        os << "conclusion: {" << print_formula(conclusion->pre) << "}\n    " << print_command(conclusion->prog) << "\n  {"
           << print_formula(conclusion->post) << "}\n";
    os << "obligations: " << obligations.size() << " (" << count(ObStatus::Discharged) << " discharged, "
       << count(ObStatus::Assumed) << " assumed, " << count(ObStatus::Refuted) << " refuted, "
       << count(ObStatus::Failed) << " failed)\n";
    for (const auto& o : obligations) {
        os << "  [" << ob_status_str(o.status) << "] " << o.path << " :: " << o.name << " via " << o.route << "\n";
        if (o.formula && o.route != "identity") os << "      " << print_formula(o.formula) << "\n";
        if (!o.detail.empty()) os << "      " << o.detail << "\n";
    }
    auto a = assumed();
    if (!a.empty()) {
        os << "assumed:\n";
        for (const auto& s : a) os << "  " << s << "\n";
    }
    return os.str();
}

std::string CheckReport::json() const {
    nlohmann::ordered_json j;
    j["verdict"] = accepted ? "Accepted" : "Rejected";
    if (!accepted) {
        j["reason"] = reason;
        j["path"] = path;
    }
    if (conclusion)
        j["conclusion"] = {{"pre", print_formula(conclusion->pre)},
                           {"prog", print_command(conclusion->prog)},
                           {"post", print_formula(conclusion->post)}};
    auto obs = nlohmann::ordered_json::array();
    for (const auto& o : obligations)
        obs.push_back({{"path", o.path},
                       {"name", o.name},
                       {"formula", o.formula ? print_formula(o.formula) : ""},
                       {"status", ob_status_str(o.status)},
                       {"route", o.route},
                       {"detail", o.detail}});
    j["obligations"] = obs;
    j["assumed"] = assumed();
    j["scenario_checked"] = scenarios_checked();
    return j.dump(2);
}

} // namespace bhl
