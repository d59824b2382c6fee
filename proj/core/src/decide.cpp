// Propositional decision procedure over normal forms, extended with
// instances of valid axiom schemata generated from the letters that occur.

#include "bhl/proof.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace bhl {

SchemaSet SchemaSet::all() { return {true, true, true, true, true, true}; }

SchemaSet SchemaSet::from_names(const std::vector<std::string>& names) {
    SchemaSet s;
    for (const auto& raw : names) {
        std::string n = raw;
        if (n == "prop" || n.empty()) continue;
        if (n == "*" || n == "all") return all();
        if (n == "K" || n == "S5" || n == "SBk" || n == "SB4" || n == "SB5" || n == "Tails") {
            s.knowledge = true;
        } else if (n == "SB-<") {
            s.knowledge = s.neg_order = true;
        } else if (n == "SBnu") {
            s.test_pvalue = true;
        } else if (n == "BHk") {
            s.knowledge = s.histories = true;
        } else if (n == "BHT") {
            s.knowledge = s.histories = s.test_pvalue = s.neg_order = true;
        } else if (n == "BHT-or" || n == "BHT-and") {
            s.knowledge = s.histories = s.test_pvalue = s.neg_order = s.combination = true;
        } else if (n == "Sampling") {
            s.sampling = true;
        } else {
            fail(Error::Kind::Proof, "unknown schema '" + n + "'");
        }
    }
    return s;
}

std::string SchemaSet::str() const {
    std::string out;
    auto add = [&](bool on, const char* n) {
        if (on) out += (out.empty() ? "" : ", ") + std::string(n);
    };
    add(knowledge, "K");
    add(neg_order, "SB-<");
    add(histories, "BHk");
    add(test_pvalue, "SBnu");
    add(combination, "BHT-comb");
    add(sampling, "Sampling");
    return out.empty() ? "prop" : out;
}

namespace {

using K = Formula::Kind;

bool is_letter(const FormP& f) {
    switch (f->kind) {
    case K::Rel:
    case K::Neg:
    case K::Sampled:
    case K::Followed:
    case K::Know:
    case K::Forall:
    case K::Exists: return true;
    default: return false;
    }
}

// ---------------------------------------------------------------- SAT

class Sat {
public:
    explicit Sat(int nvars, std::vector<std::vector<int>> clauses)
        : n_(nvars), cls_(std::move(clauses)), val_(nvars + 1, 0) {}

    bool satisfiable() {
        std::vector<int> trail;
        return search(trail);
    }

private:
    int value(int lit) const {
        int v = val_[std::abs(lit)];
        return lit > 0 ? v : -v;
    }

    // Unit propagation; false on conflict.  Assignments are pushed on the trail.
    bool propagate(std::vector<int>& trail) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& c : cls_) {
                int unassigned = 0, last = 0;
                bool sat = false;
                for (int l : c) {
                    int v = value(l);
                    if (v > 0) {
                        sat = true;
                        break;
                    }
                    if (v == 0) ++unassigned, last = l;
                }
                if (sat) continue;
                if (unassigned == 0) return false;
                if (unassigned == 1) {
                    val_[std::abs(last)] = last > 0 ? 1 : -1;
                    trail.push_back(std::abs(last));
                    changed = true;
                }
            }
        }
        return true;
    }

    bool search(std::vector<int>& trail) {
        size_t mark = trail.size();
        if (!propagate(trail)) {
            undo(trail, mark);
            return false;
        }
        int pick = 0;
        for (const auto& c : cls_) {
            bool sat = false;
            int cand = 0;
            for (int l : c) {
                int v = value(l);
                if (v > 0) {
                    sat = true;
                    break;
                }
                if (v == 0 && cand == 0) cand = l;
            }
            if (!sat && cand != 0) {
                pick = cand;
                break;
            }
        }
        if (pick == 0) return true; // every clause satisfied
        for (int lit : {pick, -pick}) {
            size_t m2 = trail.size();
            val_[std::abs(lit)] = lit > 0 ? 1 : -1;
            trail.push_back(std::abs(lit));
            if (search(trail)) return true;
            undo(trail, m2);
        }
        undo(trail, mark);
        return false;
    }

    void undo(std::vector<int>& trail, size_t mark) {
        while (trail.size() > mark) {
            val_[trail.back()] = 0;
            trail.pop_back();
        }
    }

    int n_;
    std::vector<std::vector<int>> cls_;
    std::vector<int> val_;
};

// ---------------------------------------------------------------- encoding

class Enc {
public:
    Enc() { top_ = fresh(); add({top_}); }

    int top() const { return top_; }
    int nvars() const { return n_; }
    const std::vector<std::vector<int>>& clauses() const { return cls_; }
    const std::vector<std::pair<FormP, int>>& letters() const { return letters_; }

    void add(std::vector<int> c) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        for (int l : c)
            if (l < 0 && std::binary_search(c.begin(), c.end(), -l)) return; // tautology
        if (seen_.insert(c).second) cls_.push_back(std::move(c));
    }

    int encode(const FormP& f) {
        switch (f->kind) {
        case K::True: return top_;
        case K::False: return -top_;
        case K::Not: return -encode(f->subs[0]);
        case K::And:
        case K::Or: {
            std::string key = nf_key(f);
            if (auto it = gates_.find(key); it != gates_.end()) return it->second;
            std::vector<int> xs;
            for (const auto& s : f->subs) xs.push_back(encode(s));
            int g = fresh();
            gates_[key] = g;
            bool conj = f->kind == K::And;
            // conj: g -> x_i ; (all x_i) -> g.   disj: x_i -> g ; g -> (some x_i)
            std::vector<int> big{conj ? g : -g};
            for (int x : xs) {
                add(conj ? std::vector<int>{-g, x} : std::vector<int>{g, -x});
                big.push_back(conj ? -x : x);
            }
            add(big);
            return g;
        }
        default: break;
        }
        std::string key = nf_key(f);
        if (auto it = ids_.find(key); it != ids_.end()) return it->second;
        int v = fresh();
        ids_[key] = v;
        letters_.emplace_back(f, v);
        return v;
    }

    bool has_letter(const std::string& key) const { return ids_.count(key) > 0; }

private:
    int fresh() { return ++n_; }
    int n_ = 0;
    int top_ = 0;
    std::vector<std::vector<int>> cls_;
    std::set<std::vector<int>> seen_;
    std::map<std::string, int> ids_;
    std::map<std::string, int> gates_;
    std::vector<std::pair<FormP, int>> letters_;
};

// ---------------------------------------------------------------- context

struct Ctx {
    const Decls& d;
    SchemaSet s;
    std::map<std::string, bool> memo;
};

bool prove_at(Ctx& cx, const FormP& goal_nf, int depth);

bool is_num(const TermP& t) { return t->kind == Term::Kind::Const && t->value.is_numeric(); }
double num(const TermP& t) { return t->value.as_real(); }
constexpr double kMargin = 2 * kTol;

bool numeric_term(const Decls& d, const TermP& t) {
    try {
        return infer_type(t, d).is_numeric();
    } catch (const Error&) {
        return false;
    }
}

void term_names(const TermP& t, std::set<std::string>& out) { term_vars(t, out); }

// Whether the truth of a letter is the same throughout an observation class.
bool class_invariant(const Decls& d, const FormP& l, bool histories) {
    if (l->kind == K::Know) return true;
    if (l->kind != K::Rel && l->kind != K::Neg) return false;
    std::set<std::string> vs;
    for (const auto& t : l->terms) term_names(t, vs);
    bool any_hist = false;
    for (const auto& v : vs) {
        if (d.is_obs(v)) continue;
        if (is_hist_name(v)) {
            if (!histories) return false;
            any_hist = true;
            continue;
        }
        if (d.declared(v)) return false; // invisible
        // bounded integer variable: fixed across the class
    }
    (void)any_hist;
    return true;
}

// Letters occurring outside every K.
void outer_letters(const FormP& f, std::set<std::string>& out) {
    if (is_letter(f)) {
        out.insert(nf_key(f));
        return;
    }
    for (const auto& s : f->subs) outer_letters(s, out);
}

// Class-invariant letters in `b`, not looking inside nested K bodies.
void invariant_letters(const Decls& d, const FormP& b, bool histories, std::map<std::string, FormP>& out) {
    if (is_letter(b)) {
        if (class_invariant(d, b, histories)) out.emplace(nf_key(b), b);
        return;
    }
    for (const auto& s : b->subs) invariant_letters(d, s, histories, out);
}

void body_vars(const FormP& f, std::set<std::string>& out) {
    for (const auto& t : f->terms) term_vars(t, out);
    for (const auto& s : f->subs) body_vars(s, out);
}

void collect_outer_invariant(const Decls& d, const FormP& f, bool histories, std::map<std::string, FormP>& out) {
    if (is_letter(f)) {
        if (f->kind != K::Know && class_invariant(d, f, histories)) out.emplace(nf_key(f), f);
        return;
    }
    for (const auto& s : f->subs) collect_outer_invariant(d, s, histories, out);
}

FormP replace_letters(const FormP& f, const std::map<std::string, bool>& sigma) {
    if (is_letter(f)) {
        auto it = sigma.find(nf_key(f));
        if (it != sigma.end()) return it->second ? f_true() : f_false();
        return f;
    }
    if (f->subs.empty()) return f;
    auto g = std::make_shared<Formula>(*f);
    for (auto& s : g->subs) s = replace_letters(s, sigma);
    return g;
}

// Canonical atom for a freshly built formula.
FormP canon(Ctx& cx, const FormP& f) { return normalize(cx.d, f); }

struct Bound {
    enum Kind { Eq, Ub, Lb } kind; // t = c, t <= c, c <= t
    double c;
    int var;
};

void arithmetic_axioms(Ctx& cx, Enc& e) {
    std::map<std::string, std::vector<Bound>> by_subject;
    auto letters = e.letters();
    for (const auto& [f, v] : letters) {
        if (f->kind != K::Rel) continue;
        const TermP& a = f->terms[0];
        const TermP& b = f->terms[1];
        if (f->op == Cmp::Eq) {
            if (is_num(b)) by_subject[print_term(a)].push_back({Bound::Eq, num(b), v});
            else if (numeric_term(cx.d, a) && numeric_term(cx.d, b)) {
                int ab = e.encode(canon(cx, f_rel(Cmp::Le, a, b)));
                int ba = e.encode(canon(cx, f_rel(Cmp::Le, b, a)));
                e.add({-v, ab});
                e.add({-v, ba});
                e.add({v, -ab, -ba});
            }
        } else if (f->op == Cmp::Le) {
            if (is_num(b)) by_subject[print_term(a)].push_back({Bound::Ub, num(b), v});
            else if (is_num(a)) by_subject[print_term(b)].push_back({Bound::Lb, num(a), v});
            else e.add({v, e.encode(canon(cx, f_rel(Cmp::Le, b, a)))});
        }
    }
    for (const auto& [subject, bs] : by_subject) {
        for (size_t i = 0; i < bs.size(); ++i) {
            for (size_t j = 0; j < bs.size(); ++j) {
                if (i == j) continue;
                const Bound& x = bs[i];
                const Bound& y = bs[j];
                if (x.kind == Bound::Eq && y.kind == Bound::Eq && std::fabs(x.c - y.c) > kMargin) e.add({-x.var, -y.var});
                if (x.kind == Bound::Eq && y.kind == Bound::Ub) {
                    if (x.c <= y.c) e.add({-x.var, y.var});
                    else if (x.c > y.c + kMargin) e.add({-x.var, -y.var});
                }
                if (x.kind == Bound::Eq && y.kind == Bound::Lb) {
                    if (x.c >= y.c) e.add({-x.var, y.var});
                    else if (x.c < y.c - kMargin) e.add({-x.var, -y.var});
                }
                if (x.kind == Bound::Ub && y.kind == Bound::Ub && x.c <= y.c) e.add({-x.var, y.var});
                if (x.kind == Bound::Lb && y.kind == Bound::Lb && y.c <= x.c) e.add({-x.var, y.var});
                if (x.kind == Bound::Ub && y.kind == Bound::Lb) {
                    if (y.c > x.c + kMargin) e.add({-x.var, -y.var});
                    if (y.c <= x.c) e.add({x.var, y.var});
                }
            }
        }
    }
}

void sampling_axioms(Ctx& cx, Enc& e) {
    auto letters = e.letters();
    for (const auto& [f, v] : letters)
        if (f->kind == K::Sampled) e.add({-v, e.encode(canon(cx, f_followed(f->terms[0], f->terms[1])))});
}

FormP neg_of(Ctx& cx, Cmp op, const TermP& ref, const std::string& test, const TermP& eps) {
    return canon(cx, f_neg(op, ref, test, eps));
}

bool is_own_pvalue(const Formula& f) {
    const TermP& eps = f.terms[1];
    return eps->kind == Term::Kind::TestApp && eps->name == f.name && term_equal(eps->args[0], f.terms[0]);
}

void neg_axioms(Ctx& cx, Enc& e) {
    auto letters = e.letters();
    // group by (reference, test)
    std::map<std::string, std::vector<std::pair<FormP, int>>> groups;
    std::map<std::string, std::vector<std::pair<double, int>>> upper_of; // term -> (c, var of term <= c)
    for (const auto& [f, v] : letters) {
        if (f->kind == K::Neg) groups[print_term(f->terms[0]) + "|" + f->name].emplace_back(f, v);
        if (f->kind == K::Rel && f->op == Cmp::Le && is_num(f->terms[1]))
            upper_of[print_term(f->terms[0])].emplace_back(num(f->terms[1]), v);
    }
    for (const auto& [g, xs] : groups) {
        for (const auto& [f, v] : xs) {
            const TermP& ref = f->terms[0];
            const TermP& eps = f->terms[1];
            if (cx.s.test_pvalue && f->op != Cmp::Lt && is_own_pvalue(*f)) e.add({v});
            if (!cx.s.neg_order) continue;
            if (f->op == Cmp::Eq || f->op == Cmp::Lt) e.add({-v, e.encode(neg_of(cx, Cmp::Le, ref, f->name, eps))});
            if (!is_num(eps)) {
                // p = t (or p <= t, p < t) together with t <= c bounds the p-value by c
                auto it = upper_of.find(print_term(eps));
                if (it == upper_of.end()) continue;
                for (const auto& [c, bv] : it->second) {
                    Cmp to = f->op == Cmp::Lt ? Cmp::Lt : Cmp::Le;
                    int target = e.encode(neg_of(cx, to, ref, f->name, mk_real(c)));
                    e.add({-v, -bv, target});
                    if (f->op == Cmp::Eq) e.add({-v, bv, -target});
                }
            }
        }
        if (!cx.s.neg_order) continue;
        for (const auto& [f1, v1] : xs) {
            for (const auto& [f2, v2] : xs) {
                if (v1 == v2 || !is_num(f1->terms[1]) || !is_num(f2->terms[1])) continue;
                double c1 = num(f1->terms[1]), c2 = num(f2->terms[1]);
                Cmp a = f1->op, b = f2->op;
                if (a == Cmp::Eq && b == Cmp::Eq && std::fabs(c1 - c2) > kMargin) e.add({-v1, -v2});
                if (a == Cmp::Eq && b == Cmp::Le) {
                    if (c1 <= c2) e.add({-v1, v2});
                    else if (c1 > c2 + kMargin) e.add({-v1, -v2});
                }
                if (a == Cmp::Eq && b == Cmp::Lt) {
                    if (c1 + kMargin < c2) e.add({-v1, v2});
                    else if (c1 >= c2) e.add({-v1, -v2});
                }
                if ((a == Cmp::Le || a == Cmp::Lt) && b == Cmp::Le && c1 <= c2) e.add({-v1, v2});
                if (a == Cmp::Lt && b == Cmp::Lt && c1 <= c2) e.add({-v1, v2});
                if (a == Cmp::Le && b == Cmp::Lt && c1 + kMargin < c2) e.add({-v1, v2});
            }
        }
    }
}

void combination_axioms(Ctx& cx, Enc& e) {
    auto letters = e.letters();
    for (const auto& [f, v] : letters) {
        if (f->kind != K::Neg || f->op != Cmp::Le) continue;
        const TestDecl& td = cx.d.test(f->name);
        const TermP& ref = f->terms[0];
        if (!td.combined() || ref->kind != Term::Kind::App || ref->name != "tuple" || ref->args.size() != 2) continue;
        const TermP& r1 = ref->args[0];
        const TermP& r2 = ref->args[1];
        const TermP& eps = f->terms[1];
        bool is_or = td.kind == TestDecl::Kind::Or;
        if (!is_or) {
            // the conjunctive p-value is at most either component's
            e.add({-e.encode(neg_of(cx, Cmp::Le, r1, td.c1, eps)), v});
            e.add({-e.encode(neg_of(cx, Cmp::Le, r2, td.c2, eps)), v});
        }
        const char* op = is_or ? "+" : "min";
        if (eps->kind != Term::Kind::App || eps->name != op || eps->args.size() != 2) continue;
        for (int swap = 0; swap < 2; ++swap) {
            const TermP& s = eps->args[swap];
            const TermP& u = eps->args[1 - swap];
            e.add({-e.encode(neg_of(cx, Cmp::Le, r1, td.c1, s)), -e.encode(neg_of(cx, Cmp::Le, r2, td.c2, u)), v});
        }
    }
}

void knowledge_axioms(Ctx& cx, Enc& e, const std::set<std::string>& outer,
                      const std::map<std::string, FormP>& outer_inv, int depth) {
    auto letters = e.letters();
    std::vector<std::pair<FormP, int>> ks;
    for (const auto& p : letters)
        if (p.first->kind == K::Know) ks.push_back(p);
    for (const auto& [k, v] : ks) {
        const FormP& b = k->subs[0];
        e.add({-v, e.encode(b)}); // T
        if (b->kind == K::Know) {
            int inner = e.encode(b);
            e.add({-v, inner});
            e.add({v, -inner});
        }
        if (b->kind == K::Not && b->subs[0]->kind == K::Know) {
            int inner = e.encode(b->subs[0]);
            e.add({-v, -inner});
            e.add({v, inner});
        }
        // split on class-invariant letters that also occur outside K
        std::map<std::string, FormP> inv;
        invariant_letters(cx.d, b, cx.s.histories, inv);
        std::vector<std::pair<std::string, FormP>> use;
        for (const auto& [key, l] : inv)
            if (outer.count(key) && use.size() < 8) use.emplace_back(key, l);
        // invariant outer letters about the same variables are known facts inside K
        std::set<std::string> bvars;
        body_vars(b, bvars);
        std::vector<FormP> extra;
        for (const auto& [key, l] : outer_inv) {
            if (inv.count(key) || use.size() + extra.size() >= 8) continue;
            std::set<std::string> lv;
            for (const auto& t : l->terms) term_vars(t, lv);
            bool shares = l->kind != K::Know && std::any_of(lv.begin(), lv.end(), [&](const std::string& x) { return bvars.count(x) > 0; });
            if (shares) {
                use.emplace_back(key, l);
                extra.push_back(l);
            }
        }
        if (use.empty()) continue;
        std::vector<int> lv;
        for (const auto& u : use) lv.push_back(e.encode(u.second));
        for (unsigned mask = 0; mask < (1u << use.size()); ++mask) {
            std::map<std::string, bool> sigma;
            std::vector<int> guard;
            for (size_t i = 0; i < use.size(); ++i) {
                bool on = mask & (1u << i);
                sigma[use[i].first] = on;
                guard.push_back(on ? -lv[i] : lv[i]);
            }
            std::vector<FormP> facts{replace_letters(b, sigma)};
            for (const auto& l : extra) facts.push_back(sigma.at(nf_key(l)) ? l : f_not(l));
            FormP reduced = normalize(cx.d, f_know(f_and(facts)));
            int r = e.encode(reduced);
            auto c1 = guard, c2 = guard;
            c1.push_back(-v);
            c1.push_back(r);
            c2.push_back(v);
            c2.push_back(-r);
            e.add(c1);
            e.add(c2);
        }
    }
    if (depth >= 2) return;
    for (const auto& [k, v] : ks)
        if (prove_at(cx, k->subs[0], depth + 1)) e.add({v}); // necessitation
    ks.clear();
    for (const auto& p : e.letters())
        if (p.first->kind == K::Know) ks.push_back(p);
    for (const auto& [ka, va] : ks) {
        for (const auto& [kb, vb] : ks) {
            if (va == vb) continue;
            FormP imp = normalize(cx.d, f_implies(ka->subs[0], kb->subs[0]));
            if (prove_at(cx, imp, depth + 1)) e.add({-va, vb});
        }
    }
    if (depth > 0 || ks.size() > 10) return;
    for (size_t i = 0; i < ks.size(); ++i) {
        for (size_t j = i + 1; j < ks.size(); ++j) {
            for (const auto& [kb, vb] : ks) {
                if (vb == ks[i].second || vb == ks[j].second) continue;
                FormP imp = normalize(cx.d, f_implies(f_and(ks[i].first->subs[0], ks[j].first->subs[0]), kb->subs[0]));
                if (prove_at(cx, imp, depth + 1)) e.add({-ks[i].second, -ks[j].second, vb});
            }
        }
    }
}

bool prove_at(Ctx& cx, const FormP& goal, int depth) {
    if (goal->kind == K::True) return true;
    if (goal->kind == K::False) return false;
    std::string memo_key = std::to_string(depth) + "#" + nf_key(goal);
    if (auto it = cx.memo.find(memo_key); it != cx.memo.end()) return it->second;
    cx.memo[memo_key] = false; // guards against cyclic recursion

    Enc e;
    e.add({-e.encode(goal)});
    std::set<std::string> outer;
    outer_letters(goal, outer);
    std::map<std::string, FormP> outer_inv;
    collect_outer_invariant(cx.d, goal, cx.s.histories, outer_inv);
    for (int round = 0; round < 4; ++round) {
        size_t before = e.letters().size();
        size_t clauses_before = e.clauses().size();
        arithmetic_axioms(cx, e);
        if (cx.s.sampling) sampling_axioms(cx, e);
        if (cx.s.neg_order || cx.s.test_pvalue) neg_axioms(cx, e);
        if (cx.s.combination) combination_axioms(cx, e);
        if (cx.s.knowledge) knowledge_axioms(cx, e, outer, outer_inv, depth);
        if (e.letters().size() == before && e.clauses().size() == clauses_before) break;
        if (e.letters().size() > 2000) break;
    }
    bool proved = !Sat(e.nvars(), e.clauses()).satisfiable();
    cx.memo[memo_key] = proved;
    return proved;
}

} // namespace

bool prove(const Decls& d, const FormP& goal, const SchemaSet& s) {
    Ctx cx{d, s, {}};
    return prove_at(cx, normalize(d, goal), 0);
}

} // namespace bhl
