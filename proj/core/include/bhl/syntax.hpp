#pragma once

#include "bhl/error.hpp"
#include "bhl/value.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace bhl {

enum class Cmp { Eq, Ne, Lt, Le, Gt, Ge };
const char* cmp_str(Cmp c);
bool cmp_apply(Cmp c, double a, double b); // with kTol

enum class Tail { Two, Upper, Lower };
const char* tail_str(Tail t);

// ---------------------------------------------------------------- terms

struct Term;
using TermP = std::shared_ptr<const Term>;

// Var covers program, invisible, int and history variables.  History
// variables are named h[<dataset-ref>,<test>].  Dataset references are Vars
// or "tuple" applications of dataset references.
struct Term {
    enum class Kind { Var, Const, App, TestApp };
    Kind kind = Kind::Var;
    std::string name;  // variable name, function symbol or test id
    Value value;       // Const
    std::vector<TermP> args; // App arguments; TestApp: {dataset ref}
};

TermP mk_var(std::string name);
TermP mk_const(Value v);
TermP mk_int(std::int64_t i);
TermP mk_real(double r);
TermP mk_app(std::string fn, std::vector<TermP> args);
TermP mk_tuple(std::vector<TermP> xs);
TermP mk_test(std::string test, TermP ref);

bool is_hist_name(const std::string& name);
std::string hist_name(const TermP& ref, const std::string& test);
bool term_equal(const TermP& a, const TermP& b);
void term_vars(const TermP& t, std::set<std::string>& out);

// ---------------------------------------------------------------- formulas

struct Formula;
using FormP = std::shared_ptr<const Formula>;
using TestPair = std::pair<TermP, std::string>; // (dataset ref, test id)

struct Formula {
    enum class Kind {
        True, False,
        Rel,      // terms: lhs, rhs; op
        Sampled,  // terms: ref, population, size
        Followed, // terms: ref, population
        Neg,      // terms: ref, eps; op; name = test
        Not, And, Or, Implies, Iff,
        Know,
        Forall, Exists, // name = int var
        // statistical sugar
        Belief,   // terms: ref, eps; op; name = test; subs[0] = hypothesis; pairs = kappa override if has_kappa
        Kappa,    // pairs
        Compds,   // terms: ref; name = test
        Hyp,      // name = test; hyp = which
    };
    enum class HypKind { Upper, Lower, Alt, Null };

    Kind kind = Kind::True;
    Cmp op = Cmp::Eq;
    std::vector<TermP> terms;
    std::vector<FormP> subs;
    std::string name;
    std::vector<TestPair> pairs;
    bool has_kappa = false;
    HypKind hyp = HypKind::Alt;
};

FormP f_true();
FormP f_false();
FormP f_rel(Cmp op, TermP a, TermP b);
FormP f_not(FormP a);
FormP f_and(std::vector<FormP> xs);
FormP f_and(FormP a, FormP b);
FormP f_or(std::vector<FormP> xs);
FormP f_or(FormP a, FormP b);
FormP f_implies(FormP a, FormP b);
FormP f_iff(FormP a, FormP b);
FormP f_know(FormP a);
FormP f_poss(FormP a); // not K not
FormP f_forall(std::string v, FormP body);
FormP f_exists(std::string v, FormP body);
FormP f_sampled(TermP ref, TermP pop, TermP n);
FormP f_followed(TermP ref, TermP pop);
FormP f_neg(Cmp op, TermP ref, std::string test, TermP eps);
FormP f_belief(Cmp op, TermP eps, TermP ref, std::string test, FormP phi);
FormP f_belief_k(Cmp op, TermP eps, TermP ref, std::string test, FormP phi, std::vector<TestPair> kappa);
FormP f_kappa(std::vector<TestPair> s);
FormP f_compds(TermP ref, std::string test);
FormP f_hyp(Formula::HypKind k, std::string test);

bool formula_equal(const FormP& a, const FormP& b);

// ---------------------------------------------------------------- commands

struct Command;
using CmdP = std::shared_ptr<const Command>;

struct Command {
    enum class Kind { Skip, Assign, Test, Seq, Par, If, While, Assert };
    Kind kind = Kind::Skip;
    std::string var;  // Assign / Test target
    TermP expr;       // Assign rhs, If/While guard
    std::string test; // Test
    TermP ref;        // Test dataset reference
    CmdP c1, c2;
    FormP inv; // While invariant (optional), Assert formula
    Span span;
};

CmdP c_skip();
CmdP c_assign(std::string v, TermP e);
CmdP c_test(std::string v, std::string test, TermP ref);
CmdP c_seq(CmdP a, CmdP b);
CmdP c_par(CmdP a, CmdP b);
CmdP c_if(TermP g, CmdP a, CmdP b);
CmdP c_while(TermP g, CmdP body, FormP inv = nullptr);
CmdP c_assert(FormP f);

bool command_equal(const CmdP& a, const CmdP& b);
CmdP strip_asserts(const CmdP& c);

// upd(C) and Var(C)
std::set<std::string> updated_vars(const CmdP& c);
std::set<std::string> command_vars(const CmdP& c);
bool contains_while(const CmdP& c);

// ---------------------------------------------------------------- declarations

struct TestDecl {
    enum class Kind { Z, LR, BF, Or, And };
    std::string id;
    Kind kind = Kind::Z;
    Tail tail = Tail::Two;
    double sigma = 1.0;            // Z: known standard deviation
    std::vector<TermP> pops;       // population term per argument position
    FormP upper, lower, alt;       // alternative-hypothesis parts
    Dist p, q;                     // LR: candidate densities (q is the null's)
    double bf_sigma2 = 1.0;        // BF: likelihood variance
    double null_mu0 = 0.0, null_tau2 = 1.0, alt_mu0 = 1.0, alt_tau2 = 1.0; // BF priors
    int mc_samples = 20000;
    std::uint64_t seed = 1;
    std::string c1, c2; // combined components

    bool combined() const { return kind == Kind::Or || kind == Kind::And; }
    int arity() const;
};

struct Decls {
    std::map<std::string, Type> obs;
    std::map<std::string, Type> inv;
    std::map<std::string, TestDecl> tests;
    std::vector<std::string> test_order;
    std::vector<TestPair> histories; // the finite universe of history variables
    std::map<std::string, FormP> macros;
    int int_bound = 8;

    bool is_obs(const std::string& v) const { return obs.count(v) > 0; }
    bool is_inv(const std::string& v) const { return inv.count(v) > 0 || is_hist_name(v); }
    bool declared(const std::string& v) const { return is_obs(v) || is_inv(v); }
    std::optional<Type> type_of(const std::string& v) const;
    const TestDecl& test(const std::string& id) const;
    bool has_test(const std::string& id) const { return tests.count(id) > 0; }
    void add_history(const TermP& ref, const std::string& test);
    bool has_history(const std::string& hname) const;
    std::vector<std::string> history_names() const;
};

struct Source {
    Decls decls;
    CmdP program; // may be null when the file is header-only
};

// ---------------------------------------------------------------- parsing / printing

Source parse_source(const std::string& text);                 // .bhp
CmdP parse_program(const std::string& text, const Decls& d);
FormP parse_formula(const std::string& text, const Decls& d);
TermP parse_term(const std::string& text, const Decls& d);
Type parse_type(const std::string& text);
void parse_header_into(const std::string& text, Decls& d);   // declarations only
// Add the history variable of every test call in `c` to the declared universe.
void register_histories(const CmdP& c, Decls& d);

std::string print_term(const TermP& t);
std::string print_formula(const FormP& f);
std::string print_command(const CmdP& c); // single line

// ---------------------------------------------------------------- well-formedness

// Type of a term under the declarations (int vars are typed int).
Type infer_type(const TermP& t, const Decls& d, const std::set<std::string>& intvars = {});
void check_program(const CmdP& c, const Decls& d);   // observability, types, Par restriction
void check_formula(const FormP& f, const Decls& d);  // quantifier placement, declared names

// guard expression (boolean term) as an assertion
FormP guard_formula(const TermP& e);

// ---------------------------------------------------------------- sugar

std::vector<TestPair> list_tests(const Decls& d, const TermP& ref, const std::string& test);
FormP kappa_formula(const Decls& d, const std::vector<TestPair>& s);
FormP compds_formula(const Decls& d, const TermP& ref, const std::string& test);
FormP hypothesis(const Decls& d, const std::string& test, Formula::HypKind k);
FormP expand_sugar(const Decls& d, const FormP& f);

std::set<std::string> free_vars(const Decls& d, const FormP& f); // after sugar expansion
bool has_sugar(const FormP& f);

// Simultaneous substitution on the sugar-expanded formula.
using Subst = std::map<std::string, TermP>;
TermP subst_term(const TermP& t, const Subst& s);
FormP subst(const Decls& d, const FormP& f, const Subst& s);

} // namespace bhl
