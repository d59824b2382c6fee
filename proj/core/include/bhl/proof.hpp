#pragma once

#include "bhl/kripke.hpp"
#include "bhl/syntax.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bhl {

// ---------------------------------------------------------------- normal forms

// Sugar-free negation normal form with n-ary, sorted, duplicate-free
// conjunctions and disjunctions, canonical relational atoms (only `=` and
// `<=` remain, constants moved to the right and folded) and canonical
// p-value atoms (`=`, `<=`, `<` only).  Two formulas are treated as the
// same assertion iff their normal forms print identically.
FormP normalize(const Decls& d, const FormP& f);
std::string nf_key(const FormP& nf);
bool same_assertion(const Decls& d, const FormP& a, const FormP& b);

// ---------------------------------------------------------------- schema reasoning

// Families of valid axiom schemata the decision procedure may instantiate.
// Propositional reasoning and linear-order facts about constants are always on.
struct SchemaSet {
    bool knowledge = false;   // S5 for K: T, normality, 4/5, class-invariant case split
    bool neg_order = false;   // monotonicity of p-value atoms in the bound
    bool histories = false;   // history atoms are known (test histories are observable)
    bool test_pvalue = false; // the test program returns the p-value on its own data
    bool combination = false; // p-value bounds of disjunctive / conjunctive combinations
    bool sampling = false;    // sampled data follows its population

    static SchemaSet all();
    // Names: prop, K, S5, SBk, SB4, SB5, SB-<, SBnu, BHk, BHT, BHT-or, BHT-and,
    // Sampling, Tails, `*`/all.  Throws on an unknown name.
    static SchemaSet from_names(const std::vector<std::string>& names);
    std::string str() const;
};

// true when `goal` is established by propositional reasoning over the enabled
// schema instances (sound, incomplete).
bool prove(const Decls& d, const FormP& goal, const SchemaSet& s);

// ---------------------------------------------------------------- proof trees

struct Judgment {
    FormP pre;
    CmdP prog;
    FormP post;
};

struct Directive {
    enum class Kind { Auto, Schema, Scenario, Assume };
    Kind kind = Kind::Auto;
    std::vector<std::string> schemas; // Schema (empty means plain propositional)
    std::string scenario;             // Scenario id (empty: the default scenario)

    static Directive parse(const std::string& text);
    std::string str() const;
};

struct SideCondition {
    FormP formula; // optional cross-check of the generated obligation
    Directive discharge;
};

struct ProofNode {
    std::string rule; // Skip UpdVar Hist Seq If Loop Conseq Par Two-HT Low-HT Up-HT Mult-or Mult-and Lemma
    std::string lemma;
    FormP pre, post; // optional when determined by the rule or the context
    CmdP prog;
    std::map<std::string, std::string> params; // derived-rule bindings in concrete syntax
    std::vector<ProofNode> premises;
    std::vector<SideCondition> side;
};

struct ProofScript {
    std::filesystem::path origin;
    Decls decls;
    CmdP program;                                       // body of the declarations file, if any
    std::map<std::string, std::filesystem::path> scenarios; // id -> scenario file
    ProofNode root;
};

// `.bhl` documents are JSON; relative paths resolve against `base_dir`.
ProofScript parse_proof_script(const std::string& text, const std::filesystem::path& base_dir = {});
ProofScript load_proof_script(const std::filesystem::path& file);

// A derived rule instance: its conclusion and the Hist/Conseq tree it stands for.
struct DerivedInstance {
    Judgment conclusion;
    ProofNode expansion;           // Conseq over Hist
    std::vector<FormP> obligations; // [pre-obligation, meaningfulness]
};
DerivedInstance apply_derived(const Decls& d, const std::string& rule, const CmdP& prog,
                              const std::map<std::string, std::string>& params);

// ---------------------------------------------------------------- reports

enum class ObStatus { Discharged, Assumed, Refuted, Failed };
const char* ob_status_str(ObStatus s);

struct ObligationResult {
    std::string path;
    std::string name;
    FormP formula;
    ObStatus status = ObStatus::Failed;
    std::string route;  // how it was (or was not) discharged
    std::string detail; // counterexample or failure explanation
};

struct CheckReport {
    bool accepted = false;
    std::string reason; // when rejected
    std::string path;   // node at which it was rejected
    std::optional<Judgment> conclusion;
    std::vector<ObligationResult> obligations;

    int count(ObStatus s) const;
    std::vector<std::string> assumed() const;
    std::vector<std::string> scenarios_checked() const;
    std::string text() const;
    std::string json() const;
};

// Resolves scenario ids used by `scenario(id)` directives to models.
using ScenarioResolver = std::function<const Model*(const std::string& id)>;

struct CheckOptions {
    RunOptions run{1000000, Interleaving::All};
    std::optional<std::filesystem::path> scenario; // extra scenario; also the default one
};

CheckReport check_proof(const Decls& d, const ProofNode& root, const ScenarioResolver& scenarios,
                        const std::optional<Judgment>& expected = std::nullopt);
CheckReport check_proof(const ProofScript& s, const CheckOptions& opt = {});

} // namespace bhl
