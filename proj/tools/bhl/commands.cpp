#include "commands.hpp"

#include "bhl/kripke.hpp"
#include "bhl/proof.hpp"
#include "bhl/stats.hpp"
#include "bhl/wp.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace bhl::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    if (!in) fail(Error::Kind::Io, "cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void adjust(const Globals& g, Decls& d) {
    if (g.int_bound) d.int_bound = *g.int_bound;
    if (g.seed)
        for (auto& [id, t] : d.tests) t.seed = *g.seed;
}

Source load_source(const Globals& g, const std::string& file) {
    Source s = parse_source(slurp(file));
    adjust(g, s.decls);
    return s;
}

Scenario load_scn(const Globals& g, const std::string& file) {
    Scenario s = load_scenario(file);
    adjust(g, s.decls);
    if (g.mode_given) s.mode = g.mode;
    return s;
}

RunOptions run_options(const Globals& g, Interleaving mode) { return RunOptions{g.budget, mode}; }

std::string show(const Value& v) {
    if (v.kind() == Value::Kind::Real) return format_sig(v.as_real());
    if (v.kind() == Value::Kind::List || v.kind() == Value::Kind::Tuple) {
        bool list = v.kind() == Value::Kind::List;
        std::string s = list ? "[" : "(";
        for (size_t i = 0; i < v.elems().size(); ++i) s += (i ? ", " : "") + show(v.elems()[i]);
        return s + (list ? "]" : ")");
    }
    return v.str();
}

json memory_json(const Memory& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = show(v);
    return j;
}

std::string memory_text(const Memory& m) {
    std::string s;
    for (const auto& [k, v] : m) s += (s.empty() ? "" : ", ") + k + " = " + show(v);
    return s;
}

void print_json(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

} // namespace

// ---------------------------------------------------------------- run

int cmd_run(const Globals& g, const RunArgs& a, std::ostream& out) {
    Scenario sc;
    if (fs::path(a.file).extension() == ".scn") {
        sc = load_scn(g, a.file);
    } else {
        if (a.scenario.empty()) fail(Error::Kind::Usage, "run: a program file needs --scenario for its initial worlds");
        sc = load_scn(g, a.scenario);
        Source src = load_source(g, a.file);
        if (!src.program) fail(Error::Kind::Usage, "run: " + a.file + " has no program");
        sc.program = src.program;
        register_histories(sc.program, sc.decls);
    }
    if (!sc.program) fail(Error::Kind::Usage, "run: no program to execute");
    check_program(sc.program, sc.decls);
    Scenario init = sc;
    init.run_program = false;
    Model m = build_model(init);
    RunOptions opt = run_options(g, g.mode_given ? g.mode : Interleaving::Canonical);
    json worlds = json::array();
    std::ostringstream text;
    bool any_exhausted = false;
    for (size_t i = 0; i < m.worlds.size(); ++i) {
        RunResult r = run(sc.program, m.worlds[i], sc.decls, opt);
        any_exhausted = any_exhausted || r.exhausted;
        json jw{{"initial", memory_json(m.worlds[i].last().mem)}, {"exhausted", r.exhausted}, {"steps", r.steps}};
        json finals = json::array();
        text << "world " << i << ": " << memory_text(m.worlds[i].last().mem) << "\n";
        for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
        for (size_t k = 0; k < r.finals.size(); ++k) {
            const World& f = r.finals[k];
            json jf{{"memory", memory_json(f.last().mem)}};
            text << "  final " << k << ": " << memory_text(f.last().mem) << "\n";
            if (g.trace) {
                std::string t = trace_dump(f, sc.decls);
                jf["trace"] = t;
                std::istringstream lines(t);
                for (std::string line; std::getline(lines, line);) text << "    " << line << "\n";
            }
            finals.push_back(jf);
        }
        if (r.exhausted) text << "  exhausted: step budget " << g.budget << " reached; finals are partial\n";
        jw["finals"] = finals;
        worlds.push_back(jw);
    }
    if (g.json) {
        print_json(out, json{{"command", "run"},
                             {"interleavings", opt.mode == Interleaving::All ? "all" : "canonical"},
                             {"worlds", worlds}});
    } else {
        out << text.str();
    }
    return any_exhausted ? kNegative : kOk;
}

// ---------------------------------------------------------------- pvalue

int cmd_pvalue(const Globals& g, const PValueArgs& a, std::ostream& out) {
    Decls d;
    if (!a.decl.empty()) {
        d = load_source(g, a.decl).decls;
    } else {
        if (a.test != "ztest2")
            fail(Error::Kind::Usage, "pvalue: without --decl only the built-in test 'ztest2' is available");
        if (a.tail != "two" && a.tail != "upper" && a.tail != "lower")
            fail(Error::Kind::Usage, "pvalue: --tail must be two, upper or lower");
        std::ostringstream hdr;
        hdr.precision(17);
        hdr << "test ztest2 = Z(" << a.tail << ", sigma = " << a.sigma << ");";
        parse_header_into(hdr.str(), d);
        adjust(g, d);
    }
    const TestDecl& t = d.test(a.test);
    std::vector<Value> leaves;
    for (const auto& f : a.data) leaves.push_back(read_csv_dataset(f));
    // Shape the datasets like the test's argument: pairs for Z, a single list
    // otherwise, and one argument per component for combinations.
    size_t next = 0;
    std::function<Value(const TestDecl&)> shape = [&](const TestDecl& td) -> Value {
        if (td.combined()) {
            Value x = shape(d.test(td.c1));
            Value y = shape(d.test(td.c2));
            return Value::tuple({x, y});
        }
        int n = td.arity();
        if (next + n > leaves.size())
            fail(Error::Kind::Usage, "pvalue: test '" + a.test + "' needs more datasets than --data provides");
        if (n == 1) return leaves[next++];
        std::vector<Value> xs(leaves.begin() + next, leaves.begin() + next + n);
        next += n;
        return Value::tuple(xs);
    };
    Value data = shape(t);
    if (next != leaves.size()) fail(Error::Kind::Usage, "pvalue: too many datasets for test '" + a.test + "'");
    stats::PValue p = stats::p_value(d, a.test, data);
    std::optional<double> statistic;
    if (t.kind == TestDecl::Kind::Z)
        statistic = stats::z_statistic(data.elems()[0].as_reals(), data.elems()[1].as_reals(), t.sigma);
    if (g.json) {
        json j{{"command", "pvalue"}, {"test", a.test}, {"tail", tail_str(t.tail)}};
        if (statistic) j["statistic"] = format_sig(*statistic);
        j["p_value"] = format_sig(p.value);
        if (p.mc_stderr) j["mc_stderr"] = format_sig(*p.mc_stderr);
        print_json(out, j);
    } else {
        if (statistic) out << "statistic: " << format_sig(*statistic) << "\n";
        out << "p-value: " << format_sig(p.value);
        if (p.mc_stderr) out << "  (simulated, stderr " << format_sig(*p.mc_stderr) << ")";
        out << "\n";
    }
    return kOk;
}

// ---------------------------------------------------------------- wp / vc

namespace {

struct ProgramInput {
    Decls decls;
    CmdP program;
};

ProgramInput program_input(const Globals& g, const WpArgs& a) {
    Source src = load_source(g, a.file);
    ProgramInput in{src.decls, src.program};
    if (!a.prog.empty()) {
        in.program = parse_program(a.prog, in.decls);
        register_histories(in.program, in.decls);
    }
    if (!in.program) fail(Error::Kind::Usage, a.file + " has no program; pass --prog");
    check_program(in.program, in.decls);
    return in;
}

struct Discharged {
    std::string status;
    std::string detail;
};

} // namespace

int cmd_wp(const Globals& g, const WpArgs& a, std::ostream& out) {
    if (a.vc) return cmd_vc(g, a, out);
    ProgramInput in = program_input(g, a);
    FormP post = parse_formula(a.post, in.decls);
    FormP w = weakest_pre(in.decls, in.program, post);
    if (g.json)
        print_json(out, json{{"command", "wp"}, {"post", print_formula(post)}, {"wp", print_formula(w)}});
    else
        out << print_formula(w) << "\n";
    return kOk;
}

int cmd_vc(const Globals& g, const WpArgs& a, std::ostream& out) {
    ProgramInput in = program_input(g, a);
    FormP pre = parse_formula(a.pre, in.decls);
    FormP post = parse_formula(a.post, in.decls);
    VCSet vcs = vc_gen(in.decls, in.program, pre, post);

    std::optional<Model> model;
    if (!a.scenario.empty()) {
        Scenario sc = load_scn(g, a.scenario);
        model = build_model(sc, run_options(g, sc.mode));
    }
    std::optional<SchemaSet> schemas;
    if (!a.schemas.empty()) schemas = SchemaSet::from_names(a.schemas);

    bool refuted = false;
    json obs = json::array();
    std::ostringstream text;
    for (size_t i = 0; i < vcs.obligations.size(); ++i) {
        const Obligation& o = vcs.obligations[i];
        json jo{{"name", o.name}, {"formula", print_formula(o.formula)}};
        text << i + 1 << ". " << o.name << ": " << print_formula(o.formula) << "\n";
        if (schemas || model) {
            std::string status = "open", detail;
            if (schemas && prove(in.decls, o.formula, *schemas)) status = "proved";
            if (status == "open" && model) {
                Verdict v = check_valid(*model, o.formula);
                status = v.ok ? "holds-in-scenario" : "refuted";
                if (!v.ok) {
                    refuted = true;
                    if (v.cex) detail = v.cex->description;
                }
            }
            jo["status"] = status;
            text << "   " << status << "\n";
            if (!detail.empty()) {
                jo["counterexample"] = detail;
                text << "   " << detail << "\n";
            }
        }
        obs.push_back(jo);
    }
    if (g.json)
        print_json(out, json{{"command", "vc"}, {"residual", print_formula(vcs.residual)}, {"obligations", obs}});
    else
        out << text.str();
    return refuted ? kNegative : kOk;
}

// ---------------------------------------------------------------- model-check

int cmd_model_check(const Globals& g, const ModelCheckArgs& a, std::ostream& out) {
    Scenario sc = load_scn(g, a.scenario);
    bool judgment = !a.pre.empty() || !a.post.empty();
    if (judgment == !a.formula.empty())
        fail(Error::Kind::Usage, "model-check: give either --formula or --pre/--post");
    Verdict v;
    json j{{"command", "model-check"}, {"scenario", sc.name}};
    std::vector<std::string> warnings;
    size_t worlds = 0;
    if (!judgment) {
        Model m = build_model(sc, run_options(g, sc.mode));
        FormP f = parse_formula(a.formula, m.decls);
        v = check_valid(m, f);
        warnings = null_world_warnings(m, f);
        for (const auto& w : m.warnings) warnings.push_back(w);
        if (m.exhausted) warnings.push_back("step budget exhausted while closing the model; it is partial");
        worlds = m.worlds.size();
        j["formula"] = print_formula(f);
    } else {
        CmdP prog = sc.program;
        if (!a.prog.empty()) {
            prog = parse_program(a.prog, sc.decls);
            register_histories(prog, sc.decls);
        }
        if (!prog) fail(Error::Kind::Usage, "model-check: the scenario has no program; pass --prog");
        check_program(prog, sc.decls);
        Scenario init = sc;
        init.run_program = false;
        Model m = build_model(init);
        FormP pre = parse_formula(a.pre.empty() ? "true" : a.pre, m.decls);
        FormP post = parse_formula(a.post.empty() ? "true" : a.post, m.decls);
        v = judgment_holds(m, pre, prog, post, run_options(g, sc.mode));
        worlds = m.worlds.size();
        j["pre"] = print_formula(pre);
        j["prog"] = print_command(prog);
        j["post"] = print_formula(post);
    }
    for (const auto& w : v.warnings) warnings.push_back(w);
    j["worlds"] = worlds;
    j["verdict"] = v.ok ? "Holds" : "Counterexample";
    if (v.cex) j["counterexample"] = {{"world", v.cex->world}, {"description", v.cex->description}};
    j["warnings"] = warnings;
    if (g.json) {
        print_json(out, j);
    } else {
        out << (v.ok ? "Holds" : "Counterexample") << " (" << worlds << " worlds)\n";
        if (v.cex) out << v.cex->description << "\n";
        for (const auto& w : warnings) out << "warning: " << w << "\n";
    }
    return v.ok ? kOk : kNegative;
}

// ---------------------------------------------------------------- check-proof

int cmd_check_proof(const Globals& g, const CheckProofArgs& a, std::ostream& out) {
    ProofScript s = load_proof_script(a.file);
    adjust(g, s.decls);
    CheckOptions opt;
    opt.run = RunOptions{g.budget, Interleaving::All};
    if (!a.scenario.empty()) opt.scenario = a.scenario;
    CheckReport r = check_proof(s, opt);
    out << (g.json ? r.json() + "\n" : r.text());
    return r.accepted ? kOk : kNegative;
}

// ---------------------------------------------------------------- examples

int cmd_examples(const Globals& g, const std::string& dir, bool list_only, std::ostream& out) {
    const auto& files = bundled_corpus();
    json names = json::array();
    if (!list_only) fs::create_directories(dir);
    for (const auto& [name, contents] : files) {
        names.push_back(name);
        if (list_only) continue;
        fs::path p = fs::path(dir) / name;
        std::ofstream f(p, std::ios::binary);
        if (!f) fail(Error::Kind::Io, "cannot write " + p.string());
        f << contents;
    }
    if (g.json) {
        print_json(out, json{{"command", "examples"}, {"directory", list_only ? "" : dir}, {"files", names}});
    } else {
        for (const auto& [name, contents] : files) out << (list_only ? name : (fs::path(dir) / name).string()) << "\n";
    }
    return kOk;
}

const std::vector<std::pair<std::string, std::string>>& bundled_corpus() {
    static const std::vector<std::pair<std::string, std::string>> files{
#include "corpus_data.inc"
    };
    return files;
}

} // namespace bhl::cli
