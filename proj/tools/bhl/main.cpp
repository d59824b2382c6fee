// bhl: execute programs, compute p-values, generate weakest preconditions and
// verification conditions, model-check formulas and judgments, and check proofs.

#include "commands.hpp"

#include "bhl/error.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

using namespace bhl;
using namespace bhl::cli;

namespace {

const char* kind_name(Error::Kind k) {
    switch (k) {
    case Error::Kind::Syntax: return "syntax";
    case Error::Kind::Type: return "type";
    case Error::Kind::Eval: return "evaluation";
    case Error::Kind::Budget: return "budget";
    case Error::Kind::Proof: return "proof";
    case Error::Kind::Io: return "io";
    case Error::Kind::Usage: return "usage";
    }
    return "error";
}

std::int64_t default_budget() {
    if (const char* env = std::getenv("BHL_BUDGET")) {
        try {
            size_t pos = 0;
            long long v = std::stoll(env, &pos);
            if (pos == std::string(env).size() && v > 0) return v;
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring BHL_BUDGET='" << env << "' (not a positive integer)\n";
    }
    return 1000000;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Belief Hoare Logic toolkit: run, pvalue, wp, vc, model-check, check-proof, examples"};
    app.require_subcommand(1);

    Globals g;
    g.budget = default_budget();
    std::string mode, format = "text";
    std::uint64_t seed = 0;
    int int_bound = 0;
    app.add_option("--budget", g.budget, "Step budget for executions (default: $BHL_BUDGET or 1000000)")
        ->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "Seed for simulated p-values (overrides the declared seeds)");
    app.add_option("--interleavings", mode, "Scheduling of parallel composition")
        ->check(CLI::IsMember({"canonical", "all"}));
    auto* ib_opt = app.add_option("--int-bound", int_bound, "Range bound for quantified integer variables")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
    app.add_flag("--trace", g.trace, "Include per-state traces of executions");

    RunArgs run;
    auto* c_run = app.add_subcommand("run", "Execute a program from a scenario's initial worlds");
    c_run->add_option("file", run.file, "Scenario (.scn) or program (.bhp) file")->required();
    c_run->add_option("--scenario", run.scenario, "Scenario supplying the initial worlds for a .bhp program");

    PValueArgs pv;
    auto* c_pv = app.add_subcommand("pvalue", "Compute the p-value of a test on CSV datasets");
    c_pv->add_option("--test", pv.test, "Test id (built-in: ztest2)");
    c_pv->add_option("--decl", pv.decl, "Declarations file defining the test");
    c_pv->add_option("--data", pv.data, "Comma-separated CSV files, one per dataset argument")
        ->delimiter(',')
        ->required();
    c_pv->add_option("--sigma", pv.sigma, "Known standard deviation for the built-in Z test");
    c_pv->add_option("--tail", pv.tail, "Tail of the built-in Z test")->check(CLI::IsMember({"two", "upper", "lower"}));

    WpArgs wp;
    auto add_program_opts = [&](CLI::App* c) {
        c->add_option("file", wp.file, "Declarations/program file (.bhp)")->required();
        c->add_option("--prog", wp.prog, "Program text (instead of the file's program)");
        c->add_option("--pre", wp.pre, "Precondition (default: true)");
        c->add_option("--post", wp.post, "Postcondition")->required();
        c->add_option("--scenario", wp.scenario, "Check each obligation on this scenario");
        c->add_option("--schema", wp.schemas, "Try to prove each obligation with these schema families")
            ->delimiter(',');
    };
    auto* c_wp = app.add_subcommand("wp", "Weakest precondition of a loop-free program");
    add_program_opts(c_wp);
    c_wp->add_flag("--vc", wp.vc, "Print verification conditions instead");
    auto* c_vc = app.add_subcommand("vc", "Verification conditions of a program with loop invariants");
    add_program_opts(c_vc);

    ModelCheckArgs mc;
    auto* c_mc = app.add_subcommand("model-check", "Check a formula or a judgment on a scenario");
    c_mc->add_option("scenario", mc.scenario, "Scenario file (.scn)")->required();
    c_mc->add_option("--formula", mc.formula, "Formula to check for validity");
    c_mc->add_option("--pre", mc.pre, "Precondition of a judgment");
    c_mc->add_option("--post", mc.post, "Postcondition of a judgment");
    c_mc->add_option("--prog", mc.prog, "Program of the judgment (default: the scenario's)");

    CheckProofArgs cp;
    auto* c_cp = app.add_subcommand("check-proof", "Check a proof script (.bhl)");
    c_cp->add_option("file", cp.file, "Proof script")->required();
    c_cp->add_option("--scenario", cp.scenario, "Scenario for scenario(...) discharges; also the default");

    std::string out_dir = "examples";
    bool list_only = false;
    auto* c_ex = app.add_subcommand("examples", "Write the bundled example corpus to a directory");
    c_ex->add_option("--out", out_dir, "Target directory (default: examples)");
    c_ex->add_flag("--list", list_only, "Only list the bundled files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    if (*seed_opt) g.seed = seed;
    if (*ib_opt) g.int_bound = int_bound;
    if (!mode.empty()) {
        g.mode_given = true;
        g.mode = mode == "all" ? Interleaving::All : Interleaving::Canonical;
    }
    g.json = format == "json";

    try {
        if (*c_run) return cmd_run(g, run, std::cout);
        if (*c_pv) return cmd_pvalue(g, pv, std::cout);
        if (*c_wp) return cmd_wp(g, wp, std::cout);
        if (*c_vc) return cmd_vc(g, wp, std::cout);
        if (*c_mc) return cmd_model_check(g, mc, std::cout);
        if (*c_cp) return cmd_check_proof(g, cp, std::cout);
        if (*c_ex) return cmd_examples(g, out_dir, list_only, std::cout);
    } catch (const Error& e) {
        std::cerr << "error (" << kind_name(e.kind()) << "): " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
