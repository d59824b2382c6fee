#include "bhl/proof.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <memory>
#include <sstream>

namespace bhl {

using json = nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) fail(Error::Kind::Io, "cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

[[noreturn]] void script_error(const std::string& msg) { fail(Error::Kind::Syntax, "proof script: " + msg); }

std::string str_field(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_string()) script_error(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

ProofNode parse_node(const json& j, const ProofScript& s) {
    if (!j.is_object()) script_error("a proof node must be an object");
    if (!j.contains("rule")) script_error("a proof node needs a 'rule'");
    static const std::set<std::string> known{"rule", "lemma", "pre", "prog", "post", "conclusion",
                                             "params", "premises", "side_conditions", "note"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) script_error("unknown field '" + k + "' in a proof node");
    ProofNode n;
    n.rule = str_field(j, "rule");
    if (j.contains("lemma")) n.lemma = str_field(j, "lemma");
    auto judgment_fields = [&](const json& o) {
        if (o.contains("pre")) n.pre = parse_formula(str_field(o, "pre"), s.decls);
        if (o.contains("post")) n.post = parse_formula(str_field(o, "post"), s.decls);
        if (o.contains("prog")) {
            std::string text = str_field(o, "prog");
            if (text == "@program") {
                if (!s.program) script_error("'@program' used but the declarations have no program");
                n.prog = s.program;
            } else {
                n.prog = parse_program(text, s.decls);
            }
        }
    };
    judgment_fields(j);
    if (j.contains("conclusion")) judgment_fields(j["conclusion"]);
    if (j.contains("params")) {
        if (!j["params"].is_object()) script_error("'params' must be an object");
        for (const auto& [k, v] : j["params"].items()) {
            if (!v.is_string()) script_error("parameter '" + k + "' must be a string");
            n.params[k] = v.get<std::string>();
        }
    }
    if (j.contains("premises"))
        for (const auto& p : j["premises"]) n.premises.push_back(parse_node(p, s));
    if (j.contains("side_conditions")) {
        for (const auto& sc : j["side_conditions"]) {
            SideCondition c;
            if (sc.is_string()) {
                c.discharge = Directive::parse(sc.get<std::string>());
            } else {
                if (sc.contains("formula")) c.formula = parse_formula(str_field(sc, "formula"), s.decls);
                if (sc.contains("discharge")) c.discharge = Directive::parse(str_field(sc, "discharge"));
            }
            n.side.push_back(std::move(c));
        }
    }
    return n;
}

} // namespace

ProofScript parse_proof_script(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        script_error(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) script_error("the document must be a JSON object");
    ProofScript s;
    try {
        if (j.contains("declarations")) {
            Source src = parse_source(slurp(base_dir / str_field(j, "declarations")));
            s.decls = std::move(src.decls);
            s.program = src.program;
        }
        if (j.contains("header")) parse_header_into(str_field(j, "header"), s.decls);
        if (j.contains("program")) {
            s.program = parse_program(str_field(j, "program"), s.decls);
            register_histories(s.program, s.decls);
        }
        if (j.contains("definitions"))
            for (const auto& [k, v] : j["definitions"].items()) s.decls.macros[k] = parse_formula(v.get<std::string>(), s.decls);
        if (j.contains("scenarios"))
            for (const auto& [k, v] : j["scenarios"].items()) s.scenarios[k] = base_dir / v.get<std::string>();
        if (!j.contains("proof")) script_error("missing 'proof'");
        s.root = parse_node(j["proof"], s);
    } catch (const json::exception& e) {
        script_error(e.what());
    }
    return s;
}

ProofScript load_proof_script(const std::filesystem::path& file) {
    ProofScript s = parse_proof_script(slurp(file), file.parent_path());
    s.origin = file;
    return s;
}

CheckReport check_proof(const ProofScript& s, const CheckOptions& opt) {
    // Models are built lazily, once per scenario id.
    std::map<std::string, std::unique_ptr<Model>> cache;
    std::map<std::string, std::filesystem::path> paths = s.scenarios;
    std::string fallback;
    if (opt.scenario) {
        Scenario sc = load_scenario(*opt.scenario);
        paths[sc.name] = *opt.scenario;
        fallback = sc.name;
    } else if (paths.size() == 1) {
        fallback = paths.begin()->first;
    }
    ScenarioResolver resolve = [&](const std::string& id) -> const Model* {
        std::string key = id.empty() ? fallback : id;
        // An id the script does not bind falls back only to a scenario given explicitly.
        if (!paths.count(key) && opt.scenario) key = fallback;
        if (key.empty() || !paths.count(key)) return nullptr;
        auto& slot = cache[key];
        if (!slot) {
            Scenario sc = load_scenario(paths[key]);
            RunOptions ro = opt.run;
            ro.mode = sc.mode;
            slot = std::make_unique<Model>(build_model(sc, ro));
        }
        return slot.get();
    };
    return check_proof(s.decls, s.root, resolve);
}

} // namespace bhl
