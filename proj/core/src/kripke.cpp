#include "bhl/kripke.hpp"

#include "bhl/stats.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
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

[[noreturn]] void scn_error(const std::string& msg) { fail(Error::Kind::Syntax, "scenario: " + msg); }

Value json_value(const json& j, const Type& t, const Decls& d, const std::filesystem::path& base, const std::string& what) {
    Value v;
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s.size() > 4 && s.substr(s.size() - 4) == ".csv") {
            v = read_csv_dataset(base / s);
        } else {
            TermP term = parse_term(s, d);
            if (term->kind != Term::Kind::Const) scn_error(what + ": '" + s + "' is not a constant");
            v = term->value;
        }
    } else if (j.is_boolean()) {
        v = Value::boolean(j.get<bool>());
    } else if (j.is_number_integer() && (t.kind == Type::Kind::Int || t.kind == Type::Kind::Nat)) {
        v = Value::integer(j.get<std::int64_t>());
    } else if (j.is_number()) {
        v = Value::real(j.get<double>());
    } else if (j.is_array()) {
        std::vector<Value> xs;
        if (t.kind == Type::Kind::List) {
            for (const auto& e : j) xs.push_back(json_value(e, t.args.at(0), d, base, what));
            v = Value::list(std::move(xs));
        } else if (t.kind == Type::Kind::Tuple && t.args.size() == j.size()) {
            for (size_t i = 0; i < j.size(); ++i) xs.push_back(json_value(j[i], t.args[i], d, base, what));
            v = Value::tuple(std::move(xs));
        } else {
            scn_error(what + ": an array does not fit type " + t.str());
        }
    } else {
        scn_error(what + ": unsupported value " + j.dump());
    }
    if (!value_has_type(v, t)) scn_error(what + ": value " + v.str() + " does not have type " + t.str());
    return v;
}

Type declared_type(const Decls& d, const std::string& v) {
    auto t = d.type_of(v);
    if (!t) scn_error("variable '" + v + "' is not declared");
    return *t;
}

std::vector<std::map<std::string, Value>> grid_points(const json& g, const Decls& d, const std::filesystem::path& base) {
    std::vector<std::map<std::string, Value>> points{{}};
    if (g.is_null()) return points;
    if (g.is_array()) {
        points.clear();
        for (const auto& pt : g) {
            std::map<std::string, Value> p;
            for (const auto& [k, v] : pt.items()) p[k] = json_value(v, declared_type(d, k), d, base, "grid." + k);
            points.push_back(std::move(p));
        }
        return points;
    }
    for (const auto& [k, vals] : g.items()) {
        if (!vals.is_array() || vals.empty()) scn_error("grid." + k + " must be a non-empty array");
        Type t = declared_type(d, k);
        std::vector<std::map<std::string, Value>> next;
        for (const auto& p : points)
            for (const auto& v : vals) {
                auto q = p;
                q[k] = json_value(v, t, d, base, "grid." + k);
                next.push_back(std::move(q));
            }
        points = std::move(next);
    }
    return points;
}

} // namespace

Value read_csv_dataset(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) fail(Error::Kind::Io, "cannot read dataset " + file.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            fail(Error::Kind::Io, file.string() + ": non-numeric row '" + line + "'");
        }
        first = false;
        if (!rows.empty() && row.size() != rows[0].size())
            fail(Error::Kind::Io, file.string() + ": rows have different numbers of columns");
        rows.push_back(std::move(row));
    }
    std::vector<Value> out;
    for (auto& r : rows) out.push_back(r.size() == 1 ? Value::real(r[0]) : Value::reals(r));
    return Value::list(std::move(out));
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        scn_error(std::string("malformed JSON: ") + e.what());
    }
    Scenario s;
    s.name = j.value("name", std::string("scenario"));
    if (j.contains("declarations")) {
        Source src = parse_source(slurp(base / j["declarations"].get<std::string>()));
        s.decls = std::move(src.decls);
        s.program = src.program;
    }
    std::string header;
    auto add_lines = [&](const char* key, const std::string& prefix) {
        if (!j.contains(key)) return;
        const json& v = j[key];
        if (v.is_string()) header += prefix + v.get<std::string>() + (prefix.empty() ? "\n" : ";\n");
        else
            for (const auto& line : v) header += prefix + line.get<std::string>() + (prefix.empty() ? "\n" : ";\n");
    };
    add_lines("header", "");
    add_lines("observables", "observable ");
    add_lines("invisibles", "invisible ");
    add_lines("tests", "test ");
    add_lines("histories", "history ");
    if (!header.empty()) parse_header_into(header, s.decls);
    if (j.contains("program")) s.program = parse_program(j["program"].get<std::string>(), s.decls);
    if (s.program) register_histories(s.program, s.decls);
    s.run_program = j.value("run_program", false);
    if (s.run_program && !s.program) scn_error("run_program is set but no program is given");
    std::string mode = j.value("interleavings", std::string("all"));
    if (mode != "all" && mode != "canonical") scn_error("interleavings must be 'all' or 'canonical'");
    s.mode = mode == "all" ? Interleaving::All : Interleaving::Canonical;
    if (j.contains("int_bound")) s.decls.int_bound = j["int_bound"].get<int>();

    auto points = grid_points(j.value("grid", json()), s.decls, base);
    json variants = j.value("datasets", json::array({json::object()}));
    if (variants.is_object()) variants = json::array({variants});
    if (variants.empty()) variants = json::array({json::object()});
    json init = j.value("init", json::object());
    json samplings = j.value("samplings", json::array());

    struct SamplingSpec {
        std::string var;
        TermP pop;
        std::optional<std::int64_t> n;
    };
    std::vector<SamplingSpec> specs;
    std::set<std::string> sampled;
    for (const auto& sp : samplings) {
        SamplingSpec x;
        x.var = sp.at("var").get<std::string>();
        if (!s.decls.is_obs(x.var)) scn_error("sampled variable '" + x.var + "' must be observable");
        x.pop = parse_term(sp.at("population").get<std::string>(), s.decls);
        if (sp.contains("n")) x.n = sp["n"].get<std::int64_t>();
        sampled.insert(x.var);
        specs.push_back(std::move(x));
    }

    for (const auto& point : points) {
        for (const auto& variant : variants) {
            Memory mem;
            for (const auto& [k, v] : point) mem[k] = v;
            for (const auto& [k, v] : init.items()) mem[k] = json_value(v, declared_type(s.decls, k), s.decls, base, "init." + k);
            std::map<std::string, Value> data;
            for (const auto& [k, v] : variant.items())
                data[k] = json_value(v, declared_type(s.decls, k), s.decls, base, "datasets." + k);
            for (const auto& [k, v] : data)
                if (!sampled.count(k)) mem[k] = v;
            World w = initial_world(std::move(mem), s.decls);
            for (const auto& sp : specs) {
                auto it = data.find(sp.var);
                if (it == data.end()) scn_error("sampling record for '" + sp.var + "' has no dataset value");
                auto st = std::make_shared<State>(w.last());
                st->mem[sp.var] = it->second;
                st->act = Action{};
                st->act.kind = Action::Kind::Sampling;
                st->act.var = sp.var;
                st->act.population = sp.pop;
                st->act.data = it->second;
                st->act.n = sp.n ? *sp.n
                                 : (it->second.kind() == Value::Kind::List ? static_cast<std::int64_t>(it->second.elems().size()) : 1);
                w = w.extended(st);
            }
            s.initial.push_back(std::move(w));
        }
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
    Scenario s = parse_scenario(slurp(file), file.parent_path());
    s.origin = file;
    return s;
}

// ---------------------------------------------------------------- models

int Model::find(const World& w) const {
    auto it = index.find(world_key(w));
    return it == index.end() ? -1 : it->second;
}

Model make_model(const Decls& d, std::vector<World> worlds) {
    Model m;
    m.decls = d;
    std::map<std::string, int> by_obs;
    for (auto& w : worlds) {
        std::string key = world_key(w);
        if (m.index.count(key)) continue;
        int i = static_cast<int>(m.worlds.size());
        m.index[key] = i;
        std::string ok = observation_key(w, d);
        auto [it, fresh] = by_obs.emplace(ok, static_cast<int>(m.classes.size()));
        if (fresh) m.classes.emplace_back();
        m.classes[it->second].push_back(i);
        m.cls.push_back(it->second);
        m.worlds.push_back(std::move(w));
    }
    return m;
}

std::vector<World> reachable_worlds(const CmdP& c, const std::vector<World>& from, const Decls& d,
                                    const RunOptions& opt, bool* exhausted) {
    std::vector<World> out;
    std::set<std::string> seen;
    std::int64_t steps = 0;
    if (exhausted) *exhausted = false;
    for (const auto& w0 : from) {
        std::vector<Config> stack{{c, w0}};
        while (!stack.empty()) {
            Config cur = std::move(stack.back());
            stack.pop_back();
            if (seen.insert(world_key(cur.world)).second) out.push_back(cur.world);
            if (!cur.cmd) continue;
            if (steps >= opt.budget) {
                if (exhausted) *exhausted = true;
                continue;
            }
            ++steps;
            auto next = step(cur, d);
            if (opt.mode == Interleaving::Canonical && next.size() > 1) next.resize(1);
            for (auto it = next.rbegin(); it != next.rend(); ++it) stack.push_back(std::move(*it));
        }
    }
    return out;
}

Model build_model(const Scenario& s, const RunOptions& opt) {
    std::vector<World> worlds = s.initial;
    bool exhausted = false;
    if (s.run_program && s.program) {
        RunOptions o = opt;
        o.mode = s.mode;
        auto more = reachable_worlds(s.program, s.initial, s.decls, o, &exhausted);
        worlds.insert(worlds.end(), more.begin(), more.end());
    }
    Model m = make_model(s.decls, std::move(worlds));
    m.exhausted = exhausted;
    if (exhausted) m.warnings.push_back("step budget exhausted while closing the model; it is a partial slice");
    return m;
}

// ---------------------------------------------------------------- satisfaction

namespace {

bool compare_values(Cmp op, const Value& a, const Value& b) {
    if (op == Cmp::Eq) return values_equal(a, b);
    if (op == Cmp::Ne) return !values_equal(a, b);
    if (!a.is_numeric() || !b.is_numeric())
        fail(Error::Kind::Eval, std::string("'") + cmp_str(op) + "' needs numbers, got " + a.str() + " and " + b.str());
    return cmp_apply(op, a.as_real(), b.as_real());
}

bool sampled_from(const World& w, const TermP& ref, const TermP& pop, const TermP* n, const Decls& d, const IntEnv& ints) {
    if (ref->kind != Term::Kind::Var) fail(Error::Kind::Eval, "sampling predicates need a single dataset variable");
    const Memory& cur = w.last().mem;
    Value now = eval_term(cur, ref, d, &ints);
    Value want_pop = eval_term(cur, pop, d, &ints);
    std::optional<std::int64_t> want_n;
    if (n) want_n = eval_term(cur, *n, d, &ints).as_int();
    for (const auto& s : w.states) {
        const Action& a = s->act;
        if (a.kind != Action::Kind::Sampling || a.var != ref->name) continue;
        if (!(a.data == now)) continue;
        if (want_n && a.n != *want_n) continue;
        if (values_equal(eval_term(s->mem, a.population, d), want_pop)) return true;
    }
    return false;
}

std::set<std::string> int_vars_of(const Decls& d, const FormP& core) {
    std::set<std::string> out;
    for (const auto& v : free_vars(d, core))
        if (!d.declared(v)) out.insert(v);
    return out;
}

// Enumerate interpretations of `vars` over [0, bound]; stop when fn returns false.
bool for_each_interp(const std::set<std::string>& vars, int bound, const std::function<bool(const IntEnv&)>& fn) {
    std::vector<std::string> vs(vars.begin(), vars.end());
    IntEnv env;
    for (const auto& v : vs) env[v] = 0;
    while (true) {
        if (!fn(env)) return false;
        size_t k = 0;
        for (; k < vs.size(); ++k) {
            if (env[vs[k]] < bound) {
                ++env[vs[k]];
                break;
            }
            env[vs[k]] = 0;
        }
        if (k == vs.size()) return true;
    }
}

} // namespace

bool Checker::holds(int world, const FormP& core, const IntEnv& ints) {
    IntEnv env = ints;
    return eval(world, has_sugar(core) ? expand_sugar(m_.decls, core) : core, env);
}

bool Checker::eval(int world, const FormP& f, IntEnv& ints) {
    if (!ints.empty()) return eval_uncached(world, f, ints);
    auto key = std::make_pair(f.get(), world);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    bool r = eval_uncached(world, f, ints);
    cache_[key] = r;
    return r;
}

bool Checker::eval_uncached(int world, const FormP& f, IntEnv& ints) {
    using K = Formula::Kind;
    const Decls& d = m_.decls;
    const World& w = m_.worlds[static_cast<size_t>(world)];
    const Memory& mem = w.last().mem;
    switch (f->kind) {
    case K::True: return true;
    case K::False: return false;
    case K::Rel:
        return compare_values(f->op, eval_term(mem, f->terms[0], d, &ints), eval_term(mem, f->terms[1], d, &ints));
    case K::Sampled: return sampled_from(w, f->terms[0], f->terms[1], &f->terms[2], d, ints);
    case K::Followed: return sampled_from(w, f->terms[0], f->terms[1], nullptr, d, ints);
    case K::Neg: {
        double p = stats::p_value(d, f->name, eval_term(mem, f->terms[0], d, &ints)).value;
        return cmp_apply(f->op, p, eval_term(mem, f->terms[1], d, &ints).as_real());
    }
    case K::Not: return !eval(world, f->subs[0], ints);
    case K::And:
        for (const auto& s : f->subs)
            if (!eval(world, s, ints)) return false;
        return true;
    case K::Or:
        for (const auto& s : f->subs)
            if (eval(world, s, ints)) return true;
        return false;
    case K::Implies: return !eval(world, f->subs[0], ints) || eval(world, f->subs[1], ints);
    case K::Iff: return eval(world, f->subs[0], ints) == eval(world, f->subs[1], ints);
    case K::Know:
        for (int v : m_.classes[static_cast<size_t>(m_.cls[static_cast<size_t>(world)])])
            if (!eval(v, f->subs[0], ints)) return false;
        return true;
    case K::Forall:
    case K::Exists: {
        bool all = f->kind == K::Forall;
        auto saved = ints.find(f->name) != ints.end() ? std::optional<std::int64_t>(ints[f->name]) : std::nullopt;
        bool result = all;
        for (std::int64_t i = 0; i <= d.int_bound; ++i) {
            ints[f->name] = i;
            if (eval(world, f->subs[0], ints) != all) {
                result = !all;
                break;
            }
        }
        if (saved) ints[f->name] = *saved;
        else ints.erase(f->name);
        return result;
    }
    case K::Belief:
    case K::Kappa:
    case K::Compds:
    case K::Hyp: return eval(world, expand_sugar(d, f), ints);
    }
    return false;
}

bool satisfies(const Model& m, int world, const FormP& f, const IntEnv& ints) {
    Checker c(m);
    return c.holds(world, f, ints);
}

namespace {

void collect_tests(const FormP& f, std::set<std::string>& out) {
    if (f->kind == Formula::Kind::Belief || f->kind == Formula::Kind::Neg) out.insert(f->name);
    for (const auto& s : f->subs) collect_tests(s, out);
}

std::string ints_str(const IntEnv& ints) {
    std::string s;
    for (const auto& [k, v] : ints) s += (s.empty() ? "" : ", ") + k + " = " + std::to_string(v);
    return s;
}

} // namespace

std::vector<std::string> null_world_warnings(const Model& m, const FormP& f) {
    std::set<std::string> tests;
    collect_tests(f, tests);
    std::vector<std::string> out;
    Checker c(m);
    for (const auto& t : tests) {
        FormP null;
        try {
            null = hypothesis(m.decls, t, Formula::HypKind::Null);
        } catch (const Error&) {
            continue;
        }
        bool any = false;
        for (int i = 0; i < static_cast<int>(m.worlds.size()) && !any; ++i) {
            try {
                any = c.holds(i, null);
            } catch (const Error&) {
            }
        }
        if (!any)
            out.push_back("no world satisfies the null hypothesis of test '" + t +
                          "'; beliefs about it hold trivially in this model");
    }
    return out;
}

Verdict check_valid(const Model& m, const FormP& f) {
    Verdict v;
    FormP core = expand_sugar(m.decls, f);
    Checker c(m);
    auto ints = int_vars_of(m.decls, core);
    for (int i = 0; i < static_cast<int>(m.worlds.size()) && v.ok; ++i) {
        for_each_interp(ints, m.decls.int_bound, [&](const IntEnv& env) {
            if (c.holds(i, core, env)) return true;
            v.ok = false;
            v.cex = Counterexample{i, env,
                                   "world #" + std::to_string(i) + (env.empty() ? "" : " with " + ints_str(env)) +
                                       " falsifies the formula:\n" + trace_dump(m.worlds[static_cast<size_t>(i)], m.decls)};
            return false;
        });
    }
    v.warnings = null_world_warnings(m, f);
    return v;
}

Verdict judgment_holds(const Model& m, const FormP& pre, const CmdP& c, const FormP& post, const RunOptions& opt) {
    Verdict v;
    const Decls& d = m.decls;
    bool exhausted = false;
    auto reach = reachable_worlds(c, m.worlds, d, opt, &exhausted);
    std::vector<World> all = m.worlds;
    all.insert(all.end(), reach.begin(), reach.end());
    Model closed = make_model(d, std::move(all));
    Checker chk(closed);
    FormP pre_core = expand_sugar(d, pre), post_core = expand_sugar(d, post);
    auto ints = int_vars_of(d, pre_core);
    for (const auto& x : int_vars_of(d, post_core)) ints.insert(x);
    RunOptions ro = opt;
    for (size_t i = 0; i < m.worlds.size() && v.ok; ++i) {
        int wi = closed.find(m.worlds[i]);
        for_each_interp(ints, d.int_bound, [&](const IntEnv& env) {
            if (!chk.holds(wi, pre_core, env)) return true;
            RunResult r = run(c, m.worlds[i], d, ro);
            exhausted |= r.exhausted;
            for (const auto& fin : r.finals) {
                int fi = closed.find(fin);
                if (fi < 0) {
                    // the closure ran out of budget before reaching this final
                    closed = make_model(d, [&] {
                        auto ws = closed.worlds;
                        ws.push_back(fin);
                        return ws;
                    }());
                    fi = closed.find(fin);
                }
                if (!chk.holds(fi, post_core, env)) {
                    v.ok = false;
                    v.cex = Counterexample{
                        wi, env,
                        "from world #" + std::to_string(wi) + (env.empty() ? "" : " with " + ints_str(env)) +
                            " satisfying the precondition, the program reaches a final world violating the "
                            "postcondition:\n" + trace_dump(fin, d)};
                    return false;
                }
            }
            return true;
        });
    }
    if (exhausted) v.warnings.push_back("step budget exhausted: the judgment holds so far, on the explored executions");
    auto more = null_world_warnings(closed, post);
    v.warnings.insert(v.warnings.end(), more.begin(), more.end());
    return v;
}

} // namespace bhl
