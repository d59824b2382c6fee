#include "bhl/semantics.hpp"

#include "bhl/stats.hpp"

#include <cmath>
#include <set>

namespace bhl {

std::string Action::str() const {
    switch (kind) {
    case Kind::Init: return "init";
    case Kind::Sampling: return var + " ~ " + print_term(population) + "^" + std::to_string(n);
    case Kind::Cmd: return print_command(cmd);
    }
    return "?";
}

World World::extended(StateP s) const {
    World w = *this;
    w.states.push_back(std::move(s));
    return w;
}

// ---------------------------------------------------------------- evaluation

namespace {

[[noreturn]] void eval_error(const std::string& msg) { fail(Error::Kind::Eval, msg); }

Value arith(const std::string& f, const Value& a, const Value& b) {
    if (!a.is_numeric() || !b.is_numeric()) eval_error("'" + f + "' expects numbers, got " + a.str() + " and " + b.str());
    bool ints = a.kind() == Value::Kind::Int && b.kind() == Value::Kind::Int;
    if (f == "/") {
        if (b.as_real() == 0.0) eval_error("division by zero");
        return Value::real(a.as_real() / b.as_real());
    }
    if (ints) {
        std::int64_t x = a.as_int(), y = b.as_int();
        if (f == "+") return Value::integer(x + y);
        if (f == "-") return Value::integer(x - y);
        if (f == "*") return Value::integer(x * y);
        if (f == "min") return Value::integer(std::min(x, y));
        if (f == "max") return Value::integer(std::max(x, y));
    }
    double x = a.as_real(), y = b.as_real();
    if (f == "+") return Value::real(x + y);
    if (f == "-") return Value::real(x - y);
    if (f == "*") return Value::real(x * y);
    if (f == "min") return Value::real(std::min(x, y));
    return Value::real(std::max(x, y));
}

Value compare(const std::string& f, const Value& a, const Value& b) {
    if (f == "=" || f == "!=") {
        bool eq = values_equal(a, b);
        return Value::boolean(f == "=" ? eq : !eq);
    }
    if (!a.is_numeric() || !b.is_numeric()) eval_error("'" + f + "' expects numbers, got " + a.str() + " and " + b.str());
    Cmp c = f == "<" ? Cmp::Lt : f == "<=" ? Cmp::Le : f == ">" ? Cmp::Gt : Cmp::Ge;
    return Value::boolean(cmp_apply(c, a.as_real(), b.as_real()));
}

const std::vector<Value>& nonempty_list(const Value& v, const std::string& f) {
    if (v.kind() != Value::Kind::List) eval_error("'" + f + "' expects a list, got " + v.str());
    return v.elems();
}

} // namespace

Value eval_term(const Memory& m, const TermP& t, const Decls& d, const IntEnv* ints) {
    switch (t->kind) {
    case Term::Kind::Const: return t->value;
    case Term::Kind::Var: {
        if (ints) {
            if (auto it = ints->find(t->name); it != ints->end()) return Value::integer(it->second);
        }
        auto it = m.find(t->name);
        if (it == m.end() || it->second.is_undef()) eval_error("read of undefined variable '" + t->name + "'");
        return it->second;
    }
    case Term::Kind::TestApp: {
        Value data = eval_term(m, t->args[0], d, ints);
        return Value::real(stats::p_value(d, t->name, data).value);
    }
    case Term::Kind::App: break;
    }
    const std::string& f = t->name;
    auto arg = [&](size_t i) { return eval_term(m, t->args.at(i), d, ints); };
    if (f == "and") return Value::boolean(arg(0).as_bool() && arg(1).as_bool());
    if (f == "or") return Value::boolean(arg(0).as_bool() || arg(1).as_bool());
    if (f == "not") return Value::boolean(!arg(0).as_bool());
    if (f == "ite") return arg(0).as_bool() ? arg(1) : arg(2);
    if (f == "+" || f == "-" || f == "*" || f == "/" || f == "min" || f == "max") return arith(f, arg(0), arg(1));
    if (f == "=" || f == "!=" || f == "<" || f == "<=" || f == ">" || f == ">=") return compare(f, arg(0), arg(1));
    if (f == "neg") {
        Value v = arg(0);
        if (v.kind() == Value::Kind::Int) return Value::integer(-v.as_int());
        return Value::real(-v.as_real());
    }
    if (f == "tuple" || f == "list") {
        std::vector<Value> xs;
        for (size_t i = 0; i < t->args.size(); ++i) xs.push_back(arg(i));
        return f == "tuple" ? Value::tuple(std::move(xs)) : Value::list(std::move(xs));
    }
    if (f == "size") return Value::integer(static_cast<std::int64_t>(nonempty_list(arg(0), f).size()));
    if (f == "sum" || f == "mean") {
        const auto& xs = nonempty_list(arg(0), f);
        if (f == "mean" && xs.empty()) eval_error("mean of an empty list");
        double s = 0.0;
        for (const auto& x : xs) s += x.as_real();
        return Value::real(f == "sum" ? s : s / xs.size());
    }
    if (f == "abs") {
        Value v = arg(0);
        if (v.kind() == Value::Kind::Int) return Value::integer(std::llabs(v.as_int()));
        return Value::real(std::fabs(v.as_real()));
    }
    if (f == "sqrt") {
        double x = arg(0).as_real();
        if (x < 0) eval_error("square root of a negative number");
        return Value::real(std::sqrt(x));
    }
    if (f == "exp") return Value::real(std::exp(arg(0).as_real()));
    if (f == "log") {
        double x = arg(0).as_real();
        if (x <= 0) eval_error("logarithm of a non-positive number");
        return Value::real(std::log(x));
    }
    if (f == "N" || f == "U") {
        double a = arg(0).as_real(), b = arg(1).as_real();
        if (f == "N" && !(b > 0)) eval_error("normal distribution needs a positive variance");
        if (f == "U" && !(b > a)) eval_error("uniform distribution needs lower < upper");
        return Value::dist({f == "N" ? Dist::Kind::Normal : Dist::Kind::Uniform, a, b});
    }
    if (f == "fst" || f == "snd") {
        Value v = arg(0);
        if (v.kind() != Value::Kind::Tuple || v.elems().size() < 2) eval_error("'" + f + "' expects a pair");
        return v.elems()[f == "fst" ? 0 : 1];
    }
    if (f == "nth") {
        const auto& xs = nonempty_list(arg(0), f);
        std::int64_t i = arg(1).as_int();
        if (i < 0 || i >= static_cast<std::int64_t>(xs.size())) eval_error("list index out of range");
        return xs[static_cast<size_t>(i)];
    }
    eval_error("unknown function '" + f + "'");
}

// ---------------------------------------------------------------- small steps

namespace {

StateP make_state(Memory m, const CmdP& c, History h) {
    auto s = std::make_shared<State>();
    s->mem = std::move(m);
    s->act.kind = Action::Kind::Cmd;
    s->act.cmd = c;
    s->hist = std::move(h);
    return s;
}

void store(Memory& m, const std::string& v, Value val, const Decls& d) {
    auto ty = d.type_of(v);
    if (ty && !value_has_type(val, *ty))
        eval_error("value " + val.str() + " does not fit '" + v + "' of type " + ty->str());
    m[v] = std::move(val);
}

void check_aliasing(const State& s, const Value& data, const TermP& ref, const Decls& d, std::vector<std::string>* warnings) {
    if (!warnings) return;
    std::string mine = print_term(ref);
    std::set<std::string> seen;
    for (const auto& [r, t] : d.histories) {
        std::string other = print_term(r);
        if (other == mine || !seen.insert(other).second) continue;
        try {
            if (eval_term(s.mem, r, d) == data)
                warnings->push_back("datasets " + mine + " and " + other +
                                    " hold equal values; the value-keyed test history merges them");
        } catch (const Error&) {
        }
    }
}

} // namespace

std::vector<Config> step(const Config& c, const Decls& d, std::vector<std::string>* warnings) {
    using K = Command::Kind;
    if (!c.cmd) return {};
    const State& s = c.world.last();
    const CmdP& cmd = c.cmd;
    switch (cmd->kind) {
    case K::Skip: return {{nullptr, c.world.extended(make_state(s.mem, cmd, s.hist))}};
    case K::Assert: return {{nullptr, c.world}};
    case K::Assign: {
        Memory m = s.mem;
        store(m, cmd->var, eval_term(s.mem, cmd->expr, d), d);
        return {{nullptr, c.world.extended(make_state(std::move(m), cmd, s.hist))}};
    }
    case K::Test: {
        Value data = eval_term(s.mem, cmd->ref, d);
        check_aliasing(s, data, cmd->ref, d, warnings);
        Memory m = s.mem;
        store(m, cmd->var, Value::real(stats::p_value(d, cmd->test, data).value), d);
        std::string h = hist_name(cmd->ref, cmd->test);
        std::int64_t prev = 0;
        if (auto it = s.mem.find(h); it != s.mem.end() && !it->second.is_undef()) prev = it->second.as_int();
        m[h] = Value::integer(prev + 1);
        History hist = s.hist;
        ++hist[data.str()][cmd->test];
        return {{nullptr, c.world.extended(make_state(std::move(m), cmd, std::move(hist)))}};
    }
    case K::Seq: {
        std::vector<Config> out;
        for (auto& n : step({cmd->c1, c.world}, d, warnings))
            out.push_back({n.cmd ? c_seq(n.cmd, cmd->c2) : cmd->c2, std::move(n.world)});
        return out;
    }
    case K::Par: {
        std::vector<Config> out;
        for (auto& n : step({cmd->c1, c.world}, d, warnings))
            out.push_back({n.cmd ? c_par(n.cmd, cmd->c2) : cmd->c2, std::move(n.world)});
        for (auto& n : step({cmd->c2, c.world}, d, warnings))
            out.push_back({n.cmd ? c_par(cmd->c1, n.cmd) : cmd->c1, std::move(n.world)});
        return out;
    }
    case K::If: {
        bool g = eval_term(s.mem, cmd->expr, d).as_bool();
        return {{g ? cmd->c1 : cmd->c2, c.world}};
    }
    case K::While: {
        bool g = eval_term(s.mem, cmd->expr, d).as_bool();
        if (g) return {{c_seq(cmd->c1, cmd), c.world}};
        return {{nullptr, c.world}};
    }
    }
    return {};
}

RunResult run(const CmdP& c, const World& w, const Decls& d, const RunOptions& opt) {
    if (opt.budget < 1) fail(Error::Kind::Usage, "budget must be at least 1");
    RunResult res;
    std::set<std::string> seen_finals;
    std::vector<Config> stack{{c, w}};
    while (!stack.empty()) {
        if (res.steps >= opt.budget) {
            res.exhausted = true;
            break;
        }
        Config cur = std::move(stack.back());
        stack.pop_back();
        if (!cur.cmd) {
            if (seen_finals.insert(world_key(cur.world)).second) res.finals.push_back(std::move(cur.world));
            continue;
        }
        std::vector<Config> next;
        try {
            next = step(cur, d, &res.warnings);
        } catch (const Error& e) {
            fail(e.kind(), std::string(e.what()) + "\n  after the trace:\n" + trace_dump(cur.world, d), e.span());
        }
        ++res.steps;
        if (opt.mode == Interleaving::Canonical && next.size() > 1) next.resize(1);
        // push in reverse so the left-most successor is explored first
        for (auto it = next.rbegin(); it != next.rend(); ++it) stack.push_back(std::move(*it));
    }
    std::sort(res.warnings.begin(), res.warnings.end());
    res.warnings.erase(std::unique(res.warnings.begin(), res.warnings.end()), res.warnings.end());
    return res;
}

World run_canonical(const CmdP& c, const World& w, const Decls& d, std::int64_t budget) {
    RunResult r = run(c, w, d, {budget, Interleaving::Canonical});
    if (r.exhausted) fail(Error::Kind::Budget, "step budget of " + std::to_string(budget) + " exhausted (possible nontermination)");
    return r.finals.at(0);
}

// ---------------------------------------------------------------- observation

World observation(const World& w, const Decls& d) {
    World o;
    for (const auto& s : w.states) {
        auto t = std::make_shared<State>(*s);
        for (auto it = t->mem.begin(); it != t->mem.end();)
            it = d.is_obs(it->first) ? std::next(it) : t->mem.erase(it);
        o.states.push_back(std::move(t));
    }
    return o;
}

namespace {

std::string render(const World& w, const Decls* only_obs) {
    std::string k;
    for (const auto& s : w.states) {
        k += s->act.str();
        k += " {";
        for (const auto& [v, val] : s->mem)
            if (!only_obs || only_obs->is_obs(v)) k += v + "=" + val.str() + ";";
        k += "} [";
        for (const auto& [data, tests] : s->hist) {
            k += data + ":";
            for (const auto& [t, n] : tests) k += t + "*" + std::to_string(n) + ",";
            k += ";";
        }
        k += "]\n";
    }
    return k;
}

} // namespace

std::string world_key(const World& w) { return render(w, nullptr); }

std::string observation_key(const World& w, const Decls& d) { return render(w, &d); }

World initial_world(Memory m, const Decls& d) {
    for (const auto& h : d.history_names()) m[h] = Value::integer(0);
    auto s = std::make_shared<State>();
    s->mem = std::move(m);
    return World{{s}};
}

int history_count(const State& s, const TermP& ref, const std::string& test, const Decls& d) {
    Value data = eval_term(s.mem, ref, d);
    auto it = s.hist.find(data.str());
    if (it == s.hist.end()) return 0;
    auto jt = it->second.find(test);
    return jt == it->second.end() ? 0 : jt->second;
}

std::string trace_dump(const World& w, const Decls& d) {
    std::string out;
    const State* prev = nullptr;
    for (size_t i = 0; i < w.states.size(); ++i) {
        const State& s = *w.states[i];
        std::string line = "  #" + std::to_string(i) + "  " + s.act.str();
        if (s.act.kind == Action::Kind::Sampling) line += " = " + s.act.data.str();
        std::string diff;
        for (const auto& [v, val] : s.mem) {
            if (prev) {
                auto it = prev->mem.find(v);
                if (it != prev->mem.end() && it->second == val) continue;
            }
            diff += (diff.empty() ? "" : ", ") + v + (d.is_obs(v) ? "" : "*") + " = " + val.str();
        }
        if (!diff.empty()) line += "  | " + diff;
        std::string hd;
        for (const auto& [data, tests] : s.hist)
            for (const auto& [t, n] : tests) {
                int before = 0;
                if (prev) {
                    auto it = prev->hist.find(data);
                    if (it != prev->hist.end() && it->second.count(t)) before = it->second.at(t);
                }
                if (n != before) hd += (hd.empty() ? "" : ", ") + t + " on " + data + " (x" + std::to_string(n) + ")";
            }
        if (!hd.empty()) line += "  | history + " + hd;
        out += line + "\n";
        prev = &s;
    }
    return out;
}

} // namespace bhl
