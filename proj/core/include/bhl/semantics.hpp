#pragma once

#include "bhl/syntax.hpp"
#include "bhl/value.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace bhl {

// Variables absent from a memory are undefined (⊥).
using Memory = std::map<std::string, Value>;

// Bindings of bounded integer variables while evaluating formulas.
using IntEnv = std::map<std::string, std::int64_t>;

struct Action {
    enum class Kind { Init, Sampling, Cmd };
    Kind kind = Kind::Init;
    // Sampling: `var` received `data`, drawn as `n` points from `population`
    // (a term over invisible parameters, so the record is observation-safe).
    std::string var;
    TermP population;
    std::int64_t n = 0;
    Value data;
    // Cmd: the atomic command that produced the state.
    CmdP cmd;

    std::string str() const;
};

// Test history: dataset value (rendered) -> test id -> multiplicity.
using History = std::map<std::string, std::map<std::string, int>>;

struct State {
    Memory mem;
    Action act;
    History hist;
};
using StateP = std::shared_ptr<const State>;

// A possible world: a non-empty sequence of states.
struct World {
    std::vector<StateP> states;
    const State& last() const { return *states.back(); }
    World extended(StateP s) const;
};

Value eval_term(const Memory& m, const TermP& t, const Decls& d, const IntEnv* ints = nullptr);

struct Config {
    CmdP cmd; // null once the program has terminated
    World world;
};

// One small-step transition; every successor configuration.  Guards of
// conditionals and loops append no state.
std::vector<Config> step(const Config& c, const Decls& d, std::vector<std::string>* warnings = nullptr);

enum class Interleaving { Canonical, All };

struct RunOptions {
    std::int64_t budget = 1000000; // total small steps
    Interleaving mode = Interleaving::Canonical;
};

struct RunResult {
    std::vector<World> finals;
    bool exhausted = false;
    std::int64_t steps = 0;
    std::vector<std::string> warnings;
};

RunResult run(const CmdP& c, const World& w, const Decls& d, const RunOptions& opt = {});

// Left-first deterministic execution; throws a Budget error on exhaustion.
World run_canonical(const CmdP& c, const World& w, const Decls& d, std::int64_t budget = 1000000);

// Observation: invisible variables (including history variables) masked to ⊥.
World observation(const World& w, const Decls& d);

// Canonical renderings used to identify worlds and observation classes.
std::string world_key(const World& w);
std::string observation_key(const World& w, const Decls& d);

// A world with a single initial state whose history variables are all 0.
World initial_world(Memory m, const Decls& d);

// Multiplicity of `test` in the history of the value held by `ref`.
int history_count(const State& s, const TermP& ref, const std::string& test, const Decls& d);

// One line per state: index, action, memory changes, history changes.
std::string trace_dump(const World& w, const Decls& d);

} // namespace bhl
