#pragma once

#include "bhl/semantics.hpp"
#include "bhl/syntax.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bhl {

// A finite slice of the universe of possible worlds.
struct Scenario {
    std::string name;
    std::filesystem::path origin; // file the scenario was read from (may be empty)
    Decls decls;
    CmdP program;             // optional
    bool run_program = false; // close the model under executions of `program`
    Interleaving mode = Interleaving::All;
    std::vector<World> initial;
};

// Parse a scenario document (JSON); relative paths resolve against `base_dir`.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& file);

// CSV dataset: one number per line gives a list of reals; several columns
// give a list of rows.  A non-numeric first line is treated as a header.
Value read_csv_dataset(const std::filesystem::path& file);

struct Model {
    Decls decls;
    std::vector<World> worlds;
    std::vector<int> cls;                // observation class of each world
    std::vector<std::vector<int>> classes; // worlds of each class, ascending
    std::vector<std::string> warnings;
    bool exhausted = false;
    std::map<std::string, int> index; // world key -> position

    int find(const World& w) const; // index of an identical world, or -1
};

// Deduplicate worlds and compute the observability classes.
Model make_model(const Decls& d, std::vector<World> worlds);

// Initial worlds of the scenario, closed under its program when requested.
Model build_model(const Scenario& s, const RunOptions& opt = {});

// All worlds reachable while executing `c` from each of `from` (prefixes and finals).
std::vector<World> reachable_worlds(const CmdP& c, const std::vector<World>& from, const Decls& d,
                                    const RunOptions& opt, bool* exhausted);

bool satisfies(const Model& m, int world, const FormP& f, const IntEnv& ints = {});

// Evaluator with a per-model cache for closed subformulas.
class Checker {
public:
    explicit Checker(const Model& m) : m_(m) {}
    bool holds(int world, const FormP& core, const IntEnv& ints = {});
    const Model& model() const { return m_; }

private:
    bool eval(int world, const FormP& f, IntEnv& ints);
    bool eval_uncached(int world, const FormP& f, IntEnv& ints);
    const Model& m_;
    std::map<std::pair<const Formula*, int>, bool> cache_;
};

struct Counterexample {
    int world = -1;
    IntEnv ints;
    std::string description;
};

struct Verdict {
    bool ok = true;
    std::optional<Counterexample> cex;
    std::vector<std::string> warnings;
};

// Valid iff satisfied in every world for every bounded interpretation of the
// formula's free integer variables.  "Valid" means: no counterexample in this model.
Verdict check_valid(const Model& m, const FormP& f);

// {pre} c {post}: every world of m satisfying pre has all its final worlds
// satisfy post, evaluated in m closed under executions of c.
Verdict judgment_holds(const Model& m, const FormP& pre, const CmdP& c, const FormP& post, const RunOptions& opt = {});

// Warnings for tests mentioned in f whose null hypothesis holds in no world.
std::vector<std::string> null_world_warnings(const Model& m, const FormP& f);

} // namespace bhl
