#pragma once

#include "bhl/semantics.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bhl::cli {

enum Exit { kOk = 0, kNegative = 1, kUsage = 2 };

// Options shared by every subcommand.
struct Globals {
    std::int64_t budget = 1000000;
    std::optional<std::uint64_t> seed;
    Interleaving mode = Interleaving::Canonical;
    bool mode_given = false;
    std::optional<int> int_bound;
    bool json = false;
    bool trace = false;
};

struct RunArgs {
    std::string file;
    std::string scenario;
};

struct PValueArgs {
    std::string test = "ztest2";
    std::string decl;
    std::vector<std::string> data;
    double sigma = 1.0;
    std::string tail = "two";
};

struct WpArgs {
    std::string file;
    std::string prog;
    std::string pre = "true";
    std::string post;
    bool vc = false;
    std::string scenario;
    std::vector<std::string> schemas;
};

struct ModelCheckArgs {
    std::string scenario;
    std::string formula;
    std::string pre, post, prog;
};

struct CheckProofArgs {
    std::string file;
    std::string scenario;
};

int cmd_run(const Globals& g, const RunArgs& a, std::ostream& out);
int cmd_pvalue(const Globals& g, const PValueArgs& a, std::ostream& out);
int cmd_wp(const Globals& g, const WpArgs& a, std::ostream& out);
int cmd_vc(const Globals& g, const WpArgs& a, std::ostream& out);
int cmd_model_check(const Globals& g, const ModelCheckArgs& a, std::ostream& out);
int cmd_check_proof(const Globals& g, const CheckProofArgs& a, std::ostream& out);
int cmd_examples(const Globals& g, const std::string& dir, bool list_only, std::ostream& out);

// Bundled example files (name, contents), in name order.
const std::vector<std::pair<std::string, std::string>>& bundled_corpus();

} // namespace bhl::cli
