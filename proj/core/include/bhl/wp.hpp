#pragma once

#include "bhl/syntax.hpp"

#include <string>
#include <vector>

namespace bhl {

struct Obligation {
    std::string name;
    FormP formula; // to be shown valid in the model / under the schemata
};

struct VCSet {
    std::vector<Obligation> obligations;
    FormP residual; // precondition computed for the whole program
};

// Weakest precondition of a loop-free program.  The result is sugar-free:
// the postcondition is expanded first and then substituted mechanically.
// Ghost assertions are transparent; parallel composition is treated as its
// left-to-right sequentialisation.
FormP weakest_pre(const Decls& d, const CmdP& c, const FormP& post);

// Verification conditions for a program whose loops carry invariants.  Ghost
// assertions act as cut points.  The first obligation is always `pre ⇒ residual`.
VCSet vc_gen(const Decls& d, const CmdP& c, const FormP& pre, const FormP& post);

} // namespace bhl
