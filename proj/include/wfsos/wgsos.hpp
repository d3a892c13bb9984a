#pragma once

#include <map>
#include <string>
#include <vector>

#include "wfsos/rules.hpp"
#include "wfsos/syntax.hpp"

namespace wfsos {

/// Total-weight premise: observes (and either checks or binds) the total
/// weight of an argument's behaviour at one label.
struct WgsosTotal {
    int arg = 0;
    LabelExpr label;
    bool bind = false;      // bind the total into `bindvar` instead of matching
    Weight w;               // constant to match when !bind; nonzero if a
                            // weighted premise uses this (arg, label)
    std::string bindvar;
};

/// Weighted transition premise: binds a reached state and its weight.
struct WgsosTrans {
    int arg = 0;
    LabelExpr label;
    std::string uvar;  // weight variable
    std::string yvar;  // reached-state variable
};

/// Conclusion weight: a multiadditive combination of the premise weights.
/// The catalog covers constants, scaled products of premise weights, and the
/// two-premise normalized-minimum composite (with both totals bound).
struct WgsosBeta {
    enum class Kind { constant, scaled_product, min_law };
    Kind kind = Kind::constant;
    bool coeff_is_var = false;  // coefficient from a rate parameter binder
    Weight coeff = Weight::rat(1);
    std::string coeff_var;
    std::vector<std::string> uvars;       // factors (scaled_product)
    std::string u1, u2, w1, w2;           // min_law operands and bound totals
};

struct WgsosRule {
    std::string name;
    std::string op;
    std::vector<ParamPattern> op_params;
    int arity = 0;
    std::vector<std::string> arg_vars;
    std::vector<WgsosTotal> totals;
    std::vector<WgsosTrans> trans;
    std::vector<SideCond> conds;
    LabelExpr concl_label;
    WgsosBeta beta;
    TermPtr target = nullptr;  // sigma-term over the arguments and reached states
};

struct WGsosSpec {
    WeightMonoid monoid;
    std::vector<std::string> labels;
    Signature sigma;
    std::vector<WgsosRule> rules;
    std::map<std::string, TermPtr> constants;
};

/// Checks each reached-state variable occurs exactly once in its target, the
/// target variable discipline, nonzero constant totals on weighted premises,
/// and samples the multiadditivity of every conclusion combination.
std::vector<std::string> validate_wgsos(const WGsosSpec& s, std::uint64_t seed = 0,
                                        int samples = 1000);

/// Translation into the weight-function format. Rules sharing source
/// operator shape, conclusion label and trigger are merged into a single rule
/// whose target sums their contributions; reached-state positions are
/// replaced by the corresponding function variables (coloured per occurrence)
/// under product interpretations, constant total premises become guards.
/// Every (operator shape, label) pair gets a rule, so the induced system is
/// functional like the source semantics.
WfsosSpec translate_wgsos(const WGsosSpec& s, TermPool& pool);

}  // namespace wfsos
