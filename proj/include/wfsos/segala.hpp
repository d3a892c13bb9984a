#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wfsos/rules.hpp"
#include "wfsos/syntax.hpp"

namespace wfsos {

/// One probabilistic GSOS rule: transition and negative premises, support
/// premises binding reached states, and a convex-combination target whose
/// summand terms may embed (possibly duplicated) distribution variables.
struct SegalaRule {
    std::string name;
    std::string op;
    std::vector<ParamPattern> op_params;
    int arity = 0;
    std::vector<std::string> arg_vars;
    std::vector<SchemaPosPremise> positives;
    std::vector<SchemaNegPremise> negatives;
    std::vector<std::pair<std::string, std::string>> supports;  // (phi, y)
    std::vector<SideCond> conds;
    LabelExpr concl_label;
    std::vector<std::pair<Weight, TermPtr>> target;  // (w_i, t_i), sum of w_i = 1
};

struct SegalaGsosSpec {
    std::vector<std::string> labels;
    Signature sigma;
    std::vector<SegalaRule> rules;
    std::map<std::string, TermPtr> constants;
};

std::vector<std::string> validate_segala(const SegalaGsosSpec& s);

/// Translation into the weight-function format: premises map one to one,
/// support premises included; each summand term is mirrored into the weight
/// signature with per-occurrence colouring of duplicated distribution
/// variables and an independent-product interpretation; the target is their
/// convex combination. Induced systems consist of probability distributions.
WfsosSpec translate_segala(const SegalaGsosSpec& s, TermPool& pool);

}  // namespace wfsos
