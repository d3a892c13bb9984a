#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wfsos/interp.hpp"
#include "wfsos/syntax.hpp"
#include "wfsos/ultras.hpp"

namespace wfsos {

/// A label position in a rule schema: either a concrete label or a schema
/// variable resolved at instantiation time.
struct LabelExpr {
    bool is_var = false;
    std::string name;

    static LabelExpr lit(std::string l) { return {false, std::move(l)}; }
    static LabelExpr var(std::string v) { return {true, std::move(v)}; }
    std::string str() const { return is_var ? "$" + name : name; }
};

/// Reference to a weight-function variable: a plain premise variable or an
/// indexed member of a wildcard premise family.
struct FnVarRef {
    std::string plain;   // nonempty for plain references
    std::string family;  // nonempty for family references
    LabelExpr index;

    static FnVarRef mk_plain(std::string v) {
        FnVarRef r;
        r.plain = std::move(v);
        return r;
    }
    static FnVarRef mk_family(std::string f, LabelExpr idx) {
        FnVarRef r;
        r.family = std::move(f);
        r.index = std::move(idx);
        return r;
    }
    std::string str() const {
        return plain.empty() ? "%" + family + "[" + index.str() + "]" : "%" + plain;
    }
};

struct SideCond {
    enum class Kind { eq, neq, in_set, notin_set };
    Kind kind = Kind::eq;
    LabelExpr lhs;
    LabelExpr rhs;                  // eq / neq
    bool set_is_var = false;        // in_set / notin_set: named labelset binder?
    std::string set_var;
    std::vector<std::string> set_items;
};

// --- concrete rules --------------------------------------------------------

struct PosPremise {
    int arg = 0;
    std::string label;
    std::string var;
};
struct NegPremise {
    int arg = 0;
    std::string label;
};
struct TotalPremise {
    std::string var;
    Weight w;
};
struct SupportPremise {
    std::string var;
    std::string yvar;
};

/// A fully concrete rule in the exact-trigger format: the per-argument
/// premise label sets are matched literally against the enabled sets.
struct WfsosRule {
    std::string name;
    std::string op;
    std::vector<ParamValue> op_params;
    int arity = 0;
    std::vector<std::string> arg_vars;
    std::vector<PosPremise> positives;
    std::vector<NegPremise> negatives;
    std::vector<TotalPremise> totals;
    std::vector<SupportPremise> supports;
    std::string concl_label;
    TermPtr target = nullptr;

    std::vector<std::string> premise_labels(int arg) const;
};

/// Enabled-label sets and observed totals a rule is matched against.
struct Trigger {
    std::vector<std::vector<std::string>> enabled;  // per argument, sorted
    std::vector<Weight> totals;                     // observed candidate totals
};

bool match_trigger(const WfsosRule& r, const Trigger& t);

// --- rule schemas -----------------------------------------------------------

/// Pattern for one static parameter of the source operator: concrete value or
/// binder variable.
struct ParamPattern {
    bool bind = false;
    std::string var;
    ParamValue value;
};

struct SchemaPosPremise {
    int arg = 0;
    LabelExpr label;
    std::string var;
};
struct SchemaNegPremise {
    int arg = 0;
    LabelExpr label;
};
struct SchemaTotalPremise {
    FnVarRef var;
    Weight w;
};
struct SchemaSupportPremise {
    FnVarRef var;
    std::string yvar;
};

/// GSOS-style rule schema. Instantiation against a ground operator instance
/// and its arguments' enabled-label tuple yields concrete exact-trigger rules:
/// one per admissible assignment of the schema's label variables. An argument
/// with a wildcard family turns into positive premises for every enabled
/// label; family references to disabled labels fall back to the zero
/// operator in the target.
struct RuleSchema {
    std::string name;
    std::string op;
    std::vector<ParamPattern> op_params;
    int arity = 0;
    std::vector<std::string> arg_vars;
    std::vector<std::string> wildcard;  // per argument: family name, or "" for explicit mode
    std::vector<SchemaPosPremise> positives;
    std::vector<SchemaNegPremise> negatives;
    std::vector<SchemaTotalPremise> totals;
    std::vector<SchemaSupportPremise> supports;
    std::vector<SideCond> conds;
    LabelExpr concl_label;
    TermPtr target = nullptr;
};

/// How one theta-operator evaluates; kept symbolic so specs can be printed
/// back as text.
struct InterpBinding {
    std::string theta_op;
    std::string builtin_name;            // empty when expr is used
    std::vector<std::string> args;
    std::optional<WeightExpr> expr;
};

struct WfsosSpec {
    WeightMonoid monoid;
    std::vector<std::string> labels;
    Signature sigma;
    Signature theta;
    std::vector<RuleSchema> schemas;
    std::map<std::string, TermPtr> constants;
    std::vector<InterpBinding> interp_bindings;
    Weight base_weight = Weight::inf();
    Interpretation interp;   // built from the bindings
    std::string zero_op;     // theta op bound to `zero`, "" if none

    int label_index(const std::string& l) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == l) return (int)i;
        return -1;
    }
    bool has_label(const std::string& l) const { return label_index(l) >= 0; }
    const OpSchema* sigma_op(const std::string& n) const { return sigma.find(n); }
    bool is_constant(const std::string& n) const { return constants.count(n) > 0; }
};

/// Realizes the interp bindings into the spec's eval table. Throws on unknown
/// builtin names or missing arguments.
void build_interpretation(WfsosSpec& spec);

/// Instantiates a schema against a ground operator instance and trigger.
/// Returns every concrete rule admissible for the assignment space; order is
/// deterministic.
std::vector<WfsosRule> instantiate_schema(const RuleSchema& schema, const std::string& op,
                                          const std::vector<ParamValue>& op_params,
                                          const std::vector<std::vector<std::string>>& enabled,
                                          const WfsosSpec& spec, TermPool& pool);

/// Format validation of a concrete rule; each violation names the condition
/// broken. Empty result means the engine can consume the rule.
std::vector<std::string> validate_rule(const WfsosRule& r, const WfsosSpec& spec);

/// Static validation of the whole specification (signatures, bindings,
/// schemas, constants, monoid capabilities).
std::vector<std::string> validate_spec(const WfsosSpec& spec);

}  // namespace wfsos
