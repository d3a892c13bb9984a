#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "wfsos/weights.hpp"

namespace wfsos {

enum class ParamKind : std::uint8_t { label, rate, labelset, nat, varref };

/// A static parameter value attached to an operator instance. The varref kind
/// is a schema placeholder ($x) resolved at rule instantiation; ground terms
/// never carry it.
struct ParamValue {
    ParamKind kind = ParamKind::label;
    std::string label;  // label value, or varref name
    Weight rate;
    std::vector<std::string> labelset;  // sorted, unique
    std::int32_t nat = 0;

    static ParamValue mk_label(std::string l);
    static ParamValue mk_rate(Weight w);
    static ParamValue mk_labelset(std::vector<std::string> ls);
    static ParamValue mk_nat(std::int32_t n);
    static ParamValue mk_varref(std::string name);

    bool operator==(const ParamValue& o) const;
    bool operator<(const ParamValue& o) const;
    std::string str() const;
};

/// Operator schema: name, arity and the kinds of its static parameters.
struct OpSchema {
    std::string name;
    int arity = 0;
    std::vector<ParamKind> params;
};

/// Process or weight signature: a finite family of operator schemas.
struct Signature {
    enum class Kind : std::uint8_t { process, weight };
    Kind kind = Kind::process;
    std::vector<OpSchema> ops;

    const OpSchema* find(const std::string& name) const {
        for (const auto& op : ops)
            if (op.name == name) return &op;
        return nullptr;
    }
    bool add(OpSchema op) {
        if (find(op.name)) return false;
        ops.push_back(std::move(op));
        return true;
    }
};

enum class VarKind : std::uint8_t { process, weightfn };

struct TermNode;
using TermPtr = const TermNode*;

/// Immutable, interned term node. Either a variable leaf or an operator
/// instance with children. Pointer equality coincides with structural
/// equality within one pool.
struct TermNode {
    bool is_var = false;
    VarKind var_kind = VarKind::process;
    std::string name;                 // operator name or variable name
    std::vector<ParamValue> params;   // operator instances only
    std::vector<TermPtr> children;
    std::int32_t id = -1;             // pool-assigned, stable within a run

    bool is_op() const { return !is_var; }
};

/// Structural total order on terms (canonical, run-independent).
int term_compare(TermPtr a, TermPtr b);
struct TermLess {
    bool operator()(TermPtr a, TermPtr b) const { return term_compare(a, b) < 0; }
};

/// Hash-consing pool. Thread-safe insertion; nodes live as long as the pool.
class TermPool {
  public:
    TermPtr var(VarKind kind, const std::string& name);
    TermPtr op(const std::string& name, std::vector<ParamValue> params,
               std::vector<TermPtr> children);
    TermPtr constant(const std::string& name) { return op(name, {}, {}); }

    TermPtr by_id(std::int32_t id) const;
    std::int32_t size() const;

  private:
    struct Key;
    mutable std::mutex mu_;
    std::vector<std::unique_ptr<TermNode>> nodes_;
    std::map<std::string, TermPtr> index_;  // serialized key -> node
};

/// Process-wide pool; all spec/engine terms intern here.
TermPool& global_pool();

bool is_ground(TermPtr t);
std::set<std::string> vars_of(TermPtr t);

/// Simultaneous substitution of variable leaves. In strict mode a variable
/// without a binding is an error; otherwise it is left in place.
TermPtr apply_subst(TermPtr t, const std::map<std::string, TermPtr>& sigma, TermPool& pool,
                    bool strict = false);

/// Canonical textual form: name{p1,...}(t1,...,tn), variables as bare
/// lowercase identifiers, weight-function variables prefixed '%'.
std::string term_to_string(TermPtr t);

/// Parses the canonical textual form. `binders`, when given, lists the
/// identifiers to read as process variables; all other identifiers become
/// 0-ary operators (constants).
TermPtr parse_term(const std::string& text, TermPool& pool,
                   const std::set<std::string>* binders = nullptr);

}  // namespace wfsos
