#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "wfsos/syntax.hpp"
#include "wfsos/weights.hpp"

namespace wfsos {

struct EvalContext {
    TermPool* pool;
    const WeightMonoid* monoid;
};

/// Inductive case of an interpretation: maps an operator node whose children
/// are already evaluated to the resulting weight function over terms.
using EvalRule =
    std::function<WeightFn(const TermNode&, const std::vector<WeightFn>&, const EvalContext&)>;

/// Base case: embeds a process leaf (variable or sigma-term) as a weight
/// function.
using BaseRule = std::function<WeightFn(TermPtr, const EvalContext&)>;

/// Weight-term interpretation: structural recursion over theta-terms given by
/// one eval rule per theta-operator plus the base embedding. Pure and
/// reentrant; rule tables never change after construction.
struct Interpretation {
    std::map<std::string, EvalRule> ops;
    BaseRule base;

    bool covers(const std::string& op) const { return ops.count(op) > 0; }
};

/// The unique interpretation extending the given inductive and base cases.
Interpretation build_from_recursion(std::map<std::string, EvalRule> h, BaseRule b);

/// Dirac embedding: t maps to {t -> w}.
BaseRule dirac_base(Weight w);

/// Catalogued combinators, selected by name. `args` carries per-builtin
/// configuration (the sigma-operator a product law builds, the dirac weight).
///   zero                    -> constantly empty function
///   reshape                 -> rate param r spread equally over the support
///   pointwise_sum           -> monoidal sum of the children, pointwise
///   coop_min_law(op)        -> normalized product scaled by min of totals
///   coop_product_law(op)    -> plain product of point weights
///   convex_combination      -> sum of children scaled by the rate params
///   colour                  -> identity (occurrence marker)
///   scale                   -> multiply by the rate param
///   total_guard             -> child 2 if total(child 1) equals rate param
///   point_restrict          -> restriction of child 1 to child 2's point
///   independent_product(op) -> product over all support combinations
///   multiadditive_apply(op) -> dirac on built term weighted by scaled
///                              product of the children's totals
EvalRule builtin(const std::string& name, const std::vector<std::string>& args = {});

/// Names accepted by builtin().
std::vector<std::string> builtin_names();

/// Evaluates a theta-term: weight-function variables through env, operators
/// through the interpretation, anything else through the base embedding.
/// Process leaves must not contain weight-function variables.
WeightFn interpret(TermPtr psi, const std::map<std::string, WeightFn>& env,
                   const Interpretation& interp, const EvalContext& ctx);

/// Pointwise scalar expression over evaluated children; the extension hook
/// for user-defined operator rules. Division by zero resolves to zero.
struct WeightExpr {
    enum class Op {
        constant,
        point,         // child's weight at the output point
        total,         // child's total weight
        support_size,  // child's support cardinality, as a rational
        add,
        mul,
        div,
        min,
        max
    };
    Op op = Op::constant;
    Weight value;
    int child = 0;
    std::vector<WeightExpr> args;

    static WeightExpr constant_of(Weight w);
    static WeightExpr point_of(int child);
    static WeightExpr total_of(int child);
    static WeightExpr support_size_of(int child);
    static WeightExpr apply(Op op, std::vector<WeightExpr> args);
};

/// Eval rule defined by a pointwise expression: the output assigns
/// expr(t) to every t in the union of the children's supports.
EvalRule expr_rule(const WeightExpr& expr);

/// Rational/infinity arithmetic used by interpretations. Products with zero
/// are zero before infinity applies; x/0 = 0, x/inf = 0, inf/inf = 1.
Weight wq_mul(const Weight& a, const Weight& b);
Weight wq_div(const Weight& a, const Weight& b);
Weight wq_min(const Weight& a, const Weight& b);
Weight wq_max(const Weight& a, const Weight& b);

}  // namespace wfsos
