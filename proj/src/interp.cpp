#include "wfsos/interp.hpp"

#include <algorithm>
#include <stdexcept>

namespace wfsos {

Weight wq_mul(const Weight& a, const Weight& b) {
    if (a.is_zero() || b.is_zero()) return Weight::rat(0);
    if (a.is_inf() || b.is_inf()) return Weight::inf();
    return Weight::rat(a.q * b.q);
}

Weight wq_div(const Weight& a, const Weight& b) {
    if (a.is_inf() && b.is_inf()) return Weight::rat(1);
    if (b.is_zero()) return Weight::rat(0);
    if (b.is_inf()) return Weight::rat(0);
    if (a.is_inf()) return Weight::inf();
    if (a.is_zero()) return Weight::rat(0);
    return Weight::rat(a.q / b.q);
}

Weight wq_min(const Weight& a, const Weight& b) {
    if (a.is_inf()) return b;
    if (b.is_inf()) return a;
    return a.q < b.q ? a : b;
}

Weight wq_max(const Weight& a, const Weight& b) {
    if (a.is_inf() || b.is_inf()) return Weight::inf();
    return a.q < b.q ? b : a;
}

Interpretation build_from_recursion(std::map<std::string, EvalRule> h, BaseRule b) {
    Interpretation interp;
    interp.ops = std::move(h);
    interp.base = std::move(b);
    return interp;
}

BaseRule dirac_base(Weight w) {
    return [w](TermPtr t, const EvalContext&) {
        std::vector<WeightFn::Entry> entries;
        if (!w.is_zero()) entries.emplace_back(t->id, w);
        return WeightFn(std::move(entries));
    };
}

namespace {

Weight rate_param(const TermNode& op, std::size_t index = 0) {
    std::size_t seen = 0;
    for (const auto& p : op.params)
        if (p.kind == ParamKind::rate) {
            if (seen == index) return p.rate;
            ++seen;
        }
    throw std::invalid_argument("interp: operator " + op.name + " lacks rate parameter");
}

std::vector<Weight> rate_params(const TermNode& op) {
    std::vector<Weight> out;
    for (const auto& p : op.params)
        if (p.kind == ParamKind::rate) out.push_back(p.rate);
    return out;
}

TermPtr single_support_term(const WeightFn& fn, const EvalContext& ctx, const char* who) {
    if (fn.support_size() != 1)
        throw std::invalid_argument(std::string(who) + ": expected a one-point function");
    return ctx.pool->by_id(fn.entries()[0].first);
}

// Builds target_op{theta-op params}(children terms).
TermPtr build_target(const std::string& target_op, const TermNode& theta_op,
                     const std::vector<TermPtr>& children, const EvalContext& ctx) {
    return ctx.pool->op(target_op, theta_op.params, children);
}

EvalRule make_zero() {
    return [](const TermNode&, const std::vector<WeightFn>&, const EvalContext&) {
        return WeightFn();
    };
}

EvalRule make_reshape() {
    return [](const TermNode& op, const std::vector<WeightFn>& ch, const EvalContext&) {
        if (ch.size() != 1) throw std::invalid_argument("reshape: arity 1 expected");
        const auto& inner = ch[0];
        if (inner.empty()) return WeightFn();
        Weight r = rate_param(op);
        Weight share = wq_div(r, Weight::rat((std::int64_t)inner.support_size()));
        std::vector<WeightFn::Entry> entries;
        for (const auto& [k, w] : inner.entries())
            if (!share.is_zero()) entries.emplace_back(k, share);
        return WeightFn(std::move(entries));
    };
}

EvalRule make_pointwise_sum() {
    return [](const TermNode&, const std::vector<WeightFn>& ch, const EvalContext& ctx) {
        WeightFnBuilder b(*ctx.monoid);
        for (const auto& fn : ch)
            for (const auto& [k, w] : fn.entries()) b.add(k, w);
        return b.build();
    };
}

EvalRule make_coop_min_law(const std::string& target_op) {
    return [target_op](const TermNode& op, const std::vector<WeightFn>& ch,
                       const EvalContext& ctx) {
        if (ch.size() != 2) throw std::invalid_argument("coop_min_law: arity 2 expected");
        Weight t1 = total_weight(ch[0], *ctx.monoid);
        Weight t2 = total_weight(ch[1], *ctx.monoid);
        if (t1.is_zero() || t2.is_zero()) return WeightFn();
        Weight m = wq_min(t1, t2);
        WeightFnBuilder b(*ctx.monoid);
        for (const auto& [k1, w1] : ch[0].entries())
            for (const auto& [k2, w2] : ch[1].entries()) {
                Weight w = wq_mul(wq_mul(wq_div(w1, t1), wq_div(w2, t2)), m);
                TermPtr t = build_target(target_op, op, {ctx.pool->by_id(k1), ctx.pool->by_id(k2)},
                                         ctx);
                b.add(t->id, w);
            }
        return b.build();
    };
}

EvalRule make_coop_product_law(const std::string& target_op) {
    return [target_op](const TermNode& op, const std::vector<WeightFn>& ch,
                       const EvalContext& ctx) {
        if (ch.size() != 2) throw std::invalid_argument("coop_product_law: arity 2 expected");
        WeightFnBuilder b(*ctx.monoid);
        for (const auto& [k1, w1] : ch[0].entries())
            for (const auto& [k2, w2] : ch[1].entries()) {
                TermPtr t = build_target(target_op, op, {ctx.pool->by_id(k1), ctx.pool->by_id(k2)},
                                         ctx);
                b.add(t->id, wq_mul(w1, w2));
            }
        return b.build();
    };
}

EvalRule make_convex_combination() {
    return [](const TermNode& op, const std::vector<WeightFn>& ch, const EvalContext& ctx) {
        std::vector<Weight> ws = rate_params(op);
        if (ws.size() != ch.size())
            throw std::invalid_argument("convex_combination: one rate per child expected");
        WeightFnBuilder b(*ctx.monoid);
        for (std::size_t i = 0; i < ch.size(); ++i)
            for (const auto& [k, w] : ch[i].entries()) b.add(k, wq_mul(ws[i], w));
        return b.build();
    };
}

EvalRule make_colour() {
    return [](const TermNode&, const std::vector<WeightFn>& ch, const EvalContext&) {
        if (ch.size() != 1) throw std::invalid_argument("colour: arity 1 expected");
        return ch[0];
    };
}

EvalRule make_scale() {
    return [](const TermNode& op, const std::vector<WeightFn>& ch, const EvalContext& ctx) {
        if (ch.size() != 1) throw std::invalid_argument("scale: arity 1 expected");
        Weight r = rate_param(op);
        WeightFnBuilder b(*ctx.monoid);
        for (const auto& [k, w] : ch[0].entries()) b.add(k, wq_mul(r, w));
        return b.build();
    };
}

EvalRule make_total_guard() {
    return [](const TermNode& op, const std::vector<WeightFn>& ch, const EvalContext& ctx) {
        if (ch.size() != 2) throw std::invalid_argument("total_guard: arity 2 expected");
        Weight want = rate_param(op);
        Weight have = total_weight(ch[0], *ctx.monoid);
        return have == want ? ch[1] : WeightFn();
    };
}

EvalRule make_point_restrict() {
    return [](const TermNode&, const std::vector<WeightFn>& ch, const EvalContext& ctx) {
        if (ch.size() != 2) throw std::invalid_argument("point_restrict: arity 2 expected");
        TermPtr at = single_support_term(ch[1], ctx, "point_restrict");
        Weight w = ch[0].at(at->id, *ctx.monoid);
        std::vector<WeightFn::Entry> entries;
        if (!w.is_zero()) entries.emplace_back(at->id, w);
        return WeightFn(std::move(entries));
    };
}

EvalRule make_independent_product(const std::string& target_op) {
    return [target_op](const TermNode& op, const std::vector<WeightFn>& ch,
                       const EvalContext& ctx) {
        // All combinations of one support point per child; weights multiply.
        WeightFnBuilder b(*ctx.monoid);
        std::vector<std::size_t> idx(ch.size(), 0);
        for (const auto& fn : ch)
            if (fn.empty()) return WeightFn();
        while (true) {
            Weight w = Weight::rat(1);
            std::vector<TermPtr> kids;
            kids.reserve(ch.size());
            for (std::size_t i = 0; i < ch.size(); ++i) {
                const auto& [k, wi] = ch[i].entries()[idx[i]];
                w = wq_mul(w, wi);
                kids.push_back(ctx.pool->by_id(k));
            }
            b.add(build_target(target_op, op, kids, ctx)->id, w);
            std::size_t i = 0;
            for (; i < ch.size(); ++i) {
                if (++idx[i] < ch[i].entries().size()) break;
                idx[i] = 0;
            }
            if (i == ch.size()) break;
        }
        return b.build();
    };
}

EvalRule make_multiadditive_apply(const std::string& target_op) {
    return [target_op](const TermNode& op, const std::vector<WeightFn>& ch,
                       const EvalContext& ctx) {
        if (ch.empty()) throw std::invalid_argument("multiadditive_apply: needs a target child");
        TermPtr t = single_support_term(ch[0], ctx, "multiadditive_apply");
        Weight w = rate_param(op);
        for (std::size_t i = 1; i < ch.size(); ++i)
            w = wq_mul(w, total_weight(ch[i], *ctx.monoid));
        TermPtr built = target_op.empty() ? t : build_target(target_op, op, {t}, ctx);
        std::vector<WeightFn::Entry> entries;
        if (!w.is_zero()) entries.emplace_back(built->id, w);
        return WeightFn(std::move(entries));
    };
}

}  // namespace

EvalRule builtin(const std::string& name, const std::vector<std::string>& args) {
    auto arg0 = [&](const char* who) {
        if (args.empty())
            throw std::invalid_argument(std::string(who) + ": target operator argument required");
        return args[0];
    };
    if (name == "zero") return make_zero();
    if (name == "reshape") return make_reshape();
    if (name == "pointwise_sum") return make_pointwise_sum();
    if (name == "coop_min_law") return make_coop_min_law(arg0("coop_min_law"));
    if (name == "coop_product_law") return make_coop_product_law(arg0("coop_product_law"));
    if (name == "convex_combination") return make_convex_combination();
    if (name == "colour") return make_colour();
    if (name == "scale") return make_scale();
    if (name == "total_guard") return make_total_guard();
    if (name == "point_restrict") return make_point_restrict();
    if (name == "independent_product") return make_independent_product(arg0("independent_product"));
    if (name == "multiadditive_apply")
        return make_multiadditive_apply(args.empty() ? "" : args[0]);
    throw std::invalid_argument("unknown builtin interpretation rule: " + name);
}

std::vector<std::string> builtin_names() {
    return {"zero",           "reshape",      "pointwise_sum",      "coop_min_law",
            "coop_product_law", "convex_combination", "colour",     "scale",
            "total_guard",    "point_restrict", "independent_product", "multiadditive_apply"};
}

namespace {

bool contains_weightfn_var(TermPtr t) {
    if (t->is_var) return t->var_kind == VarKind::weightfn;
    for (TermPtr c : t->children)
        if (contains_weightfn_var(c)) return true;
    return false;
}

}  // namespace

WeightFn interpret(TermPtr psi, const std::map<std::string, WeightFn>& env,
                   const Interpretation& interp, const EvalContext& ctx) {
    if (psi->is_var && psi->var_kind == VarKind::weightfn) {
        auto it = env.find(psi->name);
        if (it == env.end())
            throw std::invalid_argument("interpret: unbound weight-function variable %" +
                                        psi->name);
        return it->second;
    }
    if (psi->is_op() && interp.covers(psi->name)) {
        std::vector<WeightFn> children;
        children.reserve(psi->children.size());
        for (TermPtr c : psi->children) children.push_back(interpret(c, env, interp, ctx));
        return interp.ops.at(psi->name)(*psi, children, ctx);
    }
    // Process leaf: the whole subtree is a sigma-term.
    if (contains_weightfn_var(psi))
        throw std::invalid_argument("interpret: weight-function variable inside a process term");
    if (!interp.base) throw std::invalid_argument("interpret: no base embedding configured");
    return interp.base(psi, ctx);
}

WeightExpr WeightExpr::constant_of(Weight w) {
    WeightExpr e;
    e.op = Op::constant;
    e.value = w;
    return e;
}
WeightExpr WeightExpr::point_of(int child) {
    WeightExpr e;
    e.op = Op::point;
    e.child = child;
    return e;
}
WeightExpr WeightExpr::total_of(int child) {
    WeightExpr e;
    e.op = Op::total;
    e.child = child;
    return e;
}
WeightExpr WeightExpr::support_size_of(int child) {
    WeightExpr e;
    e.op = Op::support_size;
    e.child = child;
    return e;
}
WeightExpr WeightExpr::apply(Op op, std::vector<WeightExpr> args) {
    WeightExpr e;
    e.op = op;
    e.args = std::move(args);
    return e;
}

namespace {

Weight eval_expr(const WeightExpr& e, std::int32_t point, const std::vector<WeightFn>& ch,
                 const EvalContext& ctx) {
    switch (e.op) {
        case WeightExpr::Op::constant: return e.value;
        case WeightExpr::Op::point: return ch.at((std::size_t)e.child).at(point, *ctx.monoid);
        case WeightExpr::Op::total: return total_weight(ch.at((std::size_t)e.child), *ctx.monoid);
        case WeightExpr::Op::support_size:
            return Weight::rat((std::int64_t)ch.at((std::size_t)e.child).support_size());
        default: break;
    }
    if (e.args.empty()) throw std::invalid_argument("weight expression: missing operands");
    Weight acc = eval_expr(e.args[0], point, ch, ctx);
    for (std::size_t i = 1; i < e.args.size(); ++i) {
        Weight rhs = eval_expr(e.args[i], point, ch, ctx);
        switch (e.op) {
            case WeightExpr::Op::add: acc = ctx.monoid->add(acc, rhs); break;
            case WeightExpr::Op::mul: acc = wq_mul(acc, rhs); break;
            case WeightExpr::Op::div: acc = wq_div(acc, rhs); break;
            case WeightExpr::Op::min: acc = wq_min(acc, rhs); break;
            case WeightExpr::Op::max: acc = wq_max(acc, rhs); break;
            default: throw std::invalid_argument("weight expression: bad operator");
        }
    }
    return acc;
}

}  // namespace

EvalRule expr_rule(const WeightExpr& expr) {
    return [expr](const TermNode&, const std::vector<WeightFn>& ch, const EvalContext& ctx) {
        std::vector<std::int32_t> points;
        for (const auto& fn : ch)
            for (const auto& [k, w] : fn.entries()) points.push_back(k);
        std::sort(points.begin(), points.end());
        points.erase(std::unique(points.begin(), points.end()), points.end());
        WeightFnBuilder b(*ctx.monoid);
        for (std::int32_t p : points) b.add(p, eval_expr(expr, p, ch, ctx));
        return b.build();
    };
}

}  // namespace wfsos
