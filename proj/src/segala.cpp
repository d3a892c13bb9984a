#include "wfsos/segala.hpp"

#include <algorithm>
#include <set>

namespace wfsos {

namespace {

bool has_weightfn_var(TermPtr t) {
    if (t->is_var) return t->var_kind == VarKind::weightfn;
    for (TermPtr c : t->children)
        if (has_weightfn_var(c)) return true;
    return false;
}

void count_fn_occurrences(TermPtr t, std::map<std::string, int>& counts) {
    if (t->is_var) {
        if (t->var_kind == VarKind::weightfn) ++counts[t->name];
        return;
    }
    for (TermPtr c : t->children) count_fn_occurrences(c, counts);
}

}  // namespace

std::vector<std::string> validate_segala(const SegalaGsosSpec& s) {
    std::vector<std::string> out;
    for (const auto& r : s.rules) {
        Weight sum = Weight::rat(0);
        const auto& m = WeightMonoid::builtin("nnrat");
        for (const auto& [w, t] : r.target) {
            if (w.is_zero() || w.is_inf() || Weight::rat(1) < w)
                out.push_back(r.name + ":weight-outside-unit-interval:" + w.str());
            sum = m.add(sum, w);
        }
        if (!(sum == Weight::rat(1))) out.push_back(r.name + ":weights-sum:" + sum.str());

        std::set<std::string> fnvars;
        for (const auto& p : r.positives) fnvars.insert(p.var);
        for (const auto& [phi, y] : r.supports)
            if (!fnvars.count(phi)) out.push_back(r.name + ":support-var-unbound:" + phi);
        if (!s.sigma.find(r.op)) out.push_back(r.name + ":unknown-operator:" + r.op);
    }
    return out;
}

WfsosSpec translate_segala(const SegalaGsosSpec& s, TermPool& pool) {
    WfsosSpec spec;
    spec.monoid = WeightMonoid::builtin("nnrat");
    spec.labels = s.labels;
    spec.sigma = s.sigma;
    spec.constants = s.constants;

    spec.theta.kind = Signature::Kind::weight;
    std::set<std::string> theta_ops;
    auto ensure_theta = [&](const OpSchema& op, const InterpBinding& b) {
        if (theta_ops.insert(op.name).second) {
            spec.theta.add(op);
            spec.interp_bindings.push_back(b);
        }
    };

    ensure_theta({"empty", 0, {}}, {"empty", "zero", {}, std::nullopt});
    ensure_theta({"colour", 1, {ParamKind::nat}}, {"colour", "colour", {}, std::nullopt});

    // Mirrors a target summand into the weight signature: the spine above
    // distribution variables becomes independent-product operators, each
    // variable occurrence gets its own colour.
    int colour_counter = 0;
    std::function<TermPtr(TermPtr, const std::map<std::string, int>&)> mirror =
        [&](TermPtr t, const std::map<std::string, int>& dup) -> TermPtr {
        if (t->is_var && t->var_kind == VarKind::weightfn) {
            auto it = dup.find(t->name);
            if (it != dup.end() && it->second > 1) {
                ++colour_counter;
                return pool.op("colour", {ParamValue::mk_nat(colour_counter)},
                               {pool.var(VarKind::weightfn, t->name)});
            }
            return t;
        }
        if (!has_weightfn_var(t)) return t;  // pure process subterm stays a leaf
        const OpSchema* op = s.sigma.find(t->name);
        std::string pname = "p_" + t->name;
        ensure_theta({pname, op ? op->arity : (int)t->children.size(),
                      op ? op->params : std::vector<ParamKind>{}},
                     {pname, "independent_product", {t->name}, std::nullopt});
        std::vector<TermPtr> kids;
        for (TermPtr c : t->children) kids.push_back(mirror(c, dup));
        return pool.op(pname, t->params, std::move(kids));
    };

    for (const auto& r : s.rules) {
        RuleSchema schema;
        schema.name = r.name;
        schema.op = r.op;
        schema.op_params = r.op_params;
        schema.arity = r.arity;
        schema.arg_vars = r.arg_vars;
        schema.wildcard.assign((std::size_t)r.arity, "");
        schema.positives = r.positives;
        schema.negatives = r.negatives;
        for (const auto& [phi, y] : r.supports)
            schema.supports.push_back({FnVarRef::mk_plain(phi), y});
        schema.conds = r.conds;
        schema.concl_label = r.concl_label;

        std::map<std::string, int> dup;
        for (const auto& [w, t] : r.target) count_fn_occurrences(t, dup);
        colour_counter = 0;

        std::size_t m = r.target.size();
        std::string cc = "cc" + std::to_string(m);
        std::vector<ParamKind> ccparams((std::size_t)m, ParamKind::rate);
        ensure_theta({cc, (int)m, ccparams}, {cc, "convex_combination", {}, std::nullopt});

        std::vector<ParamValue> ws;
        std::vector<TermPtr> parts;
        for (const auto& [w, t] : r.target) {
            ws.push_back(ParamValue::mk_rate(w));
            parts.push_back(mirror(t, dup));
        }
        schema.target = pool.op(cc, std::move(ws), std::move(parts));
        spec.schemas.push_back(std::move(schema));
    }

    spec.interp_bindings.push_back({"base", "dirac", {"1"}, std::nullopt});
    build_interpretation(spec);
    return spec;
}

}  // namespace wfsos
