#include "wfsos/wgsos.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "wfsos/interp.hpp"

namespace wfsos {

namespace {

void count_var_occurrences(TermPtr t, std::map<std::string, int>& counts) {
    if (t->is_var) {
        if (t->var_kind == VarKind::process) ++counts[t->name];
        return;
    }
    for (TermPtr c : t->children) count_var_occurrences(c, counts);
}

Weight eval_beta(const WgsosBeta& beta, const std::map<std::string, Weight>& us,
                 const std::map<std::string, Weight>& totals, const Weight& coeff) {
    switch (beta.kind) {
        case WgsosBeta::Kind::constant: return coeff;
        case WgsosBeta::Kind::scaled_product: {
            Weight w = coeff;
            for (const auto& u : beta.uvars) w = wq_mul(w, us.at(u));
            return w;
        }
        case WgsosBeta::Kind::min_law: {
            Weight w1 = totals.at(beta.w1), w2 = totals.at(beta.w2);
            if (w1.is_zero() || w2.is_zero()) return Weight::rat(0);
            return wq_mul(wq_mul(wq_div(us.at(beta.u1), w1), wq_div(us.at(beta.u2), w2)),
                          wq_min(w1, w2));
        }
    }
    return Weight::rat(0);
}

}  // namespace

std::vector<std::string> validate_wgsos(const WGsosSpec& s, std::uint64_t seed, int samples) {
    std::vector<std::string> out;
    std::mt19937_64 rng(seed);
    for (const auto& r : s.rules) {
        if (!s.sigma.find(r.op)) out.push_back(r.name + ":unknown-operator:" + r.op);
        if (!r.target) {
            out.push_back(r.name + ":missing-target");
            continue;
        }

        std::set<std::string> xs(r.arg_vars.begin(), r.arg_vars.end());
        std::set<std::string> ys, us;
        for (const auto& tp : r.trans) {
            if (!ys.insert(tp.yvar).second) out.push_back(r.name + ":duplicate-var:" + tp.yvar);
            if (!us.insert(tp.uvar).second) out.push_back(r.name + ":duplicate-var:" + tp.uvar);
        }

        std::map<std::string, int> counts;
        count_var_occurrences(r.target, counts);
        for (const auto& y : ys) {
            auto it = counts.find(y);
            if (it == counts.end())
                out.push_back(r.name + ":target-misses-reached-state:" + y);
            else if (it->second != 1)
                out.push_back(r.name + ":reached-state-duplicated:" + y);
        }
        for (const auto& [v, n] : counts)
            if (!xs.count(v) && !ys.count(v)) out.push_back(r.name + ":target-unbound-var:" + v);

        // weighted premises need a nonzero total where one is pinned
        for (const auto& tp : r.trans)
            for (const auto& tot : r.totals)
                if (!tot.bind && tot.arg == tp.arg && !tot.label.is_var &&
                    !tp.label.is_var && tot.label.name == tp.label.name && tot.w.is_zero())
                    out.push_back(r.name + ":zero-total-on-weighted-premise");

        if (r.beta.kind == WgsosBeta::Kind::min_law) {
            std::set<std::string> bound;
            for (const auto& tot : r.totals)
                if (tot.bind) bound.insert(tot.bindvar);
            if (!bound.count(r.beta.w1) || !bound.count(r.beta.w2))
                out.push_back(r.name + ":min-law-totals-unbound");
            if (!us.count(r.beta.u1) || !us.count(r.beta.u2))
                out.push_back(r.name + ":min-law-weights-unbound");
            if (r.target->is_var || r.target->children.size() != 2 ||
                !r.target->children[0]->is_var || !r.target->children[1]->is_var)
                out.push_back(r.name + ":min-law-target-shape");
        }
        if (r.beta.kind == WgsosBeta::Kind::scaled_product)
            for (const auto& u : r.beta.uvars)
                if (!us.count(u)) out.push_back(r.name + ":beta-unbound-weight:" + u);

        // sampled multiadditivity in each premise-weight coordinate
        std::vector<std::string> uvars(us.begin(), us.end());
        std::uniform_int_distribution<int> num(0, 6), den(1, 4);
        auto draw = [&]() { return Weight::rat(Rational(num(rng), den(rng))); };
        Weight coeff = r.beta.coeff_is_var ? draw() : r.beta.coeff;
        for (int it = 0; it < samples && !uvars.empty(); ++it) {
            std::map<std::string, Weight> base_u, totals;
            for (const auto& u : uvars) base_u[u] = draw();
            for (const auto& tot : r.totals)
                if (tot.bind) totals[tot.bindvar] = Weight::rat(Rational(num(rng) + 1, den(rng)));
            std::string pick = uvars[rng() % uvars.size()];
            Weight delta = draw();
            auto left = base_u;
            left[pick] = s.monoid.add(left[pick], delta);
            auto right = base_u;
            right[pick] = delta;
            Weight lhs = eval_beta(r.beta, left, totals, coeff);
            Weight rhs = s.monoid.add(eval_beta(r.beta, base_u, totals, coeff),
                                      eval_beta(r.beta, right, totals, coeff));
            if (!(lhs == rhs)) {
                out.push_back(r.name + ":beta-not-multiadditive");
                break;
            }
        }
    }
    return out;
}

namespace {

// One enumerated occurrence of a source rule with all label variables fixed.
struct ConcreteInstance {
    const WgsosRule* rule;
    std::map<std::string, std::string> labels;          // label var -> label
    std::map<std::string, std::string> rate_rename;     // source rate var -> canonical
    std::vector<ParamValue> signature;                  // rate slots as varrefs
    std::string concl;
};

std::optional<std::string> resolve(const LabelExpr& e,
                                   const std::map<std::string, std::string>& a) {
    if (!e.is_var) return e.name;
    auto it = a.find(e.name);
    if (it == a.end()) return std::nullopt;
    return it->second;
}

bool conds_hold(const std::vector<SideCond>& conds,
                const std::map<std::string, std::string>& a) {
    for (const auto& c : conds) {
        auto lhs = resolve(c.lhs, a);
        if (!lhs) return false;
        switch (c.kind) {
            case SideCond::Kind::eq:
            case SideCond::Kind::neq: {
                auto rhs = resolve(c.rhs, a);
                if (!rhs) return false;
                if ((c.kind == SideCond::Kind::eq) != (*lhs == *rhs)) return false;
                break;
            }
            case SideCond::Kind::in_set:
            case SideCond::Kind::notin_set: {
                bool in = std::find(c.set_items.begin(), c.set_items.end(), *lhs) !=
                          c.set_items.end();
                if ((c.kind == SideCond::Kind::in_set) != in) return false;
                break;
            }
        }
    }
    return true;
}

void collect_rule_label_vars(const WgsosRule& r, const Signature& sigma,
                             std::set<std::string>& vars) {
    const OpSchema* op = sigma.find(r.op);
    for (std::size_t i = 0; i < r.op_params.size(); ++i)
        if (r.op_params[i].bind && op && op->params[i] == ParamKind::label)
            vars.insert(r.op_params[i].var);
    auto add = [&](const LabelExpr& e) {
        if (e.is_var) vars.insert(e.name);
    };
    for (const auto& t : r.totals) add(t.label);
    for (const auto& t : r.trans) add(t.label);
    for (const auto& c : r.conds) {
        add(c.lhs);
        if (c.kind == SideCond::Kind::eq || c.kind == SideCond::Kind::neq) add(c.rhs);
    }
    add(r.concl_label);
}

// Substitutes label varrefs in a sigma-term's parameters.
TermPtr subst_label_params(TermPtr t, const std::map<std::string, std::string>& labels,
                           const std::map<std::string, std::string>& rate_rename,
                           TermPool& pool) {
    if (t->is_var) return t;
    std::vector<ParamValue> params;
    for (const auto& p : t->params) {
        if (p.kind == ParamKind::varref) {
            if (auto it = labels.find(p.label); it != labels.end()) {
                params.push_back(ParamValue::mk_label(it->second));
                continue;
            }
            if (auto it = rate_rename.find(p.label); it != rate_rename.end()) {
                params.push_back(ParamValue::mk_varref(it->second));
                continue;
            }
        }
        params.push_back(p);
    }
    std::vector<TermPtr> kids;
    for (TermPtr c : t->children)
        kids.push_back(subst_label_params(c, labels, rate_rename, pool));
    return pool.op(t->name, std::move(params), std::move(kids));
}

std::string signature_key(const std::string& op, const std::vector<ParamValue>& sig,
                          const std::string& concl) {
    std::ostringstream os;
    os << op;
    for (const auto& p : sig) os << '\x01' << p.str();
    os << '\x02' << concl;
    return os.str();
}

}  // namespace

WfsosSpec translate_wgsos(const WGsosSpec& s, TermPool& pool) {
    WfsosSpec spec;
    spec.monoid = s.monoid;
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
    ensure_theta({"wsum", 2, {}}, {"wsum", "pointwise_sum", {}, std::nullopt});
    ensure_theta({"scale", 1, {ParamKind::rate}}, {"scale", "scale", {}, std::nullopt});
    ensure_theta({"guard", 2, {ParamKind::rate}}, {"guard", "total_guard", {}, std::nullopt});
    ensure_theta({"colour", 1, {ParamKind::nat}}, {"colour", "colour", {}, std::nullopt});

    // 1. enumerate concrete label assignments of every source rule
    std::map<std::string, std::vector<ConcreteInstance>> groups;
    std::set<std::string> all_signatures;  // op + params, without conclusion

    auto signature_of = [&](const WgsosRule& r, const std::map<std::string, std::string>& lbls,
                            std::map<std::string, std::string>& rate_rename) {
        const OpSchema* op = s.sigma.find(r.op);
        std::vector<ParamValue> sig;
        for (std::size_t i = 0; i < r.op_params.size(); ++i) {
            const auto& pat = r.op_params[i];
            if (!pat.bind) {
                sig.push_back(pat.value);
                continue;
            }
            switch (op->params[i]) {
                case ParamKind::label: sig.push_back(ParamValue::mk_label(lbls.at(pat.var))); break;
                case ParamKind::rate: {
                    std::string canon = "r" + std::to_string(i);
                    rate_rename[pat.var] = canon;
                    sig.push_back(ParamValue::mk_varref(canon));
                    break;
                }
                default: sig.push_back(pat.value); break;
            }
        }
        return sig;
    };

    for (const auto& r : s.rules) {
        std::set<std::string> vars;
        collect_rule_label_vars(r, s.sigma, vars);
        std::vector<std::string> free(vars.begin(), vars.end());
        std::vector<std::size_t> pick(free.size(), 0);
        while (true) {
            std::map<std::string, std::string> lbls;
            for (std::size_t i = 0; i < free.size(); ++i) lbls[free[i]] = s.labels[pick[i]];
            if (conds_hold(r.conds, lbls)) {
                ConcreteInstance ci;
                ci.rule = &r;
                ci.labels = lbls;
                ci.signature = signature_of(r, lbls, ci.rate_rename);
                ci.concl = *resolve(r.concl_label, lbls);
                std::ostringstream sigkey;
                sigkey << r.op;
                for (const auto& p : ci.signature) sigkey << '\x01' << p.str();
                all_signatures.insert(sigkey.str());
                groups[signature_key(r.op, ci.signature, ci.concl)].push_back(std::move(ci));
            }
            if (free.empty()) break;
            std::size_t i = 0;
            for (; i < free.size(); ++i) {
                if (++pick[i] < s.labels.size()) break;
                pick[i] = 0;
            }
            if (i == free.size()) break;
        }
    }

    // 2. collect every operator shape we must cover: shapes from rules plus
    // the parameterless / rule-free operators (labelsets only from rules and
    // constants)
    struct Shape {
        std::string op;
        std::vector<ParamValue> sig;
    };
    std::vector<Shape> shapes;
    std::set<std::string> shape_keys;
    auto add_shape = [&](const std::string& op, std::vector<ParamValue> sig) {
        std::ostringstream key;
        key << op;
        for (const auto& p : sig) key << '\x01' << p.str();
        if (shape_keys.insert(key.str()).second) shapes.push_back({op, std::move(sig)});
    };

    for (const auto& r : s.rules) {
        std::set<std::string> vars;
        collect_rule_label_vars(r, s.sigma, vars);
        std::vector<std::string> free(vars.begin(), vars.end());
        std::vector<std::size_t> pick(free.size(), 0);
        while (true) {
            std::map<std::string, std::string> lbls;
            for (std::size_t i = 0; i < free.size(); ++i) lbls[free[i]] = s.labels[pick[i]];
            std::map<std::string, std::string> rr;
            add_shape(r.op, signature_of(r, lbls, rr));
            if (free.empty()) break;
            std::size_t i = 0;
            for (; i < free.size(); ++i) {
                if (++pick[i] < s.labels.size()) break;
                pick[i] = 0;
            }
            if (i == free.size()) break;
        }
    }
    // operators without any rule (and labelset instances from constants)
    std::function<void(TermPtr)> scan_term = [&](TermPtr t) {
        if (t->is_var) return;
        if (s.sigma.find(t->name)) {
            bool ground_params = true;
            for (const auto& p : t->params)
                if (p.kind == ParamKind::varref) ground_params = false;
            if (ground_params) {
                std::vector<ParamValue> sig;
                const OpSchema* op = s.sigma.find(t->name);
                for (std::size_t i = 0; i < t->params.size(); ++i) {
                    if (op->params[i] == ParamKind::rate)
                        sig.push_back(ParamValue::mk_varref("r" + std::to_string(i)));
                    else
                        sig.push_back(t->params[i]);
                }
                add_shape(t->name, std::move(sig));
            }
        }
        for (TermPtr c : t->children) scan_term(c);
    };
    for (const auto& [n, def] : s.constants) scan_term(def);
    for (const auto& op : s.sigma.ops) {
        if (op.params.empty()) add_shape(op.name, {});
        std::vector<ParamValue> sig;
        bool simple = true;
        for (std::size_t i = 0; i < op.params.size(); ++i) {
            if (op.params[i] == ParamKind::rate)
                sig.push_back(ParamValue::mk_varref("r" + std::to_string(i)));
            else if (op.params[i] == ParamKind::label)
                simple = false;  // label combinations come from the rules
            else
                simple = false;
        }
        if (simple && !op.params.empty()) add_shape(op.name, std::move(sig));
    }

    // 3. emit one merged schema per (shape, conclusion label)
    auto fnref = [&](int arg, const std::string& label) {
        return pool.var(VarKind::weightfn,
                        "F" + std::to_string(arg + 1) + "[" + label + "]");
    };

    int colour_counter = 0;
    for (const auto& shape : shapes) {
        const OpSchema* op = s.sigma.find(shape.op);
        for (const auto& c : s.labels) {
            RuleSchema schema;
            schema.name = "m_" + shape.op + "_" + c;
            schema.op = shape.op;
            for (const auto& p : shape.sig) {
                if (p.kind == ParamKind::varref)
                    schema.op_params.push_back({true, p.label, {}});
                else
                    schema.op_params.push_back({false, "", p});
            }
            schema.arity = op->arity;
            for (int i = 0; i < op->arity; ++i)
                schema.arg_vars.push_back("x" + std::to_string(i + 1));
            for (int i = 0; i < op->arity; ++i)
                schema.wildcard.push_back("F" + std::to_string(i + 1));
            schema.concl_label = LabelExpr::lit(c);

            TermPtr acc = nullptr;
            auto git = groups.find(signature_key(shape.op, shape.sig, c));
            if (git != groups.end()) {
                for (const auto& ci : git->second) {
                    const WgsosRule& r = *ci.rule;
                    // y variable -> the function variable it samples from
                    std::map<std::string, std::pair<int, std::string>> ybind;
                    std::map<std::string, std::pair<int, std::string>> ubind;
                    for (const auto& tp : r.trans) {
                        std::string lbl = *resolve(tp.label, ci.labels);
                        ybind[tp.yvar] = {tp.arg, lbl};
                        ubind[tp.uvar] = {tp.arg, lbl};
                    }

                    std::map<std::string, int> fn_occurrences;
                    for (const auto& [y, ab] : ybind)
                        ++fn_occurrences["F" + std::to_string(ab.first + 1) + "[" + ab.second +
                                         "]"];

                    // mirror of the target with reached states replaced by
                    // (coloured) function variables under product operators
                    std::function<TermPtr(TermPtr)> mirror = [&](TermPtr t) -> TermPtr {
                        if (t->is_var) {
                            auto it = ybind.find(t->name);
                            if (it == ybind.end()) return t;  // an argument variable
                            TermPtr ref = fnref(it->second.first, it->second.second);
                            std::string key = ref->name;
                            if (fn_occurrences[key] > 1) {
                                ++colour_counter;
                                return pool.op("colour",
                                               {ParamValue::mk_nat(colour_counter)}, {ref});
                            }
                            return ref;
                        }
                        bool touches = false;
                        std::function<bool(TermPtr)> touch = [&](TermPtr q) {
                            if (q->is_var) return ybind.count(q->name) > 0;
                            for (TermPtr k : q->children)
                                if (touch(k)) return true;
                            return false;
                        };
                        touches = touch(t);
                        if (!touches) return t;
                        std::string pname = "p_" + t->name;
                        const OpSchema* so = s.sigma.find(t->name);
                        ensure_theta({pname, so ? so->arity : (int)t->children.size(),
                                      so ? so->params : std::vector<ParamKind>{}},
                                     {pname, "independent_product", {t->name}, std::nullopt});
                        std::vector<TermPtr> kids;
                        for (TermPtr k : t->children) kids.push_back(mirror(k));
                        return pool.op(pname, t->params, std::move(kids));
                    };

                    TermPtr skeleton =
                        subst_label_params(r.target, ci.labels, ci.rate_rename, pool);
                    TermPtr piece = nullptr;
                    switch (r.beta.kind) {
                        case WgsosBeta::Kind::constant:
                        case WgsosBeta::Kind::scaled_product: {
                            TermPtr body = mirror(skeleton);
                            ParamValue coeff =
                                r.beta.coeff_is_var
                                    ? ParamValue::mk_varref(
                                          ci.rate_rename.at(r.beta.coeff_var))
                                    : ParamValue::mk_rate(r.beta.coeff);
                            piece = pool.op("scale", {coeff}, {body});
                            break;
                        }
                        case WgsosBeta::Kind::min_law: {
                            const auto& [a1, l1] = ubind.at(r.beta.u1);
                            const auto& [a2, l2] = ubind.at(r.beta.u2);
                            std::string g = skeleton->name;
                            std::string mlname = "ml_" + g;
                            const OpSchema* go = s.sigma.find(g);
                            ensure_theta(
                                {mlname, 2, go ? go->params : std::vector<ParamKind>{}},
                                {mlname, "coop_min_law", {g}, std::nullopt});
                            piece = pool.op(mlname, skeleton->params,
                                            {fnref(a1, l1), fnref(a2, l2)});
                            break;
                        }
                    }

                    // constant-total premises become guards around the piece
                    for (const auto& tot : r.totals) {
                        if (tot.bind) continue;
                        std::string lbl = *resolve(tot.label, ci.labels);
                        piece = pool.op("guard", {ParamValue::mk_rate(tot.w)},
                                        {fnref(tot.arg, lbl), piece});
                    }

                    acc = acc ? pool.op("wsum", {}, {acc, piece}) : piece;
                }
            }
            schema.target = acc ? acc : pool.op("empty", {}, {});
            spec.schemas.push_back(std::move(schema));
        }
    }

    spec.interp_bindings.push_back({"base", "dirac", {"1"}, std::nullopt});
    build_interpretation(spec);
    return spec;
}

}  // namespace wfsos
