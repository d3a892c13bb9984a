#include "wfsos/rules.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace wfsos {

std::vector<std::string> WfsosRule::premise_labels(int arg) const {
    std::vector<std::string> out;
    for (const auto& p : positives)
        if (p.arg == arg) out.push_back(p.label);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool match_trigger(const WfsosRule& r, const Trigger& t) {
    if ((int)t.enabled.size() != r.arity) return false;
    for (int i = 0; i < r.arity; ++i) {
        auto want = r.premise_labels(i);
        auto have = t.enabled[(std::size_t)i];
        std::sort(have.begin(), have.end());
        if (want != have) return false;
    }
    for (const auto& tp : r.totals) {
        bool offered = false;
        for (const auto& w : t.totals)
            if (w == tp.w) {
                offered = true;
                break;
            }
        if (!offered) return false;
    }
    return true;
}

void build_interpretation(WfsosSpec& spec) {
    std::map<std::string, EvalRule> h;
    spec.zero_op.clear();
    BaseRule base = dirac_base(spec.base_weight);
    for (const auto& b : spec.interp_bindings) {
        if (b.theta_op == "base") {
            if (b.builtin_name != "dirac")
                throw std::invalid_argument("interpretation: base must be dirac(<weight>)");
            if (b.args.size() != 1)
                throw std::invalid_argument("interpretation: dirac needs one weight argument");
            auto w = Weight::parse(b.args[0]);
            if (!w) throw std::invalid_argument("interpretation: bad dirac weight " + b.args[0]);
            spec.base_weight = *w;
            base = dirac_base(*w);
            continue;
        }
        if (b.expr) {
            h[b.theta_op] = expr_rule(*b.expr);
            continue;
        }
        h[b.theta_op] = builtin(b.builtin_name, b.args);
        if (b.builtin_name == "zero") spec.zero_op = b.theta_op;
    }
    spec.interp = build_from_recursion(std::move(h), std::move(base));
}

namespace {

struct Assignment {
    std::map<std::string, std::string> labels;     // label vars
    std::map<std::string, Weight> rates;           // rate binders
    std::map<std::string, std::vector<std::string>> labelsets;
};

std::optional<std::string> resolve_label(const LabelExpr& e, const Assignment& a) {
    if (!e.is_var) return e.name;
    auto it = a.labels.find(e.name);
    if (it == a.labels.end()) return std::nullopt;
    return it->second;
}

bool cond_holds(const SideCond& c, const Assignment& a) {
    auto lhs = resolve_label(c.lhs, a);
    if (!lhs) return false;
    switch (c.kind) {
        case SideCond::Kind::eq:
        case SideCond::Kind::neq: {
            auto rhs = resolve_label(c.rhs, a);
            if (!rhs) return false;
            return (c.kind == SideCond::Kind::eq) == (*lhs == *rhs);
        }
        case SideCond::Kind::in_set:
        case SideCond::Kind::notin_set: {
            std::vector<std::string> items = c.set_items;
            if (c.set_is_var) {
                auto it = a.labelsets.find(c.set_var);
                if (it == a.labelsets.end()) return false;
                items = it->second;
            }
            bool in = std::find(items.begin(), items.end(), *lhs) != items.end();
            return (c.kind == SideCond::Kind::in_set) == in;
        }
    }
    return false;
}

void collect_label_vars(const RuleSchema& s, std::set<std::string>& out) {
    auto add = [&](const LabelExpr& e) {
        if (e.is_var) out.insert(e.name);
    };
    for (const auto& p : s.positives) add(p.label);
    for (const auto& n : s.negatives) add(n.label);
    for (const auto& t : s.totals)
        if (!t.var.family.empty()) add(t.var.index);
    for (const auto& sp : s.supports)
        if (!sp.var.family.empty()) add(sp.var.index);
    for (const auto& c : s.conds) {
        add(c.lhs);
        if (c.kind == SideCond::Kind::eq || c.kind == SideCond::Kind::neq) add(c.rhs);
    }
    add(s.concl_label);
    // label varrefs inside the target (family indices and operator params)
    std::function<void(TermPtr)> walk = [&](TermPtr t) {
        if (t->is_var) {
            if (t->var_kind == VarKind::weightfn) {
                auto br = t->name.find('[');
                if (br != std::string::npos && t->name.size() > br + 2 &&
                    t->name[br + 1] == '$')
                    out.insert(t->name.substr(br + 2, t->name.size() - br - 3));
            }
            return;
        }
        for (const auto& p : t->params)
            if (p.kind == ParamKind::varref) out.insert(p.label);
        for (TermPtr c : t->children) walk(c);
    };
    if (s.target) walk(s.target);
}

std::string family_var_name(const std::string& family, const std::string& label) {
    return family + "[" + label + "]";
}

// Resolves a family/plain reference against the instantiated premise set.
// Returns nullopt when the referenced member does not exist (disabled label).
std::optional<std::string> resolve_fnvar(const FnVarRef& ref, const Assignment& a,
                                         const RuleSchema& s,
                                         const std::vector<std::vector<std::string>>& enabled) {
    if (!ref.plain.empty()) return ref.plain;
    auto lbl = resolve_label(ref.index, a);
    if (!lbl) return std::nullopt;
    for (int i = 0; i < s.arity; ++i) {
        if (s.wildcard[(std::size_t)i] != ref.family) continue;
        const auto& en = enabled[(std::size_t)i];
        if (std::find(en.begin(), en.end(), *lbl) == en.end()) return std::nullopt;
        return family_var_name(ref.family, *lbl);
    }
    return std::nullopt;
}

// Rewrites the schema target: varref params substituted, family references
// resolved to instance variables or to the zero operator.
TermPtr instantiate_target(TermPtr t, const Assignment& a, const RuleSchema& s,
                           const std::vector<std::vector<std::string>>& enabled,
                           const WfsosSpec& spec, TermPool& pool, bool& ok) {
    if (t->is_var) {
        if (t->var_kind == VarKind::weightfn) {
            auto br = t->name.find('[');
            if (br == std::string::npos) return t;
            std::string fam = t->name.substr(0, br);
            std::string idx = t->name.substr(br + 1, t->name.size() - br - 2);
            LabelExpr e = idx.size() > 1 && idx[0] == '$' ? LabelExpr::var(idx.substr(1))
                                                          : LabelExpr::lit(idx);
            auto resolved = resolve_fnvar(FnVarRef::mk_family(fam, e), a, s, enabled);
            if (resolved) return pool.var(VarKind::weightfn, *resolved);
            if (spec.zero_op.empty()) {
                ok = false;
                return t;
            }
            return pool.op(spec.zero_op, {}, {});
        }
        return t;
    }
    std::vector<ParamValue> params;
    params.reserve(t->params.size());
    for (const auto& p : t->params) {
        if (p.kind != ParamKind::varref) {
            params.push_back(p);
            continue;
        }
        if (auto it = a.labels.find(p.label); it != a.labels.end())
            params.push_back(ParamValue::mk_label(it->second));
        else if (auto ir = a.rates.find(p.label); ir != a.rates.end())
            params.push_back(ParamValue::mk_rate(ir->second));
        else if (auto is = a.labelsets.find(p.label); is != a.labelsets.end())
            params.push_back(ParamValue::mk_labelset(is->second));
        else {
            ok = false;
            params.push_back(p);
        }
    }
    std::vector<TermPtr> kids;
    kids.reserve(t->children.size());
    for (TermPtr c : t->children)
        kids.push_back(instantiate_target(c, a, s, enabled, spec, pool, ok));
    return pool.op(t->name, std::move(params), std::move(kids));
}

}  // namespace

std::vector<WfsosRule> instantiate_schema(const RuleSchema& schema, const std::string& op,
                                          const std::vector<ParamValue>& op_params,
                                          const std::vector<std::vector<std::string>>& enabled,
                                          const WfsosSpec& spec, TermPool& pool) {
    std::vector<WfsosRule> out;
    if (schema.op != op) return out;
    if ((int)enabled.size() != schema.arity) return out;
    if (schema.op_params.size() != op_params.size()) return out;

    Assignment base;
    for (std::size_t i = 0; i < op_params.size(); ++i) {
        const auto& pat = schema.op_params[i];
        const auto& val = op_params[i];
        if (!pat.bind) {
            if (!(pat.value == val)) return out;
            continue;
        }
        switch (val.kind) {
            case ParamKind::label: base.labels[pat.var] = val.label; break;
            case ParamKind::rate: base.rates[pat.var] = val.rate; break;
            case ParamKind::labelset: base.labelsets[pat.var] = val.labelset; break;
            default: return out;
        }
    }

    std::set<std::string> vars;
    collect_label_vars(schema, vars);
    std::vector<std::string> free;
    for (const auto& v : vars)
        if (!base.labels.count(v) && !base.rates.count(v) && !base.labelsets.count(v))
            free.push_back(v);

    std::vector<std::size_t> pick(free.size(), 0);
    bool more = true;
    while (more) {
        Assignment a = base;
        for (std::size_t i = 0; i < free.size(); ++i)
            a.labels[free[i]] = spec.labels[pick[i]];

        bool admissible = true;
        for (const auto& c : schema.conds)
            if (!cond_holds(c, a)) {
                admissible = false;
                break;
            }
        if (admissible) {
            // explicit premises must be enabled, negatives disabled
            for (const auto& p : schema.positives) {
                auto l = resolve_label(p.label, a);
                const auto& en = enabled[(std::size_t)p.arg];
                if (!l || std::find(en.begin(), en.end(), *l) == en.end()) {
                    admissible = false;
                    break;
                }
            }
        }
        if (admissible) {
            for (const auto& n : schema.negatives) {
                auto l = resolve_label(n.label, a);
                const auto& en = enabled[(std::size_t)n.arg];
                if (!l || std::find(en.begin(), en.end(), *l) != en.end()) {
                    admissible = false;
                    break;
                }
            }
        }
        auto concl = resolve_label(schema.concl_label, a);
        if (!concl) admissible = false;

        if (admissible) {
            WfsosRule r;
            r.name = schema.name;
            r.op = op;
            r.op_params = op_params;
            r.arity = schema.arity;
            r.arg_vars = schema.arg_vars;
            r.concl_label = *concl;

            for (int i = 0; i < schema.arity; ++i) {
                const std::string& fam = schema.wildcard[(std::size_t)i];
                if (!fam.empty()) {
                    for (const auto& l : enabled[(std::size_t)i])
                        r.positives.push_back({i, l, family_var_name(fam, l)});
                }
            }
            std::set<std::pair<int, std::string>> declared;
            for (const auto& p : schema.positives) {
                auto l = resolve_label(p.label, a);
                r.positives.push_back({p.arg, *l, p.var});
                declared.insert({p.arg, *l});
            }
            // pad explicit-mode arguments to the exact trigger
            for (int i = 0; i < schema.arity; ++i) {
                if (!schema.wildcard[(std::size_t)i].empty()) continue;
                for (const auto& l : enabled[(std::size_t)i])
                    if (!declared.count({i, l}))
                        r.positives.push_back(
                            {i, l, "~pad" + std::to_string(i) + "[" + l + "]"});
            }
            for (const auto& n : schema.negatives)
                r.negatives.push_back({n.arg, *resolve_label(n.label, a)});

            bool ok = true;
            for (const auto& t : schema.totals) {
                auto v = resolve_fnvar(t.var, a, schema, enabled);
                if (!v) {
                    ok = false;
                    break;
                }
                r.totals.push_back({*v, t.w});
            }
            if (ok) {
                for (const auto& sp : schema.supports) {
                    auto v = resolve_fnvar(sp.var, a, schema, enabled);
                    if (!v) {
                        ok = false;
                        break;
                    }
                    r.supports.push_back({*v, sp.yvar});
                }
            }
            if (ok && schema.target) {
                r.target = instantiate_target(schema.target, a, schema, enabled, spec, pool, ok);
            }
            if (ok) out.push_back(std::move(r));
        }

        if (free.empty()) break;
        std::size_t i = 0;
        for (; i < free.size(); ++i) {
            if (++pick[i] < spec.labels.size()) break;
            pick[i] = 0;
        }
        more = i < free.size();
    }
    return out;
}

namespace {

void collect_target_vars(TermPtr t, std::set<std::string>& procs, std::set<std::string>& fns) {
    if (t->is_var) {
        (t->var_kind == VarKind::weightfn ? fns : procs).insert(t->name);
        return;
    }
    for (TermPtr c : t->children) collect_target_vars(c, procs, fns);
}

// Checks a target subtree in theta context: theta operators recurse, anything
// else must be a well-formed process subterm.
void check_target(TermPtr t, const WfsosSpec& spec, std::vector<std::string>& out) {
    if (t->is_var) return;
    if (const OpSchema* th = spec.theta.find(t->name)) {
        if ((int)t->children.size() != th->arity)
            out.push_back("target-arity-mismatch:" + t->name);
        if (!spec.interp.covers(t->name)) out.push_back("target-missing-interp:" + t->name);
        for (TermPtr c : t->children) check_target(c, spec, out);
        return;
    }
    // process subterm: sigma operators and constants only, no weightfn vars
    std::function<void(TermPtr)> walk = [&](TermPtr p) {
        if (p->is_var) {
            if (p->var_kind == VarKind::weightfn)
                out.push_back("weightfn-var-in-process-term:" + p->name);
            return;
        }
        const OpSchema* so = spec.sigma.find(p->name);
        if (!so && !spec.is_constant(p->name))
            out.push_back("target-unknown-operator:" + p->name);
        if (so && (int)p->children.size() != so->arity)
            out.push_back("target-arity-mismatch:" + p->name);
        for (TermPtr c : p->children) walk(c);
    };
    walk(t);
}

}  // namespace

std::vector<std::string> validate_rule(const WfsosRule& r, const WfsosSpec& spec) {
    std::vector<std::string> out;
    const OpSchema* op = spec.sigma.find(r.op);
    if (!op && !spec.is_constant(r.op)) out.push_back("unknown-operator:" + r.op);
    if (op && op->arity != r.arity) out.push_back("arity-mismatch:" + r.op);
    if ((int)r.arg_vars.size() != r.arity) out.push_back("arg-var-count");

    if (!spec.has_label(r.concl_label)) out.push_back("unknown-label:" + r.concl_label);
    for (const auto& p : r.positives)
        if (!spec.has_label(p.label)) out.push_back("unknown-label:" + p.label);
    for (const auto& n : r.negatives)
        if (!spec.has_label(n.label)) out.push_back("unknown-label:" + n.label);

    // positive and negative labels per argument must not overlap
    for (int i = 0; i < r.arity; ++i) {
        auto pos = r.premise_labels(i);
        for (const auto& n : r.negatives)
            if (n.arg == i && std::find(pos.begin(), pos.end(), n.label) != pos.end()) {
                out.push_back("premise-overlap:arg" + std::to_string(i) + ":" + n.label);
            }
    }

    // pairwise distinct variables
    std::set<std::string> procs(r.arg_vars.begin(), r.arg_vars.end());
    if (procs.size() != r.arg_vars.size()) out.push_back("duplicate-process-var:args");
    for (const auto& sp : r.supports)
        if (!procs.insert(sp.yvar).second) out.push_back("duplicate-process-var:" + sp.yvar);
    std::set<std::string> fns;
    for (const auto& p : r.positives)
        if (!fns.insert(p.var).second) out.push_back("duplicate-weightfn-var:" + p.var);

    // target variables bound by the rule
    if (r.target) {
        std::set<std::string> tprocs, tfns;
        collect_target_vars(r.target, tprocs, tfns);
        for (const auto& v : tprocs)
            if (!procs.count(v)) out.push_back("target-unbound-var:" + v);
        for (const auto& v : tfns)
            if (!fns.count(v)) out.push_back("target-unbound-var:%" + v);
        check_target(r.target, spec, out);
    } else {
        out.push_back("missing-target");
    }

    // total/support premises reference positive-premise variables
    for (const auto& t : r.totals)
        if (!fns.count(t.var)) out.push_back("total-var-unbound:" + t.var);
    std::set<std::string> supported;
    for (const auto& sp : r.supports) {
        if (!fns.count(sp.var)) out.push_back("support-var-unbound:" + sp.var);
        supported.insert(sp.var);
    }

    // nonzero total constants on support-premised variables
    for (const auto& t : r.totals)
        if (supported.count(t.var) && t.w.is_zero())
            out.push_back("support-total-zero:" + t.var);

    if (!r.supports.empty() && !spec.monoid.zerosumfree) out.push_back("zerosumfree-required");

    for (const auto& t : r.totals)
        if (!spec.monoid.admits(t.w)) out.push_back("total-outside-carrier:" + t.w.str());

    return out;
}

std::vector<std::string> validate_spec(const WfsosSpec& spec) {
    std::vector<std::string> out;

    for (const auto& so : spec.sigma.ops)
        if (spec.theta.find(so.name)) out.push_back("signature-collision:" + so.name);

    std::set<std::string> label_set(spec.labels.begin(), spec.labels.end());
    if (label_set.size() != spec.labels.size()) out.push_back("duplicate-label");
    if (spec.labels.empty()) out.push_back("no-labels");

    for (const auto& th : spec.theta.ops)
        if (!spec.interp.covers(th.name)) out.push_back("interp-missing:" + th.name);
    for (const auto& b : spec.interp_bindings)
        if (b.theta_op != "base" && !spec.theta.find(b.theta_op))
            out.push_back("interp-unknown-op:" + b.theta_op);

    bool any_wildcard = false;
    bool any_support = false;
    for (const auto& s : spec.schemas) {
        const OpSchema* op = spec.sigma.find(s.op);
        if (!op) {
            out.push_back("schema-unknown-operator:" + s.name + ":" + s.op);
            continue;
        }
        if (op->arity != s.arity || (int)s.arg_vars.size() != s.arity)
            out.push_back("schema-arity-mismatch:" + s.name);
        if (s.op_params.size() != op->params.size())
            out.push_back("schema-param-count:" + s.name);
        if ((int)s.wildcard.size() != s.arity) out.push_back("schema-wildcard-count:" + s.name);
        for (const auto& p : s.positives)
            if (p.arg < 0 || p.arg >= s.arity) out.push_back("schema-arg-range:" + s.name);
        for (const auto& w : s.wildcard) any_wildcard |= !w.empty();
        any_support |= !s.supports.empty();
        if (!s.target) out.push_back("schema-missing-target:" + s.name);
    }
    if (any_wildcard && spec.zero_op.empty()) out.push_back("zero-op-required");
    if (any_support && !spec.monoid.zerosumfree) out.push_back("zerosumfree-required");

    for (const auto& [name, def] : spec.constants) {
        if (spec.sigma.find(name)) out.push_back("constant-shadows-operator:" + name);
        if (!def || !is_ground(def)) out.push_back("constant-not-ground:" + name);
    }
    return out;
}

}  // namespace wfsos
