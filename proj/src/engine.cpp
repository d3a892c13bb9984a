#include "wfsos/engine.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace wfsos {

Engine::Engine(const WfsosSpec& spec, DerivationBudget budget, TermPool& pool)
    : spec_(&spec), budget_(budget), pool_(&pool) {}

const TermBehaviour& Engine::successors(TermPtr p) {
    auto it = memo_.find(p);
    if (it != memo_.end()) return it->second;
    TermBehaviour b = compute(p, 0);
    return memo_.emplace(p, std::move(b)).first->second;
}

TermBehaviour Engine::compute(TermPtr p, int unfold_depth) {
    if (auto it = memo_.find(p); it != memo_.end()) return it->second;
    if (p->is_var) throw std::invalid_argument("engine: non-ground term " + term_to_string(p));

    // Constant unfolding, bounded per branch.
    if (p->children.empty() && spec_->is_constant(p->name)) {
        if (unfold_depth >= budget_.max_depth) {
            if (budget_.on_exhaustion == DerivationBudget::OnExhaustion::error)
                throw BudgetExhausted("constant unfolding exceeded max-depth at " + p->name);
            TermBehaviour stuck;
            stuck.rows.assign(spec_->labels.size(), {});
            stuck.truncated = true;
            return stuck;
        }
        TermBehaviour b = compute(spec_->constants.at(p->name), unfold_depth + 1);
        if (!in_progress_.count(p) && !memo_.count(p)) memo_.emplace(p, b);
        return b;
    }

    bool reentrant = !in_progress_.insert(p).second;
    std::vector<TermBehaviour> owned;
    std::vector<const TermBehaviour*> child_behaviour;
    owned.reserve(p->children.size());
    for (TermPtr c : p->children) owned.push_back(compute(c, unfold_depth));
    for (const auto& b : owned) child_behaviour.push_back(&b);

    TermBehaviour result;
    result.rows = apply_rules(p, child_behaviour, result.truncated);
    for (const auto& b : owned) result.truncated |= b.truncated;

    if (!reentrant) {
        in_progress_.erase(p);
        memo_.emplace(p, result);
    }
    return result;
}

const std::vector<WfsosRule>& Engine::instances_for(
    TermPtr p, const std::vector<std::vector<std::string>>& enabled) {
    std::ostringstream key;
    key << p->name;
    for (const auto& pv : p->params) key << '\x01' << pv.str();
    for (const auto& en : enabled) {
        key << '\x02';
        for (const auto& l : en) key << l << ',';
    }
    auto it = instance_cache_.find(key.str());
    if (it != instance_cache_.end()) return it->second;

    std::vector<WfsosRule> all;
    for (const auto& schema : spec_->schemas) {
        auto rules = instantiate_schema(schema, p->name, p->params, enabled, *spec_, *pool_);
        for (auto& r : rules) all.push_back(std::move(r));
    }
    return instance_cache_.emplace(key.str(), std::move(all)).first->second;
}

std::vector<std::vector<WeightFn>> Engine::apply_rules(
    TermPtr p, const std::vector<const TermBehaviour*>& child_behaviour, bool& truncated) {
    const auto& labels = spec_->labels;
    std::vector<std::vector<WeightFn>> rows(labels.size());

    std::vector<std::vector<std::string>> enabled(p->children.size());
    for (std::size_t i = 0; i < p->children.size(); ++i) {
        for (std::size_t a = 0; a < labels.size(); ++a)
            if (!child_behaviour[i]->rows[a].empty()) enabled[i].push_back(labels[a]);
    }

    EvalContext ctx{pool_, &spec_->monoid};

    for (const auto& rule : instances_for(p, enabled)) {
        int cl = spec_->label_index(rule.concl_label);
        if (cl < 0) continue;

        // Candidate functions per positive premise, filtered by total premises.
        std::vector<const std::vector<WeightFn>*> raw(rule.positives.size());
        std::vector<std::vector<const WeightFn*>> candidates(rule.positives.size());
        bool feasible = true;
        for (std::size_t k = 0; k < rule.positives.size() && feasible; ++k) {
            const auto& prem = rule.positives[k];
            int li = spec_->label_index(prem.label);
            const auto& set = child_behaviour[(std::size_t)prem.arg]->rows[(std::size_t)li];
            for (const auto& fn : set) {
                bool pass = true;
                for (const auto& tp : rule.totals)
                    if (tp.var == prem.var && total_weight(fn, spec_->monoid) != tp.w) {
                        pass = false;
                        break;
                    }
                if (pass) candidates[k].push_back(&fn);
            }
            if (candidates[k].empty()) feasible = false;
        }
        if (!feasible) continue;

        // Only variables the target, totals or supports consult need to be
        // enumerated; the rest contribute nothing but multiplicity.
        std::set<std::string> used;
        if (rule.target) {
            std::set<std::string> pv, fv;
            std::function<void(TermPtr)> walk = [&](TermPtr t) {
                if (t->is_var) {
                    (t->var_kind == VarKind::weightfn ? fv : pv).insert(t->name);
                    return;
                }
                for (TermPtr c : t->children) walk(c);
            };
            walk(rule.target);
            used = fv;
        }
        for (const auto& sp : rule.supports) used.insert(sp.var);

        std::vector<std::size_t> enum_idx;
        for (std::size_t k = 0; k < rule.positives.size(); ++k)
            if (used.count(rule.positives[k].var)) enum_idx.push_back(k);

        std::vector<std::size_t> choice(enum_idx.size(), 0);
        while (true) {
            std::map<std::string, WeightFn> theta;
            for (std::size_t j = 0; j < enum_idx.size(); ++j)
                theta[rule.positives[enum_idx[j]].var] = *candidates[enum_idx[j]][choice[j]];

            // Support premises: every nonzero point of the referenced
            // function binds the process variable, independently.
            std::vector<std::vector<TermPtr>> ycand(rule.supports.size());
            bool sat = true;
            for (std::size_t s = 0; s < rule.supports.size(); ++s) {
                const auto& fn = theta.at(rule.supports[s].var);
                for (const auto& [key, w] : fn.entries()) ycand[s].push_back(pool_->by_id(key));
                std::sort(ycand[s].begin(), ycand[s].end(), TermLess{});
                if (ycand[s].empty()) sat = false;
            }

            if (sat) {
                std::vector<std::size_t> ypick(rule.supports.size(), 0);
                while (true) {
                    std::map<std::string, TermPtr> sigma;
                    for (int i = 0; i < rule.arity; ++i)
                        sigma[rule.arg_vars[(std::size_t)i]] = p->children[(std::size_t)i];
                    for (std::size_t s = 0; s < rule.supports.size(); ++s)
                        sigma[rule.supports[s].yvar] = ycand[s][ypick[s]];

                    TermPtr grounded = apply_subst(rule.target, sigma, *pool_);
                    WeightFn emitted = interpret(grounded, theta, spec_->interp, ctx);
                    rows[(std::size_t)cl].push_back(std::move(emitted));

                    std::size_t s = 0;
                    for (; s < ypick.size(); ++s) {
                        if (++ypick[s] < ycand[s].size()) break;
                        ypick[s] = 0;
                    }
                    if (s == ypick.size()) break;
                }
            }

            std::size_t j = 0;
            for (; j < choice.size(); ++j) {
                if (++choice[j] < candidates[enum_idx[j]].size()) break;
                choice[j] = 0;
            }
            if (j == choice.size()) break;
        }
    }

    (void)truncated;
    for (auto& set : rows) {
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
    }
    return rows;
}

ExploreResult Engine::explore(const std::vector<TermPtr>& roots) {
    std::set<TermPtr> visited;
    std::deque<TermPtr> frontier;
    std::vector<TermPtr> order;
    bool truncated = false;

    for (TermPtr r : roots)
        if (visited.insert(r).second) {
            frontier.push_back(r);
            order.push_back(r);
        }

    while (!frontier.empty()) {
        TermPtr t = frontier.front();
        frontier.pop_front();
        const TermBehaviour& b = successors(t);
        truncated |= b.truncated;
        std::vector<TermPtr> next;
        for (const auto& row : b.rows)
            for (const auto& fn : row)
                for (const auto& [key, w] : fn.entries()) next.push_back(pool_->by_id(key));
        std::sort(next.begin(), next.end(), TermLess{});
        next.erase(std::unique(next.begin(), next.end()), next.end());
        for (TermPtr n : next) {
            if (visited.count(n)) continue;
            if ((int)visited.size() >= budget_.max_states) {
                if (budget_.on_exhaustion == DerivationBudget::OnExhaustion::error)
                    throw BudgetExhausted("state budget exceeded");
                truncated = true;
                continue;
            }
            visited.insert(n);
            frontier.push_back(n);
            order.push_back(n);
        }
    }

    // Expanded states whose successors were never computed (frontier cut by
    // the state budget) read as stuck rows below; kept flagged.
    std::vector<TermPtr> states(order);
    std::sort(states.begin(), states.end(), TermLess{});

    std::map<TermPtr, int> index;
    for (std::size_t i = 0; i < states.size(); ++i) index[states[i]] = (int)i;

    ExploreResult result;
    result.state_terms = states;
    result.ultras.monoid = spec_->monoid;
    result.ultras.labels = spec_->labels;
    for (TermPtr t : states) result.ultras.states.push_back(term_to_string(t));
    result.ultras.init_trans();

    for (std::size_t i = 0; i < states.size(); ++i) {
        const TermBehaviour& b = successors(states[i]);
        for (std::size_t a = 0; a < spec_->labels.size(); ++a)
            for (const auto& fn : b.rows[a]) {
                WeightFnBuilder wb(spec_->monoid);
                bool complete = true;
                for (const auto& [key, w] : fn.entries()) {
                    auto it = index.find(pool_->by_id(key));
                    if (it == index.end()) {
                        complete = false;  // target beyond the state budget
                        continue;
                    }
                    wb.add(it->second, w);
                }
                if (!complete) truncated = true;
                result.ultras.add_fn(i, a, wb.build());
            }
    }

    // Fixpoint check: recompute each state's rows from the memoised child
    // behaviours; agreement means depth truncation healed and the table is
    // exact.
    if (truncated) {
        bool stable = true;
        for (TermPtr t : states) {
            TermPtr resolved = t;
            int guard = 0;
            while (resolved->children.empty() && spec_->is_constant(resolved->name) &&
                   guard++ <= budget_.max_depth)
                resolved = spec_->constants.at(resolved->name);
            if (resolved->is_var) continue;
            std::vector<const TermBehaviour*> kids;
            bool have_all = true;
            for (TermPtr c : resolved->children) {
                auto it = memo_.find(c);
                if (it == memo_.end()) {
                    have_all = false;
                    break;
                }
                kids.push_back(&it->second);
            }
            if (!have_all) {
                stable = false;
                break;
            }
            bool dummy = false;
            auto rows = apply_rules(resolved, kids, dummy);
            auto mit = memo_.find(t);
            if (mit == memo_.end() || mit->second.rows != rows) {
                stable = false;
                break;
            }
        }
        if (stable) truncated = false;
    }

    result.truncated = truncated;
    result.ultras.truncated = truncated;

    for (TermPtr r : roots) result.root_states.push_back(index.at(r));
    return result;
}

TermBehaviour successors(const WfsosSpec& spec, TermPtr p, const DerivationBudget& budget,
                         TermPool& pool) {
    Engine e(spec, budget, pool);
    return e.successors(p);
}

ExploreResult explore(const WfsosSpec& spec, const std::vector<TermPtr>& roots,
                      const DerivationBudget& budget, TermPool& pool) {
    Engine e(spec, budget, pool);
    return e.explore(roots);
}

}  // namespace wfsos
