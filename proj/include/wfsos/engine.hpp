#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "wfsos/rules.hpp"
#include "wfsos/ultras.hpp"

namespace wfsos {

/// Exploration limits. Constant unfolding can be non-terminating, so it is
/// bounded per branch; structural descent is inherently well-founded.
struct DerivationBudget {
    int max_states = 10000;
    int max_depth = 64;
    enum class OnExhaustion { error, truncate } on_exhaustion = OnExhaustion::truncate;
};

struct BudgetExhausted : std::runtime_error {
    explicit BudgetExhausted(const std::string& what) : std::runtime_error(what) {}
};

/// Derived behaviour of one ground term: per label (spec order) the canonical
/// set of successor weight functions over interned term ids.
struct TermBehaviour {
    std::vector<std::vector<WeightFn>> rows;
    bool truncated = false;
};

struct ExploreResult {
    Ultras ultras;
    std::vector<TermPtr> state_terms;  // state index -> term, in canonical term order
    std::vector<int> root_states;
    bool truncated = false;

    int state_of(TermPtr t) const {
        for (std::size_t i = 0; i < state_terms.size(); ++i)
            if (state_terms[i] == t) return (int)i;
        return -1;
    }
};

/// Rule-application engine with per-term memoisation. Cyclic constant
/// definitions are resolved by depth-bounded unfolding; explore() verifies
/// afterwards that the memoised table is an exact fixpoint and clears the
/// truncation flag when it is.
class Engine {
  public:
    Engine(const WfsosSpec& spec, DerivationBudget budget, TermPool& pool);

    const TermBehaviour& successors(TermPtr p);
    ExploreResult explore(const std::vector<TermPtr>& roots);

    const WfsosSpec& spec() const { return *spec_; }

  private:
    TermBehaviour compute(TermPtr p, int unfold_depth);
    std::vector<std::vector<WeightFn>> apply_rules(
        TermPtr p, const std::vector<const TermBehaviour*>& child_behaviour, bool& truncated);
    const std::vector<WfsosRule>& instances_for(TermPtr p,
                                                const std::vector<std::vector<std::string>>& enabled);

    const WfsosSpec* spec_;
    DerivationBudget budget_;
    TermPool* pool_;
    std::unordered_map<TermPtr, TermBehaviour> memo_;
    std::set<TermPtr> in_progress_;
    std::map<std::string, std::vector<WfsosRule>> instance_cache_;
};

/// One-shot helpers over a fresh engine.
TermBehaviour successors(const WfsosSpec& spec, TermPtr p, const DerivationBudget& budget,
                         TermPool& pool);
ExploreResult explore(const WfsosSpec& spec, const std::vector<TermPtr>& roots,
                      const DerivationBudget& budget, TermPool& pool);

}  // namespace wfsos
