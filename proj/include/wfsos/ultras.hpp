#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "wfsos/weights.hpp"

namespace wfsos {

/// Finite, image-finite transition structure: for every (state, label) a
/// finite set of weight functions over state indices. An empty set means the
/// state is stuck there; a set containing the empty function has a terminal
/// option. Immutable by convention once built.
struct Ultras {
    WeightMonoid monoid;
    std::vector<std::string> labels;
    std::vector<std::string> states;
    // trans[state][label] = canonically sorted, deduplicated set of functions
    std::vector<std::vector<std::vector<WeightFn>>> trans;
    bool truncated = false;

    std::size_t num_states() const { return states.size(); }
    std::size_t num_labels() const { return labels.size(); }

    void init_trans() {
        trans.assign(states.size(), std::vector<std::vector<WeightFn>>(labels.size()));
    }

    const std::vector<WeightFn>& at(std::size_t state, std::size_t label) const {
        return trans.at(state).at(label);
    }

    /// Inserts keeping the set sorted and duplicate-free.
    void add_fn(std::size_t state, std::size_t label, WeightFn fn);

    int label_index(const std::string& name) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == name) return (int)i;
        return -1;
    }
};

enum class TerminationKind : std::uint8_t { stuck, terminal, active };

/// Termination classification of one (state, label) row; terminal and active
/// may hold together, stuck excludes both.
std::set<TerminationKind> classify(const Ultras& u, std::size_t state, std::size_t label);

/// True iff every (state, label) has exactly one weight function.
bool is_functional(const Ultras& u);

struct ConstraintViolation {
    std::size_t state = 0;
    int label = -1;   // -1 for per-state conditions
    int fn_index = -1;
    std::string reason;
};

/// Validates a known subclass constraint: "segala" (every function is a
/// probability distribution), "reactive" (functional, per-label totals in
/// {0,1}), "generative" (functional, per-state grand total in {0,1}).
/// Throws std::invalid_argument when the constraint does not apply to the
/// monoid.
std::vector<ConstraintViolation> check_constraint(const Ultras& u, const std::string& constraint);

/// Disjoint union; states of `b` are shifted by a.num_states(). Labels must
/// agree.
Ultras disjoint_union(const Ultras& a, const Ultras& b);

std::string ultras_to_json(const Ultras& u);
Ultras ultras_from_json(const std::string& text);
std::string ultras_to_dot(const Ultras& u);

}  // namespace wfsos
