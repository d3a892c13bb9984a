#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "wfsos/engine.hpp"
#include "wfsos/ultras.hpp"

namespace wfsos {

/// Equivalence classes over 0..n-1. Canonical form: blocks numbered by first
/// occurrence, members sorted.
struct Partition {
    std::vector<int> block_of;
    std::vector<std::vector<int>> blocks;

    static Partition single_block(std::size_t n);
    static Partition discrete(std::size_t n);
    static Partition from_block_of(std::vector<int> ids);

    std::size_t size() const { return block_of.size(); }
    std::size_t num_blocks() const { return blocks.size(); }
    bool same_block(int a, int b) const { return block_of[(std::size_t)a] == block_of[(std::size_t)b]; }

    friend bool operator==(const Partition& a, const Partition& b) {
        return a.block_of == b.block_of;
    }
};

/// Sparse class-weight vector: (block, weight) pairs, zero entries dropped.
using ClassVec = std::vector<std::pair<int, Weight>>;

ClassVec class_vector(const WeightFn& fn, const Partition& p, const WeightMonoid& m);

/// Per-label sets of class-weight vectors; the zero vector from a terminal
/// transition stays, so terminal and stuck rows differ (empty set vs {[]}).
struct StateSignature {
    std::vector<std::vector<ClassVec>> per_label;

    friend bool operator==(const StateSignature& a, const StateSignature& b) {
        return a.per_label == b.per_label;
    }
    friend bool operator<(const StateSignature& a, const StateSignature& b) {
        return a.per_label < b.per_label;
    }
};

StateSignature state_signature(const Ultras& u, const Partition& p, std::size_t state);

/// Greatest fixpoint of signature refinement, optionally from an initial
/// partition. States end in the same block iff bisimilar.
Partition coarsest_bisimulation(const Ultras& u,
                                const std::optional<Partition>& initial = std::nullopt);

/// Direct check of the two transfer clauses for a candidate partition.
bool is_bisimulation(const Ultras& u, const Partition& p);

/// Oracle: enumerates every partition of the states, keeps those that are
/// bisimulations, and joins them. Only for small systems.
Partition brute_force_bisim(const Ultras& u, std::size_t limit = 8);

/// For functional systems: is p a weighted bisimulation (related states give
/// equal class weights under their unique successor functions)?
bool check_weighted_bisim(const Ultras& u, const Partition& p);

/// Aggregation function with a pointed codomain; values are canonical sets of
/// class-weight vectors, evaluated lazily per queried triple.
struct MFunction {
    std::vector<ClassVec> bot;
    std::function<std::vector<ClassVec>(int state, int label, const std::vector<int>& cls)> eval;
};

struct MFunctionViolation : std::runtime_error {
    explicit MFunctionViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Checks the aggregation equation on every related pair, label and class of
/// rel; the M-function laws are verified on the queried triples and their
/// pairwise unions, violations are reported as exceptions.
bool check_m_bisim(const Ultras& u, const MFunction& m, const Partition& rel);

/// The canonical aggregation induced by rel: classes of successor functions
/// with nonzero weight on the queried set, plus the zero-function class.
/// Requires at most one kind of termination per label across the system.
MFunction canonical_m(const Ultras& u, const Partition& rel);

struct TerminationMixError : std::runtime_error {
    explicit TerminationMixError(const std::string& what) : std::runtime_error(what) {}
};

// --- congruence test harness -------------------------------------------------

struct CongruenceReport {
    int trials = 0;
    int checked = 0;
    std::vector<std::string> counterexamples;
    std::vector<std::string> bad_pairs;  // supplied pairs that were not bisimilar
    bool ok() const { return counterexamples.empty() && bad_pairs.empty(); }
};

/// One unary context: maps the hole term to a surrounding ground term.
using ContextBuilder = std::function<TermPtr(TermPtr hole, std::mt19937_64& rng)>;

/// Randomized congruence check: for each trial, pick a (bisimilar) pair, wrap
/// both sides in a random unary context and verify the wrapped terms stay
/// bisimilar on their joint explored space.
CongruenceReport congruence_suite(const WfsosSpec& spec,
                                  const std::vector<std::pair<TermPtr, TermPtr>>& pairs,
                                  const ContextBuilder& context, int trials, std::uint64_t seed,
                                  const DerivationBudget& budget, TermPool& pool);

/// Bisimilarity of two root terms on their joint explored space.
bool bisimilar(const WfsosSpec& spec, TermPtr p, TermPtr q, const DerivationBudget& budget,
               TermPool& pool);

std::string partition_to_json(const Partition& p);

}  // namespace wfsos
