#pragma once

#include <map>
#include <string>
#include <vector>

#include "wfsos/rules.hpp"
#include "wfsos/syntax.hpp"

namespace wfsos {

/// A PEPA model: constant definitions, a finite label set (tau included), the
/// synchronisation law and optional root systems.
struct PepaModel {
    enum class Law { minimal, multiplicative };
    Law law = Law::minimal;
    std::vector<std::string> labels;            // sorted, includes tau
    std::map<std::string, TermPtr> constants;   // symbol -> closed term
    std::vector<TermPtr> systems;               // declared root terms

    static constexpr const char* tau = "tau";
};

struct PepaParseError : std::runtime_error {
    explicit PepaParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses one PEPA process expression. Identifiers are constant references;
/// `nil` and `0` denote the inert process.
///   (a, 3/2).P      action prefix
///   P + Q           choice
///   P <a,b> Q       cooperation over {a,b}; <> for the empty set
///   P \ {a}         hiding
TermPtr parse_pepa_term(const std::string& text, TermPool& pool);

/// Parses a PEPA model file: `law`, `labels`, constant definitions `X = P`
/// and `system P` lines; '#' starts a comment.
PepaModel parse_pepa(const std::string& text, TermPool& pool);

/// Validation: defined constants, positive rates, tau not synchronised or
/// hidden, labels declared.
std::vector<std::string> validate_pepa(const PepaModel& model);

/// The rule-format spec for a model: action and disabled-action axioms, choice,
/// per-labelset cooperation and hiding schemas, terminal axioms for nil, and
/// the interpretation matching the chosen law. The induced system is
/// functional.
WfsosSpec pepa_wfsos(const PepaModel& model, TermPool& pool);

}  // namespace wfsos
