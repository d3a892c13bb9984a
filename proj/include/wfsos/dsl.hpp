#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wfsos/pepa.hpp"
#include "wfsos/rules.hpp"
#include "wfsos/segala.hpp"
#include "wfsos/wgsos.hpp"

namespace wfsos {

struct DslError : std::runtime_error {
    explicit DslError(const std::string& what) : std::runtime_error(what) {}
};

/// A parsed spec file. `spec` always holds the weight-function-format spec:
/// for segala/wgsos/pepa inputs it is the translated one, with the source
/// representation kept alongside.
struct LoadedSpec {
    std::string format;  // wfsos | pepa | segala | wgsos
    WfsosSpec spec;
    std::optional<PepaModel> pepa;
    std::optional<SegalaGsosSpec> segala;
    std::optional<WGsosSpec> wgsos;
    std::vector<TermPtr> roots;  // `system` lines
};

/// Parses spec text. The first `format` line selects the dialect; wfsos is
/// the default.
LoadedSpec load_spec_text(const std::string& text, TermPool& pool);

/// Parses a root term in the loaded spec's dialect (plain term syntax, or
/// PEPA concrete syntax for pepa specs).
TermPtr parse_root_term(const LoadedSpec& loaded, const std::string& text, TermPool& pool);

/// Emits a spec back as wfsos-format text; parseable by load_spec_text.
std::string print_wfsos_spec(const WfsosSpec& spec);

}  // namespace wfsos
