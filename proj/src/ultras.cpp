#include "wfsos/ultras.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace wfsos {

void Ultras::add_fn(std::size_t state, std::size_t label, WeightFn fn) {
    auto& set = trans.at(state).at(label);
    auto it = std::lower_bound(set.begin(), set.end(), fn);
    if (it != set.end() && *it == fn) return;
    set.insert(it, std::move(fn));
}

std::set<TerminationKind> classify(const Ultras& u, std::size_t state, std::size_t label) {
    if (state >= u.num_states()) throw std::out_of_range("classify: unknown state");
    if (label >= u.num_labels()) throw std::out_of_range("classify: unknown label");
    const auto& fns = u.at(state, label);
    std::set<TerminationKind> kinds;
    if (fns.empty()) {
        kinds.insert(TerminationKind::stuck);
        return kinds;
    }
    for (const auto& fn : fns)
        kinds.insert(fn.empty() ? TerminationKind::terminal : TerminationKind::active);
    return kinds;
}

bool is_functional(const Ultras& u) {
    for (std::size_t s = 0; s < u.num_states(); ++s)
        for (std::size_t a = 0; a < u.num_labels(); ++a)
            if (u.at(s, a).size() != 1) return false;
    return true;
}

std::vector<ConstraintViolation> check_constraint(const Ultras& u, const std::string& constraint) {
    if (!u.monoid.is_rational_like())
        throw std::invalid_argument("check_constraint: constraint needs a rational carrier");
    std::vector<ConstraintViolation> out;
    auto one = Weight::rat(1);
    auto zero = u.monoid.zero();

    if (constraint == "segala") {
        for (std::size_t s = 0; s < u.num_states(); ++s)
            for (std::size_t a = 0; a < u.num_labels(); ++a) {
                const auto& fns = u.at(s, a);
                for (std::size_t i = 0; i < fns.size(); ++i) {
                    Weight t = total_weight(fns[i], u.monoid);
                    if (t != one)
                        out.push_back({s, (int)a, (int)i, "total " + t.str() + " != 1"});
                }
            }
        return out;
    }
    if (constraint == "reactive" || constraint == "generative") {
        for (std::size_t s = 0; s < u.num_states(); ++s)
            for (std::size_t a = 0; a < u.num_labels(); ++a)
                if (u.at(s, a).size() != 1)
                    out.push_back({s, (int)a, -1, "not functional"});
        if (!out.empty()) return out;
        if (constraint == "reactive") {
            for (std::size_t s = 0; s < u.num_states(); ++s)
                for (std::size_t a = 0; a < u.num_labels(); ++a) {
                    Weight t = total_weight(u.at(s, a)[0], u.monoid);
                    if (t != one && t != zero)
                        out.push_back({s, (int)a, 0, "per-label total " + t.str() + " not in {0,1}"});
                }
        } else {
            for (std::size_t s = 0; s < u.num_states(); ++s) {
                Weight t = zero;
                for (std::size_t a = 0; a < u.num_labels(); ++a)
                    t = u.monoid.add(t, total_weight(u.at(s, a)[0], u.monoid));
                if (t != one && t != zero)
                    out.push_back({s, -1, -1, "grand total " + t.str() + " not in {0,1}"});
            }
        }
        return out;
    }
    throw std::invalid_argument("check_constraint: unknown constraint " + constraint);
}

Ultras disjoint_union(const Ultras& a, const Ultras& b) {
    if (a.labels != b.labels)
        throw std::invalid_argument("disjoint_union: label sets differ");
    if (!(a.monoid == b.monoid))
        throw std::invalid_argument("disjoint_union: monoids differ");
    Ultras u;
    u.monoid = a.monoid;
    u.labels = a.labels;
    u.states = a.states;
    for (const auto& s : b.states) u.states.push_back(s);
    u.truncated = a.truncated || b.truncated;
    u.init_trans();
    std::int32_t shift = (std::int32_t)a.num_states();
    for (std::size_t s = 0; s < a.num_states(); ++s)
        for (std::size_t l = 0; l < a.num_labels(); ++l)
            for (const auto& fn : a.at(s, l)) u.add_fn(s, l, fn);
    for (std::size_t s = 0; s < b.num_states(); ++s)
        for (std::size_t l = 0; l < b.num_labels(); ++l)
            for (const auto& fn : b.at(s, l)) {
                std::vector<WeightFn::Entry> entries;
                for (const auto& [k, w] : fn.entries()) entries.emplace_back(k + shift, w);
                u.add_fn(s + (std::size_t)shift, l, WeightFn(std::move(entries)));
            }
    return u;
}

std::string ultras_to_json(const Ultras& u) {
    nlohmann::ordered_json j;
    j["monoid"] = u.monoid.id;
    j["labels"] = u.labels;
    j["states"] = u.states;
    if (u.truncated) j["truncated"] = true;
    auto& trans = j["trans"] = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < u.num_states(); ++s)
        for (std::size_t a = 0; a < u.num_labels(); ++a) {
            nlohmann::ordered_json row;
            row["src"] = s;
            row["label"] = u.labels[a];
            auto& fns = row["fns"] = nlohmann::ordered_json::array();
            for (const auto& fn : u.at(s, a)) {
                nlohmann::ordered_json jf = nlohmann::ordered_json::array();
                for (const auto& [k, w] : fn.entries())
                    jf.push_back({{"tgt", k}, {"w", w.str()}});
                fns.push_back(jf);
            }
            trans.push_back(row);
        }
    return j.dump(2) + "\n";
}

Ultras ultras_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    Ultras u;
    u.monoid = WeightMonoid::builtin(j.at("monoid").get<std::string>());
    u.labels = j.at("labels").get<std::vector<std::string>>();
    u.states = j.at("states").get<std::vector<std::string>>();
    u.truncated = j.value("truncated", false);
    u.init_trans();
    for (const auto& row : j.at("trans")) {
        std::size_t s = row.at("src").get<std::size_t>();
        int a = u.label_index(row.at("label").get<std::string>());
        if (a < 0) throw std::invalid_argument("ultras_from_json: unknown label");
        for (const auto& jf : row.at("fns")) {
            std::vector<WeightFn::Entry> entries;
            for (const auto& e : jf) {
                auto w = Weight::parse(e.at("w").get<std::string>());
                if (!w) throw std::invalid_argument("ultras_from_json: bad weight");
                entries.emplace_back(e.at("tgt").get<std::int32_t>(), *w);
            }
            u.add_fn(s, (std::size_t)a, WeightFn::from_unsorted(std::move(entries), u.monoid));
        }
    }
    return u;
}

std::string ultras_to_dot(const Ultras& u) {
    std::ostringstream os;
    os << "digraph ultras {\n  rankdir=LR;\n";
    for (std::size_t s = 0; s < u.num_states(); ++s)
        os << "  s" << s << " [label=\"" << u.states[s] << "\"];\n";
    for (std::size_t s = 0; s < u.num_states(); ++s)
        for (std::size_t a = 0; a < u.num_labels(); ++a) {
            const auto& fns = u.at(s, a);
            for (std::size_t i = 0; i < fns.size(); ++i) {
                std::string mid = "m" + std::to_string(s) + "_" + std::to_string(a) + "_" +
                                  std::to_string(i);
                os << "  " << mid << " [shape=point];\n";
                os << "  s" << s << " -> " << mid << " [label=\"" << u.labels[a] << "\"];\n";
                for (const auto& [k, w] : fns[i].entries())
                    os << "  " << mid << " -> s" << k << " [label=\"" << u.labels[a] << "; "
                       << w.str() << "\"];\n";
            }
        }
    os << "}\n";
    return os.str();
}

}  // namespace wfsos
