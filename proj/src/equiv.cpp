#include "wfsos/equiv.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace wfsos {

Partition Partition::single_block(std::size_t n) {
    Partition p;
    p.block_of.assign(n, 0);
    if (n > 0) {
        p.blocks.emplace_back();
        for (std::size_t i = 0; i < n; ++i) p.blocks[0].push_back((int)i);
    }
    return p;
}

Partition Partition::discrete(std::size_t n) {
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    return from_block_of(std::move(ids));
}

Partition Partition::from_block_of(std::vector<int> ids) {
    Partition p;
    p.block_of.assign(ids.size(), -1);
    std::map<int, int> renumber;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto [it, fresh] = renumber.emplace(ids[i], (int)renumber.size());
        if (fresh) p.blocks.emplace_back();
        p.block_of[i] = it->second;
        p.blocks[(std::size_t)it->second].push_back((int)i);
    }
    return p;
}

ClassVec class_vector(const WeightFn& fn, const Partition& p, const WeightMonoid& m) {
    std::map<int, Weight> acc;
    for (const auto& [k, w] : fn.entries()) {
        int b = p.block_of.at((std::size_t)k);
        auto it = acc.find(b);
        if (it == acc.end())
            acc.emplace(b, w);
        else
            it->second = m.add(it->second, w);
    }
    ClassVec out;
    for (const auto& [b, w] : acc)
        if (!w.is_zero()) out.emplace_back(b, w);
    return out;
}

StateSignature state_signature(const Ultras& u, const Partition& p, std::size_t state) {
    StateSignature sig;
    sig.per_label.resize(u.num_labels());
    for (std::size_t a = 0; a < u.num_labels(); ++a) {
        auto& set = sig.per_label[a];
        for (const auto& fn : u.at(state, a)) set.push_back(class_vector(fn, p, u.monoid));
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
    }
    return sig;
}

Partition coarsest_bisimulation(const Ultras& u, const std::optional<Partition>& initial) {
    std::size_t n = u.num_states();
    Partition p = initial ? *initial : Partition::single_block(n);
    while (true) {
        // split every block by signature
        std::map<std::pair<int, StateSignature>, int> groups;
        std::vector<int> next(n);
        for (std::size_t s = 0; s < n; ++s) {
            auto key = std::make_pair(p.block_of[s], state_signature(u, p, s));
            auto [it, fresh] = groups.emplace(std::move(key), (int)groups.size());
            next[s] = it->second;
        }
        Partition refined = Partition::from_block_of(std::move(next));
        if (refined.num_blocks() == p.num_blocks()) return refined;
        p = std::move(refined);
    }
}

bool is_bisimulation(const Ultras& u, const Partition& p) {
    // direct transfer-clause check, kept independent of the signature path
    auto matches = [&](std::size_t x, std::size_t y, std::size_t a) {
        for (const auto& phi : u.at(x, a)) {
            ClassVec cv = class_vector(phi, p, u.monoid);
            bool found = false;
            for (const auto& psi : u.at(y, a))
                if (class_vector(psi, p, u.monoid) == cv) {
                    found = true;
                    break;
                }
            if (!found) return false;
        }
        return true;
    };
    for (const auto& block : p.blocks)
        for (std::size_t i = 0; i < block.size(); ++i)
            for (std::size_t j = i + 1; j < block.size(); ++j) {
                auto x = (std::size_t)block[i], y = (std::size_t)block[j];
                for (std::size_t a = 0; a < u.num_labels(); ++a)
                    if (!matches(x, y, a) || !matches(y, x, a)) return false;
            }
    return true;
}

namespace {

// union-find used for joining bisimulation relations
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[(std::size_t)x] != x) {
            parent[(std::size_t)x] = parent[(std::size_t)parent[(std::size_t)x]];
            x = parent[(std::size_t)x];
        }
        return x;
    }
    void unite(int a, int b) { parent[(std::size_t)find(a)] = find(b); }
};

}  // namespace

Partition brute_force_bisim(const Ultras& u, std::size_t limit) {
    std::size_t n = u.num_states();
    if (n > limit) throw std::invalid_argument("brute_force_bisim: state count exceeds limit");
    if (n == 0) return Partition::single_block(0);

    UnionFind uf(n);
    // restricted growth strings enumerate every partition of {0..n-1}
    std::vector<int> rgs(n, 0);
    while (true) {
        Partition p = Partition::from_block_of(rgs);
        if (is_bisimulation(u, p)) {
            for (std::size_t s = 0; s < n; ++s)
                for (std::size_t t = s + 1; t < n; ++t)
                    if (p.same_block((int)s, (int)t)) uf.unite((int)s, (int)t);
        }
        // next RGS
        int i = (int)n - 1;
        for (; i > 0; --i) {
            int maxv = 0;
            for (int j = 0; j < i; ++j) maxv = std::max(maxv, rgs[(std::size_t)j]);
            if (rgs[(std::size_t)i] <= maxv) break;
        }
        if (i == 0) break;
        ++rgs[(std::size_t)i];
        for (std::size_t j = (std::size_t)i + 1; j < n; ++j) rgs[j] = 0;
    }

    std::vector<int> ids(n);
    for (std::size_t s = 0; s < n; ++s) ids[s] = uf.find((int)s);
    Partition joined = Partition::from_block_of(std::move(ids));
    // the join of bisimulations is itself one; keep that as a hard guarantee
    if (!is_bisimulation(u, joined))
        throw std::logic_error("brute_force_bisim: join is not a bisimulation");
    return joined;
}

bool check_weighted_bisim(const Ultras& u, const Partition& p) {
    if (!is_functional(u))
        throw std::invalid_argument("check_weighted_bisim: system is not functional");
    for (const auto& block : p.blocks)
        for (std::size_t i = 0; i < block.size(); ++i)
            for (std::size_t j = i + 1; j < block.size(); ++j)
                for (std::size_t a = 0; a < u.num_labels(); ++a) {
                    const auto& fx = u.at((std::size_t)block[i], a)[0];
                    const auto& fy = u.at((std::size_t)block[j], a)[0];
                    if (class_vector(fx, p, u.monoid) != class_vector(fy, p, u.monoid))
                        return false;
                }
    return true;
}

MFunction canonical_m(const Ultras& u, const Partition& rel) {
    // precondition: per label, no stuck row coexists with a terminal row
    for (std::size_t a = 0; a < u.num_labels(); ++a) {
        int stuck = -1, terminal = -1;
        for (std::size_t s = 0; s < u.num_states(); ++s) {
            const auto& fns = u.at(s, a);
            if (fns.empty()) stuck = (int)s;
            for (const auto& fn : fns)
                if (fn.empty()) terminal = (int)s;
        }
        if (stuck >= 0 && terminal >= 0)
            throw TerminationMixError("canonical_m: label " + u.labels[a] + " has stuck state " +
                                      std::to_string(stuck) + " and terminal state " +
                                      std::to_string(terminal));
    }

    MFunction m;
    m.bot = {ClassVec{}};  // the class of the zero function
    const Ultras* up = &u;
    Partition r = rel;
    WeightMonoid monoid = u.monoid;
    m.eval = [up, r, monoid](int state, int label, const std::vector<int>& cls) {
        std::vector<ClassVec> out;
        out.push_back(ClassVec{});
        for (const auto& fn : up->at((std::size_t)state, (std::size_t)label)) {
            Weight w = class_weight(fn, cls, monoid);
            if (!w.is_zero()) out.push_back(class_vector(fn, r, monoid));
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };
    return m;
}

namespace {

std::vector<int> block_members(const Partition& p, int b) {
    return p.blocks[(std::size_t)b];
}

void check_m_laws(const Ultras& u, const MFunction& m, int state, int label,
                  const std::vector<int>& cls, const std::vector<ClassVec>& value) {
    // first law: bottom whenever the queried set is unreachable
    bool unreachable = true;
    for (const auto& fn : u.at((std::size_t)state, (std::size_t)label))
        if (!class_weight(fn, cls, u.monoid).is_zero()) unreachable = false;
    if (unreachable && !(value == m.bot))
        throw MFunctionViolation("M-function law 1 broken at state " + std::to_string(state) +
                                 " label " + u.labels[(std::size_t)label]);
}

}  // namespace

bool check_m_bisim(const Ultras& u, const MFunction& m, const Partition& rel) {
    std::size_t n = u.num_states();
    (void)n;
    // queried values per (state,label,block), with law checks
    std::vector<std::vector<std::vector<std::vector<ClassVec>>>> val(
        u.num_states(),
        std::vector<std::vector<std::vector<ClassVec>>>(u.num_labels()));
    for (std::size_t s = 0; s < u.num_states(); ++s)
        for (std::size_t a = 0; a < u.num_labels(); ++a) {
            val[s][a].resize(rel.num_blocks());
            for (std::size_t b = 0; b < rel.num_blocks(); ++b) {
                auto cls = block_members(rel, (int)b);
                val[s][a][b] = m.eval((int)s, (int)a, cls);
                check_m_laws(u, m, (int)s, (int)a, cls, val[s][a][b]);
            }
        }

    // second law on queried unions, for states compared below
    for (const auto& block : rel.blocks)
        for (std::size_t i = 0; i < block.size(); ++i)
            for (std::size_t j = i + 1; j < block.size(); ++j) {
                auto x = (std::size_t)block[i], y = (std::size_t)block[j];
                for (std::size_t a = 0; a < u.num_labels(); ++a)
                    for (std::size_t b1 = 0; b1 < rel.num_blocks(); ++b1)
                        for (std::size_t b2 = b1 + 1; b2 < rel.num_blocks(); ++b2) {
                            if (!(val[x][a][b1] == val[y][a][b1])) continue;
                            if (!(val[x][a][b2] == val[y][a][b2])) continue;
                            auto u12 = block_members(rel, (int)b1);
                            auto m2 = block_members(rel, (int)b2);
                            u12.insert(u12.end(), m2.begin(), m2.end());
                            std::sort(u12.begin(), u12.end());
                            if (!(m.eval((int)x, (int)a, u12) == m.eval((int)y, (int)a, u12)))
                                throw MFunctionViolation(
                                    "M-function law 2 broken at states " + std::to_string(x) +
                                    "," + std::to_string(y));
                        }
            }

    for (const auto& block : rel.blocks)
        for (std::size_t i = 0; i < block.size(); ++i)
            for (std::size_t j = i + 1; j < block.size(); ++j) {
                auto x = (std::size_t)block[i], y = (std::size_t)block[j];
                for (std::size_t a = 0; a < u.num_labels(); ++a)
                    for (std::size_t b = 0; b < rel.num_blocks(); ++b)
                        if (!(val[x][a][b] == val[y][a][b])) return false;
            }
    return true;
}

bool bisimilar(const WfsosSpec& spec, TermPtr p, TermPtr q, const DerivationBudget& budget,
               TermPool& pool) {
    ExploreResult res = explore(spec, {p, q}, budget, pool);
    Partition part = coarsest_bisimulation(res.ultras);
    return part.same_block(res.root_states[0], res.root_states[1]);
}

CongruenceReport congruence_suite(const WfsosSpec& spec,
                                  const std::vector<std::pair<TermPtr, TermPtr>>& pairs,
                                  const ContextBuilder& context, int trials, std::uint64_t seed,
                                  const DerivationBudget& budget, TermPool& pool) {
    CongruenceReport report;
    if (pairs.empty()) return report;
    std::mt19937_64 rng(seed);
    std::set<std::string> seen_bad;
    for (int t = 0; t < trials; ++t) {
        ++report.trials;
        const auto& [p, q] = pairs[rng() % pairs.size()];
        TermPtr cp = context(p, rng);
        TermPtr cq = context(q, rng);

        ExploreResult res = explore(spec, {p, q, cp, cq}, budget, pool);
        Partition part = coarsest_bisimulation(res.ultras);
        if (!part.same_block(res.root_states[0], res.root_states[1])) {
            std::string key = term_to_string(p) + " | " + term_to_string(q);
            if (seen_bad.insert(key).second) report.bad_pairs.push_back(key);
            continue;
        }
        ++report.checked;
        if (!part.same_block(res.root_states[2], res.root_states[3])) {
            report.counterexamples.push_back(term_to_string(cp) + "  vs  " + term_to_string(cq));
        }
    }
    return report;
}

std::string partition_to_json(const Partition& p) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& block : p.blocks) j.push_back(block);
    return j.dump() + "\n";
}

}  // namespace wfsos
