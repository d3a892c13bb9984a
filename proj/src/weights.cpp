#include "wfsos/weights.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace wfsos {

std::optional<Weight> Weight::parse(const std::string& s) {
    if (s == "tt") return Weight::tt();
    if (s == "ff") return Weight::ff();
    if (s == "inf") return Weight::inf();
    if (s.empty()) return std::nullopt;
    auto digits = [](const std::string& t) {
        if (t.empty()) return false;
        for (char c : t)
            if (!std::isdigit((unsigned char)c)) return false;
        return true;
    };
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            if (!digits(s)) return std::nullopt;
            return Weight::rat(std::stoll(s));
        }
        std::string n = s.substr(0, slash), d = s.substr(slash + 1);
        if (!digits(n) || !digits(d)) return std::nullopt;
        return Weight::rat(Rational(std::stoll(n), std::stoll(d)));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

const WeightMonoid& WeightMonoid::builtin(const std::string& id) {
    static const WeightMonoid bool_or{"bool_or", Carrier::bool_or, true, false};
    static const WeightMonoid nat{"nat", Carrier::nat_plus, true, false};
    static const WeightMonoid nnrat{"nnrat", Carrier::nnrat_plus, true, false};
    static const WeightMonoid nnrat_inf{"nnrat_inf", Carrier::nnrat_inf_plus, true, true};
    if (id == "bool_or") return bool_or;
    if (id == "nat") return nat;
    if (id == "nnrat") return nnrat;
    if (id == "nnrat_inf") return nnrat_inf;
    throw std::invalid_argument("unknown monoid id: " + id);
}

std::vector<std::string> WeightMonoid::builtin_ids() {
    return {"bool_or", "nat", "nnrat", "nnrat_inf"};
}

WeightFn WeightFn::from_unsorted(std::vector<Entry> entries, const WeightMonoid& m) {
    WeightFnBuilder b(m);
    for (auto& [k, w] : entries) b.add(k, w);
    return b.build();
}

void WeightFnBuilder::add(std::int32_t key, const Weight& w) {
    if (w.is_zero()) return;
    acc_.emplace_back(key, w);
}

WeightFn WeightFnBuilder::build() {
    std::sort(acc_.begin(), acc_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<WeightFn::Entry> out;
    for (std::size_t i = 0; i < acc_.size();) {
        std::int32_t key = acc_[i].first;
        Weight sum = acc_[i].second;
        std::size_t j = i + 1;
        for (; j < acc_.size() && acc_[j].first == key; ++j) sum = monoid_->add(sum, acc_[j].second);
        if (!sum.is_zero()) out.emplace_back(key, sum);
        i = j;
    }
    acc_.clear();
    return WeightFn(std::move(out));
}

Weight total_weight(const WeightFn& fn, const WeightMonoid& m) {
    Weight t = m.zero();
    for (const auto& [k, w] : fn.entries()) t = m.add(t, w);
    return t;
}

Weight class_weight(const WeightFn& fn, const std::vector<std::int32_t>& cls,
                    const WeightMonoid& m) {
    std::set<std::int32_t> in(cls.begin(), cls.end());
    Weight t = m.zero();
    for (const auto& [k, w] : fn.entries())
        if (in.count(k)) t = m.add(t, w);
    return t;
}

WeightFn substitute(const WeightFn& fn, const std::function<std::int32_t(std::int32_t)>& sigma,
                    const WeightMonoid& m) {
    WeightFnBuilder b(m);
    for (const auto& [k, w] : fn.entries()) b.add(sigma(k), w);
    return b.build();
}

namespace {

bool weight_sum_equals(const WeightMonoid& m, const std::vector<Weight>& ws, const Weight& target) {
    Weight t = m.zero();
    for (const auto& w : ws) t = m.add(t, w);
    return t == target;
}

// Depth-first fill of the matrix cell by cell, pruning on exceeded row/column
// budgets where the carrier is ordered; for booleans only exact-match pruning
// at row/column completion applies.
struct RowColumnSearch {
    const WeightMonoid& m;
    const std::vector<Weight>& rows;
    const std::vector<Weight>& cols;
    const std::vector<Weight>& candidates;
    std::vector<std::vector<Weight>> cell;
    bool done = false;

    RowColumnSearch(const WeightMonoid& mm, const std::vector<Weight>& r,
                    const std::vector<Weight>& c, const std::vector<Weight>& cand)
        : m(mm), rows(r), cols(c), candidates(cand) {
        cell.assign(r.size(), std::vector<Weight>(c.size(), m.zero()));
    }

    bool exceeds(const Weight& partial, const Weight& target) const {
        if (partial.is_bool()) return false;  // no order pruning for bool_or
        if (target.is_inf()) return false;
        if (partial.is_inf()) return true;
        return target.q < partial.q;
    }

    Weight row_partial(std::size_t i, std::size_t upto) const {
        Weight t = m.zero();
        for (std::size_t j = 0; j < upto; ++j) t = m.add(t, cell[i][j]);
        return t;
    }
    Weight col_partial(std::size_t j, std::size_t upto) const {
        Weight t = m.zero();
        for (std::size_t i = 0; i < upto; ++i) t = m.add(t, cell[i][j]);
        return t;
    }

    bool fill(std::size_t i, std::size_t j) {
        if (i == rows.size()) {
            for (std::size_t c = 0; c < cols.size(); ++c)
                if (col_partial(c, rows.size()) != cols[c]) return false;
            return true;
        }
        std::size_t ni = i, nj = j + 1;
        if (nj == cols.size()) { ni = i + 1; nj = 0; }
        for (const auto& cand : candidates) {
            cell[i][j] = cand;
            Weight rp = row_partial(i, j + 1);
            if (exceeds(rp, rows[i])) continue;
            if (j + 1 == cols.size() && rp != rows[i]) continue;
            Weight cp = col_partial(j, i + 1);
            if (exceeds(cp, cols[j])) continue;
            if (i + 1 == rows.size() && cp != cols[j]) continue;
            if (fill(ni, nj)) return true;
        }
        cell[i][j] = m.zero();
        return false;
    }
};

}  // namespace

RowColumnResult check_row_column(const WeightMonoid& m, const std::vector<Weight>& row_sums,
                                 const std::vector<Weight>& col_sums, int closure_rounds) {
    Weight rs = m.zero(), cs = m.zero();
    for (const auto& w : row_sums) rs = m.add(rs, w);
    for (const auto& w : col_sums) cs = m.add(cs, w);
    if (rs != cs) throw std::invalid_argument("check_row_column: sum mismatch");

    // Candidate entries: additive closure of {0} and the input values.
    std::set<Weight> cand;
    cand.insert(m.zero());
    for (const auto& w : row_sums) cand.insert(w);
    for (const auto& w : col_sums) cand.insert(w);
    for (int round = 0; round < closure_rounds; ++round) {
        std::set<Weight> next = cand;
        for (const auto& a : cand)
            for (const auto& b : cand) next.insert(m.add(a, b));
        if (next.size() == cand.size()) break;
        cand.swap(next);
    }
    std::vector<Weight> candidates(cand.begin(), cand.end());

    RowColumnResult result;
    if (row_sums.empty() || col_sums.empty()) {
        result.found = weight_sum_equals(m, {}, rs) || rs == m.zero();
        return result;
    }
    RowColumnSearch search(m, row_sums, col_sums, candidates);
    if (search.fill(0, 0)) {
        result.found = true;
        result.matrix = search.cell;
    }
    return result;
}

}  // namespace wfsos
