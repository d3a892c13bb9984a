#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wfsos/rational.hpp"

namespace wfsos {

/// A single weight value. Which kinds are legal depends on the monoid carrier:
/// booleans for bool_or, rationals (integral for nat) elsewhere, inf only for
/// nnrat_inf.
struct Weight {
    enum class Kind : std::uint8_t { boolean, rational, infinity };

    Kind kind = Kind::rational;
    bool b = false;
    Rational q;

    Weight() = default;

    static Weight tt() { return make_bool(true); }
    static Weight ff() { return make_bool(false); }
    static Weight make_bool(bool v) {
        Weight w;
        w.kind = Kind::boolean;
        w.b = v;
        return w;
    }
    static Weight rat(Rational r) {
        Weight w;
        w.kind = Kind::rational;
        w.q = r;
        return w;
    }
    static Weight rat(std::int64_t n, std::int64_t d = 1) { return rat(Rational(n, d)); }
    static Weight inf() {
        Weight w;
        w.kind = Kind::infinity;
        return w;
    }

    bool is_bool() const { return kind == Kind::boolean; }
    bool is_inf() const { return kind == Kind::infinity; }
    bool is_zero() const { return is_bool() ? !b : (kind == Kind::rational && q.is_zero()); }

    friend bool operator==(const Weight& x, const Weight& y) {
        if (x.kind != y.kind) return false;
        switch (x.kind) {
            case Kind::boolean: return x.b == y.b;
            case Kind::rational: return x.q == y.q;
            case Kind::infinity: return true;
        }
        return false;
    }
    friend bool operator!=(const Weight& x, const Weight& y) { return !(x == y); }
    /// Total order used only for canonical sorting (kind-major).
    friend bool operator<(const Weight& x, const Weight& y) {
        if (x.kind != y.kind) return x.kind < y.kind;
        switch (x.kind) {
            case Kind::boolean: return x.b < y.b;
            case Kind::rational: return x.q < y.q;
            case Kind::infinity: return false;
        }
        return false;
    }

    /// Serialized forms: "tt", "ff", "inf", "p/q", "n".
    std::string str() const {
        switch (kind) {
            case Kind::boolean: return b ? "tt" : "ff";
            case Kind::infinity: return "inf";
            case Kind::rational: return q.str();
        }
        return "?";
    }

    static std::optional<Weight> parse(const std::string& s);
};

/// Commutative weight monoid. The four built-in carriers cover the systems
/// this workbench handles; the capability flags are data so validators can be
/// exercised against hypothetical declarations too.
struct WeightMonoid {
    enum class Carrier : std::uint8_t { bool_or, nat_plus, nnrat_plus, nnrat_inf_plus };

    std::string id;
    Carrier carrier = Carrier::nnrat_plus;
    bool zerosumfree = true;
    bool has_infinity = false;

    Weight zero() const {
        return carrier == Carrier::bool_or ? Weight::ff() : Weight::rat(0);
    }

    Weight add(const Weight& a, const Weight& b) const {
        if (carrier == Carrier::bool_or) return Weight::make_bool(a.b || b.b);
        if (a.is_inf() || b.is_inf()) return Weight::inf();
        return Weight::rat(a.q + b.q);
    }

    /// Carrier membership check for a single value.
    bool admits(const Weight& w) const {
        switch (carrier) {
            case Carrier::bool_or: return w.is_bool();
            case Carrier::nat_plus: return !w.is_bool() && !w.is_inf() && w.q.is_integer();
            case Carrier::nnrat_plus: return !w.is_bool() && !w.is_inf();
            case Carrier::nnrat_inf_plus: return !w.is_bool();
        }
        return false;
    }

    bool is_rational_like() const { return carrier != Carrier::bool_or; }

    friend bool operator==(const WeightMonoid& a, const WeightMonoid& b) {
        return a.id == b.id && a.carrier == b.carrier && a.zerosumfree == b.zerosumfree &&
               a.has_infinity == b.has_infinity;
    }

    /// Built-in monoids by id: bool_or, nat, nnrat, nnrat_inf.
    static const WeightMonoid& builtin(const std::string& id);
    static std::vector<std::string> builtin_ids();
};

/// Finitely supported weight function: sorted (key, weight) entries, no zero
/// weights ever stored. Keys are element ids (interned term ids or state
/// indices, depending on context).
class WeightFn {
  public:
    using Entry = std::pair<std::int32_t, Weight>;

    WeightFn() = default;
    explicit WeightFn(std::vector<Entry> entries) : entries_(std::move(entries)) {}

    static WeightFn from_unsorted(std::vector<Entry> entries, const WeightMonoid& m);

    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t support_size() const { return entries_.size(); }

    Weight at(std::int32_t key, const WeightMonoid& m) const {
        for (const auto& [k, w] : entries_)
            if (k == key) return w;
        return m.zero();
    }

    std::vector<std::int32_t> support() const {
        std::vector<std::int32_t> out;
        out.reserve(entries_.size());
        for (const auto& [k, w] : entries_) out.push_back(k);
        return out;
    }

    friend bool operator==(const WeightFn& a, const WeightFn& b) {
        return a.entries_ == b.entries_;
    }
    friend bool operator!=(const WeightFn& a, const WeightFn& b) { return !(a == b); }
    friend bool operator<(const WeightFn& a, const WeightFn& b) {
        return a.entries_ < b.entries_;
    }

  private:
    std::vector<Entry> entries_;
};

/// Builder collecting (key, weight) contributions and merging them under the
/// monoid's addition; zero results are dropped.
class WeightFnBuilder {
  public:
    explicit WeightFnBuilder(const WeightMonoid& m) : monoid_(&m) {}
    void add(std::int32_t key, const Weight& w);
    WeightFn build();

  private:
    const WeightMonoid* monoid_;
    std::vector<WeightFn::Entry> acc_;
};

Weight total_weight(const WeightFn& fn, const WeightMonoid& m);
Weight class_weight(const WeightFn& fn, const std::vector<std::int32_t>& cls,
                    const WeightMonoid& m);

/// Relocates a weight function along a key map, merging collided keys under
/// monoidal addition. The map must cover the whole support.
WeightFn substitute(const WeightFn& fn, const std::function<std::int32_t(std::int32_t)>& sigma,
                    const WeightMonoid& m);

/// Bounded witness search for the row-column property: a matrix with the given
/// row and column sums, with entries drawn from the additive closure of
/// {0, inputs} up to `closure_rounds` rounds. Not a decision procedure.
struct RowColumnResult {
    bool found = false;
    std::vector<std::vector<Weight>> matrix;  // rows x cols when found
};

RowColumnResult check_row_column(const WeightMonoid& m, const std::vector<Weight>& row_sums,
                                 const std::vector<Weight>& col_sums, int closure_rounds = 3);

}  // namespace wfsos
