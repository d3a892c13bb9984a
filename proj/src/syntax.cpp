#include "wfsos/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace wfsos {

ParamValue ParamValue::mk_label(std::string l) {
    ParamValue p;
    p.kind = ParamKind::label;
    p.label = std::move(l);
    return p;
}
ParamValue ParamValue::mk_rate(Weight w) {
    ParamValue p;
    p.kind = ParamKind::rate;
    p.rate = w;
    return p;
}
ParamValue ParamValue::mk_labelset(std::vector<std::string> ls) {
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    ParamValue p;
    p.kind = ParamKind::labelset;
    p.labelset = std::move(ls);
    return p;
}
ParamValue ParamValue::mk_nat(std::int32_t n) {
    ParamValue p;
    p.kind = ParamKind::nat;
    p.nat = n;
    return p;
}
ParamValue ParamValue::mk_varref(std::string name) {
    ParamValue p;
    p.kind = ParamKind::varref;
    p.label = std::move(name);
    return p;
}

bool ParamValue::operator==(const ParamValue& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
        case ParamKind::label: return label == o.label;
        case ParamKind::rate: return rate == o.rate;
        case ParamKind::labelset: return labelset == o.labelset;
        case ParamKind::nat: return nat == o.nat;
        case ParamKind::varref: return label == o.label;
    }
    return false;
}

bool ParamValue::operator<(const ParamValue& o) const {
    if (kind != o.kind) return kind < o.kind;
    switch (kind) {
        case ParamKind::label: return label < o.label;
        case ParamKind::rate: return rate < o.rate;
        case ParamKind::labelset: return labelset < o.labelset;
        case ParamKind::nat: return nat < o.nat;
        case ParamKind::varref: return label < o.label;
    }
    return false;
}

std::string ParamValue::str() const {
    switch (kind) {
        case ParamKind::label: return label;
        case ParamKind::rate: return rate.str();
        case ParamKind::nat: return std::to_string(nat);
        case ParamKind::varref: return "$" + label;
        case ParamKind::labelset: {
            std::string out = "{";
            for (std::size_t i = 0; i < labelset.size(); ++i) {
                if (i) out += ",";
                out += labelset[i];
            }
            return out + "}";
        }
    }
    return "?";
}

int term_compare(TermPtr a, TermPtr b) {
    if (a == b) return 0;
    if (a->is_var != b->is_var) return a->is_var ? -1 : 1;
    if (a->is_var) {
        if (a->var_kind != b->var_kind) return a->var_kind < b->var_kind ? -1 : 1;
        return a->name.compare(b->name);
    }
    if (int c = a->name.compare(b->name); c != 0) return c;
    if (a->params != b->params) return a->params < b->params ? -1 : 1;
    if (a->children.size() != b->children.size())
        return a->children.size() < b->children.size() ? -1 : 1;
    for (std::size_t i = 0; i < a->children.size(); ++i)
        if (int c = term_compare(a->children[i], b->children[i]); c != 0) return c;
    return 0;
}

namespace {
std::string node_key(bool is_var, VarKind vk, const std::string& name,
                     const std::vector<ParamValue>& params, const std::vector<TermPtr>& children) {
    std::ostringstream os;
    os << (is_var ? (vk == VarKind::process ? "v:" : "w:") : "o:") << name;
    for (const auto& p : params) os << '\x01' << p.str();
    for (TermPtr c : children) os << '\x02' << c->id;
    return os.str();
}
}  // namespace

TermPtr TermPool::var(VarKind kind, const std::string& name) {
    std::lock_guard<std::mutex> lock(mu_);
    std::string key = node_key(true, kind, name, {}, {});
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    auto node = std::make_unique<TermNode>();
    node->is_var = true;
    node->var_kind = kind;
    node->name = name;
    node->id = (std::int32_t)nodes_.size();
    TermPtr p = node.get();
    nodes_.push_back(std::move(node));
    index_.emplace(std::move(key), p);
    return p;
}

TermPtr TermPool::op(const std::string& name, std::vector<ParamValue> params,
                     std::vector<TermPtr> children) {
    std::lock_guard<std::mutex> lock(mu_);
    std::string key = node_key(false, VarKind::process, name, params, children);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    auto node = std::make_unique<TermNode>();
    node->is_var = false;
    node->name = name;
    node->params = std::move(params);
    node->children = std::move(children);
    node->id = (std::int32_t)nodes_.size();
    TermPtr p = node.get();
    nodes_.push_back(std::move(node));
    index_.emplace(std::move(key), p);
    return p;
}

TermPtr TermPool::by_id(std::int32_t id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return nodes_.at((std::size_t)id).get();
}

std::int32_t TermPool::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return (std::int32_t)nodes_.size();
}

TermPool& global_pool() {
    static TermPool pool;
    return pool;
}

bool is_ground(TermPtr t) {
    if (t->is_var) return false;
    for (TermPtr c : t->children)
        if (!is_ground(c)) return false;
    return true;
}

static void collect_vars(TermPtr t, std::set<std::string>& out) {
    if (t->is_var) {
        out.insert(t->var_kind == VarKind::weightfn ? "%" + t->name : t->name);
        return;
    }
    for (TermPtr c : t->children) collect_vars(c, out);
}

std::set<std::string> vars_of(TermPtr t) {
    std::set<std::string> out;
    collect_vars(t, out);
    return out;
}

TermPtr apply_subst(TermPtr t, const std::map<std::string, TermPtr>& sigma, TermPool& pool,
                    bool strict) {
    if (t->is_var) {
        std::string key = t->var_kind == VarKind::weightfn ? "%" + t->name : t->name;
        auto it = sigma.find(key);
        if (it != sigma.end()) return it->second;
        if (strict) throw std::invalid_argument("apply_subst: unmapped variable " + key);
        return t;
    }
    bool changed = false;
    std::vector<TermPtr> kids;
    kids.reserve(t->children.size());
    for (TermPtr c : t->children) {
        TermPtr nc = apply_subst(c, sigma, pool, strict);
        changed |= nc != c;
        kids.push_back(nc);
    }
    if (!changed) return t;
    return pool.op(t->name, t->params, std::move(kids));
}

std::string term_to_string(TermPtr t) {
    if (t->is_var) return t->var_kind == VarKind::weightfn ? "%" + t->name : t->name;
    std::string out = t->name;
    if (!t->params.empty()) {
        out += "{";
        for (std::size_t i = 0; i < t->params.size(); ++i) {
            if (i) out += ",";
            out += t->params[i].str();
        }
        out += "}";
    }
    if (!t->children.empty()) {
        out += "(";
        for (std::size_t i = 0; i < t->children.size(); ++i) {
            if (i) out += ",";
            out += term_to_string(t->children[i]);
        }
        out += ")";
    }
    return out;
}

namespace {

struct TermParser {
    const std::string& src;
    std::size_t pos = 0;
    TermPool& pool;
    const std::set<std::string>* binders;

    TermParser(const std::string& s, TermPool& p, const std::set<std::string>* b)
        : src(s), pool(p), binders(b) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("term parse error at " + std::to_string(pos) + ": " + msg);
    }

    void skip_ws() {
        while (pos < src.size() && std::isspace((unsigned char)src[pos])) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum((unsigned char)src[pos]) || src[pos] == '_' || src[pos] == '\''))
            ++pos;
        if (pos == start) fail("expected identifier");
        return src.substr(start, pos - start);
    }

    std::string number_token() {
        skip_ws();
        std::size_t start = pos;
        while (pos < src.size() && std::isdigit((unsigned char)src[pos])) ++pos;
        if (pos < src.size() && src[pos] == '/') {
            ++pos;
            while (pos < src.size() && std::isdigit((unsigned char)src[pos])) ++pos;
        }
        return src.substr(start, pos - start);
    }

    ParamValue param() {
        skip_ws();
        if (pos >= src.size()) fail("expected parameter");
        if (src[pos] == '$') {
            ++pos;
            return ParamValue::mk_varref(ident());
        }
        if (src[pos] == '{') {
            ++pos;
            std::vector<std::string> ls;
            skip_ws();
            if (!eat('}')) {
                ls.push_back(ident());
                while (eat(',')) ls.push_back(ident());
                expect('}');
            }
            return ParamValue::mk_labelset(std::move(ls));
        }
        if (std::isdigit((unsigned char)src[pos])) {
            std::string tok = number_token();
            auto w = Weight::parse(tok);
            if (!w) fail("bad rate " + tok);
            return ParamValue::mk_rate(*w);
        }
        std::string id = ident();
        if (id == "inf") return ParamValue::mk_rate(Weight::inf());
        return ParamValue::mk_label(id);
    }

    TermPtr term() {
        skip_ws();
        if (pos < src.size() && src[pos] == '%') {
            ++pos;
            std::string name = ident();
            // family reference %F[a] / %F[$v]; kept structured in the name
            if (pos < src.size() && src[pos] == '[') {
                ++pos;
                std::string idx;
                skip_ws();
                if (pos < src.size() && src[pos] == '$') {
                    ++pos;
                    idx = "$" + ident();
                } else {
                    idx = ident();
                }
                expect(']');
                name += "[" + idx + "]";
            }
            return pool.var(VarKind::weightfn, name);
        }
        std::string name = ident();
        std::vector<ParamValue> params;
        std::vector<TermPtr> children;
        bool has_structure = false;
        skip_ws();
        if (pos < src.size() && src[pos] == '{') {
            has_structure = true;
            ++pos;
            params.push_back(param());
            while (eat(',')) params.push_back(param());
            expect('}');
        }
        skip_ws();
        if (pos < src.size() && src[pos] == '(') {
            has_structure = true;
            ++pos;
            skip_ws();
            if (!eat(')')) {
                children.push_back(term());
                while (eat(',')) children.push_back(term());
                expect(')');
            }
        }
        if (!has_structure && binders && binders->count(name))
            return pool.var(VarKind::process, name);
        return pool.op(name, std::move(params), std::move(children));
    }
};

}  // namespace

TermPtr parse_term(const std::string& text, TermPool& pool, const std::set<std::string>* binders) {
    TermParser p(text, pool, binders);
    TermPtr t = p.term();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return t;
}

}  // namespace wfsos
