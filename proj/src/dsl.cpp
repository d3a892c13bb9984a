#include "wfsos/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace wfsos {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// cursor over one statement
struct Cursor {
    std::string src;
    std::size_t pos = 0;
    int lineno = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw DslError("line " + std::to_string(lineno) + ": " + msg + " (at '" +
                       src.substr(pos, 24) + "')");
    }
    void skip_ws() {
        while (pos < src.size() && std::isspace((unsigned char)src[pos])) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= src.size();
    }
    bool peek(char c) {
        skip_ws();
        return pos < src.size() && src[pos] == c;
    }
    bool peek_str(const std::string& s) {
        skip_ws();
        return src.compare(pos, s.size(), s) == 0;
    }
    bool eat(char c) {
        if (peek(c)) {
            ++pos;
            return true;
        }
        return false;
    }
    bool eat_str(const std::string& s) {
        if (peek_str(s)) {
            pos += s.size();
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    void expect_str(const std::string& s) {
        if (!eat_str(s)) fail("expected '" + s + "'");
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
    Weight weight() {
        skip_ws();
        if (eat_str("inf")) return Weight::inf();
        if (eat_str("tt")) return Weight::tt();
        if (eat_str("ff")) return Weight::ff();
        std::size_t start = pos;
        while (pos < src.size() && std::isdigit((unsigned char)src[pos])) ++pos;
        if (pos < src.size() && src[pos] == '/') {
            ++pos;
            while (pos < src.size() && std::isdigit((unsigned char)src[pos])) ++pos;
        }
        auto w = Weight::parse(src.substr(start, pos - start));
        if (!w) fail("expected weight");
        return *w;
    }
    LabelExpr label_expr() {
        skip_ws();
        if (eat('$')) return LabelExpr::var(ident());
        return LabelExpr::lit(ident());
    }
    std::vector<std::string> label_set_body(char close) {
        std::vector<std::string> out;
        skip_ws();
        if (eat(close)) return out;
        out.push_back(ident());
        while (eat(',')) out.push_back(ident());
        expect(close);
        return out;
    }
    // %phi or %F[expr]
    FnVarRef fnref() {
        expect('%');
        std::string name = ident();
        if (eat('[')) {
            LabelExpr e = label_expr();
            expect(']');
            return FnVarRef::mk_family(name, e);
        }
        return FnVarRef::mk_plain(name);
    }
    // substring up to a top-level occurrence of `stop` (or end); advances past it
    std::string until_toplevel(const std::string& stop) {
        skip_ws();
        int depth = 0;
        std::size_t start = pos;
        while (pos < src.size()) {
            char c = src[pos];
            if (c == '(' || c == '{' || c == '[') ++depth;
            if (c == ')' || c == '}' || c == ']') --depth;
            if (depth == 0 && src.compare(pos, stop.size(), stop) == 0) {
                std::string out = src.substr(start, pos - start);
                pos += stop.size();
                return out;
            }
            ++pos;
        }
        std::string out = src.substr(start);
        pos = src.size();
        return out;
    }
};

std::string fnref_var_name(const FnVarRef& ref) {
    if (!ref.plain.empty()) return ref.plain;
    return ref.family + "[" + ref.index.str() + "]";
}

struct Statement {
    std::string text;
    int lineno = 0;
};

// splits into statements: block headers swallow their braced body
std::vector<Statement> statements(const std::string& text) {
    std::vector<Statement> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    Statement current;
    int depth = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (depth == 0) {
            current = Statement{line, lineno};
        } else {
            current.text += "\n" + line;
        }
        for (char c : line) {
            if (c == '{') ++depth;
            if (c == '}') --depth;
        }
        if (depth < 0) throw DslError("line " + std::to_string(lineno) + ": unbalanced '}'");
        if (depth == 0) out.push_back(current);
    }
    if (depth != 0) throw DslError("unterminated block");
    return out;
}

std::vector<std::string> block_lines(const std::string& stmt) {
    auto open = stmt.find('{');
    auto close = stmt.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw DslError("expected a braced block in: " + stmt);
    std::string body = stmt.substr(open + 1, close - open - 1);
    std::vector<std::string> out;
    std::istringstream in(body);
    std::string line;
    while (std::getline(in, line)) {
        // allow ';'-separated entries on one line
        std::istringstream parts(line);
        std::string piece;
        while (std::getline(parts, piece, ';')) {
            piece = trim(piece);
            if (!piece.empty()) out.push_back(piece);
        }
    }
    return out;
}

ParamKind parse_param_kind(const std::string& s, int lineno) {
    if (s == "label") return ParamKind::label;
    if (s == "rate") return ParamKind::rate;
    if (s == "labelset") return ParamKind::labelset;
    if (s == "nat") return ParamKind::nat;
    throw DslError("line " + std::to_string(lineno) + ": unknown parameter kind " + s);
}

std::string param_kind_name(ParamKind k) {
    switch (k) {
        case ParamKind::label: return "label";
        case ParamKind::rate: return "rate";
        case ParamKind::labelset: return "labelset";
        case ParamKind::nat: return "nat";
        case ParamKind::varref: return "varref";
    }
    return "?";
}

// "name/arity {kind, kind}" entries
void parse_signature_entry(const std::string& entry, Signature& sig, int lineno) {
    Cursor c{entry, 0, lineno};
    OpSchema op;
    op.name = c.ident();
    c.expect('/');
    Weight ar = c.weight();
    op.arity = (int)ar.q.num;
    if (c.eat('{')) {
        op.params.push_back(parse_param_kind(c.ident(), lineno));
        while (c.eat(',')) op.params.push_back(parse_param_kind(c.ident(), lineno));
        c.expect('}');
    }
    if (!sig.add(op)) throw DslError("line " + std::to_string(lineno) + ": duplicate op " + op.name);
}

WeightExpr parse_weight_expr(Cursor& c);

WeightExpr parse_weight_atom(Cursor& c) {
    c.skip_ws();
    if (c.eat('(')) {
        WeightExpr e = parse_weight_expr(c);
        c.expect(')');
        return e;
    }
    if (c.peek_str("point") || c.peek_str("total") || c.peek_str("size") || c.peek_str("min") ||
        c.peek_str("max")) {
        std::string fn = c.ident();
        c.expect('(');
        if (fn == "min" || fn == "max") {
            WeightExpr a = parse_weight_expr(c);
            c.expect(',');
            WeightExpr b = parse_weight_expr(c);
            c.expect(')');
            return WeightExpr::apply(
                fn == "min" ? WeightExpr::Op::min : WeightExpr::Op::max, {a, b});
        }
        Weight idx = c.weight();
        c.expect(')');
        int child = (int)idx.q.num - 1;
        if (fn == "point") return WeightExpr::point_of(child);
        if (fn == "total") return WeightExpr::total_of(child);
        return WeightExpr::support_size_of(child);
    }
    return WeightExpr::constant_of(c.weight());
}

WeightExpr parse_weight_factor(Cursor& c) {
    WeightExpr e = parse_weight_atom(c);
    while (true) {
        if (c.peek('*')) {
            c.expect('*');
            e = WeightExpr::apply(WeightExpr::Op::mul, {e, parse_weight_atom(c)});
        } else if (c.peek('/')) {
            c.expect('/');
            e = WeightExpr::apply(WeightExpr::Op::div, {e, parse_weight_atom(c)});
        } else {
            return e;
        }
    }
}

WeightExpr parse_weight_expr(Cursor& c) {
    WeightExpr e = parse_weight_factor(c);
    while (c.peek('+')) {
        c.expect('+');
        e = WeightExpr::apply(WeightExpr::Op::add, {e, parse_weight_factor(c)});
    }
    return e;
}

std::string print_weight_expr(const WeightExpr& e) {
    using Op = WeightExpr::Op;
    switch (e.op) {
        case Op::constant: return e.value.str();
        case Op::point: return "point(" + std::to_string(e.child + 1) + ")";
        case Op::total: return "total(" + std::to_string(e.child + 1) + ")";
        case Op::support_size: return "size(" + std::to_string(e.child + 1) + ")";
        case Op::min:
        case Op::max:
            return std::string(e.op == Op::min ? "min(" : "max(") + print_weight_expr(e.args[0]) +
                   "," + print_weight_expr(e.args[1]) + ")";
        case Op::add:
        case Op::mul:
        case Op::div: {
            const char* sym = e.op == Op::add ? "+" : e.op == Op::mul ? "*" : "/";
            std::string out = "(";
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += sym;
                out += print_weight_expr(e.args[i]);
            }
            return out + ")";
        }
    }
    return "0";
}

void parse_interp_entry(const std::string& entry, WfsosSpec& spec, int lineno) {
    Cursor c{entry, 0, lineno};
    std::string op = c.ident();
    c.expect(':');
    InterpBinding b;
    b.theta_op = op;
    if (c.eat_str("expr")) {
        b.expr = parse_weight_expr(c);
        spec.interp_bindings.push_back(std::move(b));
        return;
    }
    b.builtin_name = c.ident();
    if (c.eat('(')) {
        c.skip_ws();
        if (!c.eat(')')) {
            auto arg = [&]() {
                c.skip_ws();
                std::size_t start = c.pos;
                int depth = 0;
                while (c.pos < c.src.size()) {
                    char ch = c.src[c.pos];
                    if (ch == '(') ++depth;
                    if (ch == ')') {
                        if (depth == 0) break;
                        --depth;
                    }
                    if (ch == ',' && depth == 0) break;
                    ++c.pos;
                }
                return trim(c.src.substr(start, c.pos - start));
            };
            b.args.push_back(arg());
            while (c.eat(',')) b.args.push_back(arg());
            c.expect(')');
        }
    }
    spec.interp_bindings.push_back(std::move(b));
}

// operator pattern: name{pat,...}(args)
struct OpPattern {
    std::string name;
    std::vector<ParamPattern> params;
    std::vector<std::string> args;
};

OpPattern parse_op_pattern(Cursor& c) {
    OpPattern p;
    p.name = c.ident();
    if (c.eat('{')) {
        auto one = [&]() {
            c.skip_ws();
            if (c.eat('$')) {
                ParamPattern pp;
                pp.bind = true;
                pp.var = c.ident();
                return pp;
            }
            ParamPattern pp;
            pp.bind = false;
            if (c.peek('{')) {
                c.expect('{');
                pp.value = ParamValue::mk_labelset(c.label_set_body('}'));
            } else if (c.peek_str("inf") ||
                       (c.pos < c.src.size() && std::isdigit((unsigned char)c.src[c.pos]))) {
                pp.value = ParamValue::mk_rate(c.weight());
            } else {
                pp.value = ParamValue::mk_label(c.ident());
            }
            return pp;
        };
        p.params.push_back(one());
        while (c.eat(',')) p.params.push_back(one());
        c.expect('}');
    }
    c.expect('(');
    c.skip_ws();
    if (!c.eat(')')) {
        p.args.push_back(c.ident());
        while (c.eat(',')) p.args.push_back(c.ident());
        c.expect(')');
    }
    return p;
}

std::vector<SideCond> parse_where(Cursor& c) {
    std::vector<SideCond> out;
    if (!c.eat_str("where")) return out;
    auto one = [&]() {
        SideCond sc;
        sc.lhs = c.label_expr();
        if (c.eat_str("!=")) {
            sc.kind = SideCond::Kind::neq;
            sc.rhs = c.label_expr();
        } else if (c.eat_str("==")) {
            sc.kind = SideCond::Kind::eq;
            sc.rhs = c.label_expr();
        } else if (c.eat_str("notin")) {
            sc.kind = SideCond::Kind::notin_set;
            goto set_part;
        } else if (c.eat_str("in")) {
            sc.kind = SideCond::Kind::in_set;
            goto set_part;
        } else {
            c.fail("expected a side condition operator");
        }
        return sc;
    set_part:
        c.skip_ws();
        if (c.eat('$')) {
            sc.set_is_var = true;
            sc.set_var = c.ident();
        } else {
            c.expect('{');
            sc.set_items = c.label_set_body('}');
        }
        return sc;
    };
    out.push_back(one());
    while (c.eat(',')) out.push_back(one());
    return out;
}

// premises for the wfsos dialect, before argument resolution
struct RawPremises {
    std::vector<std::tuple<std::string, LabelExpr, std::string>> positives;  // (argvar, l, fnvar)
    std::vector<std::pair<std::string, std::string>> wildcards;              // (argvar, family)
    std::vector<std::pair<std::string, LabelExpr>> negatives;
    std::vector<std::pair<FnVarRef, Weight>> totals;
    std::vector<std::pair<FnVarRef, std::string>> supports;
};

void parse_wfsos_premise(Cursor& c, RawPremises& out) {
    c.skip_ws();
    if (c.peek_str("total")) {
        c.expect_str("total");
        c.expect('(');
        FnVarRef ref = c.fnref();
        c.expect(')');
        c.expect('=');
        out.totals.emplace_back(ref, c.weight());
        return;
    }
    if (c.peek_str("in")) {
        c.expect_str("in");
        c.expect('(');
        FnVarRef ref = c.fnref();
        c.expect(',');
        std::string y = c.ident();
        c.expect(')');
        out.supports.emplace_back(ref, y);
        return;
    }
    std::string arg = c.ident();
    if (c.eat_str("--")) {
        c.skip_ws();
        if (c.eat('*')) {
            c.expect_str("-->");
            c.expect('%');
            out.wildcards.emplace_back(arg, c.ident());
            return;
        }
        LabelExpr l = c.label_expr();
        c.expect_str("-->");
        c.expect('%');
        out.positives.emplace_back(arg, l, c.ident());
        return;
    }
    if (c.eat_str("-/")) {
        LabelExpr l = c.label_expr();
        c.expect_str("->");
        out.negatives.emplace_back(arg, l);
        return;
    }
    c.fail("expected a premise");
}

int arg_index(const std::vector<std::string>& args, const std::string& v, int lineno) {
    for (std::size_t i = 0; i < args.size(); ++i)
        if (args[i] == v) return (int)i;
    throw DslError("line " + std::to_string(lineno) + ": premise variable " + v +
                   " is not an argument of the conclusion");
}

RuleSchema parse_wfsos_rule(const Statement& st, TermPool& pool) {
    Cursor c{st.text, 0, st.lineno};
    c.expect_str("rule");
    RuleSchema schema;
    schema.name = c.ident();
    c.expect(':');

    RawPremises raw;
    c.skip_ws();
    if (!c.peek_str("=>")) {
        parse_wfsos_premise(c, raw);
        while (c.eat(',')) parse_wfsos_premise(c, raw);
    }
    c.expect_str("=>");

    OpPattern concl = parse_op_pattern(c);
    schema.op = concl.name;
    schema.op_params = concl.params;
    schema.arity = (int)concl.args.size();
    schema.arg_vars = concl.args;
    c.expect_str("--");
    schema.concl_label = c.label_expr();
    c.expect_str("-->");

    std::string target_text = c.until_toplevel(" where");
    bool has_where = c.pos < c.src.size();
    if (has_where) {
        Cursor wc{"where" + c.src.substr(c.pos), 0, st.lineno};
        schema.conds = parse_where(wc);
    }

    schema.wildcard.assign((std::size_t)schema.arity, "");
    for (const auto& [arg, fam] : raw.wildcards)
        schema.wildcard[(std::size_t)arg_index(concl.args, arg, st.lineno)] = fam;
    for (const auto& [arg, l, v] : raw.positives)
        schema.positives.push_back({arg_index(concl.args, arg, st.lineno), l, v});
    for (const auto& [arg, l] : raw.negatives)
        schema.negatives.push_back({arg_index(concl.args, arg, st.lineno), l});
    for (const auto& [ref, w] : raw.totals) schema.totals.push_back({ref, w});
    for (const auto& [ref, y] : raw.supports) schema.supports.push_back({ref, y});

    std::set<std::string> binders(concl.args.begin(), concl.args.end());
    for (const auto& [ref, y] : raw.supports) binders.insert(y);
    schema.target = parse_term(trim(target_text), pool, &binders);
    return schema;
}

SegalaRule parse_segala_rule(const Statement& st, TermPool& pool) {
    Cursor c{st.text, 0, st.lineno};
    c.expect_str("rule");
    SegalaRule rule;
    rule.name = c.ident();
    c.expect(':');

    RawPremises raw;
    c.skip_ws();
    if (!c.peek_str("=>")) {
        parse_wfsos_premise(c, raw);
        while (c.eat(',')) parse_wfsos_premise(c, raw);
    }
    if (!raw.totals.empty() || !raw.wildcards.empty())
        c.fail("total or wildcard premises are not part of this dialect");
    c.expect_str("=>");

    OpPattern concl = parse_op_pattern(c);
    rule.op = concl.name;
    rule.op_params = concl.params;
    rule.arity = (int)concl.args.size();
    rule.arg_vars = concl.args;
    c.expect_str("--");
    rule.concl_label = c.label_expr();
    c.expect_str("-->");

    std::string target_text = c.until_toplevel(" where");
    if (c.pos < c.src.size()) {
        Cursor wc{"where" + c.src.substr(c.pos), 0, st.lineno};
        rule.conds = parse_where(wc);
    }

    for (const auto& [arg, l, v] : raw.positives)
        rule.positives.push_back({arg_index(concl.args, arg, st.lineno), l, v});
    for (const auto& [arg, l] : raw.negatives)
        rule.negatives.push_back({arg_index(concl.args, arg, st.lineno), l});
    for (const auto& [ref, y] : raw.supports) {
        if (ref.plain.empty()) c.fail("support premises take a plain variable here");
        rule.supports.emplace_back(ref.plain, y);
    }

    std::set<std::string> binders(concl.args.begin(), concl.args.end());
    for (const auto& [phi, y] : rule.supports) binders.insert(y);

    // convex target: w1 t1 + w2 t2 + ...
    Cursor tc{trim(target_text), 0, st.lineno};
    while (true) {
        Weight w = tc.weight();
        std::string piece = tc.until_toplevel(" + ");
        bool more = tc.pos < tc.src.size();
        rule.target.emplace_back(w, parse_term(trim(piece), pool, &binders));
        if (!more) break;
    }
    return rule;
}

WgsosRule parse_wgsos_rule(const Statement& st, TermPool& pool) {
    Cursor c{st.text, 0, st.lineno};
    c.expect_str("rule");
    WgsosRule rule;
    rule.name = c.ident();
    c.expect(':');

    // premises: total(x, a) = w | total(x, a) = $w | x --a,$u--> y
    struct RawTotal {
        std::string arg;
        LabelExpr label;
        bool bind;
        Weight w;
        std::string bindvar;
    };
    struct RawTrans {
        std::string arg;
        LabelExpr label;
        std::string u, y;
    };
    std::vector<RawTotal> rtotals;
    std::vector<RawTrans> rtrans;

    c.skip_ws();
    while (!c.peek_str("=>")) {
        if (c.eat_str("total")) {
            c.expect('(');
            std::string arg = c.ident();
            c.expect(',');
            LabelExpr l = c.label_expr();
            c.expect(')');
            c.expect('=');
            c.skip_ws();
            if (c.eat('$'))
                rtotals.push_back({arg, l, true, Weight::rat(0), c.ident()});
            else
                rtotals.push_back({arg, l, false, c.weight(), ""});
        } else {
            std::string arg = c.ident();
            c.expect_str("--");
            LabelExpr l = c.label_expr();
            c.expect(',');
            c.expect('$');
            std::string u = c.ident();
            c.expect_str("-->");
            std::string y = c.ident();
            rtrans.push_back({arg, l, u, y});
        }
        if (!c.eat(',')) break;
    }
    c.expect_str("=>");

    OpPattern concl = parse_op_pattern(c);
    rule.op = concl.name;
    rule.op_params = concl.params;
    rule.arity = (int)concl.args.size();
    rule.arg_vars = concl.args;
    c.expect_str("--");
    rule.concl_label = c.label_expr();
    c.expect(',');

    // beta: const(w|$r) | prod(coeff, $u...) | minlaw($u/$w, $u/$w)
    c.skip_ws();
    if (c.eat_str("const")) {
        c.expect('(');
        rule.beta.kind = WgsosBeta::Kind::constant;
        c.skip_ws();
        if (c.eat('$')) {
            rule.beta.coeff_is_var = true;
            rule.beta.coeff_var = c.ident();
        } else {
            rule.beta.coeff = c.weight();
        }
        c.expect(')');
    } else if (c.eat_str("prod")) {
        c.expect('(');
        rule.beta.kind = WgsosBeta::Kind::scaled_product;
        c.skip_ws();
        if (c.eat('$')) {
            std::string first = c.ident();
            // a leading rate binder is a coefficient only if more follow
            rule.beta.coeff_is_var = true;
            rule.beta.coeff_var = first;
        } else {
            rule.beta.coeff = c.weight();
        }
        while (c.eat(',')) {
            c.expect('$');
            rule.beta.uvars.push_back(c.ident());
        }
        c.expect(')');
    } else if (c.eat_str("minlaw")) {
        c.expect('(');
        rule.beta.kind = WgsosBeta::Kind::min_law;
        c.expect('$');
        rule.beta.u1 = c.ident();
        c.expect('/');
        c.expect('$');
        rule.beta.w1 = c.ident();
        c.expect(',');
        c.expect('$');
        rule.beta.u2 = c.ident();
        c.expect('/');
        c.expect('$');
        rule.beta.w2 = c.ident();
        c.expect(')');
    } else {
        c.fail("expected const(...), prod(...) or minlaw(...)");
    }
    c.expect_str("-->");

    std::string target_text = c.until_toplevel(" where");
    if (c.pos < c.src.size()) {
        Cursor wc{"where" + c.src.substr(c.pos), 0, st.lineno};
        rule.conds = parse_where(wc);
    }

    for (const auto& t : rtotals)
        rule.totals.push_back(
            {arg_index(concl.args, t.arg, st.lineno), t.label, t.bind, t.w, t.bindvar});
    for (const auto& t : rtrans)
        rule.trans.push_back({arg_index(concl.args, t.arg, st.lineno), t.label, t.u, t.y});

    std::set<std::string> binders(concl.args.begin(), concl.args.end());
    for (const auto& t : rtrans) binders.insert(t.y);
    rule.target = parse_term(trim(target_text), pool, &binders);
    return rule;
}

std::vector<std::string> parse_label_list(const std::string& rest) {
    std::vector<std::string> out;
    std::istringstream rs(rest);
    std::string tok;
    while (std::getline(rs, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

}  // namespace

LoadedSpec load_spec_text(const std::string& text, TermPool& pool) {
    // format dispatch
    std::string format = "wfsos";
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.rfind("format", 0) == 0) format = trim(line.substr(6));
            break;
        }
    }

    LoadedSpec loaded;
    loaded.format = format;

    if (format == "pepa") {
        PepaModel model = parse_pepa(text, pool);
        auto violations = validate_pepa(model);
        if (!violations.empty()) throw DslError("invalid pepa model: " + violations.front());
        loaded.pepa = model;
        loaded.spec = pepa_wfsos(model, pool);
        loaded.roots = model.systems;
        return loaded;
    }

    WfsosSpec spec;
    SegalaGsosSpec seg;
    WGsosSpec wg;
    bool have_monoid = false;
    std::vector<Statement> rule_statements;
    std::vector<std::pair<std::string, int>> system_lines;
    std::vector<std::pair<std::string, int>> constant_entries;

    for (const auto& st : statements(text)) {
        Cursor c{st.text, 0, st.lineno};
        if (c.eat_str("format")) continue;
        if (c.eat_str("monoid")) {
            spec.monoid = WeightMonoid::builtin(trim(st.text.substr(c.pos)));
            have_monoid = true;
            continue;
        }
        if (c.eat_str("labels")) {
            spec.labels = parse_label_list(st.text.substr(c.pos));
            continue;
        }
        if (c.eat_str("constants")) {
            for (const auto& entry : block_lines(st.text)) constant_entries.emplace_back(entry, st.lineno);
            continue;
        }
        if (c.eat_str("signature")) {
            bool process = c.eat_str("process");
            if (!process) c.expect_str("weight");
            Signature& sig = process ? spec.sigma : spec.theta;
            sig.kind = process ? Signature::Kind::process : Signature::Kind::weight;
            for (const auto& entry : block_lines(st.text)) parse_signature_entry(entry, sig, st.lineno);
            continue;
        }
        if (c.eat_str("interp")) {
            for (const auto& entry : block_lines(st.text)) parse_interp_entry(entry, spec, st.lineno);
            continue;
        }
        if (c.peek_str("rule")) {
            rule_statements.push_back(st);
            continue;
        }
        if (c.eat_str("system")) {
            system_lines.emplace_back(trim(st.text.substr(c.pos)), st.lineno);
            continue;
        }
        c.fail("unknown statement");
    }

    if (format == "wfsos") {
        if (!have_monoid) throw DslError("wfsos spec needs a monoid");
        for (const auto& st : rule_statements) spec.schemas.push_back(parse_wfsos_rule(st, pool));
        for (const auto& [entry, lineno] : constant_entries) {
            auto eq = entry.find('=');
            if (eq == std::string::npos)
                throw DslError("line " + std::to_string(lineno) + ": expected constant definition");
            spec.constants[trim(entry.substr(0, eq))] =
                parse_term(trim(entry.substr(eq + 1)), pool);
        }
        build_interpretation(spec);
        loaded.spec = spec;
        for (const auto& [s, lineno] : system_lines)
            loaded.roots.push_back(parse_term(s, pool));
        return loaded;
    }

    if (format == "segala") {
        seg.labels = spec.labels;
        seg.sigma = spec.sigma;
        for (const auto& st : rule_statements) seg.rules.push_back(parse_segala_rule(st, pool));
        for (const auto& [entry, lineno] : constant_entries) {
            auto eq = entry.find('=');
            if (eq == std::string::npos)
                throw DslError("line " + std::to_string(lineno) + ": expected constant definition");
            seg.constants[trim(entry.substr(0, eq))] = parse_term(trim(entry.substr(eq + 1)), pool);
        }
        auto violations = validate_segala(seg);
        if (!violations.empty()) throw DslError("invalid segala spec: " + violations.front());
        loaded.segala = seg;
        loaded.spec = translate_segala(seg, pool);
        for (const auto& [s, lineno] : system_lines) loaded.roots.push_back(parse_term(s, pool));
        return loaded;
    }

    if (format == "wgsos") {
        if (!have_monoid) throw DslError("wgsos spec needs a monoid");
        wg.monoid = spec.monoid;
        wg.labels = spec.labels;
        wg.sigma = spec.sigma;
        for (const auto& st : rule_statements) wg.rules.push_back(parse_wgsos_rule(st, pool));
        for (const auto& [entry, lineno] : constant_entries) {
            auto eq = entry.find('=');
            if (eq == std::string::npos)
                throw DslError("line " + std::to_string(lineno) + ": expected constant definition");
            wg.constants[trim(entry.substr(0, eq))] = parse_term(trim(entry.substr(eq + 1)), pool);
        }
        auto violations = validate_wgsos(wg);
        if (!violations.empty()) throw DslError("invalid wgsos spec: " + violations.front());
        loaded.wgsos = wg;
        loaded.spec = translate_wgsos(wg, pool);
        for (const auto& [s, lineno] : system_lines) loaded.roots.push_back(parse_term(s, pool));
        return loaded;
    }

    throw DslError("unknown format " + format);
}

TermPtr parse_root_term(const LoadedSpec& loaded, const std::string& text, TermPool& pool) {
    if (loaded.format == "pepa") return parse_pepa_term(text, pool);
    return parse_term(text, pool);
}

std::string print_wfsos_spec(const WfsosSpec& spec) {
    std::ostringstream os;
    os << "format wfsos\n";
    os << "monoid " << spec.monoid.id << "\n";
    os << "labels ";
    for (std::size_t i = 0; i < spec.labels.size(); ++i) {
        if (i) os << ", ";
        os << spec.labels[i];
    }
    os << "\n";

    auto emit_signature = [&os](const char* kind, const Signature& sig) {
        os << "signature " << kind << " {\n";
        for (const auto& op : sig.ops) {
            os << "  " << op.name << "/" << op.arity;
            if (!op.params.empty()) {
                os << " {";
                for (std::size_t i = 0; i < op.params.size(); ++i) {
                    if (i) os << ", ";
                    os << param_kind_name(op.params[i]);
                }
                os << "}";
            }
            os << "\n";
        }
        os << "}\n";
    };
    emit_signature("process", spec.sigma);
    emit_signature("weight", spec.theta);

    if (!spec.constants.empty()) {
        os << "constants {\n";
        for (const auto& [n, def] : spec.constants)
            os << "  " << n << " = " << term_to_string(def) << "\n";
        os << "}\n";
    }

    os << "interp {\n";
    for (const auto& b : spec.interp_bindings) {
        os << "  " << b.theta_op << ": ";
        if (b.expr) {
            os << "expr " << print_weight_expr(*b.expr);
        } else {
            os << b.builtin_name;
            if (!b.args.empty()) {
                os << "(";
                for (std::size_t i = 0; i < b.args.size(); ++i) {
                    if (i) os << ", ";
                    os << b.args[i];
                }
                os << ")";
            }
        }
        os << "\n";
    }
    os << "}\n";

    for (const auto& s : spec.schemas) {
        os << "rule " << s.name << ": ";
        bool first = true;
        auto sep = [&]() {
            if (!first) os << ", ";
            first = false;
        };
        for (int i = 0; i < s.arity; ++i)
            if (!s.wildcard[(std::size_t)i].empty()) {
                sep();
                os << s.arg_vars[(std::size_t)i] << " --*--> %" << s.wildcard[(std::size_t)i];
            }
        for (const auto& p : s.positives) {
            sep();
            os << s.arg_vars[(std::size_t)p.arg] << " --" << p.label.str() << "--> %" << p.var;
        }
        for (const auto& n : s.negatives) {
            sep();
            os << s.arg_vars[(std::size_t)n.arg] << " -/" << n.label.str() << "->";
        }
        for (const auto& t : s.totals) {
            sep();
            os << "total(" << t.var.str() << ") = " << t.w.str();
        }
        for (const auto& sp : s.supports) {
            sep();
            os << "in(" << sp.var.str() << ", " << sp.yvar << ")";
        }
        os << " => " << s.op;
        if (!s.op_params.empty()) {
            os << "{";
            for (std::size_t i = 0; i < s.op_params.size(); ++i) {
                if (i) os << ",";
                const auto& p = s.op_params[i];
                os << (p.bind ? "$" + p.var : p.value.str());
            }
            os << "}";
        }
        os << "(";
        for (std::size_t i = 0; i < s.arg_vars.size(); ++i) {
            if (i) os << ",";
            os << s.arg_vars[i];
        }
        os << ") --" << s.concl_label.str() << "--> " << term_to_string(s.target);
        if (!s.conds.empty()) {
            os << " where ";
            for (std::size_t i = 0; i < s.conds.size(); ++i) {
                if (i) os << ", ";
                const auto& sc = s.conds[i];
                os << sc.lhs.str();
                switch (sc.kind) {
                    case SideCond::Kind::eq: os << " == " << sc.rhs.str(); break;
                    case SideCond::Kind::neq: os << " != " << sc.rhs.str(); break;
                    case SideCond::Kind::in_set:
                    case SideCond::Kind::notin_set: {
                        os << (sc.kind == SideCond::Kind::in_set ? " in " : " notin ");
                        if (sc.set_is_var) {
                            os << "$" << sc.set_var;
                        } else {
                            os << "{";
                            for (std::size_t k = 0; k < sc.set_items.size(); ++k) {
                                if (k) os << ",";
                                os << sc.set_items[k];
                            }
                            os << "}";
                        }
                        break;
                    }
                }
            }
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace wfsos
