#include "wfsos/pepa.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace wfsos {

namespace {

struct PepaTermParser {
    const std::string& src;
    std::size_t pos = 0;
    TermPool& pool;

    PepaTermParser(const std::string& s, TermPool& p) : src(s), pool(p) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw PepaParseError("pepa parse error at " + std::to_string(pos) + ": " + msg);
    }

    void skip_ws() {
        while (pos < src.size() && std::isspace((unsigned char)src[pos])) ++pos;
    }
    bool peek(char c) {
        skip_ws();
        return pos < src.size() && src[pos] == c;
    }
    bool eat(char c) {
        if (peek(c)) {
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

    Weight rate() {
        skip_ws();
        std::size_t start = pos;
        while (pos < src.size() && std::isdigit((unsigned char)src[pos])) ++pos;
        if (pos < src.size() && src[pos] == '/') {
            ++pos;
            while (pos < src.size() && std::isdigit((unsigned char)src[pos])) ++pos;
        }
        auto w = Weight::parse(src.substr(start, pos - start));
        if (!w) fail("expected rate");
        if (w->is_zero()) fail("nonpositive rate");
        return *w;
    }

    std::vector<std::string> label_set(char close) {
        std::vector<std::string> out;
        skip_ws();
        if (eat(close)) return out;
        out.push_back(ident());
        while (eat(',')) out.push_back(ident());
        expect(close);
        return out;
    }

    // choice := coop ('+' coop)*
    TermPtr choice() {
        TermPtr t = coop();
        while (eat('+')) t = pool.op("plus", {}, {t, coop()});
        return t;
    }

    // coop := hide ('<' L '>' hide)*
    TermPtr coop() {
        TermPtr t = hide();
        while (peek('<')) {
            ++pos;
            auto ls = label_set('>');
            t = pool.op("coop", {ParamValue::mk_labelset(std::move(ls))}, {t, hide()});
        }
        return t;
    }

    // hide := prefix ('\' '{' L '}')*
    TermPtr hide() {
        TermPtr t = prefix();
        while (peek('\\')) {
            ++pos;
            expect('{');
            auto ls = label_set('}');
            t = pool.op("hide", {ParamValue::mk_labelset(std::move(ls))}, {t});
        }
        return t;
    }

    // prefix := '(' a ',' r ')' '.' prefix | '(' choice ')' | nil | 0 | const
    TermPtr prefix() {
        skip_ws();
        if (peek('(')) {
            std::size_t mark = pos;
            ++pos;
            // try an action prefix, fall back to grouping
            bool is_prefix = false;
            {
                std::size_t save = pos;
                skip_ws();
                if (pos < src.size() &&
                    (std::isalpha((unsigned char)src[pos]) || src[pos] == '_')) {
                    ident();
                    skip_ws();
                    is_prefix = pos < src.size() && src[pos] == ',';
                }
                pos = save;
            }
            if (is_prefix) {
                std::string a = ident();
                expect(',');
                Weight r = rate();
                expect(')');
                expect('.');
                TermPtr cont = prefix();
                return pool.op("prefix",
                               {ParamValue::mk_label(a), ParamValue::mk_rate(r)}, {cont});
            }
            pos = mark;
            expect('(');
            TermPtr t = choice();
            expect(')');
            return t;
        }
        skip_ws();
        if (pos < src.size() && src[pos] == '0') {
            ++pos;
            return pool.op("nil", {}, {});
        }
        std::string name = ident();
        if (name == "nil") return pool.op("nil", {}, {});
        return pool.op(name, {}, {});
    }
};

void collect_labels(TermPtr t, std::set<std::string>& out) {
    if (t->is_var) return;
    for (const auto& p : t->params) {
        if (p.kind == ParamKind::label) out.insert(p.label);
        if (p.kind == ParamKind::labelset)
            for (const auto& l : p.labelset) out.insert(l);
    }
    for (TermPtr c : t->children) collect_labels(c, out);
}

void collect_constants(TermPtr t, std::set<std::string>& out) {
    if (t->is_var) return;
    static const std::set<std::string> builtin = {"nil", "prefix", "plus", "coop", "hide"};
    if (t->children.empty() && t->params.empty() && !builtin.count(t->name)) out.insert(t->name);
    for (TermPtr c : t->children) collect_constants(c, out);
}

void collect_labelsets(TermPtr t, std::set<std::vector<std::string>>& out) {
    if (t->is_var) return;
    for (const auto& p : t->params)
        if (p.kind == ParamKind::labelset) out.insert(p.labelset);
    for (TermPtr c : t->children) collect_labelsets(c, out);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

TermPtr parse_pepa_term(const std::string& text, TermPool& pool) {
    PepaTermParser p(text, pool);
    TermPtr t = p.choice();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return t;
}

PepaModel parse_pepa(const std::string& text, TermPool& pool) {
    PepaModel model;
    std::set<std::string> labels;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty() || line == "format pepa") continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "law") {
            std::string law;
            ls >> law;
            if (law == "minimal")
                model.law = PepaModel::Law::minimal;
            else if (law == "multiplicative")
                model.law = PepaModel::Law::multiplicative;
            else
                throw PepaParseError("line " + std::to_string(lineno) + ": unknown law " + law);
            continue;
        }
        if (head == "labels") {
            std::string rest = trim(line.substr(6));
            std::istringstream rs(rest);
            std::string tok;
            while (std::getline(rs, tok, ',')) {
                tok = trim(tok);
                if (!tok.empty()) labels.insert(tok);
            }
            continue;
        }
        if (head == "system") {
            model.systems.push_back(parse_pepa_term(trim(line.substr(6)), pool));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw PepaParseError("line " + std::to_string(lineno) + ": expected definition");
        std::string name = trim(line.substr(0, eq));
        if (name.empty() || !std::isalpha((unsigned char)name[0]))
            throw PepaParseError("line " + std::to_string(lineno) + ": bad constant name");
        if (model.constants.count(name))
            throw PepaParseError("line " + std::to_string(lineno) + ": duplicate constant " + name);
        model.constants[name] = parse_pepa_term(trim(line.substr(eq + 1)), pool);
    }

    for (const auto& [n, def] : model.constants) collect_labels(def, labels);
    for (TermPtr t : model.systems) collect_labels(t, labels);
    labels.insert(PepaModel::tau);
    model.labels.assign(labels.begin(), labels.end());
    return model;
}

std::vector<std::string> validate_pepa(const PepaModel& model) {
    std::vector<std::string> out;
    std::set<std::string> refs;
    for (const auto& [n, def] : model.constants) collect_constants(def, refs);
    for (TermPtr t : model.systems) collect_constants(t, refs);
    for (const auto& r : refs)
        if (!model.constants.count(r)) out.push_back("undefined-constant:" + r);

    std::set<std::vector<std::string>> labelsets;
    for (const auto& [n, def] : model.constants) collect_labelsets(def, labelsets);
    for (TermPtr t : model.systems) collect_labelsets(t, labelsets);
    for (const auto& ls : labelsets)
        for (const auto& l : ls)
            if (l == PepaModel::tau) out.push_back("tau-in-labelset");

    std::set<std::string> declared(model.labels.begin(), model.labels.end());
    std::set<std::string> used;
    for (const auto& [n, def] : model.constants) collect_labels(def, used);
    for (TermPtr t : model.systems) collect_labels(t, used);
    for (const auto& l : used)
        if (!declared.count(l)) out.push_back("undeclared-label:" + l);
    return out;
}

WfsosSpec pepa_wfsos(const PepaModel& model, TermPool& pool) {
    WfsosSpec spec;
    spec.monoid = WeightMonoid::builtin("nnrat_inf");
    spec.labels = model.labels;
    spec.constants = model.constants;

    spec.sigma.kind = Signature::Kind::process;
    spec.sigma.add({"nil", 0, {}});
    spec.sigma.add({"prefix", 1, {ParamKind::label, ParamKind::rate}});
    spec.sigma.add({"plus", 2, {}});
    spec.sigma.add({"coop", 2, {ParamKind::labelset}});
    spec.sigma.add({"hide", 1, {ParamKind::labelset}});

    spec.theta.kind = Signature::Kind::weight;
    spec.theta.add({"empty", 0, {}});
    spec.theta.add({"diamond", 1, {ParamKind::rate}});
    spec.theta.add({"wsum", 2, {}});
    spec.theta.add({"cpar", 2, {ParamKind::labelset}});

    bool minimal = model.law == PepaModel::Law::minimal;
    spec.interp_bindings = {
        {"empty", "zero", {}, std::nullopt},
        {"diamond", "reshape", {}, std::nullopt},
        {"wsum", "pointwise_sum", {}, std::nullopt},
        {"cpar", minimal ? "coop_min_law" : "coop_product_law", {"coop"}, std::nullopt},
        {"base", "dirac", {minimal ? "inf" : "1"}, std::nullopt},
    };
    build_interpretation(spec);

    auto pvar = [&](const std::string& n) { return pool.var(VarKind::process, n); };
    auto fvar = [&](const std::string& n) { return pool.var(VarKind::weightfn, n); };
    auto empty = pool.op("empty", {}, {});

    // prefix{a,r}: the a-labelled move carries r onto the continuation, every
    // other label gets the zero function
    {
        RuleSchema act;
        act.name = "act";
        act.op = "prefix";
        act.op_params = {{true, "a", {}}, {true, "r", {}}};
        act.arity = 1;
        act.arg_vars = {"x"};
        act.wildcard = {"F"};
        act.concl_label = LabelExpr::var("a");
        act.target = pool.op("diamond", {ParamValue::mk_varref("r")}, {pvar("x")});
        spec.schemas.push_back(std::move(act));

        RuleSchema dis;
        dis.name = "act_dis";
        dis.op = "prefix";
        dis.op_params = {{true, "a", {}}, {true, "r", {}}};
        dis.arity = 1;
        dis.arg_vars = {"x"};
        dis.wildcard = {"F"};
        dis.concl_label = LabelExpr::var("b");
        dis.conds.push_back({SideCond::Kind::neq, LabelExpr::var("b"), LabelExpr::var("a"),
                             false, "", {}});
        dis.target = empty;
        spec.schemas.push_back(std::move(dis));
    }

    // nil: terminal on every label, keeping the induced system functional
    {
        RuleSchema nil;
        nil.name = "nil_end";
        nil.op = "nil";
        nil.arity = 0;
        nil.concl_label = LabelExpr::var("b");
        nil.target = empty;
        spec.schemas.push_back(std::move(nil));
    }

    // plus: race between the branches, pointwise rate sum
    {
        RuleSchema ch;
        ch.name = "choice";
        ch.op = "plus";
        ch.arity = 2;
        ch.arg_vars = {"x1", "x2"};
        ch.wildcard = {"F1", "F2"};
        ch.concl_label = LabelExpr::var("c");
        ch.target = pool.op("wsum", {}, {fvar("F1[$c]"), fvar("F2[$c]")});
        spec.schemas.push_back(std::move(ch));
    }

    // cooperation and hiding: one schema family per labelset in the model
    std::set<std::vector<std::string>> labelsets;
    for (const auto& [n, def] : model.constants) collect_labelsets(def, labelsets);
    for (TermPtr t : model.systems) collect_labelsets(t, labelsets);

    for (const auto& L : labelsets) {
        ParamValue lp = ParamValue::mk_labelset(L);

        RuleSchema sync;
        sync.name = "coop_sync";
        sync.op = "coop";
        sync.op_params = {{false, "", lp}};
        sync.arity = 2;
        sync.arg_vars = {"x1", "x2"};
        sync.wildcard = {"F1", "F2"};
        sync.concl_label = LabelExpr::var("c");
        sync.conds.push_back({SideCond::Kind::in_set, LabelExpr::var("c"), {}, false, "", L});
        sync.target = pool.op("cpar", {lp}, {fvar("F1[$c]"), fvar("F2[$c]")});
        spec.schemas.push_back(std::move(sync));

        RuleSchema async;
        async.name = "coop_async";
        async.op = "coop";
        async.op_params = {{false, "", lp}};
        async.arity = 2;
        async.arg_vars = {"x1", "x2"};
        async.wildcard = {"F1", "F2"};
        async.concl_label = LabelExpr::var("c");
        async.conds.push_back({SideCond::Kind::notin_set, LabelExpr::var("c"), {}, false, "", L});
        async.target =
            pool.op("wsum", {},
                    {pool.op("cpar", {lp}, {fvar("F1[$c]"), pvar("x2")}),
                     pool.op("cpar", {lp}, {pvar("x1"), fvar("F2[$c]")})});
        spec.schemas.push_back(std::move(async));

        RuleSchema pass;
        pass.name = "hide_pass";
        pass.op = "hide";
        pass.op_params = {{false, "", lp}};
        pass.arity = 1;
        pass.arg_vars = {"x"};
        pass.wildcard = {"F"};
        pass.concl_label = LabelExpr::var("c");
        pass.conds.push_back({SideCond::Kind::notin_set, LabelExpr::var("c"), {}, false, "", L});
        pass.conds.push_back({SideCond::Kind::neq, LabelExpr::var("c"),
                              LabelExpr::lit(PepaModel::tau), false, "", {}});
        pass.target = fvar("F[$c]");
        spec.schemas.push_back(std::move(pass));

        RuleSchema htau;
        htau.name = "hide_tau";
        htau.op = "hide";
        htau.op_params = {{false, "", lp}};
        htau.arity = 1;
        htau.arg_vars = {"x"};
        htau.wildcard = {"F"};
        htau.concl_label = LabelExpr::lit(PepaModel::tau);
        TermPtr acc = fvar(std::string("F[") + PepaModel::tau + "]");
        for (const auto& l : L) acc = pool.op("wsum", {}, {acc, fvar("F[" + l + "]")});
        htau.target = acc;
        spec.schemas.push_back(std::move(htau));

        RuleSchema hdis;
        hdis.name = "hide_dis";
        hdis.op = "hide";
        hdis.op_params = {{false, "", lp}};
        hdis.arity = 1;
        hdis.arg_vars = {"x"};
        hdis.wildcard = {"F"};
        hdis.concl_label = LabelExpr::var("c");
        hdis.conds.push_back({SideCond::Kind::in_set, LabelExpr::var("c"), {}, false, "", L});
        hdis.target = empty;
        spec.schemas.push_back(std::move(hdis));
    }

    return spec;
}

}  // namespace wfsos
