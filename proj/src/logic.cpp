#include "msosep/logic.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace msosep {

Vocabulary::Vocabulary(std::initializer_list<std::pair<std::string, int>> syms) {
    for (auto& [n, a] : syms) add(n, a);
}

void Vocabulary::add(const std::string& name, int arity) {
    if (arity != 1 && arity != 2) throw Error("ArityMismatch", name);
    auto it = syms_.find(name);
    if (it != syms_.end() && it->second != arity) throw Error("ArityMismatch", name);
    syms_[name] = arity;
}

int Vocabulary::arity(const std::string& name) const {
    auto it = syms_.find(name);
    return it == syms_.end() ? 0 : it->second;
}

std::vector<std::string> Vocabulary::unary() const {
    std::vector<std::string> r;
    for (auto& [n, a] : syms_)
        if (a == 1) r.push_back(n);
    return r;
}

std::vector<std::string> Vocabulary::binary() const {
    std::vector<std::string> r;
    for (auto& [n, a] : syms_)
        if (a == 2) r.push_back(n);
    return r;
}

std::vector<std::string> Vocabulary::names() const {
    std::vector<std::string> r;
    for (auto& kv : syms_) r.push_back(kv.first);
    return r;
}

Vocabulary Vocabulary::unite(const Vocabulary& o) const {
    Vocabulary r = *this;
    for (auto& [n, a] : o.syms_) r.add(n, a);
    return r;
}

Vocabulary Vocabulary::intersect(const Vocabulary& o) const {
    Vocabulary r;
    for (auto& [n, a] : syms_)
        if (o.arity(n) == a) r.add(n, a);
    return r;
}

Vocabulary Vocabulary::minus(const Vocabulary& o) const {
    Vocabulary r;
    for (auto& [n, a] : syms_)
        if (!o.has(n)) r.add(n, a);
    return r;
}

bool Vocabulary::subset_of(const Vocabulary& o) const {
    for (auto& [n, a] : syms_)
        if (o.arity(n) != a) return false;
    return true;
}

Vocabulary Vocabulary::parse(const std::string& text) {
    Vocabulary v;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
        if (line.empty()) continue;
        auto slash = line.find('/');
        if (slash == std::string::npos) throw Error("SyntaxError", "vocabulary line '" + line + "'");
        v.add(line.substr(0, slash), std::stoi(line.substr(slash + 1)));
    }
    return v;
}

std::string Vocabulary::to_string() const {
    std::string r;
    for (auto& [n, a] : syms_) r += n + "/" + std::to_string(a) + "\n";
    return r;
}

namespace f {

static Formula mk(Node n) { return std::make_shared<const Node>(std::move(n)); }

Formula top() { return mk({Kind::True}); }
Formula bot() { return mk({Kind::False}); }
Formula atom(const std::string& s, const std::string& t) { return mk({Kind::Unary, s, "", {t}}); }
Formula atom(const std::string& s, const std::string& t, const std::string& u) {
    return mk({Kind::Binary, s, "", {t, u}});
}
Formula eq(const std::string& t, const std::string& u) { return mk({Kind::Equal, "", "", {t, u}}); }
Formula set_atom(const std::string& v, const std::string& t) { return mk({Kind::SetAtom, v, "", {t}}); }
Formula sub_atom(const std::string& v, const std::string& t, const std::string& u) {
    return mk({Kind::SubAtom, v, "", {t, u}});
}
Formula card(const std::vector<std::string>& lhs, const std::vector<std::string>& rhs) {
    Node n{Kind::Card};
    n.terms = lhs;
    n.terms.insert(n.terms.end(), rhs.begin(), rhs.end());
    n.count = static_cast<int>(lhs.size());
    return mk(std::move(n));
}
Formula neg(Formula a) { return mk({Kind::Not, "", "", {}, Cmp::Ge, 0, {std::move(a)}}); }

Formula conj(std::vector<Formula> kids) {
    if (kids.empty()) return top();
    if (kids.size() == 1) return kids[0];
    return mk({Kind::And, "", "", {}, Cmp::Ge, 0, std::move(kids)});
}
Formula disj(std::vector<Formula> kids) {
    if (kids.empty()) return bot();
    if (kids.size() == 1) return kids[0];
    return mk({Kind::Or, "", "", {}, Cmp::Ge, 0, std::move(kids)});
}
Formula conj(Formula a, Formula b) { return conj(std::vector<Formula>{std::move(a), std::move(b)}); }
Formula disj(Formula a, Formula b) { return disj(std::vector<Formula>{std::move(a), std::move(b)}); }
Formula implies(Formula a, Formula b) { return mk({Kind::Implies, "", "", {}, Cmp::Ge, 0, {std::move(a), std::move(b)}}); }
Formula iff(Formula a, Formula b) { return mk({Kind::Iff, "", "", {}, Cmp::Ge, 0, {std::move(a), std::move(b)}}); }
Formula forall(const std::string& v, Formula b) { return mk({Kind::Forall, v, "", {}, Cmp::Ge, 0, {std::move(b)}}); }
Formula exists(const std::string& v, Formula b) { return mk({Kind::Exists, v, "", {}, Cmp::Ge, 0, {std::move(b)}}); }
Formula count(Cmp c, int n, const std::string& v, Formula b) {
    if (n < 0) throw Error("SyntaxError", "negative counting bound");
    return mk({Kind::Count, v, "", {}, c, n, {std::move(b)}});
}
Formula set_forall(const std::string& v, Formula b) { return mk({Kind::SetForall, v, "", {}, Cmp::Ge, 0, {std::move(b)}}); }
Formula set_exists(const std::string& v, Formula b) { return mk({Kind::SetExists, v, "", {}, Cmp::Ge, 0, {std::move(b)}}); }
Formula sub_exists(const std::string& v, const std::string& g, Formula b) {
    return mk({Kind::SubExists, v, g, {}, Cmp::Ge, 0, {std::move(b)}});
}
Formula sub_forall(const std::string& v, const std::string& g, Formula b) {
    return mk({Kind::SubForall, v, g, {}, Cmp::Ge, 0, {std::move(b)}});
}
Formula make(Kind k, const Node& proto, std::vector<Formula> kids) {
    Node n = proto;
    n.kind = k;
    n.kids = std::move(kids);
    return mk(std::move(n));
}

}  // namespace f

bool is_quantifier(Kind k) {
    switch (k) {
        case Kind::Forall: case Kind::Exists: case Kind::Count:
        case Kind::SetForall: case Kind::SetExists: case Kind::SubExists: case Kind::SubForall:
            return true;
        default:
            return false;
    }
}

bool is_term_constant(const std::string& t) {
    return !t.empty() && std::all_of(t.begin(), t.end(), ::isdigit);
}

bool structurally_equal(const Formula& a, const Formula& b) {
    if (a == b) return true;
    if (a->kind != b->kind || a->name != b->name || a->guard != b->guard || a->terms != b->terms)
        return false;
    if (a->kind == Kind::Count && (a->cmp != b->cmp || a->count != b->count)) return false;
    if (a->kind == Kind::Card && a->count != b->count) return false;
    if (a->kids.size() != b->kids.size()) return false;
    for (size_t i = 0; i < a->kids.size(); ++i)
        if (!structurally_equal(a->kids[i], b->kids[i])) return false;
    return true;
}

int quantifier_rank(const Formula& f) {
    int m = 0;
    for (auto& k : f->kids) m = std::max(m, quantifier_rank(k));
    return m + (is_quantifier(f->kind) ? 1 : 0);
}

bool is_quantifier_free(const Formula& f) { return quantifier_rank(f) == 0; }

size_t formula_size(const Formula& f) {
    size_t s = 1;
    for (auto& k : f->kids) s += formula_size(k);
    return s;
}

static void collect_free(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
    switch (f->kind) {
        case Kind::Unary: case Kind::Binary: case Kind::Equal: case Kind::SetAtom: case Kind::SubAtom:
            for (auto& t : f->terms)
                if (!is_term_constant(t) && !bound.count(t)) out.insert(t);
            return;
        case Kind::Forall: case Kind::Exists: case Kind::Count: {
            bool had = bound.count(f->name);
            bound.insert(f->name);
            collect_free(f->kids[0], bound, out);
            if (!had) bound.erase(f->name);
            return;
        }
        default:
            for (auto& k : f->kids) collect_free(k, bound, out);
    }
}

std::set<std::string> free_vars(const Formula& f) {
    std::set<std::string> b, out;
    collect_free(f, b, out);
    return out;
}

static void collect_free_set(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
    switch (f->kind) {
        case Kind::SetAtom: case Kind::SubAtom:
            if (!bound.count(f->name)) out.insert(f->name);
            return;
        case Kind::Card:
            for (auto& t : f->terms)
                if (!bound.count(t)) out.insert(t);
            return;
        case Kind::SetForall: case Kind::SetExists: case Kind::SubExists: case Kind::SubForall: {
            bool had = bound.count(f->name);
            bound.insert(f->name);
            collect_free_set(f->kids[0], bound, out);
            if (!had) bound.erase(f->name);
            return;
        }
        default:
            for (auto& k : f->kids) collect_free_set(k, bound, out);
    }
}

std::set<std::string> free_set_vars(const Formula& f) {
    std::set<std::string> b, out;
    collect_free_set(f, b, out);
    return out;
}

static void collect_names(const Formula& f, std::set<std::string>& out) {
    for (auto& t : f->terms) out.insert(t);
    if (is_quantifier(f->kind) || f->kind == Kind::SetAtom || f->kind == Kind::SubAtom) out.insert(f->name);
    for (auto& k : f->kids) collect_names(k, out);
}

std::set<std::string> all_var_names(const Formula& f) {
    std::set<std::string> out;
    collect_names(f, out);
    return out;
}

static void collect_symbols(const Formula& f, std::map<std::string, int>& out) {
    if (f->kind == Kind::Unary) out[f->name] = 1;
    if (f->kind == Kind::Binary) out[f->name] = 2;
    if (f->kind == Kind::SubExists || f->kind == Kind::SubForall) out[f->guard] = 2;
    for (auto& k : f->kids) collect_symbols(k, out);
}

std::set<std::string> symbols_of(const Formula& f) {
    std::map<std::string, int> m;
    collect_symbols(f, m);
    std::set<std::string> r;
    for (auto& kv : m) r.insert(kv.first);
    return r;
}

Vocabulary vocabulary_of(const Formula& f, const Vocabulary& ambient) {
    std::map<std::string, int> m;
    collect_symbols(f, m);
    Vocabulary v;
    for (auto& [n, a] : m) {
        int am = ambient.arity(n);
        v.add(n, am ? am : a);
    }
    return v;
}

void check_vocabulary(const Formula& f, const Vocabulary& vocab) {
    std::function<void(const Formula&)> go = [&](const Formula& g) {
        auto want = [&](const std::string& s, int a) {
            int have = vocab.arity(s);
            if (!have) throw Error("UnknownSymbol", s);
            if (have != a) throw Error("ArityMismatch", s);
        };
        if (g->kind == Kind::Unary) want(g->name, 1);
        if (g->kind == Kind::Binary) want(g->name, 2);
        if (g->kind == Kind::SubExists || g->kind == Kind::SubForall) want(g->guard, 2);
        for (auto& k : g->kids) go(k);
    };
    go(f);
}

std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
    if (!taken.count(base)) return base;
    for (int i = 1;; ++i) {
        std::string c = base + std::to_string(i);
        if (!taken.count(c)) return c;
    }
}

// ---- C2 renaming

namespace {

std::optional<Formula> rename_c2(const Formula& f, const std::map<std::string, std::string>& m) {
    auto mapt = [&](const std::string& t) {
        if (is_term_constant(t)) return t;
        auto it = m.find(t);
        return it == m.end() ? t : it->second;
    };
    switch (f->kind) {
        case Kind::SetForall: case Kind::SetExists: case Kind::SubExists: case Kind::SubForall:
        case Kind::SetAtom: case Kind::SubAtom: case Kind::Card:
            return std::nullopt;
        case Kind::Unary: case Kind::Binary: case Kind::Equal: {
            Node n = *f;
            for (auto& t : n.terms) t = mapt(t);
            return std::make_shared<const Node>(std::move(n));
        }
        case Kind::Forall: case Kind::Exists: case Kind::Count: {
            auto fv = free_vars(f->kids[0]);
            fv.erase(f->name);
            if (fv.size() > 1) return std::nullopt;
            std::string nv = "x";
            if (fv.size() == 1) {
                std::string other = mapt(*fv.begin());
                if (other != "x" && other != "y") return std::nullopt;
                nv = other == "x" ? "y" : "x";
            }
            auto m2 = m;
            m2[f->name] = nv;
            auto body = rename_c2(f->kids[0], m2);
            if (!body) return std::nullopt;
            Node n = *f;
            n.name = nv;
            n.kids = {*body};
            return std::make_shared<const Node>(std::move(n));
        }
        default: {
            std::vector<Formula> ks;
            for (auto& k : f->kids) {
                auto r = rename_c2(k, m);
                if (!r) return std::nullopt;
                ks.push_back(*r);
            }
            return f::make(f->kind, *f, std::move(ks));
        }
    }
}

}  // namespace

std::optional<Formula> c2_rename(const Formula& f) {
    auto fv = free_vars(f);
    if (fv.size() > 2) return std::nullopt;
    std::map<std::string, std::string> m;
    std::set<std::string> used;
    for (auto& v : fv)
        if (v == "x" || v == "y") { m[v] = v; used.insert(v); }
    for (auto& v : fv) {
        if (m.count(v)) continue;
        std::string pick = used.count("x") ? "y" : "x";
        m[v] = pick;
        used.insert(pick);
    }
    return rename_c2(f, m);
}

bool is_c2(const Formula& f) { return c2_rename(f).has_value(); }

// ---- substitution

namespace {

Formula subst(const Formula& f, const std::map<std::string, std::string>& sub, std::set<std::string>& avoid) {
    if (sub.empty()) return f;
    switch (f->kind) {
        case Kind::Unary: case Kind::Binary: case Kind::Equal: case Kind::SetAtom: case Kind::SubAtom: {
            Node n = *f;
            bool changed = false;
            for (auto& t : n.terms) {
                auto it = sub.find(t);
                if (it != sub.end()) { t = it->second; changed = true; }
            }
            return changed ? std::make_shared<const Node>(std::move(n)) : f;
        }
        case Kind::Forall: case Kind::Exists: case Kind::Count: {
            auto inner = sub;
            inner.erase(f->name);
            // capture: a substituted term equals the bound name
            bool clash = false;
            auto fv = free_vars(f->kids[0]);
            for (auto& [from, to] : inner)
                if (to == f->name && fv.count(from)) clash = true;
            Node n = *f;
            if (clash) {
                std::string nv = fresh_name(f->name, avoid);
                avoid.insert(nv);
                inner[f->name] = nv;
                n.name = nv;
            }
            n.kids = {subst(f->kids[0], inner, avoid)};
            return std::make_shared<const Node>(std::move(n));
        }
        default: {
            std::vector<Formula> ks;
            bool changed = false;
            for (auto& k : f->kids) {
                ks.push_back(subst(k, sub, avoid));
                changed |= ks.back() != k;
            }
            return changed ? f::make(f->kind, *f, std::move(ks)) : f;
        }
    }
}

}  // namespace

Formula substitute(const Formula& f, const std::map<std::string, std::string>& sub) {
    std::map<std::string, std::string> eff;
    for (auto& [a, b] : sub)
        if (a != b) eff[a] = b;
    if (eff.empty()) return f;
    auto avoid = all_var_names(f);
    for (auto& [a, b] : eff) { avoid.insert(a); avoid.insert(b); }
    return subst(f, eff, avoid);
}

Formula replace_symbol(const Formula& f, const std::string& sym, const std::vector<std::string>& params,
                       const Formula& repl) {
    if ((f->kind == Kind::Unary || f->kind == Kind::Binary) && f->name == sym) {
        std::map<std::string, std::string> m;
        for (size_t i = 0; i < params.size(); ++i) m[params[i]] = f->terms[i];
        return substitute(repl, m);
    }
    if (f->kids.empty()) return f;
    std::vector<Formula> ks;
    for (auto& k : f->kids) ks.push_back(replace_symbol(k, sym, params, repl));
    return f::make(f->kind, *f, std::move(ks));
}

Formula rename_symbols(const Formula& f, const std::map<std::string, std::string>& ren) {
    Node n = *f;
    if (n.kind == Kind::Unary || n.kind == Kind::Binary) {
        auto it = ren.find(n.name);
        if (it != ren.end()) n.name = it->second;
    }
    if (n.kind == Kind::SubExists || n.kind == Kind::SubForall) {
        auto it = ren.find(n.guard);
        if (it != ren.end()) n.guard = it->second;
    }
    for (auto& k : n.kids) k = rename_symbols(k, ren);
    return std::make_shared<const Node>(std::move(n));
}

// ---- copy

std::string copy_name(const std::string& sym) { return sym + "'"; }

Vocabulary copy_vocabulary(const Vocabulary& v) {
    Vocabulary r;
    for (auto& [n, a] : v.symbols()) {
        if (a == 1) {
            r.add(n, 1);
            continue;
        }
        if (v.has(copy_name(n))) throw Error("NameCollision", copy_name(n));
        r.add(copy_name(n), 2);
    }
    return r;
}

Formula copy_formula(const Formula& f, const Vocabulary& v) {
    std::map<std::string, std::string> ren;
    for (auto& b : v.binary()) {
        if (v.has(copy_name(b))) throw Error("NameCollision", copy_name(b));
        ren[b] = copy_name(b);
    }
    // symbols used by f but absent from v still count as binary when used so
    for (auto& s : symbols_of(f))
        if (!v.has(s)) {
            std::function<bool(const Formula&)> bin = [&](const Formula& g) {
                if (g->kind == Kind::Binary && g->name == s) return true;
                if ((g->kind == Kind::SubExists || g->kind == Kind::SubForall) && g->guard == s) return true;
                for (auto& k : g->kids)
                    if (bin(k)) return true;
                return false;
            };
            if (bin(f)) ren[s] = copy_name(s);
        }
    return rename_symbols(f, ren);
}

}  // namespace msosep
