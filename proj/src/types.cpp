#include "msosep/types.hpp"

#include <algorithm>
#include <sstream>

namespace msosep {

Vocabulary TypeSignature::vocabulary() const {
    Vocabulary v;
    for (auto& a : unary) v.add(a, 1);
    for (auto& b : binary) v.add(b, 2);
    return v;
}

TwoType TwoType::inverse() const {
    TwoType t;
    t.x = y;
    t.y = x;
    t.cross.resize(cross.size());
    for (size_t b = 0; 2 * b < cross.size(); ++b) {
        t.cross[2 * b] = cross[2 * b + 1];
        t.cross[2 * b + 1] = cross[2 * b];
    }
    return t;
}

bool TwoType::operator<(const TwoType& o) const {
    if (x.bits != o.x.bits) return x.bits < o.x.bits;
    if (y.bits != o.y.bits) return y.bits < o.y.bits;
    return cross < o.cross;
}

size_t TwoTypeHash::operator()(const TwoType& t) const {
    std::hash<std::vector<bool>> h;
    return h(t.x.bits) * 1000003u ^ h(t.y.bits) * 10007u ^ h(t.cross);
}

namespace {

long long checked_pow2(int atoms, long long cap) {
    if (atoms >= 62 || (1LL << atoms) > cap)
        throw Error("TooManyTypes", "2^" + std::to_string(atoms) + " exceeds cap " + std::to_string(cap));
    return 1LL << atoms;
}

bool holds1(const Structure& s, const std::string& a, int u) { return s.interprets(a) && s.holds(a, u); }
bool holds2(const Structure& s, const std::string& b, int u, int v) { return s.interprets(b) && s.holds(b, u, v); }

}  // namespace

std::vector<OneType> enumerate_1types(const TypeSignature& sig, long long cap) {
    int a = sig.one_atoms();
    long long total = checked_pow2(a, cap);
    std::vector<OneType> out;
    out.reserve(total);
    for (long long c = 0; c < total; ++c) {
        OneType t;
        t.bits.resize(a);
        for (int i = 0; i < a; ++i) t.bits[i] = (c >> i) & 1;
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<TwoType> enumerate_2types(const TypeSignature& sig, long long cap) {
    int one = sig.one_atoms(), cr = 2 * static_cast<int>(sig.binary.size());
    long long total = checked_pow2(2 * one + cr, cap);
    std::vector<TwoType> out;
    out.reserve(total);
    for (long long c = 0; c < total; ++c) {
        TwoType t;
        t.x.bits.resize(one);
        t.y.bits.resize(one);
        t.cross.resize(cr);
        for (int i = 0; i < one; ++i) {
            t.x.bits[i] = (c >> i) & 1;
            t.y.bits[i] = (c >> (one + i)) & 1;
        }
        for (int i = 0; i < cr; ++i) t.cross[i] = (c >> (2 * one + i)) & 1;
        out.push_back(std::move(t));
    }
    return out;
}

OneType one_type_of(const Structure& s, int u, const TypeSignature& sig) {
    OneType t;
    t.bits.reserve(sig.one_atoms());
    for (auto& a : sig.unary) t.bits.push_back(holds1(s, a, u));
    for (auto& b : sig.binary) t.bits.push_back(holds2(s, b, u, u));
    return t;
}

TwoType two_type_of(const Structure& s, int u, int v, const TypeSignature& sig) {
    if (u == v) throw Error("SameElement", std::to_string(u));
    TwoType t;
    t.x = one_type_of(s, u, sig);
    t.y = one_type_of(s, v, sig);
    t.cross.reserve(2 * sig.binary.size());
    for (auto& b : sig.binary) {
        t.cross.push_back(holds2(s, b, u, v));
        t.cross.push_back(holds2(s, b, v, u));
    }
    return t;
}

std::set<TwoType> realized_two_types(const Structure& s, const TypeSignature& sig) {
    std::set<TwoType> r;
    for (int u = 0; u < s.size(); ++u)
        for (int v = 0; v < s.size(); ++v)
            if (u != v) r.insert(two_type_of(s, u, v, sig));
    return r;
}

bool realizes(const Structure& s, int u, const OneType& t, const TypeSignature& sig) {
    size_t i = 0;
    for (auto& a : sig.unary)
        if (holds1(s, a, u) != t.bits[i++]) return false;
    for (auto& b : sig.binary)
        if (holds2(s, b, u, u) != t.bits[i++]) return false;
    return true;
}

bool realizes(const Structure& s, int u, int v, const TwoType& t, const TypeSignature& sig) {
    if (u == v) return false;
    for (size_t b = 0; b < sig.binary.size(); ++b) {
        if (holds2(s, sig.binary[b], u, v) != t.cross[2 * b]) return false;
        if (holds2(s, sig.binary[b], v, u) != t.cross[2 * b + 1]) return false;
    }
    return realizes(s, u, t.x, sig) && realizes(s, v, t.y, sig);
}

void apply_two_type(Structure& s, int u, int v, const TwoType& t, const TypeSignature& sig) {
    auto put1 = [&](const OneType& o, int w) {
        size_t i = 0;
        for (auto& a : sig.unary) s.set(a, w, static_cast<bool>(o.bits[i++]));
        for (auto& b : sig.binary) s.set(b, w, w, static_cast<bool>(o.bits[i++]));
    };
    put1(t.x, u);
    put1(t.y, v);
    for (size_t b = 0; b < sig.binary.size(); ++b) {
        s.set(sig.binary[b], u, v, static_cast<bool>(t.cross[2 * b]));
        s.set(sig.binary[b], v, u, static_cast<bool>(t.cross[2 * b + 1]));
    }
}

std::string to_string(const OneType& t, const TypeSignature& sig, const std::string& var) {
    std::vector<std::string> lits;
    size_t i = 0;
    for (auto& a : sig.unary) lits.push_back((t.bits[i++] ? "" : "~") + a + "(" + var + ")");
    for (auto& b : sig.binary) lits.push_back((t.bits[i++] ? "" : "~") + b + "(" + var + "," + var + ")");
    std::string r = "{";
    for (size_t j = 0; j < lits.size(); ++j) r += (j ? ", " : "") + lits[j];
    return r + "}";
}

std::string to_string(const TwoType& t, const TypeSignature& sig) {
    std::vector<std::string> lits;
    auto lit = [&](bool on, const std::string& a) { lits.push_back((on ? "" : "~") + a); };
    for (size_t a = 0; a < sig.unary.size(); ++a) {
        lit(t.x.bits[a], sig.unary[a] + "(x)");
        lit(t.y.bits[a], sig.unary[a] + "(y)");
    }
    size_t nu = sig.unary.size();
    for (size_t b = 0; b < sig.binary.size(); ++b) {
        auto& n = sig.binary[b];
        lit(t.cross[2 * b], n + "(x,y)");
        lit(t.cross[2 * b + 1], n + "(y,x)");
        lit(t.x.bits[nu + b], n + "(x,x)");
        lit(t.y.bits[nu + b], n + "(y,y)");
    }
    std::string r = "{";
    for (size_t j = 0; j < lits.size(); ++j) r += (j ? ", " : "") + lits[j];
    return r + "}";
}

std::string type_code(const TwoType& t) {
    std::vector<bool> all = t.x.bits;
    all.insert(all.end(), t.y.bits.begin(), t.y.bits.end());
    all.insert(all.end(), t.cross.begin(), t.cross.end());
    std::string r;
    for (size_t i = 0; i < all.size(); i += 4) {
        int d = 0;
        for (size_t j = 0; j < 4 && i + j < all.size(); ++j) d |= all[i + j] << j;
        r += "0123456789abcdef"[d];
    }
    return r;
}

TwoType decode_type_code(const std::string& code, const TypeSignature& sig) {
    size_t one = sig.one_atoms(), cr = 2 * sig.binary.size(), total = 2 * one + cr;
    if (code.size() != (total + 3) / 4) throw Error("SyntaxError", "type code length " + code);
    std::vector<bool> all(total);
    for (size_t i = 0; i < total; ++i) {
        char c = code[i / 4];
        int d = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : c - 'a' + 10;
        if (d < 0 || d > 15) throw Error("SyntaxError", "type code " + code);
        all[i] = (d >> (i % 4)) & 1;
    }
    TwoType t;
    t.x.bits.assign(all.begin(), all.begin() + one);
    t.y.bits.assign(all.begin() + one, all.begin() + 2 * one);
    t.cross.assign(all.begin() + 2 * one, all.end());
    return t;
}

Formula type_formula(const OneType& t, const TypeSignature& sig, const std::string& var) {
    std::vector<Formula> ks;
    size_t i = 0;
    for (auto& a : sig.unary) {
        auto at = f::atom(a, var);
        ks.push_back(t.bits[i++] ? at : f::neg(at));
    }
    for (auto& b : sig.binary) {
        auto at = f::atom(b, var, var);
        ks.push_back(t.bits[i++] ? at : f::neg(at));
    }
    return f::conj(ks);
}

Formula type_formula(const TwoType& t, const TypeSignature& sig, const std::string& x, const std::string& y) {
    std::vector<Formula> ks{type_formula(t.x, sig, x), type_formula(t.y, sig, y)};
    for (size_t b = 0; b < sig.binary.size(); ++b) {
        auto a1 = f::atom(sig.binary[b], x, y), a2 = f::atom(sig.binary[b], y, x);
        ks.push_back(t.cross[2 * b] ? a1 : f::neg(a1));
        ks.push_back(t.cross[2 * b + 1] ? a2 : f::neg(a2));
    }
    ks.push_back(f::neg(f::eq(x, y)));
    return f::conj(ks);
}

// ---- Scott normal form

namespace {

Formula nnf(const Formula& f, bool pos) {
    switch (f->kind) {
        case Kind::True: return pos ? f : f::bot();
        case Kind::False: return pos ? f : f::top();
        case Kind::Unary: case Kind::Binary: case Kind::Equal: return pos ? f : f::neg(f);
        case Kind::Not: return nnf(f->kids[0], !pos);
        case Kind::And: case Kind::Or: {
            std::vector<Formula> ks;
            for (auto& k : f->kids) ks.push_back(nnf(k, pos));
            return (f->kind == Kind::And) == pos ? f::conj(ks) : f::disj(ks);
        }
        case Kind::Implies: {
            auto& a = f->kids[0];
            auto& b = f->kids[1];
            return pos ? f::disj(nnf(a, false), nnf(b, true)) : f::conj(nnf(a, true), nnf(b, false));
        }
        case Kind::Iff: {
            auto& a = f->kids[0];
            auto& b = f->kids[1];
            if (pos) return f::conj(f::disj(nnf(a, false), nnf(b, true)), f::disj(nnf(a, true), nnf(b, false)));
            return f::disj(f::conj(nnf(a, true), nnf(b, false)), f::conj(nnf(a, false), nnf(b, true)));
        }
        case Kind::Forall:
            return pos ? f::forall(f->name, nnf(f->kids[0], true)) : f::exists(f->name, nnf(f->kids[0], false));
        case Kind::Exists:
            return pos ? f::exists(f->name, nnf(f->kids[0], true)) : f::forall(f->name, nnf(f->kids[0], false));
        case Kind::Count: {
            auto body = nnf(f->kids[0], true);
            int n = f->count;
            auto ge = [&](int m) { return m <= 0 ? f::top() : f::count(Cmp::Ge, m, f->name, body); };
            auto le = [&](int m) { return m < 0 ? f::bot() : f::count(Cmp::Le, m, f->name, body); };
            switch (f->cmp) {
                case Cmp::Ge: return pos ? ge(n) : le(n - 1);
                case Cmp::Le: return pos ? le(n) : ge(n + 1);
                case Cmp::Eq: return pos ? f::conj(le(n), ge(n)) : f::disj(le(n - 1), ge(n + 1));
            }
            return f;
        }
        default: throw Error("NotC2", "unsupported construct in a two-variable sentence");
    }
    return f;
}

class ScottBuilder {
public:
    ScottBuilder(ScottForm& nf, std::set<std::string> taken) : nf_(nf), taken_(std::move(taken)) {}

    std::vector<Formula> axioms;

    std::string fresh(const std::string& base, int& ctr) {
        for (;;) {
            std::string c = base + std::to_string(++ctr);
            if (!taken_.count(c)) {
                taken_.insert(c);
                return c;
            }
        }
    }
    std::string fresh_pred() { return fresh("S_", pred_ctr_); }
    std::string fresh_msg() {
        auto m = fresh("m_", msg_ctr_);
        nf_.messages.push_back(m);
        nf_.vocab.add(m, 2);
        return m;
    }

    // ctx: a variable bound (or universally read) at this point, used to host constant predicates
    Formula process(const Formula& f, const std::string& ctx) {
        switch (f->kind) {
            case Kind::Forall: case Kind::Exists: case Kind::Count: return quantified(f, ctx);
            case Kind::Not: case Kind::And: case Kind::Or: {
                std::vector<Formula> ks;
                for (auto& k : f->kids) ks.push_back(process(k, ctx));
                return f::make(f->kind, *f, ks);
            }
            default: return f;
        }
    }

    // witnesses for Q y. body(x,y) guarded by g(x) (nullptr: unguarded)
    void witness(const std::string& pred, Formula guard, Cmp cmp, int n, Formula body) {
        ScottForm::Witnessing w{pred, body, cmp, {}};
        auto g = [&](Formula a) { return guard ? f::conj(guard, a) : a; };
        if (cmp == Cmp::Ge) {
            for (int j = 0; j < n; ++j) w.functions.push_back(fresh_msg());
            for (int j = 0; j < n; ++j) {
                auto gj = f::atom(w.functions[j], "x", "y");
                axioms.push_back(f::implies(g(gj), body));
                for (int l = j + 1; l < n; ++l)
                    axioms.push_back(f::implies(g(gj), f::neg(f::atom(w.functions[l], "x", "y"))));
            }
        } else {
            for (int j = 0; j < n; ++j) w.functions.push_back(fresh_msg());
            std::vector<Formula> cover;
            for (auto& h : w.functions) cover.push_back(f::atom(h, "x", "y"));
            axioms.push_back(f::implies(g(body), f::disj(cover)));
        }
        nf_.witnesses.push_back(std::move(w));
    }

private:
    ScottForm& nf_;
    std::set<std::string> taken_;
    int pred_ctr_ = 0, msg_ctr_ = 0;

    Formula quantified(const Formula& f, const std::string& ctx) {
        std::string v = f->name;
        std::string other = v == "x" ? "y" : "x";
        Formula body = process(f->kids[0], v);
        auto fv = free_vars(f);
        bool constant = fv.empty();
        // normalize to: bound y, free x
        if (v == "x") body = substitute(body, {{"x", "y"}, {"y", "x"}});
        Node proto = *f;
        proto.name = "y";
        Formula normalized = f::make(f->kind, proto, {body});
        Cmp cmp = f->kind == Kind::Count ? f->cmp : Cmp::Ge;
        int n = f->kind == Kind::Count ? f->count : 1;
        if (f->kind == Kind::Count && cmp == Cmp::Ge && n <= 0) return f::top();
        std::string p = fresh_pred();
        nf_.vocab.add(p, 1);
        nf_.definitions.push_back({p, normalized});
        auto px = f::atom(p, "x");
        if (constant) axioms.push_back(f::iff(px, f::atom(p, "y")));
        if (f->kind == Kind::Forall) {
            axioms.push_back(f::implies(px, body));
        } else if (cmp == Cmp::Eq) {
            throw Error("InternalError", "exact counting survives negation normal form");
        } else if (cmp == Cmp::Le && n == 0) {
            axioms.push_back(f::implies(px, f::neg(body)));
            nf_.witnesses.push_back({p, body, Cmp::Le, {}});
        } else {
            witness(p, px, cmp, n, body);
        }
        return f::atom(p, constant ? ctx : other);
    }
};

void flatten_and(const Formula& f, std::vector<Formula>& out) {
    if (f->kind == Kind::And)
        for (auto& k : f->kids) flatten_and(k, out);
    else
        out.push_back(f);
}

}  // namespace

Formula ScottForm::sentence() const {
    std::vector<Formula> ks{f::forall("x", f::forall("y", chi))};
    for (auto& m : messages) ks.push_back(f::forall("x", f::count(Cmp::Eq, 1, "y", f::atom(m, "x", "y"))));
    return f::conj(ks);
}

ScottForm scott_normal_form(const Formula& beta0, const Vocabulary& vocab) {
    check_vocabulary(beta0, vocab);
    if (!free_vars(beta0).empty()) throw Error("NotC2", "not a sentence");
    auto renamed = c2_rename(beta0);
    if (!renamed) throw Error("NotC2", "needs more than two variables or uses set quantifiers");
    ScottForm nf;
    nf.vocab = vocab;
    std::set<std::string> taken;
    for (auto& [s, a] : vocab.symbols()) taken.insert(s);
    ScottBuilder b(nf, taken);
    std::vector<Formula> raw, conjuncts, chi;
    flatten_and(*renamed, raw);
    for (auto& r : raw) {
        // quantifier-free matrices are kept verbatim; everything else goes through NNF
        bool keep = false;
        if (r->kind == Kind::Forall) {
            auto& psi = r->kids[0];
            bool shaped = psi->kind == Kind::Forall || psi->kind == Kind::Exists ||
                          (psi->kind == Kind::Count && psi->cmp == Cmp::Ge);
            keep = shaped && is_quantifier_free(psi->kids[0]);
        }
        if (keep) conjuncts.push_back(r);
        else flatten_and(nnf(r, true), conjuncts);
    }
    for (auto& c : conjuncts) {
        if (c->kind != Kind::Forall) {
            chi.push_back(b.process(c, "x"));
            continue;
        }
        Formula psi = c->kids[0];
        if (c->name == "y") psi = substitute(psi, {{"x", "y"}, {"y", "x"}});
        // A x. A y. phi  and  A x. E[>=n] y. phi  need no guard predicate
        bool ge = psi->kind == Kind::Exists || (psi->kind == Kind::Count && psi->cmp == Cmp::Ge);
        if (psi->kind != Kind::Forall && !ge) {
            chi.push_back(b.process(psi, "x"));
            continue;
        }
        Formula phi = psi->kids[0];
        if (psi->name == "x") phi = substitute(phi, {{"x", "y"}, {"y", "x"}});
        Formula body = b.process(phi, "y");
        if (psi->kind == Kind::Forall) {
            chi.push_back(body);
        } else {
            int n = psi->kind == Kind::Count ? psi->count : 1;
            if (n > 0) b.witness("", nullptr, Cmp::Ge, n, body);
        }
    }
    for (auto& a : b.axioms) chi.push_back(a);
    nf.chi = f::conj(chi);
    return nf;
}

Structure scott_expand(const Structure& m, const ScottForm& nf) {
    Structure s = m;
    for (auto& [name, a] : nf.vocab.symbols())
        if (!s.interprets(name)) s.add_symbol(name, a);
    int n = s.size();
    for (auto& d : nf.definitions)
        for (int u = 0; u < n; ++u) s.set(d.pred, u, evaluate(s, d.body, Assignment{{{"x", u}}, {}, {}}));
    for (auto& w : nf.witnesses) {
        for (int u = 0; u < n; ++u) {
            bool guard = w.pred.empty() || s.holds(w.pred, u);
            std::vector<int> wit;
            for (int v = 0; v < n; ++v)
                if (evaluate(s, w.body, Assignment{{{"x", u}, {"y", v}}, {}, {}})) wit.push_back(v);
            size_t need = w.functions.size();
            if (guard && w.cmp == Cmp::Ge && wit.size() < need)
                throw Error("PostConditionFailed", "input is not a model: too few witnesses at " + std::to_string(u));
            if (guard && w.cmp == Cmp::Le && wit.size() > need)
                throw Error("PostConditionFailed", "input is not a model: too many witnesses at " + std::to_string(u));
            for (size_t j = 0; j < need; ++j) {
                int img = u;
                if (!wit.empty()) img = wit[std::min(j, wit.size() - 1)];
                if (w.cmp == Cmp::Ge && guard) img = wit[j];
                s.set(w.functions[j], u, img);
            }
        }
    }
    return s;
}

// ---- functionality, message graphs, coloring

bool is_functional(const Structure& s, const std::vector<std::string>& sigma) {
    for (auto& m : sigma) {
        if (!s.interprets(m)) return false;
        for (int u = 0; u < s.size(); ++u)
            if (popcount(s.row(m, u)) != 1) return false;
    }
    return true;
}

Digraph message_graph(const Structure& s, const std::vector<std::string>& sigma) {
    int n = s.size();
    std::vector<Set> e(n, 0);
    for (auto& m : sigma)
        if (s.interprets(m))
            for (int u = 0; u < n; ++u) e[u] |= s.row(m, u);
    Digraph g(n);
    for (int u = 0; u < n; ++u) {
        Set two = 0;
        for (int c = 0; c < n; ++c)
            if (has(e[u], c)) two |= e[c];
        g.out[u] = two & ~bit(u);
    }
    return g;
}

bool is_chromatic(const Structure& s, const std::vector<std::string>& sigma, const TypeSignature& sig) {
    auto g = message_graph(s, sigma);
    std::vector<OneType> t;
    for (int u = 0; u < s.size(); ++u) t.push_back(one_type_of(s, u, sig));
    for (int u = 0; u < s.size(); ++u)
        for (int v = 0; v < s.size(); ++v)
            if (g.has_arc(u, v) && t[u] == t[v]) return false;
    return true;
}

std::vector<int> greedy_coloring(const Digraph& g, int k) {
    int n = g.n;
    for (int u = 0; u < n; ++u)
        if (popcount(g.out[u] & ~bit(u)) > k) throw Error("DegreeBoundViolated", "vertex " + std::to_string(u));
    Digraph und = g.symmetric();
    Set alive = full_set(n);
    std::vector<int> peel;
    while (alive) {
        int pick = -1;
        for (int u = 0; u < n && pick < 0; ++u)
            if (has(alive, u) && popcount(und.out[u] & alive) <= 2 * k) pick = u;
        if (pick < 0) throw Error("InternalError", "no vertex of degree <= 2k");
        peel.push_back(pick);
        alive &= ~bit(pick);
    }
    std::vector<int> color(n, -1);
    for (auto it = peel.rbegin(); it != peel.rend(); ++it) {
        int u = *it;
        std::vector<bool> used(2 * k + 1, false);
        for (int v = 0; v < n; ++v)
            if (has(und.out[u], v) && color[v] >= 0) used[color[v]] = true;
        int c = 0;
        while (used[c]) ++c;
        color[u] = c;
    }
    return color;
}

int color_count(int sigma_size) { return 2 * sigma_size * sigma_size + 1; }

std::string color_symbol(int i, const std::string& prefix) { return prefix + std::to_string(i); }

Structure chromatic_expansion(const Structure& s, const std::vector<std::string>& sigma, const std::string& prefix) {
    if (!is_functional(s, sigma)) throw Error("NotFunctional");
    int q = static_cast<int>(sigma.size());
    int z = color_count(q);
    auto colors = greedy_coloring(message_graph(s, sigma), q * q);
    Structure r = s;
    for (int i = 1; i <= z; ++i) {
        if (r.interprets(color_symbol(i, prefix))) throw Error("NameCollision", color_symbol(i, prefix));
        r.add_symbol(color_symbol(i, prefix), 1);
    }
    for (int u = 0; u < s.size(); ++u) r.set(color_symbol(colors[u] + 1, prefix), u);
    return r;
}

}  // namespace msosep
