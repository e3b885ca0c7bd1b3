#include "msosep/treelang.hpp"

#include <algorithm>
#include <sstream>

#include "msosep/sat.hpp"

namespace msosep {

const char* const kBlank = "Label_blank";
const char* const kRoot = "root";
const char* const kSucc = "s";

std::string label_symbol(int i) { return "Label_" + std::to_string(i); }
std::string u_symbol(const std::string& b, int j) { return "U_" + b + "_" + std::to_string(j); }
std::string u_inv_symbol(const std::string& b, int j) { return "U_" + b + "_inv_" + std::to_string(j); }
std::string u_self_symbol(const std::string& b) { return "U_" + b + "_self"; }

namespace {

// the tree side keeps its own R names; structures' oriented k-trees are a different notion
std::string rj(int j) { return "R_" + std::to_string(j); }

Formula phi_at(const TranslationScheme& t, const std::string& v) { return substitute(t.phi, {{"x", v}}); }

void check_terms(const Formula& f) {
    for (auto& term : f->terms)
        if (is_term_constant(term)) throw Error("Unsupported", "element constants do not survive a transduction");
}

struct Translator {
    const TranslationScheme& t;
    std::set<std::string> taken;

    Formula atom_psi(const Formula& f) {
        auto it = t.psi.find(f->name);
        if (it == t.psi.end()) throw Error("VocabularyMismatch", f->name + " is not a target symbol");
        std::map<std::string, std::string> m{{"x", f->terms[0]}};
        if (f->terms.size() > 1) m["y"] = f->terms[1];
        return substitute(it->second, m);
    }

    std::string fresh(const std::string& base) {
        std::string z = fresh_name(base, taken);
        taken.insert(z);
        return z;
    }

    Formula set_bound(const std::string& X) {
        std::string z = fresh("z");
        return f::forall(z, f::implies(f::set_atom(X, z), phi_at(t, z)));
    }

    Formula rec(const Formula& f) {
        switch (f->kind) {
            case Kind::True: case Kind::False: case Kind::Card:
                return f;
            case Kind::Unary: case Kind::Binary: {
                check_terms(f);
                std::vector<Formula> ks{atom_psi(f)};
                for (auto& term : f->terms) ks.push_back(phi_at(t, term));
                return f::conj(ks);
            }
            case Kind::Equal: case Kind::SetAtom: case Kind::SubAtom: {
                check_terms(f);
                std::vector<Formula> ks{f};
                for (auto& term : f->terms) ks.push_back(phi_at(t, term));
                return f::conj(ks);
            }
            case Kind::Not: case Kind::And: case Kind::Or: case Kind::Implies: case Kind::Iff: {
                std::vector<Formula> ks;
                for (auto& k : f->kids) ks.push_back(rec(k));
                return f::make(f->kind, *f, std::move(ks));
            }
            case Kind::Forall:
                return f::forall(f->name, f::implies(phi_at(t, f->name), rec(f->kids[0])));
            case Kind::Exists:
                return f::exists(f->name, f::conj(phi_at(t, f->name), rec(f->kids[0])));
            case Kind::Count:
                return f::count(f->cmp, f->count, f->name, f::conj(phi_at(t, f->name), rec(f->kids[0])));
            case Kind::SetExists:
                return f::set_exists(f->name, f::conj(set_bound(f->name), rec(f->kids[0])));
            case Kind::SetForall:
                return f::set_forall(f->name, f::implies(set_bound(f->name), rec(f->kids[0])));
            case Kind::SubExists: case Kind::SubForall: {
                auto it = t.psi.find(f->guard);
                if (it == t.psi.end()) throw Error("VocabularyMismatch", f->guard);
                const Formula& g = it->second;
                // a relation variable can only range over a relation the source already has
                if (g->kind != Kind::Binary || g->terms != std::vector<std::string>{"x", "y"})
                    throw Error("Unsupported", "relation quantifier over " + f->guard + " whose psi is not a plain atom");
                std::string z = fresh("z"), w = fresh("w");
                Formula bound = f::forall(z, f::forall(w, f::implies(f::sub_atom(f->name, z, w),
                                                                     f::conj(phi_at(t, z), phi_at(t, w)))));
                Formula body = rec(f->kids[0]);
                if (f->kind == Kind::SubExists) return f::sub_exists(f->name, g->name, f::conj(bound, body));
                return f::sub_forall(f->name, g->name, f::implies(bound, body));
            }
        }
        throw Error("Internal", "induced_translation");
    }
};

std::optional<Transduced> chain(std::optional<Transduced> a,
                                const std::function<std::optional<Transduced>(const Structure&)>& next) {
    if (!a) return std::nullopt;
    auto b = next(a->s);
    if (!b) return std::nullopt;
    for (auto& o : b->origin) o = a->origin[o];
    return b;
}

// universe restricted to keep (ascending); copies the listed symbols
Transduced select(const Structure& a, Set keep, const Vocabulary& target) {
    Transduced r;
    for (int u = 0; u < a.size(); ++u)
        if (has(keep, u)) r.origin.push_back(u);
    r.s = Structure(static_cast<int>(r.origin.size()), target);
    return r;
}

void copy_symbols(const Structure& a, Transduced& r, const Vocabulary& syms) {
    int m = r.s.size();
    for (auto& [name, ar] : syms.symbols())
        for (int i = 0; i < m; ++i) {
            if (ar == 1) {
                if (a.holds(name, r.origin[i])) r.s.set(name, i);
            } else {
                for (int j = 0; j < m; ++j)
                    if (a.holds(name, r.origin[i], r.origin[j])) r.s.set(name, i, j);
            }
        }
}

Formula copy_psi(const std::string& name, int arity) {
    return arity == 1 ? f::atom(name, "x") : f::atom(name, "x", "y");
}

// nearest-label witnesses: psi0_j(a, b) on arbitrary digraphs
Set r_targets(const Structure& t, int a, int j) {
    std::string lj = label_symbol(j);
    if (t.holds(kBlank, a) || t.holds(lj, a)) return 0;
    Set out = 0;
    Set labelled = t.unary_set(lj);
    for (int b = 0; b < t.size(); ++b)
        if (has(labelled, b) && dpath_native(t, b, a, lj)) out |= bit(b);
    return out;
}

Formula psi0(int j, const std::string& a, const std::string& b) {
    std::string lj = label_symbol(j);
    return f::conj({f::neg(f::atom(kBlank, a)), f::neg(f::atom(lj, a)), f::atom(lj, b), dpath_formula(b, a, lj)});
}

}  // namespace

// ---- schemes

int TranslationScheme::quantifier_rank() const {
    int q = msosep::quantifier_rank(phi);
    for (auto& [c, p] : psi) q = std::max(q, msosep::quantifier_rank(p));
    return q;
}

void TranslationScheme::validate() const {
    auto within = [&](const Formula& g, std::set<std::string> allowed, const std::string& what) {
        for (auto& v : free_vars(g))
            if (!allowed.count(v)) throw Error("VocabularyMismatch", what + " has free variable " + v);
        if (!free_set_vars(g).empty()) throw Error("VocabularyMismatch", what + " has free set variables");
        check_vocabulary(g, source);
    };
    within(phi, {"x"}, "phi");
    for (auto& [c, ar] : target.symbols()) {
        auto it = psi.find(c);
        if (it == psi.end()) throw Error("VocabularyMismatch", "no psi for " + c);
        within(it->second, ar == 1 ? std::set<std::string>{"x"} : std::set<std::string>{"x", "y"}, "psi_" + c);
    }
    if (psi.size() != target.size()) throw Error("VocabularyMismatch", "psi for a non-target symbol");
}

std::optional<Transduced> apply_generic(const TranslationScheme& t, const Structure& a) {
    if (!t.source.subset_of(a.vocab())) throw Error("VocabularyMismatch", "source symbols missing");
    Set keep = 0;
    for (int u = 0; u < a.size(); ++u) {
        Assignment as;
        as.fo["x"] = u;
        if (evaluate(a, t.phi, as)) keep |= bit(u);
    }
    if (!keep) return std::nullopt;
    Transduced r = select(a, keep, t.target);
    int m = r.s.size();
    for (auto& [c, ar] : t.target.symbols()) {
        const Formula& p = t.psi.at(c);
        for (int i = 0; i < m; ++i) {
            Assignment as;
            as.fo["x"] = r.origin[i];
            if (ar == 1) {
                if (evaluate(a, p, as)) r.s.set(c, i);
                continue;
            }
            for (int j = 0; j < m; ++j) {
                as.fo["y"] = r.origin[j];
                if (evaluate(a, p, as)) r.s.set(c, i, j);
            }
        }
    }
    return r;
}

std::optional<Transduced> apply_transduction(const TranslationScheme& t, const Structure& a) {
    if (t.native) {
        if (!t.source.subset_of(a.vocab())) throw Error("VocabularyMismatch", "source symbols missing");
        return t.native(a);
    }
    return apply_generic(t, a);
}

Formula induced_translation(const TranslationScheme& t, const Formula& theta) {
    check_vocabulary(theta, t.target);
    Translator tr{t, all_var_names(theta)};
    for (auto& v : all_var_names(t.phi)) tr.taken.insert(v);
    for (auto& [c, p] : t.psi)
        for (auto& v : all_var_names(p)) tr.taken.insert(v);
    tr.taken.insert("x");
    tr.taken.insert("y");
    return tr.rec(theta);
}

TranslationScheme compose_schemes(const TranslationScheme& t1, const TranslationScheme& t2) {
    if (!t2.source.subset_of(t1.target)) throw Error("VocabularyMismatch", "composition: " + t2.name + " needs symbols " + t1.name + " lacks");
    TranslationScheme t;
    t.name = t1.name + "." + t2.name;
    t.source = t1.source;
    t.target = t2.target;
    t.phi = induced_translation(t1, induced_translation(t2, f::eq("x", "x")));
    for (auto& [c, ar] : t2.target.symbols())
        t.psi[c] = induced_translation(t1, induced_translation(t2, copy_psi(c, ar)));
    if (t1.native && t2.native) {
        auto n1 = t1.native, n2 = t2.native;
        t.native = [n1, n2](const Structure& a) { return chain(n1(a), n2); };
    }
    return t;
}

TranslationScheme identity_scheme(const Vocabulary& v) {
    TranslationScheme t;
    t.name = "id";
    t.source = t.target = v;
    t.phi = f::eq("x", "x");
    for (auto& [c, ar] : v.symbols()) t.psi[c] = copy_psi(c, ar);
    t.native = [v](const Structure& a) {
        auto r = select(a, full_set(a.size()), v);
        copy_symbols(a, r, v);
        return std::optional<Transduced>(r);
    };
    return t;
}

TranslationScheme extend_with_copies(const TranslationScheme& base, const Vocabulary& extra) {
    TranslationScheme t = base;
    for (auto& [c, ar] : extra.symbols()) {
        if (t.target.has(c)) throw Error("NameCollision", c);
        if (t.source.has(c) && t.source.arity(c) != ar) throw Error("ArityMismatch", c);
        t.source.add(c, ar);
        t.target.add(c, ar);
        t.psi[c] = copy_psi(c, ar);
    }
    if (base.native) {
        auto n = base.native;
        Vocabulary target = t.target;
        t.native = [n, extra, target](const Structure& a) -> std::optional<Transduced> {
            auto r = n(a);
            if (!r) return r;
            Structure s(r->s.size(), target);
            for (auto& [c, ar] : r->s.vocab().symbols()) s.rel_mut(c) = r->s.rel(c);
            r->s = std::move(s);
            copy_symbols(a, *r, extra);
            return r;
        };
    }
    return t;
}

Vocabulary tree_vocabulary(int K) {
    Vocabulary v{{kSucc, 2}, {kRoot, 1}, {kBlank, 1}};
    for (int i = 1; i <= K; ++i) v.add(label_symbol(i), 1);
    return v;
}

Vocabulary r_vocabulary(int K) {
    Vocabulary v;
    for (int i = 1; i <= K; ++i) v.add(rj(i), 2);
    return v;
}

Vocabulary xi_vocabulary(const Vocabulary& c, int K) {
    Vocabulary v;
    for (auto& u : c.unary()) v.add(u, 1);
    for (auto& b : c.binary()) {
        for (int j = 1; j <= K; ++j) {
            v.add(u_symbol(b, j), 1);
            v.add(u_inv_symbol(b, j), 1);
        }
        v.add(u_self_symbol(b), 1);
    }
    return v;
}

Formula enc_sentence(int K) {
    std::vector<Formula> some, pairs;
    for (int i = 1; i <= K; ++i) some.push_back(f::atom(label_symbol(i), "x"));
    for (int i = 1; i <= K; ++i)
        for (int j = 1; j <= K; ++j)
            if (i != j) pairs.push_back(f::disj(f::neg(f::atom(label_symbol(i), "x")), f::neg(f::atom(label_symbol(j), "x"))));
    Formula blank = f::atom(kBlank, "x");
    Formula xi3 = f::conj({f::forall("x", f::disj(blank, f::disj(some))),
                           f::forall("x", f::iff(f::disj(some), f::neg(blank))),
                           f::forall("x", f::conj(pairs))});
    Formula xi4 = f::forall("x", f::iff(f::atom(kRoot, "x"), f::forall("y", f::neg(f::atom(kSucc, "y", "x")))));
    Formula xi5 = f::forall("x", f::forall("y", f::implies(f::conj(f::atom(kSucc, "x", "y"), f::neg(blank)),
                                                           f::atom(kBlank, "y"))));
    return f::conj({xi3, xi4, xi5});
}

bool is_aligned_encoding(const Structure& t, int K) {
    if (!tree_vocabulary(K).subset_of(t.vocab())) return false;
    if (!is_binary_tree(t, kSucc)) return false;
    int n = t.size();
    for (int u = 0; u < n; ++u) {
        int labels = t.holds(kBlank, u);
        for (int i = 1; i <= K; ++i) labels += t.holds(label_symbol(i), u);
        if (labels != 1) return false;
        bool in0 = t.column(kSucc, u) == 0;
        if (t.holds(kRoot, u) != in0) return false;
        if (!t.holds(kBlank, u) && (t.row(kSucc, u) & ~t.unary_set(kBlank))) return false;
    }
    return true;
}

Formula dpath_formula(const std::string& a, const std::string& b, const std::string& label) {
    std::set<std::string> taken{a, b};
    auto fresh = [&](const std::string& base) {
        std::string v = fresh_name(base, taken);
        taken.insert(v);
        return v;
    };
    std::string P = fresh("P"), X = fresh("X"), z = fresh("z"), w = fresh("w"), z1 = fresh("z1"), z2 = fresh("z2");
    Formula in_le1 = f::forall(z, f::count(Cmp::Le, 1, w, f::sub_atom(P, w, z)));
    Formula out_le1 = f::forall(z, f::count(Cmp::Le, 1, w, f::sub_atom(P, z, w)));
    Formula in0 = f::forall(w, f::neg(f::sub_atom(P, w, a)));
    Formula out0 = f::forall(w, f::neg(f::sub_atom(P, b, w)));
    Formula reach = f::set_forall(
        X, f::implies(f::conj(f::set_atom(X, a), f::neg(f::set_atom(X, b))),
                      f::exists(z1, f::exists(z2, f::conj({f::set_atom(X, z1), f::neg(f::set_atom(X, z2)),
                                                           f::sub_atom(P, z1, z2)})))));
    std::vector<Formula> body{in_le1, out_le1, in0, out0};
    if (!label.empty())
        body.push_back(f::forall(z, f::forall(w, f::implies(f::sub_atom(P, z, w), f::neg(f::atom(label, w))))));
    body.push_back(reach);
    return f::sub_exists(P, kSucc, f::conj(body));
}

bool dpath_native(const Structure& t, int a, int b, const std::string& label) {
    if (a == b) return true;
    Set allowed = full_set(t.size());
    if (!label.empty()) allowed &= ~t.unary_set(label);
    Set seen = bit(a), frontier = bit(a);
    while (frontier) {
        Set nxt = 0;
        for (int u = 0; u < t.size(); ++u)
            if (has(frontier, u)) nxt |= t.row(kSucc, u);
        nxt &= allowed & ~seen;
        if (has(nxt, b)) return true;
        seen |= nxt;
        frontier = nxt;
    }
    return false;
}

TranslationScheme interpret_scheme(int K, const Vocabulary& extra) {
    TranslationScheme t;
    t.name = "interpret";
    Vocabulary v = tree_vocabulary(K);
    for (auto& [c, ar] : extra.symbols())
        if (v.has(c) || r_vocabulary(K).has(c)) throw Error("NameCollision", c);
    t.source = v.unite(extra);
    t.target = t.source.unite(r_vocabulary(K));
    t.phi = f::eq("x", "x");
    for (auto& [c, ar] : t.source.symbols()) t.psi[c] = copy_psi(c, ar);
    for (int j = 1; j <= K; ++j)
        t.psi[rj(j)] = f::disj(psi0(j, "x", "y"),
                               f::conj(f::eq("x", "y"), f::forall("z", f::neg(psi0(j, "x", "z")))));
    Vocabulary src = t.source, tgt = t.target;
    t.native = [K, src, tgt](const Structure& a) {
        auto r = select(a, full_set(a.size()), tgt);
        copy_symbols(a, r, src);
        for (int j = 1; j <= K; ++j)
            for (int u = 0; u < a.size(); ++u) {
                Set out = r_targets(a, u, j);
                r.s.rel_mut(rj(j)).rows[u] = out ? out : bit(u);
            }
        return std::optional<Transduced>(r);
    };
    return t;
}

TranslationScheme undecorate_scheme(int K, const Vocabulary& extra) {
    TranslationScheme t;
    t.name = "undecorate";
    Vocabulary v = tree_vocabulary(K);
    for (auto& [c, ar] : extra.symbols())
        if (v.has(c) || r_vocabulary(K).has(c)) throw Error("NameCollision", c);
    t.source = v.unite(r_vocabulary(K)).unite(extra);
    t.target = r_vocabulary(K).unite(extra);
    t.phi = f::neg(f::atom(kBlank, "x"));
    for (auto& [c, ar] : t.target.symbols()) t.psi[c] = copy_psi(c, ar);
    Vocabulary tgt = t.target;
    t.native = [tgt](const Structure& a) -> std::optional<Transduced> {
        Set keep = full_set(a.size()) & ~a.unary_set(kBlank);
        if (!keep) return std::nullopt;
        auto r = select(a, keep, tgt);
        copy_symbols(a, r, tgt);
        return r;
    };
    return t;
}

TranslationScheme structurize_scheme(const Vocabulary& c, int K) {
    TranslationScheme t;
    t.name = "structurize";
    t.source = r_vocabulary(K).unite(xi_vocabulary(c, K));
    t.target = c;
    t.phi = f::eq("x", "x");
    for (auto& u : c.unary()) t.psi[u] = f::atom(u, "x");
    for (auto& b : c.binary()) {
        std::vector<Formula> alts;
        for (int j = 1; j <= K; ++j) {
            alts.push_back(f::conj(f::atom(rj(j), "x", "y"), f::atom(u_symbol(b, j), "x")));
            alts.push_back(f::conj(f::atom(rj(j), "y", "x"), f::atom(u_inv_symbol(b, j), "y")));
        }
        t.psi[b] = f::disj(f::conj(f::neg(f::eq("x", "y")), f::disj(alts)),
                           f::conj(f::eq("x", "y"), f::atom(u_self_symbol(b), "x")));
    }
    t.native = [c, K](const Structure& a) {
        auto r = select(a, full_set(a.size()), c);
        Vocabulary un;
        for (auto& u : c.unary()) un.add(u, 1);
        copy_symbols(a, r, un);
        int n = a.size();
        for (auto& b : c.binary())
            for (int u = 0; u < n; ++u) {
                if (a.holds(u_self_symbol(b), u)) r.s.set(b, u, u);
                for (int j = 1; j <= K; ++j)
                    for (int v = 0; v < n; ++v) {
                        if (u == v || !a.holds(rj(j), u, v)) continue;
                        if (a.holds(u_symbol(b, j), u)) r.s.set(b, u, v);
                        if (a.holds(u_inv_symbol(b, j), u)) r.s.set(b, v, u);
                    }
            }
        return std::optional<Transduced>(r);
    };
    return t;
}

// ---- encoder

int encoding_size_bound(int n) { return 2 * n - 1; }

namespace {

struct TreeNode {
    int label = 0;  // 0 blank
    int parent = -1;
    int owner = -1;  // blanks: the labelled node whose hub this is
    int element = -1;
    std::vector<int> kids;
};

struct TreeBuilder {
    std::vector<TreeNode> nodes;

    int add(int label, int element) {
        TreeNode t;
        t.label = label;
        t.element = element;
        nodes.push_back(t);
        return static_cast<int>(nodes.size()) - 1;
    }
    void link(int p, int c) {
        nodes[p].kids.push_back(c);
        nodes[c].parent = p;
    }
    int depth(int v) const {
        int d = 0;
        while (nodes[v].parent >= 0) v = nodes[v].parent, ++d;
        return d;
    }
    int blank(int owner) {
        int b = add(0, -1);
        nodes[b].owner = owner;
        return b;
    }
    // children of labelled nodes are blank: v goes into p's chain of blank hubs
    void attach_under(int p, int v) {
        if (nodes[p].kids.empty()) {
            int b = blank(p);
            link(p, b);
            link(b, v);
            return;
        }
        int b = nodes[p].kids[0];
        for (;;) {
            if (nodes[b].kids.size() < 2) {
                link(b, v);
                return;
            }
            int next = -1;
            for (int c : nodes[b].kids)
                if (nodes[c].label == 0 && nodes[c].owner == p) next = c;
            if (next >= 0) {
                b = next;
                continue;
            }
            int moved = nodes[b].kids[1];
            int nb = blank(p);
            nodes[b].kids[1] = nb;
            nodes[nb].parent = b;
            link(nb, moved);
            link(nb, v);
            return;
        }
    }
};

}  // namespace

Encoding encode_structure(const Structure& m, int K) {
    if (K < 1) throw Error("InvalidArgument", "K >= 1");
    int n = m.size();
    if (n == 0) throw Error("InvalidArgument", "empty structure");
    Digraph g = gaifman(m);
    auto td = treewidth_order(g);
    if (td.width > K - 1)
        throw Error("TreewidthExceeded", "tw=" + std::to_string(td.width) + " needs more than " + std::to_string(K) + " labels");

    // later neighbours in the fill-in graph; each forms a clique
    Digraph h = g;
    std::vector<Set> later(n, 0);
    Set gone = 0;
    for (int v : td.order) {
        Set nb = h.out[v] & ~gone & ~bit(v);
        later[v] = nb;
        for (int a = 0; a < n; ++a)
            if (has(nb, a)) h.out[a] |= nb & ~bit(a);
        gone |= bit(v);
    }

    TreeBuilder tb;
    std::vector<int> node_of(n, -1);
    int root = -1;
    for (auto it = td.order.rbegin(); it != td.order.rend(); ++it) {
        int v = *it;
        Set c = later[v];
        std::vector<bool> used(K + 1, false);
        int deepest = -1;
        for (int a = 0; a < n; ++a) {
            if (!has(c, a)) continue;
            used[tb.nodes[node_of[a]].label] = true;
            if (deepest < 0 || tb.depth(node_of[a]) > tb.depth(deepest)) deepest = node_of[a];
        }
        int label = 1;
        while (used[label]) ++label;
        int node = tb.add(label, v);
        node_of[v] = node;
        if (root < 0) {
            root = node;
            continue;
        }
        tb.attach_under(deepest >= 0 ? deepest : root, node);
    }

    // preorder numbering
    std::vector<int> order, id(tb.nodes.size(), -1);
    std::vector<int> stack{root};
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        id[u] = static_cast<int>(order.size());
        order.push_back(u);
        auto& ks = tb.nodes[u].kids;
        for (auto k = ks.rbegin(); k != ks.rend(); ++k) stack.push_back(*k);
    }

    Encoding e;
    e.K = K;
    Vocabulary cvoc = m.vocab();
    Structure t(static_cast<int>(order.size()), tree_vocabulary(K).unite(xi_vocabulary(cvoc, K)));
    for (int u : order) {
        auto& nd = tb.nodes[u];
        int i = id[u];
        t.set(nd.label ? label_symbol(nd.label) : std::string(kBlank), i);
        for (int k : nd.kids) t.set(kSucc, i, id[k]);
    }
    t.set(kRoot, id[root]);
    for (int a = 0; a < n; ++a) node_of[a] = id[node_of[a]];
    std::vector<int> elem(t.size(), -1);
    for (int a = 0; a < n; ++a) elem[node_of[a]] = a;

    for (int a = 0; a < n; ++a) {
        int v = node_of[a];
        for (auto& u : cvoc.unary())
            if (m.holds(u, a)) t.set(u, v);
        for (auto& b : cvoc.binary())
            if (m.holds(b, a, a)) t.set(u_self_symbol(b), v);
        int own = tb.nodes[order[v]].label;
        for (int j = 1; j <= K; ++j) {
            if (j == own) continue;
            int p = tb.nodes[order[v]].parent;
            while (p >= 0 && tb.nodes[p].label != j) p = tb.nodes[p].parent;
            if (p < 0) continue;
            int w = elem[id[p]];
            for (auto& b : cvoc.binary()) {
                if (m.holds(b, a, w)) t.set(u_symbol(b, j), v);
                if (m.holds(b, w, a)) t.set(u_inv_symbol(b, j), v);
            }
        }
    }
    e.tree = std::move(t);
    e.node_of = std::move(node_of);

    // round trip through the native tr
    Vocabulary xi = xi_vocabulary(cvoc, K);
    auto back = chain(chain(interpret_scheme(K, xi).native(e.tree), undecorate_scheme(K, xi).native),
                      structurize_scheme(cvoc, K).native);
    bool ok = back && back->s.size() == n;
    if (ok) {
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[elem[back->origin[i]]] = i;
        ok = permute(m, perm) == back->s;
    }
    if (!ok) throw Error("RoundTripFailed", "encoding does not decode to the input");
    return e;
}

TrDom build_tr_and_dom(const Vocabulary& cb, const Vocabulary& cu, int K) {
    for (auto& b : cb.binary())
        if (cu.has(b)) throw Error("SharedBinarySymbol", b);
    for (auto& u : cb.unary())
        if (cu.arity(u) == 2) throw Error("SharedBinarySymbol", u);
    Vocabulary internal = tree_vocabulary(K).unite(r_vocabulary(K));
    Vocabulary xi = xi_vocabulary(cb, K);
    Vocabulary all = cb.unite(cu);
    for (auto& [c, ar] : all.symbols())
        if (internal.has(c) || (xi.has(c) && !cb.has(c))) throw Error("NameCollision", c);
    auto i = interpret_scheme(K, xi);
    auto u = undecorate_scheme(K, xi);
    auto s = structurize_scheme(cb, K);
    auto t = compose_schemes(i, compose_schemes(u, s));
    t = extend_with_copies(t, cu.minus(cb));
    t.name = "tr";
    TrDom r;
    r.tr = std::move(t);
    r.dom = enc_sentence(K);
    r.K = K;
    return r;
}

// ---- serialization

namespace {

std::string vocab_line(const Vocabulary& v) {
    std::string s;
    for (auto& [c, ar] : v.symbols()) s += " " + c + "/" + std::to_string(ar);
    return s;
}

Vocabulary parse_vocab_words(std::istringstream& in) {
    Vocabulary v;
    std::string w;
    while (in >> w) {
        auto slash = w.find('/');
        if (slash == std::string::npos) throw Error("SyntaxError", "expected name/arity: " + w);
        v.add(w.substr(0, slash), std::stoi(w.substr(slash + 1)));
    }
    return v;
}

}  // namespace

std::string serialize_scheme(const TranslationScheme& t) {
    std::ostringstream o;
    o << "scheme " << t.name << "\n";
    o << "source" << vocab_line(t.source) << "\n";
    o << "target" << vocab_line(t.target) << "\n";
    o << "phi := " << print_formula(t.phi) << "\n";
    for (auto& [c, p] : t.psi) o << "psi " << c << " := " << print_formula(p) << "\n";
    return o.str();
}

TranslationScheme parse_scheme(const std::string& text) {
    TranslationScheme t;
    std::istringstream in(text);
    std::string line;
    bool have_phi = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "scheme") {
            ls >> t.name;
        } else if (head == "source") {
            t.source = parse_vocab_words(ls);
        } else if (head == "target") {
            t.target = parse_vocab_words(ls);
        } else if (head == "phi" || head == "psi") {
            std::string sym;
            if (head == "psi") ls >> sym;
            auto at = line.find(":=");
            if (at == std::string::npos) throw Error("SyntaxError", "missing := in " + line);
            ParseOptions po;
            int ar = head == "phi" ? 1 : t.target.arity(sym);
            if (ar == 0) throw Error("VocabularyMismatch", "psi for unknown target symbol " + sym);
            po.free_vars = ar == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x", "y"};
            Formula g = parse_formula(line.substr(at + 2), t.source, po);
            if (head == "phi") {
                t.phi = g;
                have_phi = true;
            } else {
                t.psi[sym] = g;
            }
        } else {
            throw Error("SyntaxError", "unknown scheme line: " + line);
        }
    }
    if (!have_phi) throw Error("SyntaxError", "scheme without phi");
    t.validate();
    return t;
}

}  // namespace msosep
