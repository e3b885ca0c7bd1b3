#include "msosep/cardinality.hpp"

#include <regex>
#include <set>

namespace msosep {

namespace {

void collect_atoms(const Formula& f, std::vector<Formula>& out) {
    if (f->kind == Kind::Card) {
        for (auto& g : out)
            if (structurally_equal(g, f)) return;
        out.push_back(f);
        return;
    }
    for (auto& k : f->kids) collect_atoms(k, out);
}

bool set_binder(Kind k) {
    return k == Kind::SetForall || k == Kind::SetExists || k == Kind::SubExists || k == Kind::SubForall;
}

// inner set binders may not capture a variable of a card atom
void check_prefix_only(const Formula& f, std::vector<std::string>& inner) {
    if (f->kind == Kind::Card) {
        for (auto& t : f->terms)
            for (auto& s : inner)
                if (s == t) throw Error("CardVarNotInPrefix", t);
        return;
    }
    bool bind = set_binder(f->kind);
    if (bind) inner.push_back(f->name);
    for (auto& k : f->kids) check_prefix_only(k, inner);
    if (bind) inner.pop_back();
}

// prefix set atoms become unary atoms; card atoms are replaced via `sub`
Formula lower(const Formula& f, const std::set<std::string>& prefix, std::set<std::string>& shadow,
              const std::vector<CardAtomRewrite>& sub) {
    switch (f->kind) {
        case Kind::SetAtom:
            if (prefix.count(f->name) && !shadow.count(f->name)) return f::atom(f->name, f->terms[0]);
            return f;
        case Kind::Card:
            for (auto& a : sub)
                if (structurally_equal(a.atom, f)) return a.substitute;
            throw Error("InvariantViolation", "card atom without rewrite");
        default: break;
    }
    if (f->kids.empty()) return f;
    bool bind = set_binder(f->kind) && prefix.count(f->name) && !shadow.count(f->name);
    if (bind) shadow.insert(f->name);
    std::vector<Formula> kids;
    for (auto& k : f->kids) kids.push_back(lower(k, prefix, shadow, sub));
    if (bind) shadow.erase(f->name);
    return f::make(f->kind, *f, std::move(kids));
}

Formula any_link_out(const CardAtomRewrite& a, size_t i, const std::string& x, const std::string& y) {
    std::vector<Formula> d;
    for (size_t j = 0; j < a.rhs.size(); ++j) d.push_back(f::atom(a.b[i][j], x, y));
    return f::disj(d);
}

Formula any_link_in(const CardAtomRewrite& a, size_t j, const std::string& x, const std::string& y) {
    // some left item links to (j, x); y ranges over left elements
    std::vector<Formula> d;
    for (size_t i = 0; i < a.lhs.size(); ++i) d.push_back(f::atom(a.b[i][j], y, x));
    return f::disj(d);
}

void build_axioms(CardAtomRewrite& a) {
    using namespace f;
    const size_t p = a.lhs.size(), r = a.rhs.size();
    std::vector<Formula> typing, disjoint, dom, img, inj12, inj21;
    for (size_t i = 0; i < p; ++i)
        for (size_t j = 0; j < r; ++j)
            typing.push_back(implies(atom(a.b[i][j], "x", "y"), conj(atom(a.lhs[i], "x"), atom(a.rhs[j], "y"))));
    // a left item links at most once per pair (x, y), likewise a right item
    for (size_t i = 0; i < p; ++i)
        for (size_t j = 0; j < r; ++j) {
            for (size_t j2 = j + 1; j2 < r; ++j2)
                disjoint.push_back(neg(conj(atom(a.b[i][j], "x", "y"), atom(a.b[i][j2], "x", "y"))));
            for (size_t i2 = i + 1; i2 < p; ++i2)
                disjoint.push_back(neg(conj(atom(a.b[i][j], "x", "y"), atom(a.b[i2][j], "x", "y"))));
        }
    for (size_t i = 0; i < p; ++i) {
        dom.push_back(forall("x", iff(atom(a.w_dom[i], "x"), exists("y", any_link_out(a, i, "x", "y")))));
        inj12.push_back(forall("x", implies(atom(a.lhs[i], "x"), count(Cmp::Eq, 1, "y", any_link_out(a, i, "x", "y")))));
        inj21.push_back(forall("x", count(Cmp::Le, 1, "y", any_link_out(a, i, "x", "y"))));
    }
    for (size_t j = 0; j < r; ++j) {
        img.push_back(forall("x", iff(atom(a.w_img[j], "x"), exists("y", any_link_in(a, j, "x", "y")))));
        inj12.push_back(forall("x", count(Cmp::Le, 1, "y", any_link_in(a, j, "x", "y"))));
        inj21.push_back(forall("x", implies(atom(a.rhs[j], "x"), count(Cmp::Eq, 1, "y", any_link_in(a, j, "x", "y")))));
    }
    std::vector<Formula> parts{forall("x", forall("y", conj(typing)))};
    if (!disjoint.empty()) parts.push_back(forall("x", forall("y", conj(disjoint))));
    parts.push_back(disj(conj(inj12), conj(inj21)));
    parts.push_back(conj(dom));
    parts.push_back(conj(img));
    a.axioms = conj(parts);

    std::vector<Formula> all_dom, some_free;
    for (size_t i = 0; i < p; ++i) all_dom.push_back(forall("x", iff(atom(a.lhs[i], "x"), atom(a.w_dom[i], "x"))));
    for (size_t j = 0; j < r; ++j) some_free.push_back(exists("x", conj(neg(atom(a.w_img[j], "x")), atom(a.rhs[j], "x"))));
    a.substitute = conj(conj(all_dom), disj(some_free));
}

std::optional<Structure> solve_fixed(const Formula& phi, const Vocabulary& vocab, const Structure& a) {
    SatSolver solver;
    Grounder g(solver, a.size(), vocab, &a);
    g.require(phi);
    if (solver.solve() != SatSolver::Sat) return std::nullopt;
    return g.model();
}

}  // namespace

std::vector<Formula> CardSentence::card_atoms() const {
    std::vector<Formula> out;
    collect_atoms(matrix, out);
    return out;
}

Formula CardSentence::sentence() const {
    Formula f = matrix;
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) f = f::set_exists(*it, f);
    return f;
}

CardSentence parse_card(const std::string& text, const Vocabulary& vocab) {
    static const std::regex head(R"(^\s*(?:ESet\s+([A-Za-z_][A-Za-z0-9_']*)|E([A-Z][A-Za-z0-9_']*))\s*\.)");
    CardSentence cs;
    cs.vocab = vocab;
    std::string rest = text;
    std::smatch m;
    while (std::regex_search(rest, m, head)) {
        std::string v = m[1].matched ? m[1].str() : m[2].str();
        if (vocab.has(v)) throw Error("SyntaxError", "prefix variable " + v + " is a symbol");
        for (auto& p : cs.prefix)
            if (p == v) throw Error("SyntaxError", "prefix variable " + v + " repeated");
        cs.prefix.push_back(v);
        rest = m.suffix().str();
    }
    ParseOptions po;
    po.free_vars = std::vector<std::string>{};
    po.allow_card = true;
    po.set_vars = cs.prefix;
    cs.matrix = parse_formula(rest, vocab, po);
    std::vector<std::string> inner;
    check_prefix_only(cs.matrix, inner);
    return cs;
}

CardRewrite rewrite_card(const CardSentence& rho, int k) {
    CardRewrite rw;
    rw.prefix = rho.prefix;
    rw.base = rho.vocab;
    rw.k = k;
    std::set<std::string> taken;
    for (auto& n : rho.vocab.names()) taken.insert(n);
    for (auto& p : rho.prefix) taken.insert(p);
    for (auto& v : all_var_names(rho.matrix)) taken.insert(v);
    auto fresh = [&](const std::string& base) {
        auto n = fresh_name(base, taken);
        taken.insert(n);
        return n;
    };

    auto atoms = rho.card_atoms();
    for (size_t c = 0; c < atoms.size(); ++c) {
        CardAtomRewrite a;
        a.atom = atoms[c];
        const auto& t = atoms[c]->terms;
        a.lhs.assign(t.begin(), t.begin() + atoms[c]->count);
        a.rhs.assign(t.begin() + atoms[c]->count, t.end());
        std::string tag = std::to_string(c + 1);
        bool single = a.lhs.size() == 1 && a.rhs.size() == 1;
        a.b.assign(a.lhs.size(), std::vector<std::string>(a.rhs.size()));
        for (size_t i = 0; i < a.lhs.size(); ++i) {
            for (size_t j = 0; j < a.rhs.size(); ++j)
                a.b[i][j] = fresh(single ? "B_" + tag : "B_" + tag + "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
            a.w_dom.push_back(fresh(single ? "W_dom_" + tag : "W_dom_" + tag + "_" + std::to_string(i + 1)));
        }
        for (size_t j = 0; j < a.rhs.size(); ++j)
            a.w_img.push_back(fresh(single ? "W_img_" + tag : "W_img_" + tag + "_" + std::to_string(j + 1)));
        build_axioms(a);
        rw.atoms.push_back(std::move(a));
    }

    std::set<std::string> prefix(rho.prefix.begin(), rho.prefix.end()), shadow;
    rw.alpha = lower(rho.matrix, prefix, shadow, rw.atoms);
    std::vector<Formula> b;
    for (auto& a : rw.atoms) b.push_back(a.axioms);
    rw.beta = f::conj(b);

    rw.cb = rw.base;
    for (auto& p : rho.prefix) rw.cb.add(p, 1);
    for (auto& a : rw.atoms) {
        for (auto& w : a.w_dom) rw.cb.add(w, 1);
        for (auto& w : a.w_img) rw.cb.add(w, 1);
    }
    rw.cu = rw.cb;
    for (auto& a : rw.atoms)
        for (auto& row : a.b)
            for (auto& s : row) rw.cu.add(s, 2);
    return rw;
}

std::optional<Structure> card_expansion(const CardRewrite& rw, const Structure& a) {
    return solve_fixed(f::conj(rw.alpha, rw.beta), rw.cu, a);
}

std::optional<Structure> atom_expansion(const CardAtomRewrite& at, const Structure& a) {
    Vocabulary v;
    for (auto& x : at.lhs) v.add(x, 1);
    for (auto& y : at.rhs) v.add(y, 1);
    for (auto& w : at.w_dom) v.add(w, 1);
    for (auto& w : at.w_img) v.add(w, 1);
    for (auto& row : at.b)
        for (auto& s : row) v.add(s, 2);
    Structure fixed(a.size(), {});
    for (auto& x : at.lhs) fixed.add_symbol(x, 1), fixed.set_unary(x, a.unary_set(x));
    for (auto& y : at.rhs) fixed.add_symbol(y, 1), fixed.set_unary(y, a.unary_set(y));
    return solve_fixed(f::conj(at.substitute, at.axioms), v, fixed);
}

bool card_atom_direct(const Formula& atom, const Structure& a) {
    int l = 0, r = 0;
    for (size_t i = 0; i < atom->terms.size(); ++i)
        (static_cast<int>(i) < atom->count ? l : r) += popcount(a.unary_set(atom->terms[i]));
    return l < r;
}

CardDecision decide_card_bounded(const CardSentence& rho, int k, int n_max, double time_cap_seconds) {
    auto rw = rewrite_card(rho, k);
    SearchBudget b;
    b.max_size = n_max;
    b.time_cap_seconds = time_cap_seconds;
    b.shape.kind = ShapeConstraint::Treewidth;
    b.shape.k = k;
    b.shape.reduct = rho.vocab;
    auto res = bounded_sat(f::conj(rw.alpha, rw.beta), rw.cu, b);
    CardDecision d;
    d.n_max = n_max;
    d.sizes_searched = res.sizes_searched;
    if (!res.sat) return d;
    d.sat = true;
    d.expanded = res.model;
    Vocabulary keep = rho.vocab;
    for (auto& p : rho.prefix) keep.add(p, 1);
    d.model = reduct(res.model, keep);

    Assignment asg;
    for (auto& p : rho.prefix) d.sets[p] = asg.sets[p] = res.model.unary_set(p);
    Structure base = reduct(res.model, rho.vocab);
    if (!evaluate(base, rho.matrix, asg)) throw Error("VerificationFailed", "model violates the card sentence");
    for (auto& a : rw.atoms) {
        bool direct = card_atom_direct(a.atom, d.model);
        if (direct != evaluate(d.expanded, a.substitute))
            throw Error("VerificationFailed", "atom " + print_formula(a.atom) + " disagrees with its substitute");
    }
    if (treewidth(gaifman(base)) > k) throw Error("VerificationFailed", "tree-width above bound");
    return d;
}

}  // namespace msosep
