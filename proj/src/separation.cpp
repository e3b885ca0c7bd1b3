#include "msosep/separation.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace msosep {

namespace {

const char* const kPPrefix = "P_";

int index_of(const std::vector<std::string>& v, const std::string& s) {
    auto it = std::find(v.begin(), v.end(), s);
    return it == v.end() ? -1 : static_cast<int>(it - v.begin());
}

// does t contain m(x,y) for some m in syms
bool forward_has(const TwoType& t, const TypeSignature& sig, const std::vector<std::string>& syms) {
    for (auto& m : syms) {
        int b = index_of(sig.binary, m);
        if (b >= 0 && t.xy(b)) return true;
    }
    return false;
}

Structure with_p_symbols(const Structure& s, const std::set<std::string>& ps) {
    Structure r = s;
    for (auto& p : ps)
        if (!r.interprets(p)) r.add_symbol(p, 1);
    return r;
}

std::vector<std::string> p_symbols_of(const Structure& s) {
    std::vector<std::string> r;
    for (auto& u : s.vocab().unary())
        if (is_p_symbol(u)) r.push_back(u);
    return r;
}

// types realized by s plus those named by its P symbols
std::set<TwoType> candidate_types(const SeparationContext& c, const Structure& s) {
    std::set<TwoType> r = realized_two_types(s, c.sig);
    for (auto& p : p_symbols_of(s)) r.insert(decode_type_code(p.substr(2), c.sig));
    return r;
}

bool in_side(const SeparationContext& c, Side side, const TwoType& t) {
    return side == Side::Unbounded ? c.is_sigma_type(t) : c.in_delta_bounded(t);
}

std::set<std::string> needed_p(const std::vector<Formula>& parts) {
    std::set<std::string> r;
    for (auto& p : parts)
        for (auto& s : symbols_of(p))
            if (is_p_symbol(s)) r.insert(s);
    return r;
}

int image(const Structure& s, const std::string& r, int u) {
    Set row = s.row(r, u);
    if (popcount(row) != 1) throw Error("NotFunctional", r + " at " + std::to_string(u));
    return __builtin_ctzll(row);
}

Vocabulary plus_vocab(const SeparationContext& c, const Structure& s) {
    Vocabulary v = c.main;
    for (auto& p : p_symbols_of(s)) v.add(p, 1);
    return v;
}

}  // namespace

std::string p_symbol(const TwoType& t) { return kPPrefix + type_code(t); }

bool is_p_symbol(const std::string& name) {
    if (name.size() <= 2 || name.compare(0, 2, kPPrefix) != 0) return false;
    return std::all_of(name.begin() + 2, name.end(),
                       [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) || (ch >= 'a' && ch <= 'f'); });
}

bool SeparationContext::is_sigma_type(const TwoType& t) const { return forward_has(t, sig, sigma); }
bool SeparationContext::is_r_type(const TwoType& t) const { return forward_has(t, sig, r_syms); }
bool SeparationContext::in_delta_bounded(const TwoType& t) const {
    return is_r_type(t) || (is_sigma_type(t) && is_r_type(t.inverse()));
}

SeparationContext build_separation(const Formula& alpha, const Vocabulary& cb, const Formula& beta,
                                   const Vocabulary& cu, int k, const SeparationOptions& o) {
    if (k < 1) throw Error("InvalidArgument", "k must be positive");
    check_vocabulary(alpha, cb);
    check_vocabulary(beta, cu);
    if (!is_c2(beta)) throw Error("NotC2", "beta");
    SeparationContext c;
    c.cb = cb;
    c.cu = cu;
    c.k = k;
    c.alpha = alpha;
    c.beta = beta;
    c.opts = o;
    c.nf = scott_normal_form(beta, cu);
    c.beta_nf = c.nf.sentence();
    c.messages = c.nf.messages;

    Vocabulary taken = cb.unite(c.nf.vocab);
    for (int i = 1; i <= k; ++i) {
        if (taken.has(r_symbol(i))) throw Error("NameCollision", r_symbol(i));
        c.r_syms.push_back(r_symbol(i));
    }
    c.sigma = c.messages;
    c.sigma.insert(c.sigma.end(), c.r_syms.begin(), c.r_syms.end());
    c.colors = color_count(static_cast<int>(c.sigma.size()));

    c.main = taken;
    for (auto& r : c.r_syms) c.main.add(r, 2);
    for (int i = 1; i <= c.colors; ++i) {
        if (c.main.has(color_symbol(i))) throw Error("NameCollision", color_symbol(i));
        c.main.add(color_symbol(i), 1);
    }
    for (auto& [name, a] : c.main.symbols()) {
        if (is_p_symbol(name)) throw Error("NameCollision", name);
        if (a == 2 && c.main.has(copy_name(name))) throw Error("NameCollision", copy_name(name));
    }
    c.sig = TypeSignature(c.main);

    std::vector<Formula> fs;
    for (auto& r : c.r_syms) fs.push_back(f::forall("x", f::count(Cmp::Eq, 1, "y", f::atom(r, "x", "y"))));
    c.sigma_f = f::conj(fs);

    std::vector<Formula> radj, badj;
    for (auto& r : c.r_syms) radj.push_back(f::disj(f::atom(r, "x", "y"), f::atom(r, "y", "x")));
    for (auto& b : cb.binary()) badj.push_back(f::disj(f::atom(b, "x", "y"), f::atom(b, "y", "x")));
    Formula ra = f::disj(radj);
    c.sigma_g = f::forall("x", f::forall("y", f::implies(f::neg(f::eq("x", "y")), f::iff(ra, f::disj(badj)))));

    std::vector<Formula> cs;
    for (auto& b : c.nf.vocab.binary())
        cs.push_back(f::forall("x", f::forall("y", f::implies(f::neg(f::eq("x", "y")),
                                                              f::implies(f::atom(b, "x", "y"), ra)))));
    c.sigma_c = f::conj(cs);
    return c;
}

Formula delta_conjunct(const SeparationContext& c, const TwoType& t) {
    return f::forall("x", f::iff(f::atom(p_symbol(t), "x"), f::exists("y", type_formula(t, c.sig, "x", "y"))));
}

Formula color_conjunct(const SeparationContext& c, const TwoType& t, const std::string& m, const std::string& m2) {
    Formula pre = f::conj({f::atom(p_symbol(t), "x"), f::atom(m, "y", "x"), f::neg(f::atom(m2, "x", "y"))});
    return f::forall("x", f::forall("y", f::implies(pre, f::neg(type_formula(t.y, c.sig, "y")))));
}

namespace {

std::vector<Formula> color_parts(const SeparationContext& c, const TwoType& t) {
    std::vector<Formula> r;
    if (!c.is_sigma_type(t)) return r;
    for (auto& m2 : c.sigma) {
        int b = index_of(c.sig.binary, m2);
        if (b < 0 || !t.xy(b)) continue;
        for (auto& m : c.sigma) r.push_back(color_conjunct(c, t, m, m2));
    }
    return r;
}

std::vector<TwoType> all_types_capped(const SeparationContext& c) {
    int bits = c.sig.two_atoms();
    if (bits >= 62 || (1LL << bits) > c.opts.type_cap)
        throw Error("TypeExplosion", "2^" + std::to_string(bits) + " 2-types, cap " + std::to_string(c.opts.type_cap));
    return enumerate_2types(c.sig, c.opts.type_cap);
}

}  // namespace

Formula delta_sentence(const SeparationContext& c, Side side) {
    std::vector<Formula> r;
    for (auto& t : all_types_capped(c))
        if (in_side(c, side, t)) r.push_back(delta_conjunct(c, t));
    return f::conj(r);
}

Formula color_sentence(const SeparationContext& c) {
    std::vector<Formula> r;
    for (auto& t : all_types_capped(c))
        for (auto& p : color_parts(c, t)) r.push_back(p);
    return f::conj(r);
}

Formula relevant_delta(const SeparationContext& c, Side side, const Structure& s) {
    std::vector<Formula> r;
    for (auto& t : candidate_types(c, s))
        if (in_side(c, side, t)) r.push_back(delta_conjunct(c, t));
    return f::conj(r);
}

Formula relevant_color(const SeparationContext& c, const Structure& s) {
    // only P_t that holds somewhere can trigger a color conjunct
    std::vector<Formula> r;
    for (auto& p : p_symbols_of(s)) {
        if (!s.unary_set(p)) continue;
        for (auto& g : color_parts(c, decode_type_code(p.substr(2), c.sig))) r.push_back(g);
    }
    return f::conj(r);
}

Formula bounded_core(const SeparationContext& c, const Structure& s) {
    return f::conj({c.alpha, c.sigma_f, c.sigma_g, c.sigma_c, relevant_delta(c, Side::Bounded, s), relevant_color(c, s)});
}

Formula unbounded_core(const SeparationContext& c, const Structure& s) {
    return f::conj({c.beta_nf, c.sigma_f, c.sigma_g, relevant_delta(c, Side::Unbounded, s), relevant_color(c, s)});
}

Structure unbounded_half(const SeparationContext& c, const Structure& f) { return reduct(f, plus_vocab(c, f)); }

Structure bounded_half(const SeparationContext& c, const Structure& f) {
    Vocabulary v = plus_vocab(c, f);
    Structure r(f.size(), v);
    for (auto& [name, a] : v.symbols()) {
        std::string src = a == 2 ? copy_name(name) : name;
        if (f.vocab().arity(src) != a) throw Error("VocabularyMismatch", src);
        r.rel_mut(name) = f.rel(src);
    }
    return r;
}

Structure join_halves(const SeparationContext& c, const Structure& n, const Structure& n_prime) {
    if (n.size() != n_prime.size()) throw Error("UniverseMismatch");
    Vocabulary v = plus_vocab(c, n).unite(plus_vocab(c, n_prime));
    Structure a = n, b = n_prime;
    for (auto& u : v.unary()) {
        if (!a.interprets(u)) a.add_symbol(u, 1);
        if (!b.interprets(u)) b.add_symbol(u, 1);
        if (a.unary_set(u) != b.unary_set(u)) throw Error("VocabularyMismatch", "halves disagree on " + u);
    }
    Structure r = reduct(a, v);
    for (auto& bn : v.binary()) {
        r.add_symbol(copy_name(bn), 2);
        r.rel_mut(copy_name(bn)) = b.rel(bn);
    }
    return r;
}

std::pair<Formula, Formula> separated_sentences(const SeparationContext& c, const Structure& fs) {
    Structure n = unbounded_half(c, fs), np = bounded_half(c, fs);
    return {copy_formula(bounded_core(c, np), plus_vocab(c, fs)), unbounded_core(c, n)};
}

bool satisfies_separated(const SeparationContext& c, const Structure& fs) {
    auto [ap, bp] = separated_sentences(c, fs);
    Structure g = with_p_symbols(fs, needed_p({ap, bp}));
    return evaluate(g, ap) && evaluate(g, bp);
}

bool satisfies_bounded_side(const SeparationContext& c, const Structure& np) {
    Formula f = bounded_core(c, np);
    return evaluate(with_p_symbols(np, needed_p({f})), f);
}

bool satisfies_unbounded_side(const SeparationContext& c, const Structure& n) {
    Formula f = unbounded_core(c, n);
    return evaluate(with_p_symbols(n, needed_p({f})), f);
}

Expansion expand_to_separated(const Structure& m, const SeparationContext& c) {
    Vocabulary in = c.cb.unite(c.cu);
    for (auto& [name, a] : in.symbols())
        if (m.vocab().arity(name) != a) throw Error("VocabularyMismatch", name);
    Structure base = reduct(m, in);
    if (!evaluate(base, c.alpha) || !evaluate(base, c.beta)) throw Error("PreconditionFailed", "M is not a model of alpha & beta");
    Vocabulary cbb;
    for (auto& b : c.cb.binary()) cbb.add(b, 2);
    Digraph g = gaifman(reduct(base, cbb));
    if (treewidth(g) > c.k) throw Error("TreewidthExceeded", "tw > " + std::to_string(c.k));

    Structure s = scott_expand(base, c.nf);
    int n = s.size();
    // out-degree <= k
    Orientation o = orient_k_bounded(g, c.k + 1);
    for (int i = 1; i <= c.k; ++i) {
        s.add_symbol(r_symbol(i), 2);
        for (int u = 0; u < n; ++u) {
            int t = i <= static_cast<int>(o.out[u].size()) ? o.out[u][i - 1] : u;
            s.set(r_symbol(i), u, t);
        }
    }
    s = chromatic_expansion(s, c.sigma);

    std::set<std::string> ps;
    std::vector<std::pair<std::string, int>> marks;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
            if (u == v) continue;
            TwoType t = two_type_of(s, u, v, c.sig);
            if (!c.is_sigma_type(t)) continue;
            ps.insert(p_symbol(t));
            marks.emplace_back(p_symbol(t), u);
        }
    for (auto& p : ps) s.add_symbol(p, 1);
    for (auto& [p, u] : marks) s.set(p, u);

    // bounded half: main binaries restricted to the diagonal and R-adjacent pairs
    Structure np = s;
    std::vector<Set> adj(n, 0);
    for (auto& r : c.r_syms)
        for (int u = 0; u < n; ++u) {
            int v = image(s, r, u);
            adj[u] |= bit(v);
            adj[v] |= bit(u);
        }
    for (auto& b : c.main.binary())
        for (int u = 0; u < n; ++u) np.rel_mut(b).rows[u] &= adj[u] | bit(u);

    Expansion e{join_halves(c, s, np), s, np};
    if (!satisfies_separated(c, e.full)) throw Error("PostConditionFailed", "expansion violates alpha+ & beta+");
    return e;
}

std::vector<std::vector<int>> rank_contributions(const SeparationContext& c, const Structure& n, const Structure& np) {
    if (n.size() != np.size()) throw Error("UniverseMismatch");
    std::vector<std::vector<int>> r(n.size(), std::vector<int>(c.k, 0));
    for (int u = 0; u < n.size(); ++u)
        for (int i = 0; i < c.k; ++i) r[u][i] = image(n, c.r_syms[i], u) != image(np, c.r_syms[i], u);
    return r;
}

int rank(const SeparationContext& c, const Structure& n, const Structure& np) {
    int s = 0;
    for (auto& row : rank_contributions(c, n, np))
        for (int b : row) s += b;
    return s;
}

bool type_agreement(const SeparationContext& c, const Structure& n, const Structure& np) {
    auto rc = rank_contributions(c, n, np);
    for (int u = 0; u < n.size(); ++u)
        for (int i = 0; i < c.k; ++i) {
            if (rc[u][i]) continue;
            int v = image(n, c.r_syms[i], u);
            if (v != u && two_type_of(n, u, v, c.sig) != two_type_of(np, u, v, c.sig)) return false;
        }
    return true;
}

std::string SwapStep::trace() const {
    std::ostringstream o;
    o << "swap case=" << which_case << " u=" << u << " v=" << v << " w=" << w;
    if (which_case == 1) o << " a=" << a;
    o << " j=" << j << " rank " << rank_before << "->" << rank_after;
    return o.str();
}

namespace {

struct Guard {
    int step;
    void operator()(bool ok, const char* what) const {
        if (!ok) throw Error("InvariantViolation", "step " + std::to_string(step) + ": " + what);
    }
};

TypeSignature full_sig(const Structure& s) { return TypeSignature(s.vocab()); }

bool same_one_types(const Structure& a, const Structure& b) {
    Vocabulary un;
    for (auto& u : a.vocab().unary()) un.add(u, 1);
    for (auto& u : b.vocab().unary()) un.add(u, 1);
    for (auto& bn : a.vocab().binary()) un.add(bn, 2);
    TypeSignature sig(un);
    for (int u = 0; u < a.size(); ++u)
        if (one_type_of(a, u, sig) != one_type_of(b, u, sig)) return false;
    return true;
}

bool has_message(const SeparationContext& c, const Structure& s, int x, int y) {
    return x != y && c.is_sigma_type(two_type_of(s, x, y, c.sig));
}

}  // namespace

Normalization edge_swap_normalize(const SeparationContext& c, const Structure& n0, const Structure& np) {
    Normalization out;
    out.sequence.push_back(n0);
    bool strict = c.opts.strict;
    Guard pre{0};
    pre(n0.size() == np.size(), "universe mismatch");
    if (strict) {
        pre(satisfies_unbounded_side(c, n0), "N violates beta+");
        pre(satisfies_bounded_side(c, np), "N' violates alpha+");
        pre(same_one_types(n0, np), "1-types differ between N and N'");
    }
    int nn = n0.size();
    Structure cur = n0;
    int rk = rank(c, cur, np);
    while (rk > 0) {
        Guard chk{static_cast<int>(out.steps.size()) + 1};
        auto rc = rank_contributions(c, cur, np);
        int u = -1, j = -1;
        for (int x = 0; x < nn && u < 0; ++x)
            for (int i = 0; i < c.k; ++i)
                if (rc[x][i]) {
                    u = x;
                    j = i;
                    break;
                }
        int v = image(cur, c.r_syms[j], u), w = image(np, c.r_syms[j], u);
        chk(v != u && w != u, "R-image on the diagonal");
        TwoType tau = two_type_of(cur, u, v, c.sig);
        chk(c.is_sigma_type(tau), "tau is not a message type");
        chk(cur.interprets(p_symbol(tau)) && cur.holds(p_symbol(tau), u), "P_tau(u) fails");
        chk(one_type_of(cur, v, c.sig) == one_type_of(cur, w, c.sig), "tp(v) != tp(w)");

        SwapStep st;
        st.u = u;
        st.v = v;
        st.w = w;
        st.j = j + 1;
        st.rank_before = rk;
        Structure next = cur;
        TwoType old_uw = two_type_of(cur, u, w, c.sig);
        if (c.is_sigma_type(tau.inverse())) {
            st.which_case = 1;
            int a = -1;
            for (int x = 0; x < nn && a < 0; ++x)
                if (x != w && two_type_of(cur, x, w, c.sig) == tau) a = x;
            chk(a >= 0, "no a with type(a,w) = tau");
            chk(a != u && a != v, "a collides with u or v");
            chk(one_type_of(cur, u, c.sig) == one_type_of(cur, a, c.sig), "tp(u) != tp(a)");
            if (strict) {
                chk(!has_message(c, cur, u, w) && !has_message(c, cur, w, u) && !has_message(c, cur, a, v) &&
                        !has_message(c, cur, v, a),
                    "(*) message type on a crossing edge");
                chk(two_type_of(np, u, v, c.sig) != tau && two_type_of(np, a, w, c.sig) != tau, "(**) fails");
            }
            TwoType old_av = two_type_of(cur, a, v, c.sig);
            apply_two_type(next, u, w, tau, c.sig);
            apply_two_type(next, a, v, tau, c.sig);
            apply_two_type(next, a, w, old_av, c.sig);
            apply_two_type(next, u, v, old_uw, c.sig);
            st.a = a;
        } else {
            st.which_case = 2;
            chk(!has_message(c, cur, w, u), "(w,u) carries a message type");
            apply_two_type(next, u, w, tau, c.sig);
            apply_two_type(next, u, v, old_uw, c.sig);
        }
        st.rank_after = rank(c, next, np);
        if (strict) {
            chk(same_one_types(next, np), "1-types changed");
            chk(realized_two_types(next, c.sig) == realized_two_types(cur, c.sig), "realized 2-types changed");
            chk(is_functional(next, c.sigma), "not sigma-functional");
            chk(is_chromatic(next, c.sigma, c.sig), "not chromatic");
            chk(satisfies_unbounded_side(c, next), "beta+ fails");
        }
        chk(st.rank_after < st.rank_before, "rank did not decrease");
        if (c.opts.trace) *c.opts.trace << st.trace() << "\n";
        out.steps.push_back(st);
        out.sequence.push_back(next);
        cur = std::move(next);
        rk = st.rank_after;
    }
    return out;
}

Structure extract_model(const SeparationContext& c, const Structure& np_, const Structure& n_prime) {
    int r = rank(c, np_, n_prime);
    if (r != 0) throw Error("RankNonZero", std::to_string(r));
    Vocabulary cbb;
    for (auto& b : c.cb.binary()) cbb.add(b, 2);
    if (reduct(np_, c.cb) != reduct(n_prime, c.cb)) throw Error("VerificationFailed", "C_B parts differ");
    Structure m = reduct(np_, c.cb.unite(c.cu));
    Digraph g = gaifman(reduct(m, cbb));
    Digraph g2 = gaifman(reduct(n_prime, cbb));
    if (g.out != g2.out) throw Error("VerificationFailed", "Gaifman graphs differ");
    if (!evaluate(m, c.alpha)) throw Error("VerificationFailed", "alpha fails");
    if (!evaluate(m, c.beta)) throw Error("VerificationFailed", "beta fails");
    if (treewidth(g) > c.k) throw Error("VerificationFailed", "treewidth exceeds k");
    return m;
}

std::vector<std::pair<Structure, Structure>> swap_instances(const SeparationContext& c, const Expansion& e, int limit) {
    std::vector<std::pair<Structure, Structure>> r;
    const Structure& n = e.n;
    int nn = n.size();
    TypeSignature all = full_sig(n);
    std::vector<OneType> tp;
    for (int u = 0; u < nn; ++u) tp.push_back(one_type_of(n, u, all));
    std::set<std::string> seen;
    auto keep = [&](Structure cand) {
        if (static_cast<int>(r.size()) >= limit) return;
        if (!seen.insert(cand.key()).second) return;
        if (rank(c, cand, e.n_prime) == 0) return;
        if (!same_one_types(cand, e.n_prime)) return;
        if (!satisfies_unbounded_side(c, cand)) return;
        r.emplace_back(std::move(cand), e.n_prime);
    };
    // transpositions of elements with equal full 1-types
    for (int x = 0; x < nn; ++x)
        for (int y = x + 1; y < nn; ++y) {
            if (!(tp[x] == tp[y])) continue;
            std::vector<int> p(nn);
            for (int i = 0; i < nn; ++i) p[i] = i;
            std::swap(p[x], p[y]);
            Structure q = permute(n, p);
            if (q != n) keep(std::move(q));
        }
    // single R-edge moved to an equal-typed target (the inverse of a Case 2 swap)
    for (int u = 0; u < nn; ++u)
        for (int j = 0; j < c.k; ++j) {
            int v = image(n, c.r_syms[j], u);
            if (v == u) continue;
            for (int w = 0; w < nn; ++w) {
                if (w == u || w == v || !(one_type_of(n, v, c.sig) == one_type_of(n, w, c.sig))) continue;
                Structure q = n;
                TwoType t = two_type_of(n, u, v, c.sig), old = two_type_of(n, u, w, c.sig);
                apply_two_type(q, u, w, t, c.sig);
                apply_two_type(q, u, v, old, c.sig);
                keep(std::move(q));
            }
        }
    return r;
}

}  // namespace msosep
