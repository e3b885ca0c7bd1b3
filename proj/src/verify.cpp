#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "msosep/cardinality.hpp"
#include "msosep/pipeline.hpp"

namespace msosep {

namespace {

// ---- small enumeration helpers (independent of the search engine)

int bits_of(int n, const Vocabulary& v) {
    int b = 0;
    for (auto& [s, a] : v.symbols()) b += a == 1 ? n : n * n;
    return b;
}

void all_structures(int n, const Vocabulary& v, const std::function<bool(const Structure&)>& fn) {
    int bits = bits_of(n, v);
    if (bits > 30) throw Error("TooLarge", "enumeration of 2^" + std::to_string(bits));
    Structure s(n, v);
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits); ++code) {
        int i = 0;
        for (auto& [name, a] : v.symbols()) {
            if (a == 1) {
                Set x = 0;
                for (int u = 0; u < n; ++u)
                    if ((code >> i++) & 1) x |= bit(u);
                s.set_unary(name, x);
            } else {
                for (int u = 0; u < n; ++u) {
                    Set row = 0;
                    for (int w = 0; w < n; ++w)
                        if ((code >> i++) & 1) row |= bit(w);
                    s.rel_mut(name).rows[u] = row;
                }
            }
        }
        if (!fn(s)) return;
    }
}

Structure random_structure(std::mt19937& rng, int n, const Vocabulary& v, int density) {
    Structure s(n, v);
    for (auto& [c, ar] : v.symbols())
        for (int u = 0; u < n; ++u) {
            if (ar == 1) {
                s.set(c, u, rng() % 2 == 0);
                continue;
            }
            for (int w = 0; w < n; ++w) s.set(c, u, w, static_cast<int>(rng() % 10) < density);
        }
    return s;
}

// every binary tree shape on up to max_n nodes, every labelling by exactly one of
// Label_1..Label_K / Label_blank, root on the root; extra unary and binary symbols random
void labelled_trees(int max_n, int K, const Vocabulary& extra, std::mt19937& rng,
                    const std::function<void(const Structure&)>& fn) {
    const Vocabulary tv = tree_vocabulary(K);
    Vocabulary v = tv.unite(extra);
    for (int n = 1; n <= max_n; ++n)
        for (auto& g : binary_tree_shapes(n)) {
            long long total = 1;
            for (int i = 0; i < n; ++i) total *= K + 1;
            for (long long code = 0; code < total; ++code) {
                Structure t = random_structure(rng, n, v, 2);
                for (auto& [c, ar] : tv.symbols()) t.drop_symbol(c), t.add_symbol(c, ar);
                for (int u = 0; u < n; ++u) t.rel_mut(kSucc).rows[u] = g.out[u];
                t.set(kRoot, 0);
                long long c = code;
                for (int u = 0; u < n; ++u, c /= K + 1) {
                    int l = static_cast<int>(c % (K + 1));
                    t.set(l ? label_symbol(l) : std::string(kBlank), u);
                }
                fn(t);
            }
        }
}

Vocabulary voc(const char* text) { return Vocabulary::parse(text); }

Vocabulary binaries(const Vocabulary& v) {
    Vocabulary r;
    for (auto& b : v.binary()) r.add(b, 2);
    return r;
}

struct Ctx {
    VerifyReport& rep;
    bool full;
    const VerifyOptions& o;

    void check(bool ok, const std::string& what, const Structure* s = nullptr) {
        ++rep.checked;
        if (ok) return;
        ++rep.failed;
        rep.passed = false;
        if (rep.counterexamples.size() < 5)
            rep.counterexamples.push_back(what + (s ? "\n" + s->to_text() : std::string()));
    }
};

// ---- suites

void suite_scott(Ctx& c) {
    Vocabulary v{{"A", 1}, {"E", 2}, {"F", 2}};
    std::vector<const char*> pool{
        "A x. E y. E(x,y)",
        "E x. A(x) & A x. ~A(x)",
        "A x. (A(x) -> E[>=2] y. E(x,y))",
        "A x. E[<=1] y. E(x,y)",
        "A x. E[=1] y. (E(x,y) & ~x = y)",
        "~(A x. E[=1] y. E(y,x))",
        "E x. (A(x) & A y. (E(x,y) <-> ~A(y)))",
        "A x. (A(x) <-> E[>=2] y. E(y,x))",
        "A x. E y. F(x,y) & A x. A y. (F(x,y) -> ~E(x,y))",
        "(E[>=2] x. A(x)) -> A x. E y. (E(x,y) & A(y))",
        "E[>=4] x. x = x",
        "A x. E[>=3] y. (E(x,y) | F(y,x))",
        "A x. A y. (E(x,y) -> F(y,x)) & E x. E y. (E(x,y) & ~F(x,y))",
    };
    if (!c.full) pool.resize(5);
    int sat_count = 0;
    for (auto* p : pool) {
        auto beta = parse_sentence(p, v);
        auto nf = scott_normal_form(beta, v);
        auto s = nf.sentence();
        c.check(is_c2(s), std::string("normal form not C2: ") + p);
        SearchBudget b;
        b.max_size = 3;
        b.time_cap_seconds = c.o.time_cap_seconds;
        auto in = bounded_sat(beta, v, b);
        auto out = bounded_sat(s, nf.vocab, b);
        c.check(in.sat == out.sat, std::string("satisfiability differs within 3: ") + p);
        sat_count += in.sat;
        // brute force on the input side up to 2 elements
        bool brute = false;
        for (int n = 1; n <= 2 && !brute; ++n)
            all_structures(n, v, [&](const Structure& m) {
                brute = evaluate(m, beta);
                return !brute;
            });
        bool small = in.sat && in.model.size() <= 2;
        c.check(brute == small, std::string("search and enumeration differ at n <= 2: ") + p);
        if (in.sat) {
            auto e = scott_expand(in.model, nf);
            c.check(evaluate(e, s) && reduct(e, v) == in.model, std::string("scott_expand: ") + p, &in.model);
        }
    }
    c.rep.summary = std::to_string(pool.size()) + " sentences, " + std::to_string(sat_count) + " satisfiable within 3";
}

void suite_coloring(Ctx& c) {
    std::mt19937 rng(2024);
    int graphs = c.full ? 200 : 40, max_used = 0;
    for (int it = 0; it < graphs; ++it) {
        int n = 1 + rng() % 12, k = 1 + it % 3;
        Digraph g(n);
        for (int u = 0; u < n; ++u)
            for (int j = 0; j < k; ++j) {
                int w = rng() % n;
                if (w != u && popcount(g.out[u]) < k) g.arc(u, w);
            }
        auto col = greedy_coloring(g, k);
        bool ok = static_cast<int>(col.size()) == n;
        std::set<int> used(col.begin(), col.end());
        for (int x : col) ok &= x >= 0 && x <= 2 * k;
        for (auto [u, w] : g.symmetric().edges()) ok &= col[u] != col[w];
        max_used = std::max(max_used, static_cast<int>(used.size()));
        Structure s(n, Vocabulary{{"E", 2}});
        for (int u = 0; u < n; ++u) s.rel_mut("E").rows[u] = g.out[u];
        c.check(ok, "improper coloring, k = " + std::to_string(k), &s);
    }
    c.rep.summary = std::to_string(graphs) + " digraphs, at most " + std::to_string(max_used) + " colors used";
}

void suite_treewidth(Ctx& c) {
    auto expect = [&](const Digraph& g, int want, const std::string& name) {
        int got = treewidth(g);
        bool ok = got == want;
        if (g.n <= 8) ok &= treewidth_bruteforce(g) == want;
        c.check(ok, name + ": expected " + std::to_string(want) + ", got " + std::to_string(got));
    };
    int top = c.full ? 10 : 6;
    for (int n = 1; n <= 6; ++n) {
        Digraph g(n);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) g.edge(a, b);
        expect(g, n - 1, "K_" + std::to_string(n));
    }
    for (int n = 2; n <= top; ++n) {
        Digraph g(n);
        for (int a = 0; a + 1 < n; ++a) g.edge(a, a + 1);
        expect(g, 1, "P_" + std::to_string(n));
    }
    for (int n = 3; n <= top; ++n) {
        Digraph g(n);
        for (int a = 0; a < n; ++a) g.edge(a, (a + 1) % n);
        expect(g, 2, "C_" + std::to_string(n));
    }
    for (int m = 2; m <= top / 2 + 1; ++m) {
        Digraph g(2 * m);
        for (int i = 0; i < m; ++i) {
            g.edge(i, m + i);
            if (i + 1 < m) {
                g.edge(i, i + 1);
                g.edge(m + i, m + i + 1);
            }
        }
        expect(g, 2, "grid 2x" + std::to_string(m));
    }
    c.rep.summary = "cliques, paths, cycles, 2xm grids";
}

void suite_fundamental(Ctx& c) {
    const int K = 2;
    Vocabulary cv{{"E", 2}, {"A", 1}};
    auto xi = xi_vocabulary(cv, K);
    struct Case {
        TranslationScheme t;
        std::vector<const char*> pool;
        bool trees;  // source contains the tree vocabulary
    };
    std::vector<Case> cases{
        {interpret_scheme(K),
         {"E x. (R_1(x,x) & Label_1(x))", "A x. E y. (R_2(x,y) & ~x = y)",
          "A x. (Label_blank(x) | E y. (R_1(x,y) & Label_1(y)))", "E x. E[>=2] y. s(x,y)",
          "ESet X. E x. (X(x) & ~Label_1(x))", "A x. E[<=1] y. R_1(x,y)"},
         true},
        {undecorate_scheme(K),
         {"E x. R_1(x,x)", "A x. E y. R_2(x,y)", "A x. A y. (R_1(x,y) -> ~R_2(x,y))", "E x. E[=1] y. R_1(y,x)",
          "ESub P <= R_1. E x. P(x,x)", "ASub P <= R_2. E x. ~P(x,x)"},
         false},
        {structurize_scheme(cv, K),
         {"E x. E(x,x)", "A x. E y. (E(x,y) | A(y))", "E x. (E[<=1] y. E(y,x) & ~A(x))",
          "ESet X. E x. (X(x) & A(x))", "A x. A y. (E(x,y) -> E(y,x))"},
         false},
        {build_tr_and_dom(cv, Vocabulary{{"F", 2}}, K).tr,
         {"E x. (E(x,x) & F(x,x))", "A x. E y. (E(x,y) & A(y))", "A x. A y. (E(x,y) -> ~F(y,x))",
          "E x. E[>=2] y. E(x,y)", "ESet X. A x. (X(x) <-> ~A(x))"},
         true},
    };
    std::mt19937 rng(5);
    long long structures = 0;
    for (auto& cs : cases) {
        std::vector<Formula> th, sh;
        for (auto* p : cs.pool) {
            th.push_back(parse_sentence(p, cs.t.target));
            c.check(quantifier_rank(th.back()) <= 2, std::string("pool formula above rank 2: ") + p);
            sh.push_back(induced_translation(cs.t, th.back()));
        }
        auto test = [&](const Structure& a) {
            auto img = apply_transduction(cs.t, a);
            auto gen = apply_generic(cs.t, a);
            c.check(img.has_value() == gen.has_value() && (!img || img->s == gen->s),
                    cs.t.name + ": native and formula transductions differ", &a);
            ++structures;
            for (size_t q = 0; q < th.size(); ++q) {
                bool left = evaluate(a, sh[q]);
                bool right = img ? evaluate(img->s, th[q]) : left;  // empty image: no claim
                if (!img) continue;
                c.check(left == right, cs.t.name + ": " + cs.pool[q], &a);
            }
        };
        // exhaustive where the source is small enough
        for (int n = 1; n <= 5; ++n) {
            if (bits_of(n, cs.t.source) > (c.full ? 14 : 10)) break;
            all_structures(n, cs.t.source, [&](const Structure& a) {
                test(a);
                return true;
            });
        }
        if (cs.trees) {
            Vocabulary extra = cs.t.source.minus(tree_vocabulary(K));
            labelled_trees(c.full ? 5 : 3, K, extra, rng, test);
        }
        int samples = c.full ? 400 : 40;
        for (int i = 0; i < samples; ++i) test(random_structure(rng, 1 + i % 5, cs.t.source, 1 + i % 4));
    }
    c.rep.summary = std::to_string(cases.size()) + " schemes, " + std::to_string(structures) + " source structures";
}

void suite_encode(Ctx& c) {
    const int K = 3;
    Vocabulary e{{"E", 2}};
    auto tr = build_tr_and_dom(e, Vocabulary(), K).tr;
    long long done = 0, skipped = 0;
    int top = c.full ? 4 : 3;
    for (int n = 1; n <= top; ++n)
        all_structures(n, e, [&](const Structure& m) {
            if (treewidth(gaifman(m)) > K - 1) {
                ++skipped;
                return true;
            }
            auto enc = encode_structure(m, K);
            auto back = apply_transduction(tr, enc.tree);
            bool ok = is_aligned_encoding(enc.tree, K) && enc.tree.size() <= encoding_size_bound(n) && back &&
                      isomorphic(back->s, m);
            c.check(ok, "round trip", &m);
            ++done;
            return true;
        });
    c.rep.summary = std::to_string(done) + " structures round-tripped, " + std::to_string(skipped) + " with tw > 2 skipped";
}

struct SepPair {
    const char* alpha;
    const char* beta;
    bool with_a;
};

const SepPair kSepPairs[] = {
    {"A x. E y. E(x,y)", "A x. E[<=1] y. E(x,y)", false},
    {"E x. E y. E(x,y)", "A x. ~E(x,x)", false},
    {"A x. A y. (E(x,y) -> E(y,x))", "E x. E[=2] y. E(x,y)", false},
    {"A x. E y. (E(x,y) | E(y,x))", "A x. (A(x) <-> E y. E(x,y))", true},
    {"A x. ~E(x,x)", "E[>=2] x. E y. E(x,y)", false},
    {"E x. A y. ~E(y,x)", "A x. E[<=2] y. E(y,x)", false},
    {"A x. A y. (E(x,y) -> ~E(y,x))", "A x. E y. (E(x,y) | E(y,x))", false},
    {"E x. x = x", "A x. A y. (E(x,y) -> A(x)) & E x. A(x)", true},
    {"A x. A y. (E(x,y) & E(y,x) -> x = y)", "A x. (E(x,x) | E y. E(y,x))", false},
};

SeparationContext sep_ctx(const SepPair& p, int k) {
    Vocabulary cb{{"E", 2}};
    Vocabulary cu = p.with_a ? Vocabulary{{"E", 2}, {"A", 1}} : Vocabulary{{"E", 2}};
    return build_separation(parse_sentence(p.alpha, cb), cb, parse_sentence(p.beta, cu), cu, k);
}

std::vector<Structure> sep_models(const SeparationContext& s, int max_n, int limit) {
    std::vector<Structure> r;
    Vocabulary v = s.cb.unite(s.cu);
    for (int n = 1; n <= max_n; ++n) {
        int per = 0;
        all_structures(n, v, [&](const Structure& m) {
            if (evaluate(m, s.alpha) && evaluate(m, s.beta) && treewidth(gaifman(reduct(m, binaries(s.cb)))) <= s.k) {
                r.push_back(m);
                ++per;
            }
            return per < limit;
        });
    }
    return r;
}

void suite_separation(Ctx& c) {
    int pairs = 0, models = 0;
    size_t use = c.full ? std::size(kSepPairs) : 3;
    for (size_t i = 0; i < use; ++i) {
        auto s = sep_ctx(kSepPairs[i], 2);
        if (c.o.mutant == "sigma-g-polarity") mutate_sigma_g(s);
        auto ms = sep_models(s, 3, c.full ? 6 : 2);
        c.check(!ms.empty(), std::string("no model within 3 for ") + kSepPairs[i].alpha);
        if (!ms.empty()) ++pairs;
        for (auto& m : ms) {
            bool ok = false;
            std::string why;
            try {
                auto e = expand_to_separated(m, s);
                auto [ap, bp] = separated_sentences(s, e.full);
                ok = satisfies_separated(s, e.full) && is_c2(bp);
                if (!ok) why = "alpha+ & beta+ fail";
            } catch (const Error& err) {
                if (err.is_cap()) throw;
                why = err.what();
            }
            c.check(ok, std::string(kSepPairs[i].alpha) + " / " + kSepPairs[i].beta + ": " + why, &m);
            ++models;
        }
    }
    c.rep.summary = std::to_string(pairs) + " pairs sharing E, k = 2, " + std::to_string(models) + " models expanded";
}

void suite_edge_swap(Ctx& c) {
    int runs = 0, swaps = 0, cases[3] = {0, 0, 0};
    size_t use = c.full ? std::size(kSepPairs) : 3;
    for (size_t i = 0; i < use; ++i) {
        auto s = sep_ctx(kSepPairs[i], 2);
        auto ms = sep_models(s, 3, 2);
        for (auto& m : sep_models(s, 2, 4)) {
            Structure d = disjoint_union(m, m);
            if (evaluate(d, s.alpha) && evaluate(d, s.beta)) ms.push_back(d);
        }
        for (auto& m : ms) {
            auto e = expand_to_separated(m, s);
            for (auto& [n, np] : swap_instances(s, e, c.full ? 6 : 2)) {
                int r0 = rank(s, n, np);
                Normalization norm;
                std::string why;
                bool ok = r0 > 0;
                try {
                    norm = edge_swap_normalize(s, n, np);  // strict: each step checks rank, 2-types, 1-types
                    for (auto& st : norm.steps) ok &= st.rank_after < st.rank_before;
                    const Structure& last = norm.sequence.back();
                    ok &= rank(s, last, np) == 0 && type_agreement(s, last, np);
                    auto model = extract_model(s, last, np);
                    ok &= evaluate(model, s.alpha) && evaluate(model, s.beta);
                    for (auto& st : norm.steps) {
                        ++cases[st.which_case];
                        if (c.o.trace) *c.o.trace << st.trace() << "\n";
                    }
                    swaps += static_cast<int>(norm.steps.size());
                } catch (const Error& err) {
                    if (err.is_cap()) throw;
                    ok = false;
                    why = err.what();
                }
                c.check(ok, std::string(kSepPairs[i].alpha) + ": normalization " + why, &n);
                ++runs;
            }
        }
    }
    c.check(runs >= (c.full ? 8 : 1), "too few instances");
    if (c.full) c.check(cases[1] > 0 && cases[2] > 0, "both swap cases must occur");
    c.rep.summary = std::to_string(runs) + " normalizations, " + std::to_string(swaps) + " swaps (case 1: " +
                    std::to_string(cases[1]) + ", case 2: " + std::to_string(cases[2]) + ")";
}

HintikkaConfig hcfg(const Vocabulary& v, int q) {
    HintikkaConfig h;
    h.vocab = v;
    h.q = q;
    return h;
}

Vocabulary tree_voc(int labels) {
    Vocabulary v{{kSucc, 2}, {kRoot, 1}};
    for (int i = 1; i <= labels; ++i) v.add(label_symbol(i), 1);
    return v;
}

void suite_hintikka(Ctx& c) {
    long long tables = 0, entries = 0;
    int wcap = c.full ? 4 : 3;
    auto table = [&](SmoothOp op, const HintikkaConfig& h, int cap) {
        try {
            auto t = smoothness_table(op, h, cap);
            entries += t.entries.size();
            ++tables;
            c.check(!t.entries.empty(), "empty table");
        } catch (const Error& e) {
            if (e.kind() != "WellDefinednessViolation") throw;
            c.check(false, std::string("smoothness: ") + e.what());
        }
    };
    for (int q = 0; q <= 1; ++q) {
        table(SmoothOp::Union, hcfg(Vocabulary{{"A", 1}}, q), wcap);
        table(SmoothOp::Union, hcfg(Vocabulary{{"E", 2}}, q), wcap);
        table(SmoothOp::Union, hcfg(Vocabulary{{"A", 1}, {"E", 2}}, q), c.full ? 3 : 2);
        table(SmoothOp::RootEdge, hcfg(tree_voc(1), q), wcap);
        table(SmoothOp::RootEdge, hcfg(tree_voc(2), q), wcap);
    }

    Vocabulary v = tree_voc(2);
    auto h = hcfg(v, 1);
    std::vector<Formula> pool;
    for (auto* p : {"true", "E x. Label_1(x)", "A x. (Label_1(x) | Label_2(x))", "E[>=2] x. Label_1(x)",
                    "E[=1] x. ~Label_2(x)", "E x. (root(x) & Label_2(x))", "E[<=2] x. (Label_1(x) & ~Label_2(x))",
                    "E x. E y. (s(x,y) & Label_1(y))", "ESet X. A x. (X(x) <-> Label_1(x))",
                    "E x. E[=2] y. s(x,y)", "ESub P <= s. E x. E y. (P(x,y) & Label_2(y))"})
        pool.push_back(parse_sentence(p, v));
    long long trees = 0;
    for_each_rooted_tree(v, c.full ? 5 : 3, [&](const Structure& t) {
        auto a = annotate_tree(t, h, false);
        c.check(a.root() == hintikka_value(t, h), "annotate_tree root differs from the direct value", &t);
        for (auto& f : pool) c.check(check_omega(t, f) == evaluate(t, f), "check_omega: " + print_formula(f), &t);
        ++trees;
    });
    c.rep.summary = std::to_string(tables) + " tables (" + std::to_string(entries) + " entries), " +
                    std::to_string(trees) + " labelled trees";
}

Structure sets_structure(int n, const std::vector<std::string>& vars, std::uint64_t code) {
    Vocabulary v;
    for (auto& x : vars) v.add(x, 1);
    Structure s(n, v);
    int i = 0;
    for (auto& [x, a] : v.symbols()) {
        (void)a;
        for (int u = 0; u < n; ++u) s.set(x, u, static_cast<bool>((code >> i++) & 1));
    }
    return s;
}

void suite_cardinality(Ctx& c) {
    Vocabulary e{{"E", 2}};
    const char* shapes[] = {
        "EX1. EX2. |X1| < |X2|",
        "EX1. |X1| < |X1|",
        "EX1. EX2. EX3. |X1| + |X2| < |X3|",
        "EX1. EX2. EX3. |X1| < |X2| + |X3|",
        "EX1. EX2. |X1| + |X1| < |X2|",
        "EX1. EX2. |X1| + |X2| < |X2| + |X1|",
        "EX1. EX2. EX3. |X1| + |X2| < |X3| + |X3|",
    };
    int top = c.full ? 4 : 3;
    long long inst = 0;
    for (auto* text : shapes) {
        auto rw = rewrite_card(parse_card(text, e), 1);
        c.check(is_c2(rw.beta), std::string("beta not C2: ") + text);
        const auto& at = rw.atoms.at(0);
        std::set<std::string> vs(at.lhs.begin(), at.lhs.end());
        vs.insert(at.rhs.begin(), at.rhs.end());
        std::vector<std::string> vars(vs.begin(), vs.end());
        for (int n = 1; n <= top; ++n)
            for (std::uint64_t code = 0; code < (std::uint64_t{1} << (n * vars.size())); ++code) {
                auto s = sets_structure(n, vars, code);
                c.check(card_atom_direct(at.atom, s) == atom_expansion(at, s).has_value(), text, &s);
                ++inst;
            }
    }
    struct Whole {
        const char* text;
        const char* vocab;
        int max_n;
    };
    const Whole whole[] = {
        {"EX1. EX2. ~(|X1| < |X2|) & A x. (X1(x) -> P(x))", "P/1", 4},
        {"EX1. EX2. (|X1| < |X2| -> E x. (X2(x) & P(x))) & (|X2| < |X1| | A x. P(x))", "P/1", 4},
        {"EX1. EX2. |X1| < |X2| & |X2| < |X1|", "P/1", 4},
        {"EX1. EX2. A x. (E y. E(x,y) -> X1(x)) & |X2| < |X1|", "E/2", 2},
    };
    for (auto& w : whole) {
        Vocabulary v = voc(w.vocab);
        auto rho = parse_card(w.text, v);
        auto rw = rewrite_card(rho, 1);
        for (int n = 1; n <= std::min(w.max_n, top); ++n)
            all_structures(n, v, [&](const Structure& base) {
                for (std::uint64_t code = 0; code < (std::uint64_t{1} << (n * rho.prefix.size())); ++code) {
                    auto sets = sets_structure(n, rho.prefix, code);
                    Assignment asg;
                    for (auto& p : rho.prefix) asg.sets[p] = sets.unary_set(p);
                    auto full = expand(base, sets);
                    c.check(evaluate(base, rho.matrix, asg) == card_expansion(rw, full).has_value(), w.text, &full);
                    ++inst;
                }
                return true;
            });
    }
    c.rep.summary = std::to_string(inst) + " instantiations over n <= " + std::to_string(top);
}

struct TripleCase {
    const char* alpha;
    const char* cb;
    const char* beta;
    const char* cu;
    int k, n0;
};

const TripleCase kTriples[] = {
    {"true", "", "true", "", 1, 2},
    {"E x. A(x)", "A/1", "A x. ~A(x)", "A/1", 1, 3},
    {"A x. (A(x) -> E y. (E(x,y) & ~x = y))", "E/2\nA/1", "E x. A(x) & A x. A y. (F(x,y) -> A(y))", "A/1\nF/2", 1, 3},
    {"E[>=3] x. x = x & A x. A y. (~x = y -> E(x,y))", "E/2", "true", "", 1, 3},
    {"ESet X. (E x. X(x) & E x. ~X(x) & A x. A y. (E(x,y) -> (X(x) <-> ~X(y))))", "E/2",
     "A x. E[<=1] y. F(x,y) & E x. E y. F(x,y)", "F/2", 1, 3},
    {"A x. E y. (E(x,y) & ~x = y)", "E/2", "E[>=3] x. x = x", "", 2, 3},
    {"E x. E y. E z. (E(x,y) & E(y,z) & E(z,x) & ~x = y & ~y = z & ~x = z)", "E/2", "A x. E[=1] y. F(x,y)", "F/2", 2, 3},
    {"A x. (A(x) <-> ~E y. E(x,y))", "E/2\nA/1", "E[=2] x. A(x) & A x. (A(x) -> E y. (F(x,y) & ~A(y)))", "A/1\nF/2", 1, 3},
};

void suite_end_to_end(Ctx& c) {
    size_t use = c.full ? std::size(kTriples) : 4;
    int agree = 0, sat = 0;
    for (size_t i = 0; i < use; ++i) {
        auto& t = kTriples[i];
        auto cb = voc(t.cb), cu = voc(t.cu);
        ReduceOptions ro;
        ro.k = t.k;
        auto art = reduce(parse_sentence(t.alpha, cb), cb, parse_sentence(t.beta, cu), cu, ro);
        auto r = end_to_end(art, t.n0, c.o.time_cap_seconds);
        c.check(is_c2(art.beta_prime), std::string("beta' not C2: ") + t.beta);
        c.check(r.agree, std::string(t.alpha) + " / " + t.beta + ": " + r.note,
                r.direct.sat ? &r.direct.model : (r.tree.sat ? &r.tree.model : nullptr));
        agree += r.agree;
        sat += r.direct.sat;
    }
    // the Theta path against the MSO path on trees within the value universe
    {
        Vocabulary cb = voc("A/1");
        auto alpha = parse_sentence("ESet X. E x. (X(x) & A(x))", cb);
        ReduceOptions mso, c2;
        mso.k = c2.k = 0;
        c2.emit_c2 = true;
        c2.theta_tree_cap = 2;
        auto a1 = reduce(alpha, cb, f::top(), Vocabulary(), mso);
        auto a2 = reduce(alpha, cb, f::top(), Vocabulary(), c2);
        c.check(a2.delta_is_c2 && a2.theta.has_value(), "emit-c2 did not produce Theta");
        SearchBudget b;
        b.max_size = 2;
        b.shape.kind = ShapeConstraint::Tree;
        auto r1 = bounded_sat(a1.delta, a1.delta_vocab, b);
        auto r2 = bounded_sat(a2.delta, a2.delta_vocab, b);
        c.check(r1.sat == r2.sat, "MSO path and Theta path differ");
        if (r2.sat) c.check(evaluate(reduct(r2.model, a1.delta_vocab), a1.delta), "Theta model fails the MSO delta", &r2.model);
    }
    c.rep.summary = std::to_string(use) + " triples, " + std::to_string(agree) + " agree, " + std::to_string(sat) +
                    " satisfiable directly";
}

const std::vector<std::pair<std::string, void (*)(Ctx&)>>& registry() {
    static const std::vector<std::pair<std::string, void (*)(Ctx&)>> r{
        {"scott-nf", suite_scott},
        {"coloring", suite_coloring},
        {"treewidth", suite_treewidth},
        {"fundamental-property", suite_fundamental},
        {"encode-roundtrip", suite_encode},
        {"separation-roundtrip", suite_separation},
        {"edge-swap", suite_edge_swap},
        {"hintikka", suite_hintikka},
        {"cardinality", suite_cardinality},
        {"end-to-end", suite_end_to_end},
    };
    return r;
}

}  // namespace

std::vector<std::string> verify_stages() {
    std::vector<std::string> r;
    for (auto& [n, fn] : registry()) r.push_back(n);
    return r;
}

VerifyReport verify_stage(const std::string& stage, const std::string& suite, const VerifyOptions& o) {
    if (suite != "quick" && suite != "full") throw Error("UnknownSuite", suite);
    if (!o.mutant.empty() && (o.mutant != "sigma-g-polarity" || stage != "separation-roundtrip"))
        throw Error("UnknownSuite", "mutant " + o.mutant + " for " + stage);
    for (auto& [name, fn] : registry())
        if (name == stage) {
            VerifyReport rep;
            rep.stage = stage;
            rep.suite = suite;
            Ctx c{rep, suite == "full", o};
            fn(c);
            return rep;
        }
    throw Error("UnknownSuite", stage);
}

std::string VerifyReport::to_text() const {
    std::ostringstream out;
    out << "stage: " << stage << "\nsuite: " << suite << "\nresult: " << (passed ? "pass" : "fail") << "\nchecked: "
        << checked << "\nfailed: " << failed << "\nsummary: " << summary << "\n";
    for (auto& ce : counterexamples) out << "counterexample:\n" << ce << "\n";
    return out.str();
}

}  // namespace msosep
