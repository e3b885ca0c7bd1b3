#include <doctest.h>

#include <sstream>

#include "msosep/separation.hpp"
#include "oracles.hpp"

using namespace msosep;

namespace {

struct PairCase {
    const char* alpha;
    const char* beta;
    bool with_a;  // beta also uses unary A
};

// every pair shares E
const PairCase kPairs[] = {
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

Vocabulary cb() { return Vocabulary{{"E", 2}}; }
Vocabulary cu(bool a) { return a ? Vocabulary{{"E", 2}, {"A", 1}} : Vocabulary{{"E", 2}}; }

SeparationContext ctx(const PairCase& p, int k = 2) {
    return build_separation(parse_sentence(p.alpha, cb()), cb(), parse_sentence(p.beta, cu(p.with_a)), cu(p.with_a), k);
}

// models of alpha & beta with tw(E) <= k, up to `limit` of them, n <= max_n
std::vector<Structure> models(const SeparationContext& c, int max_n, int limit) {
    std::vector<Structure> r;
    Vocabulary v = c.cb.unite(c.cu);
    for (int n = 1; n <= max_n; ++n) {
        int per = 0;
        oracle::for_each_structure(n, v, [&](const Structure& s) {
            if (evaluate(s, c.alpha) && evaluate(s, c.beta) && treewidth(gaifman(reduct(s, cb()))) <= c.k) {
                r.push_back(s);
                ++per;
            }
            return per < limit;
        });
    }
    return r;
}

// M + M for small models M that stay models; gives repeated 1-types to swap between
std::vector<Structure> doubled_models(const SeparationContext& c, int max_n, int limit) {
    std::vector<Structure> r;
    for (auto& m : models(c, max_n, 4)) {
        Structure d = disjoint_union(m, m);
        if (static_cast<int>(r.size()) < limit && evaluate(d, c.alpha) && evaluate(d, c.beta)) r.push_back(d);
    }
    return r;
}

}  // namespace

TEST_CASE("component sentences are C2 and sigma_f means R functional") {
    auto c = ctx(kPairs[0], 1);
    CHECK(c.r_syms == std::vector<std::string>{"R_1"});
    CHECK(c.colors == color_count(static_cast<int>(c.sigma.size())));
    for (auto& g : {c.sigma_f, c.sigma_g, c.sigma_c, c.beta_nf}) CHECK(is_c2(g));
    Vocabulary v{{"R_1", 2}};
    for (int n = 1; n <= 3; ++n)
        oracle::for_each_structure(n, v, [&](const Structure& s) {
            bool fn = true;
            for (int u = 0; u < n; ++u) fn = fn && popcount(s.row("R_1", u)) == 1;
            CHECK(evaluate(s, c.sigma_f) == fn);
            return true;
        });
    auto e = expand_to_separated(models(c, 2, 1).front(), c);
    for (auto& p : e.n.vocab().unary())
        if (is_p_symbol(p)) {
            auto t = decode_type_code(p.substr(2), c.sig);
            CHECK(is_c2(delta_conjunct(c, t)));
            CHECK(is_c2(color_conjunct(c, t, c.sigma[0], c.sigma[0])));
        }
}

TEST_CASE("sigma_g and sigma_c match their definitions") {
    auto c = ctx(kPairs[0], 1);
    Vocabulary v{{"E", 2}, {"R_1", 2}};
    for (int n = 1; n <= 3; ++n)
        oracle::for_each_structure(n, v, [&](const Structure& s) {
            bool g = true;
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    if (x != y) {
                        bool r = s.holds("R_1", x, y) || s.holds("R_1", y, x);
                        bool e = s.holds("E", x, y) || s.holds("E", y, x);
                        g = g && r == e;
                    }
            Structure t = s;
            for (auto& m : c.messages) t.add_symbol(m, 2);
            for (auto& u : c.nf.vocab.unary()) t.add_symbol(u, 1);
            CHECK(evaluate(t, c.sigma_g) == g);
            bool contain = true;
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    if (x != y && s.holds("E", x, y)) contain = contain && (s.holds("R_1", x, y) || s.holds("R_1", y, x));
            CHECK(evaluate(t, c.sigma_c) == contain);
            return true;
        });
}

TEST_CASE("expansion satisfies alpha+ and beta+ for every pair sharing E") {
    int checked = 0;
    for (auto& p : kPairs) {
        auto c = ctx(p);
        auto ms = models(c, 3, 3);
        REQUIRE_MESSAGE(!ms.empty(), p.alpha, " / ", p.beta);
        for (auto& m : ms) {
            auto e = expand_to_separated(m, c);
            auto [ap, bp] = separated_sentences(c, e.full);
            CHECK(is_c2(bp));
            CHECK(satisfies_separated(c, e.full));
            CHECK(is_functional(e.n, c.sigma));
            CHECK(is_chromatic(e.n, c.sigma, c.sig));
            CHECK(rank(c, e.n, e.n_prime) == 0);
            CHECK(type_agreement(c, e.n, e.n_prime));
            // halves round-trip through the joined structure
            CHECK(unbounded_half(c, e.full) == e.n);
            CHECK(bounded_half(c, e.full) == e.n_prime);
            // bounded half only keeps R-adjacent binary atoms
            auto g = gaifman(e.n_prime);
            auto gb = gaifman(reduct(e.n_prime, cb()));
            CHECK(g.out == gb.out);
            CHECK(extract_model(c, e.n, e.n_prime) == reduct(m, c.cb.unite(c.cu)));
            ++checked;
        }
    }
    CHECK(checked >= 8);
}

TEST_CASE("expansion rejects non-models and wide inputs") {
    auto c = ctx(kPairs[0], 1);
    Structure s(3, cb());
    CHECK_THROWS_WITH_AS(expand_to_separated(s, c), doctest::Contains("PreconditionFailed"), Error);
    // triangle with loops: tw 2 > 1
    Structure t(3, cb());
    for (int u = 0; u < 3; ++u)
        for (int v = 0; v < 3; ++v)
            if (u != v) t.set("E", u, v);
    auto c2 = build_separation(parse_sentence("A x. E y. E(x,y)", cb()), cb(), parse_sentence("E x. x = x", cb()), cb(), 1);
    CHECK_THROWS_WITH_AS(expand_to_separated(t, c2), doctest::Contains("TreewidthExceeded"), Error);
}

TEST_CASE("rank-1 case 2 instance: two disjoint edges, k = 1") {
    Vocabulary v = cb();
    auto c = build_separation(parse_sentence("A x. E y. (E(x,y) | E(y,x))", v), v,
                              parse_sentence("A x. E[<=1] y. E(x,y)", v), v, 1);
    Structure m = Structure::parse("universe 4\nE = {(0,1), (2,3)}", &v);
    auto e = expand_to_separated(m, c);
    auto inst = swap_instances(c, e, 64);
    REQUIRE(!inst.empty());
    bool saw_rank1_case2 = false;
    for (auto& [n, np] : inst) {
        int r0 = rank(c, n, np);
        std::ostringstream tr;
        SeparationContext ct = c;
        ct.opts.trace = &tr;
        auto norm = edge_swap_normalize(ct, n, np);
        CHECK(norm.sequence.size() == norm.steps.size() + 1);
        CHECK(rank(c, norm.sequence.back(), np) == 0);
        int prev = r0;
        for (size_t i = 0; i < norm.steps.size(); ++i) {
            CHECK(norm.steps[i].rank_before == prev);
            CHECK(norm.steps[i].rank_after < prev);
            prev = norm.steps[i].rank_after;
            CHECK(realized_two_types(norm.sequence[i + 1], c.sig) == realized_two_types(norm.sequence[i], c.sig));
        }
        if (r0 == 1 && norm.steps.size() == 1 && norm.steps[0].which_case == 2) saw_rank1_case2 = true;
        auto model = extract_model(c, norm.sequence.back(), np);
        CHECK(evaluate(model, c.alpha));
        CHECK(evaluate(model, c.beta));
        std::string lines = tr.str();
        CHECK(std::count(lines.begin(), lines.end(), '\n') == static_cast<long>(norm.steps.size()));
    }
    CHECK(saw_rank1_case2);
}

TEST_CASE("edge swap normalization over every pair") {
    int runs = 0, swaps = 0;
    int cases[3] = {0, 0, 0};
    for (auto& p : kPairs) {
        auto c = ctx(p);
        auto ms = models(c, 3, 2);
        for (auto& d : doubled_models(c, 2, 2)) ms.push_back(d);
        for (auto& m : ms) {
            auto e = expand_to_separated(m, c);
            for (auto& [n, np] : swap_instances(c, e, 6)) {
                int r0 = rank(c, n, np);
                REQUIRE(r0 > 0);
                CHECK_THROWS_WITH_AS(extract_model(c, n, np), doctest::Contains("RankNonZero"), Error);
                auto norm = edge_swap_normalize(c, n, np);
                CHECK(rank(c, norm.sequence.back(), np) == 0);
                CHECK(type_agreement(c, norm.sequence.back(), np));
                auto model = extract_model(c, norm.sequence.back(), np);
                CHECK(evaluate(model, c.alpha));
                CHECK(evaluate(model, c.beta));
                ++runs;
                swaps += static_cast<int>(norm.steps.size());
                for (auto& st : norm.steps) ++cases[st.which_case];
            }
        }
    }
    MESSAGE("normalizations: ", runs, ", swaps: ", swaps, " (case 1: ", cases[1], ", case 2: ", cases[2], ")");
    CHECK(cases[1] > 0);
    CHECK(cases[2] > 0);
    CHECK(runs >= 8);
}

TEST_CASE("materialized sentences agree with the full syntactic ones") {
    // no messages, k = 1: main = {E, R_1, A_1..A_3}, 2^14 two-types
    Vocabulary v = cb();
    auto c = build_separation(parse_sentence("E x. x = x", v), v, parse_sentence("A x. ~E(x,x)", v), v, 1);
    REQUIRE(c.messages.empty());
    Formula db = delta_sentence(c, Side::Bounded), du = delta_sentence(c, Side::Unbounded), col = color_sentence(c);
    std::set<std::string> ps;
    for (auto& g : {db, du, col})
        for (auto& s : symbols_of(g))
            if (is_p_symbol(s)) ps.insert(s);
    auto full_ok = [&](const Structure& fs) {
        Structure g = fs;
        for (auto& p : ps)
            if (!g.interprets(p)) g.add_symbol(p, 1);
        Vocabulary pv = c.main;
        for (auto& p : ps) pv.add(p, 1);
        Formula bp = f::conj({c.beta_nf, c.sigma_f, c.sigma_g, du, col});
        Formula ap = copy_formula(f::conj({c.alpha, c.sigma_f, c.sigma_g, c.sigma_c, db, col}), pv);
        return evaluate(g, ap) && evaluate(g, bp);
    };
    int agree = 0, trues = 0, falses = 0;
    for (const char* txt : {"universe 2\nE = {(0,1)}", "universe 3\nE = {(0,1), (1,2)}", "universe 3\nE = {}"}) {
        Structure m = Structure::parse(txt, &v);
        auto e = expand_to_separated(m, c);
        std::vector<Structure> cands{e.full};
        // perturb: drop a P, flip a color, mark a P elsewhere
        for (auto& p : e.n.vocab().unary()) {
            if (!is_p_symbol(p)) continue;
            Structure a = e.full;
            a.set_unary(p, 0);
            cands.push_back(a);
            Structure b = e.full;
            b.set_unary(p, full_set(b.size()));
            cands.push_back(b);
        }
        Structure cflip = e.full;
        for (int u = 0; u < cflip.size(); ++u)
            for (int i = 1; i <= c.colors; ++i) cflip.set(color_symbol(i), u, i == 1);
        cands.push_back(cflip);
        for (auto& fs : cands) {
            bool mat = satisfies_separated(c, fs), full = full_ok(fs);
            CHECK(mat == full);
            agree += mat == full;
            (mat ? trues : falses)++;
        }
    }
    CHECK(trues > 0);
    CHECK(falses > 0);
    CHECK(agree == trues + falses);
}

TEST_CASE("full sentences refuse large signatures") {
    auto c = ctx(kPairs[0]);
    CHECK_THROWS_WITH_AS(delta_sentence(c, Side::Unbounded), doctest::Contains("TypeExplosion"), Error);
}

TEST_CASE("rank errors") {
    auto c = ctx(kPairs[0], 1);
    auto e = expand_to_separated(models(c, 2, 1).front(), c);
    Structure bad = e.n;
    bad.set("R_1", 0, 0, !bad.holds("R_1", 0, 0));
    CHECK_THROWS_WITH_AS(rank(c, bad, e.n_prime), doctest::Contains("NotFunctional"), Error);
    Structure small(e.n.size() + 1, e.n.vocab());
    CHECK_THROWS_WITH_AS(rank(c, small, e.n_prime), doctest::Contains("UniverseMismatch"), Error);
}
