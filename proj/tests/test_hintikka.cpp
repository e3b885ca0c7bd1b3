#include <doctest.h>

#include <random>

#include "msosep/hintikka.hpp"
#include "msosep/sat.hpp"
#include "oracles.hpp"

using namespace msosep;

namespace {

HintikkaConfig cfg_of(const Vocabulary& v, int q, int cap = 1) {
    HintikkaConfig c;
    c.vocab = v;
    c.q = q;
    c.count_cap = cap;
    return c;
}

Vocabulary tree_voc(int labels) {
    Vocabulary v{{"s", 2}, {"root", 1}};
    for (int i = 1; i <= labels; ++i) v.add("Label_" + std::to_string(i), 1);
    return v;
}

// groups structures by value and checks every pooled sentence is constant on each group
void check_sound(const HintikkaConfig& c, const std::vector<Structure>& ss, const std::vector<const char*>& pool) {
    std::map<int, std::vector<bool>> truth;
    int groups_hit = 0;
    for (auto& s : ss) {
        auto v = hintikka_value(s, c);
        std::vector<bool> t;
        for (auto* p : pool) {
            auto f = parse_sentence(p, c.vocab);
            REQUIRE(quantifier_rank(f) <= c.q);
            t.push_back(evaluate(s, f));
        }
        auto [it, fresh] = truth.emplace(v.id, t);
        if (!fresh) {
            ++groups_hit;
            CHECK(it->second == t);
        }
    }
    CHECK(groups_hit > 0);
}

std::vector<Structure> all_structures(const Vocabulary& v, int max_n) {
    std::vector<Structure> r;
    for (int n = 1; n <= max_n; ++n)
        oracle::for_each_structure(n, v, [&](const Structure& s) {
            r.push_back(s);
            return true;
        });
    return r;
}

}  // namespace

TEST_CASE("q = 0 gives a single value") {
    Vocabulary v{{"E", 2}};
    auto c = cfg_of(v, 0);
    std::set<int> ids;
    for (auto& s : all_structures(v, 3)) ids.insert(hintikka_value(s, c).id);
    CHECK(ids.size() == 1);
}

TEST_CASE("q = 1 over {A}: E x. A(x) separates values") {
    Vocabulary v{{"A", 1}};
    auto c = cfg_of(v, 1);
    auto f = parse_sentence("E x. A(x)", v);
    Structure yes(2, v), no(2, v);
    yes.set("A", 1);
    CHECK(evaluate(yes, f) != evaluate(no, f));
    CHECK(hintikka_value(yes, c) != hintikka_value(no, c));
    // the value is the set of realized 1-types
    std::map<int, std::set<bool>> seen;
    for (auto& s : all_structures(v, 4)) {
        std::set<bool> types;
        for (int u = 0; u < s.size(); ++u) types.insert(s.holds("A", u));
        auto [it, fresh] = seen.emplace(hintikka_value(s, c).id, types);
        CHECK(it->second == types);
    }
    CHECK(seen.size() == 3);
}

TEST_CASE("isomorphic structures have equal values") {
    Vocabulary v{{"E", 2}, {"A", 1}};
    std::mt19937 rng(7);
    for (int q = 1; q <= 2; ++q) {
        auto c = cfg_of(v, q, 2);
        for (int i = 0; i < 40; ++i) {
            int n = 1 + static_cast<int>(rng() % 4);
            Structure s(n, v);
            for (int u = 0; u < n; ++u) {
                s.set("A", u, rng() % 2 == 0);
                for (int w = 0; w < n; ++w) s.set("E", u, w, rng() % 3 == 0);
            }
            std::vector<int> p(n);
            for (int u = 0; u < n; ++u) p[u] = u;
            std::shuffle(p.begin(), p.end(), rng);
            CHECK(hintikka_value(s, c) == hintikka_value(permute(s, p), c));
        }
    }
}

TEST_CASE("equal values agree on sentence pools") {
    Vocabulary v{{"E", 2}};
    std::vector<const char*> q1{"E x. E(x,x)", "A x. E(x,x)", "E x. ~E(x,x)", "ESet X. true"};
    check_sound(cfg_of(v, 1), all_structures(v, 3), q1);
    std::vector<const char*> q2{"E x. E y. E(x,y) & ~(x = y)",
                                "A x. E y. E(x,y)",
                                "E x. A y. (E(x,y) -> x = y)",
                                "ESet X. E x. (X(x) & ~E(x,x))",
                                "ESet X. A x. (X(x) <-> E(x,x))",
                                "E x. ESet X. (X(x) & E(x,x))",
                                "A x. A y. (E(x,y) -> E(y,x))",
                                "E x. E y. (E(x,y) & E(y,x) & ~(x = y))"};
    check_sound(cfg_of(v, 2), all_structures(v, 3), q2);
    // counting needs the multiplicity cap
    std::vector<const char*> qc{"E[>=2] x. E(x,x)", "E[=1] x. E(x,x)", "E[<=2] x. ~E(x,x)", "E x. E[>=2] y. E(x,y)",
                                "A x. E[<=1] y. E(y,x)"};
    check_sound(cfg_of(v, 2, 3), all_structures(v, 3), qc);
    // relation-subset moves
    auto c = cfg_of(v, 2);
    c.sub_guards = {"E"};
    check_sound(c, all_structures(v, 2), {"ESub P <= E. E x. P(x,x)", "ASub P <= E. A x. ~P(x,x)", "E x. E(x,x)"});
}

TEST_CASE("caps") {
    Vocabulary v{{"A", 1}};
    auto c = cfg_of(v, 1);
    c.max_universe = 3;
    CHECK_THROWS_WITH_AS(hintikka_value(Structure(4, v), c), doctest::Contains("CapExceeded"), Error);
    auto d = cfg_of(v, 5);
    CHECK_THROWS_WITH_AS(hintikka_value(Structure(1, v), d), doctest::Contains("CapExceeded"), Error);
}

TEST_CASE("disjoint union tables") {
    Vocabulary v{{"A", 1}};
    auto t0 = smoothness_table(SmoothOp::Union, cfg_of(v, 0), 3);
    CHECK(t0.entries.size() == 1);
    auto t1 = smoothness_table(SmoothOp::Union, cfg_of(v, 1), 3);
    CHECK(t1.inputs.size() == 3);
    CHECK(t1.entries.size() == 9);
    // result is the union of realized 1-types
    auto e = engine_for(cfg_of(v, 1));
    for (auto& [ab, r] : t1.entries) {
        auto types = [&](int id) {
            std::set<bool> s;
            for (auto& in : t1.inputs)
                if (in.id == id) {
                    auto w = e->witness(in);
                    for (int u = 0; u < w.size(); ++u) s.insert(w.holds("A", u));
                }
            return s;
        };
        auto want = types(ab.first);
        for (bool b : types(ab.second)) want.insert(b);
        auto w = e->witness(r);
        std::set<bool> got;
        for (int u = 0; u < w.size(); ++u) got.insert(w.holds("A", u));
        CHECK(got == want);
    }
    // binary symbol, q = 1 and 2
    Vocabulary ve{{"E", 2}};
    CHECK_NOTHROW(smoothness_table(SmoothOp::Union, cfg_of(ve, 1), 3));
    CHECK_NOTHROW(smoothness_table(SmoothOp::Union, cfg_of(ve, 2), 2, 2));
}

TEST_CASE("root edge tables on trees") {
    auto t = smoothness_table(SmoothOp::RootEdge, cfg_of(tree_voc(1), 1), 3);
    CHECK(t.combinations >= static_cast<long long>(t.entries.size()));
    CHECK(!t.entries.empty());
    auto t0 = smoothness_table(SmoothOp::RootEdge, cfg_of(tree_voc(1), 0), 3);
    CHECK(t0.entries.size() == 1);
    Structure a = one_point(tree_voc(1), {true}), b = one_point(tree_voc(1), {false});
    Structure ab = root_edge(a, b);
    CHECK(ab.holds("s", 0, 1));
    CHECK(ab.unary_set("root") == 1);
    CHECK(is_binary_tree(ab));
}

TEST_CASE("annotation equals direct values, both attachment orders agree") {
    auto c = cfg_of(tree_voc(2), 1);
    long long trees = 0, two = 0;
    for_each_rooted_tree(c.vocab, 5, [&](const Structure& t) {
        auto a = annotate_tree(t, c, true);
        CHECK(a.root() == hintikka_value(t, c));
        for (int u = 0; u < t.size(); ++u)
            if (popcount(t.row("s", u)) == 2) {
                CHECK(two_children_swapped(t, a, u, c) == a.node[u]);
                ++two;
            }
        ++trees;
    });
    CHECK(two > 0);
    MESSAGE("trees: ", trees, ", two-child nodes: ", two);
    Structure leaf = one_point(c.vocab, {true, false});
    CHECK(annotate_tree(leaf, c).root() == hintikka_value(leaf, c));
}

TEST_CASE("annotate_tree rejects non-trees") {
    auto c = cfg_of(tree_voc(1), 1);
    Structure t(2, tree_voc(1));
    t.set("s", 0, 1);
    t.set("s", 1, 0);
    CHECK_THROWS_WITH_AS(annotate_tree(t, c), doctest::Contains("NotABinaryTree"), Error);
    Structure u(2, tree_voc(1));
    u.set("s", 0, 1);
    CHECK_THROWS_WITH_AS(annotate_tree(u, c), doctest::Contains("NotABinaryTree"), Error);  // root unset
}

TEST_CASE("check_omega agrees with evaluation") {
    Vocabulary v = tree_voc(2);
    std::vector<const char*> pool1{"true",
                                   "E x. Label_1(x)",
                                   "A x. (Label_1(x) | Label_2(x))",
                                   "E[>=2] x. Label_1(x)",
                                   "E[=1] x. ~Label_2(x)",
                                   "E x. (root(x) & Label_2(x))",
                                   "E[<=2] x. (Label_1(x) & ~Label_2(x))"};
    std::vector<Formula> fs;
    for (auto* p : pool1) fs.push_back(parse_sentence(p, v));
    long long checks = 0;
    for_each_rooted_tree(v, 5, [&](const Structure& t) {
        for (auto& f : fs) {
            CHECK(check_omega(t, f) == evaluate(t, f));
            ++checks;
        }
    });
    Structure none(3, v);
    none.set("s", 0, 1);
    none.set("s", 0, 2);
    none.set("root", 0);
    CHECK_FALSE(check_omega(none, fs[1]));
    // rank 2 and subset quantifiers over s on small trees
    Vocabulary v1 = tree_voc(1);
    std::vector<const char*> pool2{"E x. E y. (s(x,y) & Label_1(y))", "A x. (Label_1(x) -> E y. s(x,y))",
                                   "E x. E[=2] y. s(x,y)", "ESub P <= s. E x. E y. (P(x,y) & Label_1(x))",
                                   "ESet X. A x. (X(x) <-> Label_1(x))"};
    for (auto* p : pool2) {
        auto f = parse_sentence(p, v1);
        for_each_rooted_tree(v1, 4, [&](const Structure& t) {
            CHECK(check_omega(t, f) == evaluate(t, f));
            ++checks;
        });
    }
    MESSAGE("check_omega comparisons: ", checks);
}

TEST_CASE("Theta: q = 0 forces the single symbol") {
    auto c = cfg_of(tree_voc(1), 0);
    auto uni = tree_value_universe(c, 3);
    REQUIRE(uni.size() == 1);
    auto th = emit_theta_symbolic(c, uni);
    CHECK(is_c2(th.sentence));
    std::string cs = th.symbol.begin()->second;
    for_each_rooted_tree(c.vocab, 3, [&](const Structure& t) {
        Structure x = t;
        x.add_symbol(cs, 1);
        CHECK_FALSE(evaluate(x, th.sentence));
        x.set_unary(cs, full_set(t.size()));
        CHECK(evaluate(x, th.sentence));
    });
}

TEST_CASE("Theta: annotation expansion is the unique model on in-cap trees") {
    auto c = cfg_of(tree_voc(1), 1);
    auto uni = tree_value_universe(c, 4);
    auto th = emit_theta_symbolic(c, uni);
    CHECK(is_c2(th.sentence));
    std::vector<Formula> omegas{parse_sentence("E x. Label_1(x)", c.vocab), parse_sentence("A x. Label_1(x)", c.vocab),
                                parse_sentence("E x. (root(x) & Label_1(x))", c.vocab)};
    std::vector<Formula> hins;
    for (auto& w : omegas) {
        hins.push_back(omega_hin(th, uni, w));
        CHECK(is_c2(hins.back()));
    }
    std::vector<std::string> syms;
    for (auto& [id, s] : th.symbol) syms.push_back(s);
    for_each_rooted_tree(c.vocab, 4, [&](const Structure& t) {
        Structure x = theta_expansion(t, th, c);
        CHECK(evaluate(x, th.sentence));
        for (size_t i = 0; i < omegas.size(); ++i) CHECK(evaluate(x, hins[i]) == evaluate(t, omegas[i]));
        if (t.size() > 2) return;
        // every other labelling by the C symbols fails
        int k = static_cast<int>(syms.size()), n = t.size(), models = 0;
        std::vector<int> pick(n, 0);
        while (true) {
            Structure y = t;
            for (auto& s : syms) y.add_symbol(s, 1);
            for (int u = 0; u < n; ++u) y.set(syms[pick[u]], u);
            if (evaluate(y, th.sentence)) {
                ++models;
                CHECK(y == x);
            }
            int i = 0;
            while (i < n && ++pick[i] == k) pick[i++] = 0;
            if (i == n) break;
        }
        CHECK(models == 1);
    });
}

TEST_CASE("digests are stable") {
    auto c = cfg_of(tree_voc(1), 1);
    Structure t = one_point(c.vocab, {true});
    auto v = hintikka_value(t, c);
    CHECK(v.hex().size() == 16);
    HintikkaEngine fresh(c);
    CHECK(fresh.value(t).digest == v.digest);
}
