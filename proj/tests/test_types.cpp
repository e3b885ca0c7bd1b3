#include <map>
#include <random>

#include "doctest.h"
#include "msosep/types.hpp"
#include "oracles.hpp"

using namespace msosep;

TEST_CASE("type counts") {
    CHECK(enumerate_1types(Vocabulary{{"A", 1}}).size() == 2);
    CHECK(enumerate_1types(Vocabulary{{"B", 2}}).size() == 2);
    CHECK(enumerate_2types(Vocabulary{{"B", 2}}).size() == 16);
    CHECK(enumerate_2types(Vocabulary{{"A", 1}, {"B", 2}}).size() == 64);
    auto ts = enumerate_2types(Vocabulary{{"A", 1}, {"B", 2}});
    CHECK(std::set<TwoType>(ts.begin(), ts.end()).size() == 64);
    try {
        enumerate_2types(Vocabulary{{"A", 1}, {"B", 2}}, 32);
        FAIL("expected TooManyTypes");
    } catch (const Error& e) {
        CHECK(e.kind() == "TooManyTypes");
    }
}

TEST_CASE("two_type_of reads atoms off") {
    Structure s(2, Vocabulary{{"E", 2}});
    s.set("E", 0, 1);
    TypeSignature sig(s.vocab());
    auto t = two_type_of(s, 0, 1);
    CHECK(to_string(t, sig) == "{E(x,y), ~E(y,x), ~E(x,x), ~E(y,y)}");
    CHECK(two_type_of(s, 1, 0) == t.inverse());
    CHECK(t.inverse().inverse() == t);
    CHECK(t.inverse().x == t.y);
    CHECK(decode_type_code(type_code(t), sig) == t);
    try {
        two_type_of(s, 1, 1);
        FAIL("expected SameElement");
    } catch (const Error& e) {
        CHECK(e.kind() == "SameElement");
    }
    Structure a(2, Vocabulary{{"A", 1}, {"E", 2}});
    a.set("A", 0);
    a.set("E", 1, 1);
    CHECK(to_string(two_type_of(a, 0, 1), TypeSignature(a.vocab())) ==
          "{A(x), ~A(y), ~E(x,y), ~E(y,x), ~E(x,x), E(y,y)}");
}

TEST_CASE("type formulas characterize their types") {
    Vocabulary v{{"A", 1}, {"E", 2}};
    TypeSignature sig(v);
    std::mt19937 rng(1);
    oracle::for_each_structure(2, v, [&](const Structure& s) {
        auto t = two_type_of(s, 0, 1, sig);
        auto phi = type_formula(t, sig);
        for (int u = 0; u < 2; ++u)
            for (int w = 0; w < 2; ++w) {
                bool want = u != w && two_type_of(s, u, w, sig) == t;
                CHECK(evaluate(s, phi, Assignment{{{"x", u}, {"y", w}}, {}, {}}) == want);
                CHECK(realizes(s, u, w, t, sig) == want);
            }
        Structure c(2, v);
        apply_two_type(c, 0, 1, t, sig);
        CHECK(c == s);
        return true;
    });
}

TEST_CASE("realized sets are closed under inverse") {
    std::mt19937 rng(3);
    Vocabulary v{{"A", 1}, {"E", 2}, {"F", 2}};
    for (int it = 0; it < 30; ++it) {
        Structure s(4, v);
        std::bernoulli_distribution coin(0.4);
        for (int u = 0; u < 4; ++u) {
            if (coin(rng)) s.set("A", u);
            for (int w = 0; w < 4; ++w) {
                if (coin(rng)) s.set("E", u, w);
                if (coin(rng)) s.set("F", u, w);
            }
        }
        auto r = realized_two_types(s);
        for (auto& t : r) CHECK(r.count(t.inverse()));
    }
}

TEST_CASE("equal realized 2-type sets decide universal sentences") {
    Vocabulary v{{"E", 2}};
    const char* pool[] = {
        "A x. A y. (E(x,y) -> E(y,x))",
        "A x. A y. (~(x = y) -> E(x,y) | E(y,x))",
        "A x. A y. (E(x,x) -> ~E(x,y) | x = y)",
        "A x. A y. ~(E(x,y) & E(y,x) & ~(x = y))",
        "A x. A y. (E(x,y) & ~E(y,y) -> E(x,x))",
    };
    for (int n = 2; n <= 3; ++n) {
        std::map<std::set<TwoType>, std::vector<bool>> seen;
        int groups_with_many = 0;
        oracle::for_each_structure(n, v, [&](const Structure& s) {
            std::vector<bool> truth;
            for (auto* p : pool) truth.push_back(evaluate(s, parse_sentence(p, v)));
            auto key = realized_two_types(s);
            auto it = seen.find(key);
            if (it == seen.end()) {
                seen.emplace(key, truth);
            } else {
                ++groups_with_many;
                CHECK(it->second == truth);
            }
            return true;
        });
        CHECK(groups_with_many > 0);
    }
}

TEST_CASE("scott normal form shapes") {
    Vocabulary v{{"A", 1}, {"E", 2}};
    auto sym = scott_normal_form(parse_sentence("A x. A y. (E(x,y) -> E(y,x))", v), v);
    CHECK(sym.messages.empty());
    CHECK(is_quantifier_free(sym.chi));
    CHECK(print_formula(sym.chi) == "E(x,y) -> E(y,x)");

    auto ser = scott_normal_form(parse_sentence("A x. E y. E(x,y)", v), v);
    REQUIRE(ser.messages.size() == 1);
    CHECK(print_formula(ser.chi) == ser.messages[0] + "(x,y) -> E(x,y)");
    CHECK(is_c2(ser.sentence()));

    try {
        scott_normal_form(parse_sentence("A x. A y. A z. (E(x,y) & E(y,z) & E(x,z))", v), v);
        FAIL("expected NotC2");
    } catch (const Error& e) {
        CHECK(e.kind() == "NotC2");
    }
}

namespace {

// completeness up to max_n; soundness by enumerating all expansions at n<=2
void check_equisat(const std::string& text, int max_n) {
    Vocabulary v{{"A", 1}, {"E", 2}};
    auto beta = parse_sentence(text, v);
    auto nf = scott_normal_form(beta, v);
    auto s = nf.sentence();
    CHECK(is_c2(s));
    Vocabulary extra = nf.vocab.minus(v);
    for (int n = 1; n <= max_n; ++n) {
        oracle::for_each_structure(n, v, [&](const Structure& m) {
            bool model = evaluate(m, beta);
            if (model) {
                auto e = scott_expand(m, nf);
                CHECK_MESSAGE(evaluate(e, s), text << " n=" << n);
                CHECK(reduct(e, v) == m);
            }
            if (n <= 2 && oracle::atom_bits(n, extra) <= 12) {
                bool any = false;
                oracle::for_each_expansion(m, extra, [&](const Structure& e) {
                    any = evaluate(e, s);
                    return !any;
                });
                CHECK_MESSAGE(any == model, text << " n=" << n);
            }
            return true;
        });
    }
}

}  // namespace

TEST_CASE("scott normal form is equisatisfiable per structure") {
    const char* pool[] = {
        "A x. E y. E(x,y)",
        "E x. A(x) & A x. ~A(x)",
        "A x. (A(x) -> E[>=2] y. E(x,y))",
        "A x. E[<=1] y. E(x,y)",
        "A x. E[=1] y. (E(x,y) & ~(x = y))",
        "~(A x. E[=1] y. E(y,x))",
        "E x. (A(x) & A y. (E(x,y) <-> ~A(y)))",
        "A x. (A(x) <-> E[>=2] y. E(y,x))",
        "~(E x. E[<=0] y. E(x,y))",
        "(E[>=2] x. A(x)) -> A x. E y. (E(x,y) & A(y))",
    };
    for (auto* p : pool) check_equisat(p, 3);
}

TEST_CASE("functionality and message graphs") {
    Vocabulary v{{"R", 2}};
    Structure id(2, v);
    id.set("R", 0, 0);
    id.set("R", 1, 1);
    CHECK(is_functional(id, {"R"}));
    Structure two(2, v);
    two.set("R", 0, 1);
    two.set("R", 0, 0);
    CHECK_FALSE(is_functional(two, {"R"}));
    Structure partial(2, v);
    partial.set("R", 0, 1);
    CHECK_FALSE(is_functional(partial, {"R"}));

    Structure chain(3, v);
    chain.set("R", 0, 1);
    chain.set("R", 1, 2);
    auto g = message_graph(chain, {"R"});
    CHECK(g.has_arc(0, 2));
    CHECK(g.arcs() == 1);
    Structure back(2, v);
    back.set("R", 0, 1);
    back.set("R", 1, 0);
    CHECK(message_graph(back, {"R"}).arcs() == 0);

    // functional structures: out-degree <= |sigma|^2, exhaustive n<=4 with |sigma|<=2
    for (int n = 1; n <= 4; ++n) {
        int total = 1;
        for (int i = 0; i < 2 * n; ++i) total *= n;
        for (int code = 0; code < total; ++code) {
            Structure s(n, Vocabulary{{"f", 2}, {"g", 2}});
            int c = code;
            for (int u = 0; u < n; ++u) {
                s.set("f", u, c % n);
                c /= n;
                s.set("g", u, c % n);
                c /= n;
            }
            auto m1 = message_graph(s, {"f"});
            auto m2 = message_graph(s, {"f", "g"});
            for (int u = 0; u < n; ++u) {
                CHECK(popcount(m1.out[u]) <= 1);
                CHECK(popcount(m2.out[u]) <= 4);
            }
        }
    }
}

TEST_CASE("chromaticity") {
    Vocabulary v{{"A", 1}, {"R", 2}};
    Structure s(3, v);
    s.set("R", 0, 1);
    s.set("R", 1, 2);
    s.set("R", 2, 1);
    CHECK_FALSE(is_chromatic(s, {"R"}));  // arc 0->2, equal 1-types
    s.set("A", 0);
    CHECK(is_chromatic(s, {"R"}));
}

TEST_CASE("greedy coloring") {
    Digraph c3(3);
    c3.arc(0, 1);
    c3.arc(1, 2);
    c3.arc(2, 0);
    auto col = greedy_coloring(c3, 1);
    std::set<int> used(col.begin(), col.end());
    CHECK(used.size() == 3);
    for (auto [u, w] : c3.symmetric().edges()) CHECK(col[u] != col[w]);
    // brute force: no 2-coloring of the odd cycle
    int proper2 = 0;
    for (int c = 0; c < 8; ++c) {
        bool ok = true;
        for (auto [u, w] : c3.symmetric().edges()) ok &= ((c >> u) & 1) != ((c >> w) & 1);
        proper2 += ok;
    }
    CHECK(proper2 == 0);

    auto none = greedy_coloring(Digraph(4), 0);
    CHECK(none == std::vector<int>{0, 0, 0, 0});
    Digraph bad(3);
    bad.arc(0, 1);
    bad.arc(0, 2);
    try {
        greedy_coloring(bad, 1);
        FAIL("expected DegreeBoundViolated");
    } catch (const Error& e) {
        CHECK(e.kind() == "DegreeBoundViolated");
        CHECK(e.detail() == "vertex 0");
    }
    std::mt19937 rng(9);
    for (int it = 0; it < 300; ++it) {
        int n = 1 + rng() % 12, k = 1 + rng() % 3;
        Digraph g(n);
        for (int u = 0; u < n; ++u)
            for (int j = 0; j < k; ++j) {
                int w = rng() % n;
                if (w != u && popcount(g.out[u]) < k) g.arc(u, w);
            }
        auto c = greedy_coloring(g, k);
        for (int u = 0; u < n; ++u) CHECK(c[u] <= 2 * k);
        for (auto [u, w] : g.symmetric().edges()) CHECK(c[u] != c[w]);
    }
}

TEST_CASE("chromatic expansion") {
    Vocabulary v{{"R", 2}};
    Structure one(3, Vocabulary{});
    auto e0 = chromatic_expansion(one, {});
    CHECK(e0.unary_set(color_symbol(1)) == full_set(3));

    Structure chain(4, v);
    for (int u = 0; u < 4; ++u) chain.set("R", u, std::min(u + 1, 3));
    auto e = chromatic_expansion(chain, {"R"});
    CHECK(is_chromatic(e, {"R"}));
    CHECK(reduct(e, v) == chain);

    try {
        chromatic_expansion(Structure(2, v), {"R"});
        FAIL("expected NotFunctional");
    } catch (const Error& err) {
        CHECK(err.kind() == "NotFunctional");
    }
    // all functional structures n<=5 with one or two functions: colors partition, result chromatic
    for (int n = 1; n <= 5; ++n) {
        int total = 1;
        for (int i = 0; i < n; ++i) total *= n;
        for (int code = 0; code < total; ++code) {
            Structure s(n, Vocabulary{{"f", 2}, {"g", 2}});
            int c = code;
            for (int u = 0; u < n; ++u) {
                s.set("f", u, c % n);
                s.set("g", u, (c % n + u) % n);
                c /= n;
            }
            for (auto sigma : {std::vector<std::string>{"f"}, std::vector<std::string>{"f", "g"}}) {
                auto x = chromatic_expansion(s, sigma);
                int z = color_count(static_cast<int>(sigma.size()));
                Set seen = 0;
                for (int i = 1; i <= z; ++i) {
                    Set cls = x.unary_set(color_symbol(i));
                    CHECK((cls & seen) == 0);
                    seen |= cls;
                }
                CHECK(seen == full_set(n));
                CHECK(is_chromatic(x, sigma));
            }
        }
    }
}
