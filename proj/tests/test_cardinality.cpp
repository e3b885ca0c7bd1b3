#include <doctest.h>

#include "msosep/cardinality.hpp"
#include "oracles.hpp"

using namespace msosep;

namespace {

// the unary prefix symbols of an atom, one instantiation per code
Structure with_sets(int n, const std::vector<std::string>& vars, std::uint64_t code) {
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

std::vector<std::string> atom_vars(const CardAtomRewrite& a) {
    std::set<std::string> s(a.lhs.begin(), a.lhs.end());
    s.insert(a.rhs.begin(), a.rhs.end());
    return {s.begin(), s.end()};
}

// enumerate every B; W_dom and W_img are forced to the linked items by the
// dom/img axioms, so setting them that way loses no expansion
bool brute_expansion(const CardAtomRewrite& at, const Structure& sets) {
    Vocabulary bv;
    for (auto& row : at.b)
        for (auto& s : row) bv.add(s, 2);
    Formula phi = f::conj(at.substitute, at.axioms);
    bool found = false;
    oracle::for_each_expansion(sets, bv, [&](const Structure& e) {
        Structure full = e;
        for (size_t i = 0; i < at.lhs.size(); ++i) {
            full.add_symbol(at.w_dom[i], 1);
            for (size_t j = 0; j < at.rhs.size(); ++j)
                for (int u = 0; u < e.size(); ++u)
                    if (e.row(at.b[i][j], u)) full.set(at.w_dom[i], u);
        }
        for (size_t j = 0; j < at.rhs.size(); ++j) {
            full.add_symbol(at.w_img[j], 1);
            for (size_t i = 0; i < at.lhs.size(); ++i)
                for (int u = 0; u < e.size(); ++u) full.set_unary(at.w_img[j], full.unary_set(at.w_img[j]) | e.row(at.b[i][j], u));
        }
        if (evaluate(full, phi)) {
            found = true;
            return false;
        }
        return true;
    });
    return found;
}

const Vocabulary kE{{"E", 2}};
const Vocabulary kP{{"P", 1}};

}  // namespace

TEST_CASE("parse_card accepts the prefix forms and rejects non-prefix card variables") {
    auto a = parse_card("EX1. EX2. |X1| < |X2|", kE);
    CHECK(a.prefix == std::vector<std::string>{"X1", "X2"});
    CHECK(a.card_atoms().size() == 1);
    auto b = parse_card("ESet X1. ESet X2. (|X1| < |X2| | ~(|X2| + |X1| < |X1|)) & A x. (X1(x) -> E(x,x))", kE);
    CHECK(b.card_atoms().size() == 2);
    CHECK(b.card_atoms()[1]->count == 2);

    auto kind = [](const std::string& text) {
        try {
            parse_card(text, kE);
        } catch (const Error& e) {
            return e.kind();
        }
        return std::string("ok");
    };
    CHECK(kind("EX1. ASet Y. |Y| < |X1|") == "CardVarNotInPrefix");
    CHECK(kind("EX1. A x. ESet X1. |X1| < |X1|") == "CardVarNotInPrefix");  // shadowed
    CHECK(kind("EX1. |Z| < |X1|") == "CardVarNotInPrefix");
    CHECK(kind("EX1. |X1| <") == "SyntaxError");
    CHECK(kind("EE. |E| < |E|") == "SyntaxError");  // prefix name clashes with a symbol
    CHECK(kind("EX1. EX1. true") == "SyntaxError");
    CHECK(kind("EX1. A x. X1(y)") == "UnboundVariable");
}

TEST_CASE("rewrite_card: beta is C2, alpha has no card atoms, vocabularies layered") {
    for (const char* text : {"EX1. EX2. |X1| < |X2|", "EX1. EX2. EX3. |X1| + |X2| < |X3| & ~(|X3| < |X1| + |X1|)",
                             "EX. EY. A x. (E(x,x) -> |X| < |Y|)", "EX. true"}) {
        auto rw = rewrite_card(parse_card(text, kE), 1);
        CAPTURE(text);
        CHECK(is_c2(rw.beta));
        CardSentence probe{{}, rw.alpha, rw.cb};
        CHECK(probe.card_atoms().empty());
        check_vocabulary(rw.alpha, rw.cb);
        check_vocabulary(rw.beta, rw.cu);
        CHECK(rw.base.subset_of(rw.cb));
        CHECK(rw.cb.subset_of(rw.cu));
        for (auto& s : rw.cu.minus(rw.cb).names()) CHECK(rw.cu.arity(s) == 2);
        for (auto& s : rw.cb.minus(rw.base).names()) CHECK(rw.cb.arity(s) == 1);
    }
    auto rw = rewrite_card(parse_card("EX1. EX2. |X1| < |X2|", kE), 1);
    REQUIRE(rw.atoms.size() == 1);
    CHECK(rw.atoms[0].b[0][0] == "B_1");
    CHECK(rw.atoms[0].w_dom[0] == "W_dom_1");
    CHECK(rw.atoms[0].w_img[0] == "W_img_1");
    // one atom used twice gets one set of symbols
    auto twice = rewrite_card(parse_card("EX1. EX2. |X1| < |X2| & (E x. E(x,x) -> |X1| < |X2|)", kE), 1);
    CHECK(twice.atoms.size() == 1);
}

TEST_CASE("X1={0}, X2={1,2}: the expected expansion, agreeing with all expansions") {
    auto rw = rewrite_card(parse_card("EX1. EX2. |X1| < |X2|", kE), 1);
    const auto& at = rw.atoms[0];
    Structure s = with_sets(3, {"X1", "X2"}, 0);
    s.set_unary("X1", 0b001);
    s.set_unary("X2", 0b110);
    CHECK(card_atom_direct(at.atom, s));

    Vocabulary extra{{"B_1", 2}, {"W_dom_1", 1}, {"W_img_1", 1}};
    Formula phi = f::conj(at.substitute, at.axioms);
    int good = 0;
    bool expected = false;
    oracle::for_each_expansion(s, extra, [&](const Structure& e) {
        if (evaluate(e, phi)) {
            ++good;
            expected |= e.pairs("B_1") == std::vector<std::pair<int, int>>{{0, 1}} &&
                        e.unary_set("W_dom_1") == 0b001 && e.unary_set("W_img_1") == 0b010;
        }
        return true;
    });
    CHECK(good == 2);  // 0 -> 1 or 0 -> 2
    CHECK(expected);
    auto sat = atom_expansion(at, s);
    REQUIRE(sat);
    CHECK(evaluate(*sat, phi));
}

TEST_CASE("brute force over all B: expansion exists iff the sums compare, n <= 3") {
    struct Shape {
        const char* text;
        int max_n;
    };
    for (auto sh : {Shape{"EX1. EX2. |X1| < |X2|", 3}, Shape{"EX1. |X1| < |X1|", 3}, Shape{"EX1. EX2. EX3. |X1| + |X2| < |X3|", 2},
                    Shape{"EX1. EX2. |X1| < |X1| + |X2|", 2}, Shape{"EX1. EX2. |X1| + |X1| < |X2|", 2}}) {
        auto rw = rewrite_card(parse_card(sh.text, kE), 1);
        const auto& at = rw.atoms[0];
        auto vars = atom_vars(at);
        long checked = 0;
        for (int n = 1; n <= sh.max_n; ++n)
            for (std::uint64_t code = 0; code < (std::uint64_t{1} << (n * vars.size())); ++code) {
                auto s = with_sets(n, vars, code);
                bool direct = card_atom_direct(at.atom, s);
                CAPTURE(sh.text);
                CAPTURE(s.to_text());
                REQUIRE(direct == brute_expansion(at, s));
                ++checked;
            }
        CHECK(checked > 0);
    }
}

TEST_CASE("SAT expansion check is exhaustive over n <= 4 and every instantiation") {
    const char* shapes[] = {
        "EX1. EX2. |X1| < |X2|",
        "EX1. |X1| < |X1|",
        "EX1. EX2. EX3. |X1| + |X2| < |X3|",
        "EX1. EX2. EX3. |X1| < |X2| + |X3|",
        "EX1. EX2. |X1| + |X1| < |X2|",
        "EX1. EX2. |X1| + |X2| < |X2| + |X1|",
        "EX1. EX2. EX3. |X1| + |X2| < |X3| + |X3|",
    };
    for (auto text : shapes) {
        auto rw = rewrite_card(parse_card(text, kE), 1);
        const auto& at = rw.atoms[0];
        auto vars = atom_vars(at);
        int agree = 0, total = 0, truths = 0;
        for (int n = 1; n <= 4; ++n)
            for (std::uint64_t code = 0; code < (std::uint64_t{1} << (n * vars.size())); ++code) {
                auto s = with_sets(n, vars, code);
                bool direct = card_atom_direct(at.atom, s);
                auto e = atom_expansion(at, s);
                agree += direct == e.has_value();
                truths += direct;
                ++total;
                if (e) CHECK(evaluate(*e, f::conj(at.substitute, at.axioms)));
            }
        CAPTURE(text);
        CHECK(agree == total);
        if (std::string(text) != "EX1. |X1| < |X1|" && std::string(text) != "EX1. EX2. |X1| + |X2| < |X2| + |X1|")
            CHECK(truths > 0);
    }
}

TEST_CASE("whole sentences: matrix truth iff an expansion satisfies alpha & beta") {
    struct Case {
        const char* text;
        Vocabulary vocab;
        int max_n;
    };
    const Case cases[] = {
        {"EX1. EX2. ~(|X1| < |X2|) & A x. (X1(x) -> P(x))", kP, 4},
        {"EX1. EX2. (|X1| < |X2| -> E x. (X2(x) & P(x))) & (|X2| < |X1| | A x. P(x))", kP, 4},
        {"EX1. EX2. |X1| < |X2| & |X2| < |X1|", kP, 4},
        {"EX1. EX2. A x. (P(x) <-> X1(x)) & ~(|X1| + |X1| < |X2| + |X2|)", kP, 4},
        {"EX1. EX2. A x. (E y. E(x,y) -> X1(x)) & |X2| < |X1|", kE, 2},
        {"EX1. EX2. ESet Z. (A x. (Z(x) <-> X2(x)) & |X1| < |X2|)", kP, 3},
    };
    for (auto& c : cases) {
        auto rho = parse_card(c.text, c.vocab);
        auto rw = rewrite_card(rho, 1);
        CAPTURE(c.text);
        long total = 0, agree = 0;
        for (int n = 1; n <= c.max_n; ++n)
            oracle::for_each_structure(n, c.vocab, [&](const Structure& base) {
                for (std::uint64_t code = 0; code < (std::uint64_t{1} << (n * rho.prefix.size())); ++code) {
                    auto sets = with_sets(n, rho.prefix, code);
                    Assignment asg;
                    for (auto& p : rho.prefix) asg.sets[p] = sets.unary_set(p);
                    bool direct = evaluate(base, rho.matrix, asg);
                    bool expanded = card_expansion(rw, expand(base, sets)).has_value();
                    agree += direct == expanded;
                    ++total;
                }
                return true;
            });
        CHECK(agree == total);
        CHECK(total > 0);
    }
}

TEST_CASE("decide_card_bounded examples") {
    auto d1 = decide_card_bounded(parse_card("EX1. EX2. |X1| < |X2|", kE), 1, 4);
    REQUIRE(d1.sat);
    CHECK(d1.model.size() == 1);
    CHECK(d1.sets.at("X1") == 0);
    CHECK(d1.sets.at("X2") == 1);

    // |X2| > 2 |X1| and X1 nonempty
    auto d2 = decide_card_bounded(parse_card("EX1. EX2. |X1| + |X1| < |X2| & E x. X1(x)", kE), 1, 4);
    REQUIRE(d2.sat);
    CHECK(d2.model.size() == 3);
    CHECK(d2.sizes_searched == 2);
    CHECK(popcount(d2.sets.at("X2")) == 3);

    auto d3 = decide_card_bounded(parse_card("EX1. EX2. |X1| < |X2| & |X2| < |X1|", kE), 1, 4);
    CHECK_FALSE(d3.sat);
    CHECK(d3.sizes_searched == 4);
    CHECK(d3.n_max == 4);

    // complete graph on at least three vertices needs tree-width 2
    const char* clique = "EX. EY. |X| < |Y| & E[>=3] x. true & A x. A y. (~x = y -> E(x,y))";
    CHECK_FALSE(decide_card_bounded(parse_card(clique, kE), 1, 4).sat);
    auto d4 = decide_card_bounded(parse_card(clique, kE), 2, 4);
    REQUIRE(d4.sat);
    CHECK(d4.model.size() == 3);
    CHECK(treewidth(gaifman(reduct(d4.model, kE))) == 2);

    // the oracle sweep agrees on the smallest size
    auto rho = parse_card("EX1. EX2. |X1| + |X1| < |X2| & E x. X1(x)", kE);
    int smallest = 0;
    for (int n = 1; n <= 3 && !smallest; ++n)
        for (std::uint64_t code = 0; code < (std::uint64_t{1} << (2 * n)) && !smallest; ++code) {
            auto sets = with_sets(n, rho.prefix, code);
            Assignment asg;
            for (auto& p : rho.prefix) asg.sets[p] = sets.unary_set(p);
            if (evaluate(Structure(n, kE), rho.matrix, asg)) smallest = n;
        }
    CHECK(smallest == 3);
}
