#include <doctest.h>

#include <random>

#include "msosep/sat.hpp"
#include "oracles.hpp"

using namespace msosep;

namespace {

bool brute_sat(int nv, const std::vector<std::vector<int>>& cls) {
    for (int m = 0; m < (1 << nv); ++m) {
        bool ok = true;
        for (auto& c : cls) {
            bool any = false;
            for (int l : c) {
                bool val = (m >> (std::abs(l) - 1)) & 1;
                if ((l > 0) == val) any = true;
            }
            if (!any) {
                ok = false;
                break;
            }
        }
        if (ok) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("cdcl agrees with brute force on random 3-cnf") {
    std::mt19937 rng(7);
    int agree = 0;
    for (int trial = 0; trial < 300; ++trial) {
        int nv = 4 + static_cast<int>(rng() % 9);
        int nc = static_cast<int>(nv * (3.5 + (rng() % 20) / 20.0));
        std::vector<std::vector<int>> cls;
        for (int i = 0; i < nc; ++i) {
            std::vector<int> c;
            for (int j = 0; j < 3; ++j) {
                int v = 1 + static_cast<int>(rng() % nv);
                c.push_back(rng() % 2 ? v : -v);
            }
            cls.push_back(c);
        }
        SatSolver s;
        for (int i = 0; i < nv; ++i) s.new_var();
        for (auto& c : cls) s.add_clause(c);
        bool r = s.solve() == SatSolver::Sat;
        if (r) {
            for (auto& c : cls) {
                bool any = false;
                for (int l : c) any |= (l > 0) == s.model_value(std::abs(l));
                CHECK(any);
            }
        }
        if (r == brute_sat(nv, cls)) ++agree;
    }
    CHECK(agree == 300);
}

TEST_CASE("pigeonhole 5 into 4 is unsatisfiable") {
    SatSolver s;
    auto var = [](int p, int h) { return 1 + p * 4 + h; };
    for (int i = 0; i < 20; ++i) s.new_var();
    for (int p = 0; p < 5; ++p) s.add_clause({var(p, 0), var(p, 1), var(p, 2), var(p, 3)});
    for (int h = 0; h < 4; ++h)
        for (int p = 0; p < 5; ++p)
            for (int q = p + 1; q < 5; ++q) s.add_clause({-var(p, h), -var(q, h)});
    CHECK(s.solve() == SatSolver::Unsat);
}

TEST_CASE("assumptions are retractable") {
    SatSolver s;
    int a = s.new_var(), b = s.new_var();
    s.add_clause({a, b});
    CHECK(s.solve({-a, -b}) == SatSolver::Unsat);
    CHECK(s.solve({-a}) == SatSolver::Sat);
    CHECK(s.model_value(b));
    CHECK(s.solve() == SatSolver::Sat);
}

TEST_CASE("bounded_sat basic examples") {
    Vocabulary v{{"A", 1}};
    SearchBudget b;
    b.max_size = 3;
    auto r = bounded_sat(parse_sentence("E x. x = x", v), v, b);
    CHECK(r.sat);
    CHECK(r.model.size() == 1);
    auto r2 = bounded_sat(parse_sentence("(E x. A(x)) & (A x. ~A(x))", v), v, b);
    CHECK_FALSE(r2.sat);
    CHECK(r2.sizes_searched == 3);
}

TEST_CASE("sat engine returns the same first model as enumeration") {
    Vocabulary v{{"A", 1}, {"E", 2}};
    const char* pool[] = {
        "A x. E y. E(x,y)",
        "E x. A(x) & ~E(x,x)",
        "A x. E[=1] y. E(x,y) & ~(x = y)",
        "E x. E[>=2] y. E(x,y)",
        "A x. E[<=1] y. E(y,x) & A(y)",
        "(A x. A(x) <-> E y. E(x,y)) & E x. ~A(x)",
        "ESet X. (E x. X(x)) & (A x. A y. X(x) & E(x,y) -> X(y)) & E z. ~X(z)",
        "ASet X. (E x. X(x) & A(x)) | E x. ~X(x)",
        "E x. E y. ~(x = y) & (ESub P <= E. P(x,y) & A u. A w. P(u,w) -> u = x)",
        "A x. A y. E(x,y) <-> ~E(y,x)",
        "E x. A(x) & A y. ~(x = y) -> (E(x,y) & ~A(y))",
        "(E x. A(x)) & (A x. ~A(x))",
    };
    for (std::string text : pool) {
        CAPTURE(text);
        auto f = parse_sentence(text, v);
        SearchBudget b;
        b.max_size = 3;
        auto r1 = bounded_sat(f, v, b);
        b.engine = SearchBudget::Enumerate;
        auto r2 = bounded_sat(f, v, b);
        CHECK(r1.sat == r2.sat);
        if (r1.sat && r2.sat) {
            CHECK(r1.model == r2.model);
            CHECK(evaluate(r1.model, f));
        }
    }
}

TEST_CASE("universal sub quantifier over a searched guard is a cap") {
    Vocabulary v{{"A", 1}, {"E", 2}};
    auto f = parse_sentence("ASub P <= E. (E x. E y. P(x,y)) -> E x. A(x)", v);
    SearchBudget b;
    b.max_size = 2;
    try {
        bounded_sat(f, v, b);
        FAIL("expected a cap");
    } catch (const Error& e) {
        CHECK(e.is_cap());
    }
}

TEST_CASE("tree shapes are the non-isomorphic binary trees") {
    Vocabulary v{{"s", 2}};
    for (int n = 1; n <= 4; ++n) {
        auto shapes = binary_tree_shapes(n);
        std::vector<Structure> classes;
        oracle::for_each_structure(n, v, [&](const Structure& s) {
            if (!is_binary_tree(s)) return true;
            for (auto& c : classes)
                if (isomorphic(c, s)) return true;
            classes.push_back(s);
            return true;
        });
        CHECK(shapes.size() == classes.size());
        for (auto& g : shapes) {
            Structure s(n, v);
            for (int u = 0; u < n; ++u) s.rel_mut("s").rows[u] = g.out[u];
            CHECK(is_binary_tree(s));
            int hits = 0;
            for (auto& c : classes) hits += isomorphic(c, s);
            CHECK(hits == 1);
        }
    }
    CHECK(binary_tree_shapes(5).size() == 6);
    CHECK(binary_tree_shapes(6).size() == 11);
    CHECK(binary_tree_shapes(7).size() == 23);
}

TEST_CASE("tree shape search fixes s") {
    Vocabulary v{{"s", 2}, {"A", 1}};
    SearchBudget b;
    b.max_size = 4;
    b.shape.kind = ShapeConstraint::Tree;
    // a node with two children, both labelled A
    auto f = parse_sentence("E x. E[=2] y. s(x,y) & A(y)", v);
    auto r = bounded_sat(f, v, b);
    REQUIRE(r.sat);
    CHECK(r.model.size() == 3);
    CHECK(is_binary_tree(r.model));
    b.engine = SearchBudget::Enumerate;
    auto r2 = bounded_sat(f, v, b);
    CHECK(r2.model == r.model);
    // three children never fit
    auto g = parse_sentence("E x. E[>=3] y. s(x,y)", v);
    b.engine = SearchBudget::Sat;
    CHECK_FALSE(bounded_sat(g, v, b).sat);
}

TEST_CASE("treewidth shape blocks dense models") {
    Vocabulary v{{"E", 2}};
    auto clique = parse_sentence("A x. A y. ~(x = y) -> E(x,y)", v);
    SearchBudget b;
    b.min_size = 3;
    b.max_size = 4;
    b.shape.kind = ShapeConstraint::Treewidth;
    b.shape.k = 1;
    b.shape.reduct = v;
    CHECK_FALSE(bounded_sat(clique, v, b).sat);
    b.shape.k = 2;
    auto r = bounded_sat(clique, v, b);
    CHECK(r.sat);
    CHECK(r.model.size() == 3);
    // two proper out-neighbours everywhere
    auto dense = parse_sentence("A x. E[>=2] y. ~(x = y) & E(x,y)", v);
    b.min_size = 1;
    b.shape.k = 1;
    auto r1 = bounded_sat(dense, v, b);
    b.engine = SearchBudget::Enumerate;
    auto r2 = bounded_sat(dense, v, b);
    CHECK(r1.sat == r2.sat);
    if (r1.sat) CHECK(r1.model == r2.model);
}

TEST_CASE("time cap raises") {
    Vocabulary v{{"E", 2}};
    SearchBudget b;
    b.max_size = 6;
    b.time_cap_seconds = 1e-6;
    b.engine = SearchBudget::Enumerate;
    auto f = parse_sentence("(E x. ~E(x,x)) & (A x. E(x,x))", v);
    CHECK_THROWS_AS(bounded_sat(f, v, b), Error);
}
