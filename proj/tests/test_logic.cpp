#include <functional>
#include "doctest.h"
#include "msosep/logic.hpp"

using namespace msosep;

namespace {

Vocabulary voc() { return Vocabulary{{"A", 1}, {"B", 1}, {"E", 2}, {"f1", 2}, {"s", 2}}; }

std::string kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return "none";
}

}  // namespace

TEST_CASE("parse reads quantifier prefixes and atoms") {
    auto f = parse_formula("A x. E y. E(x,y)", voc());
    REQUIRE(f->kind == Kind::Forall);
    CHECK(f->name == "x");
    auto g = f->kids[0];
    REQUIRE(g->kind == Kind::Exists);
    CHECK(g->kids[0]->kind == Kind::Binary);
    CHECK(g->kids[0]->terms == std::vector<std::string>{"x", "y"});
}

TEST_CASE("counting quantifier with a free variable") {
    auto f = parse_formula("E[=1] y. f1(x,y)", voc());
    REQUIRE(f->kind == Kind::Count);
    CHECK(f->cmp == Cmp::Eq);
    CHECK(f->count == 1);
    CHECK(free_vars(f) == std::set<std::string>{"x"});
}

TEST_CASE("parse errors carry their kind") {
    CHECK(kind_of([] { parse_formula("A(x,y)", voc()); }) == "ArityMismatch");
    CHECK(kind_of([] { parse_formula("Q(x)", voc()); }) == "UnknownSymbol");
    CHECK(kind_of([] { parse_formula("A x. (A(x)", voc()); }) == "SyntaxError");
    CHECK(kind_of([] { parse_sentence("A(z)", voc()); }) == "UnboundVariable");
    CHECK(kind_of([] { parse_formula("ESub P <= A. true", voc()); }) == "ArityMismatch");
}

TEST_CASE("quantifier rank") {
    CHECK(quantifier_rank(parse_formula("E(x,y)", voc())) == 0);
    CHECK(quantifier_rank(parse_formula("A x. E y. E(x,y)", voc())) == 2);
    CHECK(quantifier_rank(parse_formula("(E x. A(x)) & (E y. B(y))", voc())) == 1);
    CHECK(quantifier_rank(parse_formula("ESub P <= s. ASet X. E x. X(x) & P(x,x)", voc())) == 3);
}

TEST_CASE("is_c2") {
    CHECK(is_c2(parse_formula("A x. E[<=3] y. E(x,y)", voc())));
    CHECK(is_c2(parse_formula("A x. A y. A z. true", voc())));
    CHECK_FALSE(is_c2(parse_formula("A x. A y. A z. (E(x,y) & E(y,z) & E(x,z))", voc())));
    CHECK_FALSE(is_c2(parse_formula("ESet X. E x. X(x)", voc())));
    // renaming is attempted first
    CHECK(is_c2(parse_formula("A u. E v. (E(u,v) & E w. E(v,w))", voc())));
    CHECK_FALSE(is_c2(parse_formula("A u. E v. E w. (E(u,v) & E(v,w))", voc())));
    auto r = c2_rename(parse_formula("A u. E v. (E(u,v) & E w. E(v,w))", voc()));
    REQUIRE(r);
    CHECK(print_formula(*r) == "A x. E y. E(x,y) & (E x. E(y,x))");
}

TEST_CASE("print/parse round trip") {
    const char* samples[] = {
        "A x. E y. E(x,y)",
        "(A(x) & B(x)) & A(y)",
        "A(x) & B(x) & A(y)",
        "A(x) | B(x) & ~A(y)",
        "(A(x) -> B(x)) -> A(y)",
        "A(x) -> B(x) -> A(y)",
        "(A(x) <-> B(x)) <-> A(y)",
        "~(x = y) & ~~A(x)",
        "~(E x. A(x)) | (A y. B(y))",
        "E[>=2] y. E(x,y) & ~(x = y)",
        "ESub P <= s. ASet X. X(x) -> P(x,y)",
        "ASub P <= E. E x. P(x,0)",
        "true & false",
    };
    for (auto* s : samples) {
        auto f = parse_formula(s, voc());
        auto printed = print_formula(f);
        auto g = parse_formula(printed, voc());
        CHECK_MESSAGE(structurally_equal(f, g), s << " -> " << printed);
        CHECK(print_formula(g) == printed);
    }
    // builder-made nesting that the parser would flatten
    auto nested = f::conj(f::conj(f::atom("A", "x"), f::atom("B", "x")), f::atom("A", "y"));
    CHECK(structurally_equal(parse_formula(print_formula(nested), voc()), nested));
    auto q = f::conj(f::exists("x", f::atom("A", "x")), f::atom("B", "y"));
    CHECK(structurally_equal(parse_formula(print_formula(q), voc()), q));
}

TEST_CASE("copy renames binary symbols only") {
    Vocabulary v{{"A", 1}, {"E", 2}};
    auto c = copy_vocabulary(v);
    CHECK(c.has("A"));
    CHECK(c.has("E'"));
    CHECK_FALSE(c.has("E"));
    auto f = parse_formula("E(x,y) & A(x)", v);
    CHECK(print_formula(copy_formula(f, v)) == "E'(x,y) & A(x)");
    auto cc = copy_vocabulary(c);
    CHECK(cc.has("E''"));
    CHECK(kind_of([&] { copy_vocabulary(v.unite(Vocabulary{{"E'", 2}})); }) == "NameCollision");
    auto g = parse_formula("A x. E[>=2] y. E(x,y)", v);
    CHECK(quantifier_rank(copy_formula(g, v)) == quantifier_rank(g));
    CHECK(is_c2(copy_formula(g, v)));
}

TEST_CASE("substitution avoids capture") {
    auto f = parse_formula("E y. E(x,y)", voc());
    auto g = substitute(f, {{"x", "y"}});
    CHECK(free_vars(g) == std::set<std::string>{"y"});
    CHECK(g->name != "y");
    auto h = substitute(parse_formula("E(x,y)", voc()), {{"x", "y"}, {"y", "x"}});
    CHECK(print_formula(h) == "E(y,x)");
}

TEST_CASE("vocabulary algebra and file format") {
    auto v = Vocabulary::parse("A/1\nE/2\n# comment\n");
    CHECK(v.arity("E") == 2);
    CHECK(v.unite(Vocabulary{{"B", 1}}).size() == 3);
    CHECK(v.intersect(Vocabulary{{"E", 2}, {"A", 2}}).names() == std::vector<std::string>{"E"});
    CHECK(v.minus(Vocabulary{{"E", 2}}).names() == std::vector<std::string>{"A"});
    CHECK(Vocabulary::parse(v.to_string()) == v);
}
