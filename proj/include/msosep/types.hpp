#pragma once
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "msosep/structures.hpp"

namespace msosep {

// Canonical atom order: unary symbols then binary symbols, each alphabetical.
struct TypeSignature {
    std::vector<std::string> unary, binary;
    TypeSignature() = default;
    explicit TypeSignature(const Vocabulary& v) : unary(v.unary()), binary(v.binary()) {}
    int one_atoms() const { return static_cast<int>(unary.size() + binary.size()); }
    int two_atoms() const { return 2 * one_atoms() + 2 * static_cast<int>(binary.size()); }
    Vocabulary vocabulary() const;
    bool operator==(const TypeSignature& o) const { return unary == o.unary && binary == o.binary; }
};

// bits: unary atoms A(x), then B(x,x)
struct OneType {
    std::vector<bool> bits;
    bool operator==(const OneType& o) const { return bits == o.bits; }
    bool operator<(const OneType& o) const { return bits < o.bits; }
};

// x, y: the two restrictions; cross[2b] = B_b(x,y), cross[2b+1] = B_b(y,x). x != y always.
struct TwoType {
    OneType x, y;
    std::vector<bool> cross;
    TwoType inverse() const;
    bool xy(int b) const { return cross[2 * b]; }
    bool yx(int b) const { return cross[2 * b + 1]; }
    bool operator==(const TwoType& o) const { return x == o.x && y == o.y && cross == o.cross; }
    bool operator<(const TwoType& o) const;
};

struct TwoTypeHash {
    size_t operator()(const TwoType& t) const;
};

constexpr long long kDefaultTypeCap = 1 << 20;

std::vector<OneType> enumerate_1types(const TypeSignature& sig, long long cap = kDefaultTypeCap);
std::vector<TwoType> enumerate_2types(const TypeSignature& sig, long long cap = kDefaultTypeCap);
inline std::vector<OneType> enumerate_1types(const Vocabulary& v, long long cap = kDefaultTypeCap) {
    return enumerate_1types(TypeSignature(v), cap);
}
inline std::vector<TwoType> enumerate_2types(const Vocabulary& v, long long cap = kDefaultTypeCap) {
    return enumerate_2types(TypeSignature(v), cap);
}

// symbols of sig missing from s read as empty
OneType one_type_of(const Structure& s, int u, const TypeSignature& sig);
TwoType two_type_of(const Structure& s, int u, int v, const TypeSignature& sig);
inline OneType one_type_of(const Structure& s, int u) { return one_type_of(s, u, TypeSignature(s.vocab())); }
inline TwoType two_type_of(const Structure& s, int u, int v) { return two_type_of(s, u, v, TypeSignature(s.vocab())); }
std::set<TwoType> realized_two_types(const Structure& s, const TypeSignature& sig);
inline std::set<TwoType> realized_two_types(const Structure& s) { return realized_two_types(s, TypeSignature(s.vocab())); }

// overwrite the atoms of sig between u and v (and on u, v themselves) with t
void apply_two_type(Structure& s, int u, int v, const TwoType& t, const TypeSignature& sig);

std::string to_string(const OneType& t, const TypeSignature& sig, const std::string& var = "x");
std::string to_string(const TwoType& t, const TypeSignature& sig);
// lossless hex code of the bits; decode needs the signature
std::string type_code(const TwoType& t);
TwoType decode_type_code(const std::string& code, const TypeSignature& sig);

Formula type_formula(const OneType& t, const TypeSignature& sig, const std::string& var);
Formula type_formula(const TwoType& t, const TypeSignature& sig, const std::string& x = "x",
                     const std::string& y = "y");
// does the pair (u,v) of s realize t; cheaper than computing the full type
bool realizes(const Structure& s, int u, int v, const TwoType& t, const TypeSignature& sig);
bool realizes(const Structure& s, int u, const OneType& t, const TypeSignature& sig);

struct ScottForm {
    Formula chi;                        // quantifier-free, free variables within {x, y}
    std::vector<std::string> messages;  // m_1..m_t, each axiomatized as a total function
    Vocabulary vocab;                   // input vocabulary plus fresh symbols
    // fresh unary subformula predicates and the formulas they abbreviate, innermost first
    struct Definition {
        std::string pred;
        Formula body;  // free variable x at most; refers to earlier predicates
    };
    std::vector<Definition> definitions;
    struct Witnessing {
        std::string pred;                   // guard; empty for the top-level shortcut
        Formula body;                       // phi(x,y)
        Cmp cmp;                            // Ge: distinct witnesses; Le: cover
        std::vector<std::string> functions;
    };
    std::vector<Witnessing> witnesses;
    Formula sentence() const;  // A x. A y. chi  &  A x. E[=1] y. m_i(x,y)
};

ScottForm scott_normal_form(const Formula& beta, const Vocabulary& vocab);
// constructive expansion of a model of beta to a model of the normal form
Structure scott_expand(const Structure& m, const ScottForm& nf);

bool is_functional(const Structure& s, const std::vector<std::string>& sigma);
Digraph message_graph(const Structure& s, const std::vector<std::string>& sigma);
bool is_chromatic(const Structure& s, const std::vector<std::string>& sigma, const TypeSignature& sig);
inline bool is_chromatic(const Structure& s, const std::vector<std::string>& sigma) {
    return is_chromatic(s, sigma, TypeSignature(s.vocab()));
}

// proper coloring of the underlying undirected graph with colors 0..2k
std::vector<int> greedy_coloring(const Digraph& g, int k);

int color_count(int sigma_size);  // 2|sigma|^2 + 1
std::string color_symbol(int i, const std::string& prefix = "A_");  // 1-based
Structure chromatic_expansion(const Structure& s, const std::vector<std::string>& sigma,
                              const std::string& prefix = "A_");

}  // namespace msosep
