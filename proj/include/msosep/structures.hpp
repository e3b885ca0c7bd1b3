#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msosep/logic.hpp"

namespace msosep {

using Set = std::uint64_t;  // element sets; universes are capped at 64
constexpr int kMaxUniverse = 64;

inline Set bit(int i) { return Set{1} << i; }
inline Set full_set(int n) { return n >= 64 ? ~Set{0} : (bit(n) - 1); }
inline int popcount(Set s) { return __builtin_popcountll(s); }
inline bool has(Set s, int i) { return (s >> i) & 1; }

// unary: rows[0] holds the set; binary: rows[u] holds {v : (u,v)}
struct Relation {
    int arity = 1;
    std::vector<Set> rows;
    bool operator==(const Relation& o) const { return arity == o.arity && rows == o.rows; }
};

class Structure {
public:
    Structure() = default;
    Structure(int n, const Vocabulary& v);

    int size() const { return n_; }
    const Vocabulary& vocab() const { return vocab_; }
    bool interprets(const std::string& s) const { return rels_.count(s) != 0; }

    void add_symbol(const std::string& s, int arity);
    void drop_symbol(const std::string& s);

    bool holds(const std::string& s, int u) const { return has(rel(s).rows[0], u); }
    bool holds(const std::string& s, int u, int v) const { return has(rel(s).rows[u], v); }
    void set(const std::string& s, int u, bool on = true);
    void set(const std::string& s, int u, int v, bool on = true);

    Set unary_set(const std::string& s) const { return rel(s).rows[0]; }
    void set_unary(const std::string& s, Set x);
    Set row(const std::string& s, int u) const { return rel(s).rows[u]; }
    Set column(const std::string& s, int v) const;
    const Relation& rel(const std::string& s) const;
    Relation& rel_mut(const std::string& s);
    std::vector<std::pair<int, int>> pairs(const std::string& s) const;

    bool operator==(const Structure& o) const { return n_ == o.n_ && vocab_ == o.vocab_ && rels_ == o.rels_; }
    bool operator!=(const Structure& o) const { return !(*this == o); }

    std::string to_text() const;
    // vocab may be null; arities are then inferred from tuples (or name/arity)
    static Structure parse(const std::string& text, const Vocabulary* vocab = nullptr);
    // compact canonical key (not isomorphism-invariant)
    std::string key() const;

private:
    int n_ = 0;
    Vocabulary vocab_;
    std::map<std::string, Relation> rels_;
};

struct Assignment {
    std::map<std::string, int> fo;
    std::map<std::string, Set> sets;
    std::map<std::string, std::vector<Set>> subs;
};

struct EvalOptions {
    int set_quantifier_cap = 20;   // max universe size for set quantifiers
    int sub_quantifier_cap = 20;   // max guard tuples for relation-subset quantifiers
};

bool evaluate(const Structure& s, const Formula& f, const Assignment& a = {}, const EvalOptions& o = {});

Structure disjoint_union(const Structure& a, const Structure& b);
Structure reduct(const Structure& s, const Vocabulary& sub);
Structure expand(const Structure& s, const Structure& extra);  // same universe, adds extra's symbols
Structure substructure(const Structure& s, Set subset);
Structure permute(const Structure& s, const std::vector<int>& perm);  // element u becomes perm[u]
std::optional<std::vector<int>> find_isomorphism(const Structure& a, const Structure& b);
bool isomorphic(const Structure& a, const Structure& b);

struct Digraph {
    int n = 0;
    std::vector<Set> out;
    explicit Digraph(int n_ = 0) : n(n_), out(n_, 0) {}
    void arc(int u, int v) { out[u] |= bit(v); }
    void edge(int u, int v) { out[u] |= bit(v); out[v] |= bit(u); }
    bool has_arc(int u, int v) const { return ::msosep::has(out[u], v); }
    int arcs() const;
    Digraph symmetric() const;
    std::vector<std::pair<int, int>> edges() const;  // u < v, symmetric graphs
};

Digraph gaifman(const Structure& s);

struct TreeDecompositionOrder {
    int width = 0;
    std::vector<int> order;  // elimination order, first eliminated first
};

constexpr int kTreewidthMax = 20;
int treewidth(const Digraph& g);
TreeDecompositionOrder treewidth_order(const Digraph& g);
int treewidth_bruteforce(const Digraph& g);  // n <= 8 oracle
int elimination_width(const Digraph& g, const std::vector<int>& order);

struct Orientation {
    std::vector<std::vector<int>> out;
    int max_out() const;
};

struct OrientResult {
    std::optional<Orientation> orientation;
    std::vector<int> certificate;  // vertex set with more than (k-1)|H| edges
};

// out-degrees < k; throws NotKBounded when impossible
Orientation orient_k_bounded(const Digraph& g, int k);
OrientResult try_orient_k_bounded(const Digraph& g, int k);

std::string r_symbol(int i);  // R_1 .. R_k
Structure oriented_k_tree_expand(const Structure& s, int k);

}  // namespace msosep
