#pragma once
#include <chrono>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "msosep/structures.hpp"

namespace msosep {

using Clock = std::chrono::steady_clock;

// Literals are signed 1-based variable indices, DIMACS style.
class SatSolver {
public:
    enum Result { Sat, Unsat };

    SatSolver();
    int new_var();
    int num_vars() const { return static_cast<int>(assign_.size()) - 1; }
    void add_clause(std::vector<int> lits);
    // throws TimeCap when the deadline passes
    Result solve(const std::vector<int>& assumptions = {});
    bool model_value(int var) const { return model_[var] > 0; }
    void set_deadline(std::optional<Clock::time_point> d) { deadline_ = d; }
    long long conflicts() const { return conflicts_; }

private:
    struct Clause {
        std::vector<int> lits;  // internal literal codes
    };
    std::vector<Clause> clauses_;
    std::vector<std::vector<int>> watches_;  // per internal literal
    std::vector<signed char> assign_;        // per var: 0 unassigned, 1 true, -1 false
    std::vector<int> level_, reason_;
    std::vector<int> trail_, trail_lim_;
    size_t qhead_ = 0;
    std::vector<double> activity_;
    double var_inc_ = 1.0;
    std::vector<int> heap_, heap_pos_;
    std::vector<signed char> phase_, model_;
    std::vector<char> seen_;
    bool unsat_ = false;
    long long conflicts_ = 0;
    std::optional<Clock::time_point> deadline_;

    static int code(int lit) { return lit > 0 ? 2 * lit : 2 * -lit + 1; }
    static int var_of(int c) { return c >> 1; }
    static int neg(int c) { return c ^ 1; }
    int value(int c) const {
        int a = assign_[var_of(c)];
        return (c & 1) ? -a : a;
    }
    int decision_level() const { return static_cast<int>(trail_lim_.size()); }
    void enqueue(int c, int reason);
    int propagate();  // conflicting clause or -1
    void analyze(int confl, std::vector<int>& learnt, int& bt_level);
    void backtrack(int lvl);
    void bump(int v);
    void heap_up(int i);
    void heap_down(int i);
    void heap_insert(int v);
    int heap_pop();
    int attach(std::vector<int> lits);
    void check_deadline();
};

struct GroundOptions {
    int set_enum_cap = 16;  // max universe size for enumerated set quantifiers
    int sub_enum_cap = 16;  // max guard tuples for enumerated sub quantifiers
    std::optional<Clock::time_point> deadline;
};

// Tseitin grounding of a sentence over a fixed universe. Symbols of `fixed`
// are constants; every other symbol of the vocabulary becomes propositional.
class Grounder {
public:
    static constexpr int kTrue = 1;
    static constexpr int kFalse = -1;

    Grounder(SatSolver& solver, int n, const Vocabulary& vocab, const Structure* fixed = nullptr,
             const GroundOptions& o = {});

    int ground(const Formula& f);                  // literal equivalent to f (free vars forbidden)
    void require(const Formula& f) { add_unit(ground(f)); }
    void add_unit(int lit) { solver_.add_clause({lit}); }

    // atom literal (constant for fixed symbols)
    int atom(const std::string& sym, int u, int v = -1);
    // propositional atoms of free symbols in canonical order: symbol name, then tuple row-major
    const std::vector<int>& free_atoms() const { return order_; }
    Structure model() const;  // reads the solver's last model

    int conj(std::vector<int> lits);
    int disj(std::vector<int> lits);
    int at_least(std::vector<int> lits, int t);

private:
    struct SetVal {
        std::vector<int> lits;  // n for sets, n*n for subs
    };
    struct Env {
        std::map<std::string, int> fo;
        std::map<std::string, SetVal> sets;
    };
    SatSolver& solver_;
    int n_;
    Vocabulary vocab_;
    const Structure* fixed_;
    GroundOptions o_;
    std::map<std::string, std::vector<int>> atoms_;
    std::vector<int> order_;
    std::map<std::vector<int>, int> and_cache_;
    std::unordered_map<const Node*, std::vector<std::string>> free_cache_;
    std::map<std::vector<long long>, int> memo_;
    long long steps_ = 0;

    int rec(const Formula& f, Env& env, int pol);
    int term(const std::string& t, const Env& env) const;
    const std::vector<std::string>& node_free(const Formula& f);
    int set_quant(const Formula& f, Env& env, int pol, bool universal);
    int sub_quant(const Formula& f, Env& env, int pol, bool universal);
};

struct ShapeConstraint {
    enum Kind { None, Tree, Treewidth };
    Kind kind = None;
    std::string symbol = "s";  // Tree: the binary tree symbol
    int k = 0;                 // Treewidth: bound
    Vocabulary reduct;         // Treewidth: binary symbols whose Gaifman graph is bounded
};

struct SearchBudget {
    int min_size = 1;
    int max_size = 4;
    ShapeConstraint shape;
    double time_cap_seconds = 0;  // 0: no cap
    enum Engine { Sat, Enumerate } engine = Sat;
};

struct SatResult {
    bool sat = false;
    Structure model;
    int sizes_searched = 0;  // largest size fully searched
    long long solver_calls = 0;
};

// First model in canonical order: size ascending, tree shape index, then the
// free atoms read as a binary number (first atom least significant), smallest first.
SatResult bounded_sat(const Formula& phi, const Vocabulary& vocab, const SearchBudget& budget);

// unordered rooted trees with out-degree <= 2 on n nodes, nodes in preorder, arcs parent -> child
std::vector<Digraph> binary_tree_shapes(int n);
bool is_binary_tree(const Structure& s, const std::string& sym = "s");

}  // namespace msosep
