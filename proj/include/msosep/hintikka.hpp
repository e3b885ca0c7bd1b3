#pragma once
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "msosep/structures.hpp"

namespace msosep {

// trees use the successor symbol s and the unary root symbol

// What a value remembers. q rounds of moves; an element move records how many
// elements lead to each successor value, capped at count_cap (1 = plain MSO);
// sub_guards lists the binary symbols whose relation subsets may be chosen.
struct HintikkaConfig {
    Vocabulary vocab;
    int q = 1;
    int count_cap = 1;
    std::vector<std::string> sub_guards;
    int max_universe = 8;  // CapExceeded beyond
    int max_q = 3;
    int max_guard_tuples = 12;
    std::string key() const;
};

// q = qr(omega), count cap and guards read off omega; constants raise Unsupported
HintikkaConfig config_for(const Formula& omega, const Vocabulary& vocab);

class HintikkaEngine;

struct HintikkaValue {
    int id = -1;
    std::uint64_t digest = 0;  // stable across runs
    const HintikkaEngine* engine = nullptr;
    bool operator==(const HintikkaValue& o) const { return engine == o.engine && id == o.id; }
    bool operator!=(const HintikkaValue& o) const { return !(*this == o); }
    bool operator<(const HintikkaValue& o) const { return id < o.id; }
    std::string hex() const;
};

class HintikkaEngine {
public:
    explicit HintikkaEngine(HintikkaConfig cfg);
    const HintikkaConfig& config() const { return cfg_; }
    HintikkaValue value(const Structure& a);
    Structure witness(const HintikkaValue& v) const;
    size_t interned() const;

private:
    struct Pos;
    int position(const Structure& s, Pos& p, int depth);
    int intern(std::vector<std::int64_t> key, std::uint64_t digest);

    HintikkaConfig cfg_;
    mutable std::mutex mu_;
    std::map<std::vector<std::int64_t>, int> ids_;
    std::vector<std::uint64_t> digests_;
    std::map<int, Structure> witnesses_;
    std::map<std::string, int> memo_;  // structure key -> top value
};

// process-wide engine per configuration
std::shared_ptr<HintikkaEngine> engine_for(const HintikkaConfig& cfg);
HintikkaValue hintikka_value(const Structure& a, const HintikkaConfig& cfg);

enum class SmoothOp { Union, RootEdge };

// t1 and t2 rooted trees (unary root on exactly the root): disjoint union, edge s from
// root(t1) to root(t2), root kept only on t1's root
Structure root_edge(const Structure& t1, const Structure& t2);
Structure apply_op(SmoothOp op, const Structure& a, const Structure& b);

// value of op applied to any structures with values a, b (computed on their witnesses)
HintikkaValue compose(SmoothOp op, const HintikkaValue& a, const HintikkaValue& b);

struct SmoothnessTable {
    SmoothOp op;
    HintikkaConfig cfg;
    std::map<std::pair<int, int>, HintikkaValue> entries;
    std::vector<HintikkaValue> inputs;  // distinct input values seen
    long long combinations = 0;         // witness pairs evaluated
    std::optional<HintikkaValue> lookup(const HintikkaValue& a, const HintikkaValue& b) const;
};

// all structures over cfg.vocab (Union) or all rooted labelled binary trees (RootEdge)
// up to size_cap; up to per_value witnesses of each input value are combined and
// every collision must agree, else WellDefinednessViolation
SmoothnessTable smoothness_table(SmoothOp op, const HintikkaConfig& cfg, int size_cap, int per_value = 3);

// every binary tree with root 0 on up to max_n nodes, every labelling by the unary
// symbols of vocab other than root
void for_each_rooted_tree(const Vocabulary& vocab, int max_n, const std::function<void(const Structure&)>& fn);

// one point, root, unary labels as given by bits over the non-root unary symbols
Structure one_point(const Vocabulary& vocab, const std::vector<bool>& labels);

struct Annotation {
    std::vector<HintikkaValue> node;  // per tree node
    HintikkaValue root() const { return node.at(root_index); }
    int root_index = 0;
};

// bottom up: leaves are one-point structures, one child composes once, two children
// compose twice in ascending child order; verify recomputes every subtree directly
Annotation annotate_tree(const Structure& t, const HintikkaConfig& cfg, bool verify = true);
// the value with the two children attached in the other order
HintikkaValue two_children_swapped(const Structure& t, const Annotation& a, int node, const HintikkaConfig& cfg);

bool check_omega(const Structure& t, const Formula& omega);
bool check_omega(const Structure& t, const Formula& omega, const HintikkaConfig& cfg);

// values of all rooted labelled trees up to max_n nodes
std::vector<HintikkaValue> tree_value_universe(const HintikkaConfig& cfg, int max_n);

struct Theta {
    Formula sentence;
    std::map<int, std::string> symbol;  // value id -> C symbol
    Vocabulary vocab;                   // cfg.vocab plus C symbols
};
// part & leaves & ints1 & ints2 over the given values; sound on trees all of whose
// subtree values lie in the universe. CapExceeded when the label or value count is too large.
Theta emit_theta_symbolic(const HintikkaConfig& cfg, const std::vector<HintikkaValue>& universe, int max_symbols = 4096);
// for all x (root(x) -> OR of C_e over values whose witness satisfies omega)
Formula omega_hin(const Theta& th, const std::vector<HintikkaValue>& universe, const Formula& omega);
// expansion of t by the C symbols according to annotate_tree
Structure theta_expansion(const Structure& t, const Theta& th, const HintikkaConfig& cfg);

}  // namespace msosep
