#include "msosep/hintikka.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "msosep/sat.hpp"

namespace msosep {

namespace {

const std::string succ = "s";
const std::string root = "root";

constexpr std::uint64_t kFnvBasis = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void mix(std::uint64_t& h, std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
        h ^= (x >> (8 * i)) & 0xff;
        h *= kFnvPrime;
    }
}

std::vector<std::string> labels_of(const Vocabulary& v) {
    std::vector<std::string> r;
    for (auto& u : v.unary())
        if (u != root) r.push_back(u);
    return r;
}

int max_count_need(const Formula& f) {
    int r = 1;
    if (f->kind == Kind::Count) r = f->cmp == Cmp::Ge ? f->count : f->count + 1;
    for (auto& k : f->kids) r = std::max(r, max_count_need(k));
    return r;
}

void collect_guards(const Formula& f, std::set<std::string>& out) {
    if (f->kind == Kind::SubExists || f->kind == Kind::SubForall) out.insert(f->guard);
    for (auto& k : f->kids) collect_guards(k, out);
}

bool has_constant(const Formula& f) {
    for (auto& t : f->terms)
        if (is_term_constant(t)) return true;
    for (auto& k : f->kids)
        if (has_constant(k)) return true;
    return false;
}

int root_of(const Structure& t) {
    if (!is_binary_tree(t, succ)) throw Error("NotABinaryTree");
    if (!t.interprets(root)) throw Error("NotABinaryTree", "no " + root + " symbol");
    int r = -1;
    for (int v = 0; v < t.size(); ++v)
        if (!t.column(succ, v)) r = v;
    if (t.unary_set(root) != bit(r)) throw Error("NotABinaryTree", root + " must hold exactly at the tree root");
    return r;
}

Set reachable(const Structure& t, const std::string& succ, int u) {
    Set seen = bit(u), frontier = bit(u);
    while (frontier) {
        Set nxt = 0;
        for (int w = 0; w < t.size(); ++w)
            if (has(frontier, w)) nxt |= t.row(succ, w);
        frontier = nxt & ~seen;
        seen |= nxt;
    }
    return seen;
}

// the subtree at u as a rooted tree
Structure subtree(const Structure& t, int u) {
    Set sub = reachable(t, succ, u);
    Structure r = substructure(t, sub);
    r.set_unary(root, bit(popcount(sub & (bit(u) - 1))));
    return r;
}

std::vector<int> children(const Structure& t, const std::string& succ, int u) {
    std::vector<int> r;
    for (int v = 0; v < t.size(); ++v)
        if (t.holds(succ, u, v)) r.push_back(v);
    return r;
}

std::vector<bool> label_bits(const Structure& t, int u, const std::vector<std::string>& labels) {
    std::vector<bool> b;
    for (auto& l : labels) b.push_back(t.holds(l, u));
    return b;
}

}  // namespace

std::string HintikkaConfig::key() const {
    std::ostringstream o;
    o << vocab.to_string() << "|q=" << q << "|c=" << count_cap << "|g=";
    for (auto& g : sub_guards) o << g << ",";
    return o.str();
}

HintikkaConfig config_for(const Formula& omega, const Vocabulary& vocab) {
    if (has_constant(omega)) throw Error("Unsupported", "element constants in a Hintikka query");
    HintikkaConfig c;
    c.vocab = vocab;
    c.q = quantifier_rank(omega);
    c.count_cap = max_count_need(omega);
    std::set<std::string> g;
    collect_guards(omega, g);
    c.sub_guards.assign(g.begin(), g.end());
    return c;
}

std::string HintikkaValue::hex() const {
    static const char* d = "0123456789abcdef";
    std::string r(16, '0');
    for (int i = 0; i < 16; ++i) r[15 - i] = d[(digest >> (4 * i)) & 15];
    return r;
}

struct HintikkaEngine::Pos {
    std::vector<int> elems;
    std::vector<Set> sets;
    std::vector<std::vector<Set>> subs;
};

HintikkaEngine::HintikkaEngine(HintikkaConfig cfg) : cfg_(std::move(cfg)) {
    for (auto& g : cfg_.sub_guards)
        if (cfg_.vocab.arity(g) != 2) throw Error("UnknownSymbol", "guard " + g);
}

size_t HintikkaEngine::interned() const {
    std::lock_guard<std::mutex> l(mu_);
    return digests_.size();
}

int HintikkaEngine::intern(std::vector<std::int64_t> key, std::uint64_t digest) {
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(digests_.size());
    ids_.emplace(std::move(key), id);
    digests_.push_back(digest);
    return id;
}

int HintikkaEngine::position(const Structure& s, Pos& p, int depth) {
    int n = s.size();
    std::vector<std::int64_t> key{depth, static_cast<std::int64_t>(p.elems.size()),
                                  static_cast<std::int64_t>(p.sets.size()), static_cast<std::int64_t>(p.subs.size())};
    // atomic diagram of the chosen tuple
    std::vector<bool> bits;
    auto un = cfg_.vocab.unary();
    auto bin = cfg_.vocab.binary();
    for (int a : p.elems)
        for (auto& u : un) bits.push_back(s.holds(u, a));
    for (size_t i = 0; i < p.elems.size(); ++i)
        for (size_t j = 0; j < p.elems.size(); ++j) {
            int a = p.elems[i], b = p.elems[j];
            for (auto& r : bin) bits.push_back(s.holds(r, a, b));
            if (i < j) bits.push_back(a == b);
            for (auto& sub : p.subs) bits.push_back(has(sub[a], b));
        }
    for (Set x : p.sets)
        for (int a : p.elems) bits.push_back(has(x, a));
    std::int64_t chunk = 0;
    int used = 0;
    for (bool b : bits) {
        chunk |= static_cast<std::int64_t>(b) << used;
        if (++used == 62) {
            key.push_back(chunk);
            chunk = 0;
            used = 0;
        }
    }
    key.push_back(chunk);
    key.push_back(static_cast<std::int64_t>(bits.size()));
    std::uint64_t h = kFnvBasis;
    for (auto k : key) mix(h, static_cast<std::uint64_t>(k));
    if (depth == 0) return intern(std::move(key), h);

    // element moves: successor value -> capped multiplicity
    std::map<int, int> el;
    for (int a = 0; a < n; ++a) {
        p.elems.push_back(a);
        int c = position(s, p, depth - 1);
        p.elems.pop_back();
        el[c] = std::min(el[c] + 1, cfg_.count_cap);
    }
    std::vector<std::pair<std::uint64_t, int>> dh;
    key.push_back(-1);
    for (auto& [c, k] : el) {
        key.push_back(c);
        key.push_back(k);
        dh.emplace_back(digests_[c], k);
    }
    std::sort(dh.begin(), dh.end());
    mix(h, 0xe1e1);
    for (auto& [d, k] : dh) {
        mix(h, d);
        mix(h, static_cast<std::uint64_t>(k));
    }

    auto add_children = [&](std::set<int>& ch, std::uint64_t tag) {
        key.push_back(-static_cast<std::int64_t>(tag));
        std::vector<std::uint64_t> ds;
        for (int c : ch) {
            key.push_back(c);
            ds.push_back(digests_[c]);
        }
        std::sort(ds.begin(), ds.end());
        mix(h, tag);
        for (auto d : ds) mix(h, d);
    };

    std::set<int> st;
    for (Set x = 0; x <= full_set(n); ++x) {
        p.sets.push_back(x);
        st.insert(position(s, p, depth - 1));
        p.sets.pop_back();
        if (x == full_set(n)) break;
    }
    add_children(st, 2);

    for (size_t g = 0; g < cfg_.sub_guards.size(); ++g) {
        auto tuples = s.pairs(cfg_.sub_guards[g]);
        if (static_cast<int>(tuples.size()) > cfg_.max_guard_tuples)
            throw Error("CapExceeded", "guard " + cfg_.sub_guards[g] + " has " + std::to_string(tuples.size()) + " tuples");
        std::set<int> sb;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << tuples.size()); ++mask) {
            std::vector<Set> rows(n, 0);
            for (size_t i = 0; i < tuples.size(); ++i)
                if ((mask >> i) & 1) rows[tuples[i].first] |= bit(tuples[i].second);
            p.subs.push_back(rows);
            sb.insert(position(s, p, depth - 1));
            p.subs.pop_back();
        }
        add_children(sb, 3 + g);
    }
    return intern(std::move(key), h);
}

namespace {
void check_caps(const Structure& a, const HintikkaConfig& c) {
    if (a.size() > c.max_universe)
        throw Error("CapExceeded", "Hintikka value of a " + std::to_string(a.size()) + "-element structure");
    if (c.q > c.max_q) throw Error("CapExceeded", "Hintikka rank " + std::to_string(c.q));
}
}  // namespace

HintikkaValue HintikkaEngine::value(const Structure& a) {
    check_caps(a, cfg_);
    Structure s = reduct(a, cfg_.vocab);
    std::lock_guard<std::mutex> l(mu_);
    std::string k = s.key();
    int id;
    auto it = memo_.find(k);
    if (it != memo_.end()) {
        id = it->second;
    } else {
        Pos p;
        id = position(s, p, cfg_.q);
        memo_[k] = id;
    }
    auto w = witnesses_.find(id);
    if (w == witnesses_.end())
        witnesses_.emplace(id, s);
    else if (s.size() < w->second.size())
        w->second = s;
    return HintikkaValue{id, digests_[id], this};
}

Structure HintikkaEngine::witness(const HintikkaValue& v) const {
    std::lock_guard<std::mutex> l(mu_);
    if (v.engine != this) throw Error("InvalidArgument", "value from another engine");
    auto it = witnesses_.find(v.id);
    if (it == witnesses_.end()) throw Error("InvalidArgument", "no witness for value " + std::to_string(v.id));
    return it->second;
}

std::shared_ptr<HintikkaEngine> engine_for(const HintikkaConfig& cfg) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<HintikkaEngine>> engines;
    std::lock_guard<std::mutex> l(mu);
    auto& e = engines[cfg.key()];
    if (!e) e = std::make_shared<HintikkaEngine>(cfg);
    return e;
}

// caps are not part of the engine key, so the caller's caps are checked here too
HintikkaValue hintikka_value(const Structure& a, const HintikkaConfig& cfg) {
    check_caps(a, cfg);
    return engine_for(cfg)->value(a);
}

Structure root_edge(const Structure& t1, const Structure& t2) {
    auto root_elem = [](const Structure& t) {
        Set r = t.unary_set("root");
        if (popcount(r) != 1) throw Error("NotABinaryTree", "root must hold at exactly one element");
        return __builtin_ctzll(r);
    };
    int r1 = root_elem(t1), r2 = root_elem(t2);
    Structure u = disjoint_union(t1, t2);
    u.set("s", r1, t1.size() + r2);
    u.set("root", t1.size() + r2, false);
    return u;
}

Structure apply_op(SmoothOp op, const Structure& a, const Structure& b) {
    return op == SmoothOp::Union ? disjoint_union(a, b) : root_edge(a, b);
}

HintikkaValue compose(SmoothOp op, const HintikkaValue& a, const HintikkaValue& b) {
    if (!a.engine || a.engine != b.engine) throw Error("InvalidArgument", "values from different engines");
    auto e = engine_for(a.engine->config());
    return e->value(apply_op(op, e->witness(a), e->witness(b)));
}

std::optional<HintikkaValue> SmoothnessTable::lookup(const HintikkaValue& a, const HintikkaValue& b) const {
    auto it = entries.find({a.id, b.id});
    if (it == entries.end()) return std::nullopt;
    return it->second;
}

void for_each_rooted_tree(const Vocabulary& vocab, int max_n, const std::function<void(const Structure&)>& fn) {
    auto labels = labels_of(vocab);
    int L = static_cast<int>(labels.size());
    for (int n = 1; n <= max_n; ++n) {
        if (L * n > 30) throw Error("CapExceeded", "tree labelling enumeration");
        for (auto& g : binary_tree_shapes(n)) {
            for (std::uint64_t code = 0; code < (std::uint64_t{1} << (L * n)); ++code) {
                Structure t(n, vocab);
                for (int u = 0; u < n; ++u) t.rel_mut(succ).rows[u] = g.out[u];
                t.set(root, 0);
                int i = 0;
                for (int u = 0; u < n; ++u)
                    for (auto& l : labels) t.set(l, u, static_cast<bool>((code >> i++) & 1));
                fn(t);
            }
        }
    }
}

Structure one_point(const Vocabulary& vocab, const std::vector<bool>& bits) {
    Structure s(1, vocab);
    s.set(root, 0);
    auto labels = labels_of(vocab);
    for (size_t i = 0; i < labels.size(); ++i) s.set(labels[i], 0, static_cast<bool>(bits.at(i)));
    return s;
}

SmoothnessTable smoothness_table(SmoothOp op, const HintikkaConfig& cfg, int size_cap, int per_value) {
    auto e = engine_for(cfg);
    SmoothnessTable t{op, cfg, {}, {}, 0};
    std::map<int, std::vector<Structure>> wit;
    std::vector<int> order;
    auto take = [&](const Structure& s) {
        auto v = e->value(s);
        auto& w = wit[v.id];
        if (w.empty()) {
            order.push_back(v.id);
            t.inputs.push_back(v);
        }
        if (static_cast<int>(w.size()) < per_value) w.push_back(s);
    };
    if (op == SmoothOp::Union) {
        for (int n = 1; n <= size_cap; ++n) {
            Structure s(n, cfg.vocab);
            int bits = 0;
            for (auto& [name, a] : cfg.vocab.symbols()) bits += a == 1 ? n : n * n;
            if (bits > 24) throw Error("CapExceeded", "structure enumeration 2^" + std::to_string(bits));
            for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits); ++code) {
                int i = 0;
                for (auto& [name, a] : cfg.vocab.symbols())
                    for (int u = 0; u < n; ++u) {
                        if (a == 1) {
                            s.set(name, u, static_cast<bool>((code >> i++) & 1));
                        } else {
                            for (int v = 0; v < n; ++v) s.set(name, u, v, static_cast<bool>((code >> i++) & 1));
                        }
                    }
                take(s);
            }
        }
    } else {
        for_each_rooted_tree(cfg.vocab, size_cap, take);
    }
    for (int a : order)
        for (int b : order)
            for (auto& wa : wit[a])
                for (auto& wb : wit[b]) {
                    auto r = e->value(apply_op(op, wa, wb));
                    ++t.combinations;
                    auto [it, fresh] = t.entries.emplace(std::make_pair(a, b), r);
                    if (!fresh && it->second != r)
                        throw Error("WellDefinednessViolation",
                                    "(" + std::to_string(a) + "," + std::to_string(b) + ") yields two values");
                }
    return t;
}

Annotation annotate_tree(const Structure& t, const HintikkaConfig& cfg, bool verify) {
    int r = root_of(t);
    auto e = engine_for(cfg);
    auto labels = labels_of(cfg.vocab);
    Annotation a;
    a.node.resize(t.size());
    a.root_index = r;
    std::function<void(int)> go = [&](int u) {
        auto ch = children(t, succ, u);
        for (int c : ch) go(c);
        HintikkaValue v = e->value(one_point(cfg.vocab, label_bits(t, u, labels)));
        for (int c : ch) v = compose(SmoothOp::RootEdge, v, a.node[c]);
        if (verify && v != e->value(subtree(t, u)))
            throw Error("InvariantViolation", "annotation at node " + std::to_string(u) + " differs from its subtree value");
        a.node[u] = v;
    };
    go(r);
    return a;
}

HintikkaValue two_children_swapped(const Structure& t, const Annotation& a, int node, const HintikkaConfig& cfg) {
    auto ch = children(t, succ, node);
    if (ch.size() != 2) throw Error("InvalidArgument", "node needs two children");
    auto e = engine_for(cfg);
    HintikkaValue v = e->value(one_point(cfg.vocab, label_bits(t, node, labels_of(cfg.vocab))));
    v = compose(SmoothOp::RootEdge, v, a.node[ch[1]]);
    return compose(SmoothOp::RootEdge, v, a.node[ch[0]]);
}

bool check_omega(const Structure& t, const Formula& omega, const HintikkaConfig& cfg) {
    auto a = annotate_tree(t, cfg, false);
    return evaluate(engine_for(cfg)->witness(a.node[a.root_index]), omega);
}

bool check_omega(const Structure& t, const Formula& omega) { return check_omega(t, omega, config_for(omega, t.vocab())); }

std::vector<HintikkaValue> tree_value_universe(const HintikkaConfig& cfg, int max_n) {
    auto e = engine_for(cfg);
    std::map<int, HintikkaValue> seen;
    for_each_rooted_tree(cfg.vocab, max_n, [&](const Structure& t) {
        auto v = e->value(t);
        seen.emplace(v.id, v);
    });
    std::vector<HintikkaValue> r;
    for (auto& [id, v] : seen) r.push_back(v);
    std::sort(r.begin(), r.end(), [](const HintikkaValue& x, const HintikkaValue& y) { return x.digest < y.digest; });
    return r;
}

Theta emit_theta_symbolic(const HintikkaConfig& cfg, const std::vector<HintikkaValue>& universe, int max_symbols) {
    auto labels = labels_of(cfg.vocab);
    if (labels.size() > 12) throw Error("CapExceeded", std::to_string(labels.size()) + " labels");
    if (static_cast<int>(universe.size()) > max_symbols)
        throw Error("CapExceeded", std::to_string(universe.size()) + " Hintikka values");
    auto e = engine_for(cfg);
    Theta th;
    th.vocab = cfg.vocab;
    std::vector<Formula> cs;
    for (auto& v : universe) {
        if (v.engine != e.get()) throw Error("InvalidArgument", "value from another configuration");
        std::string name = "C_" + v.hex();
        if (th.vocab.has(name)) throw Error("NameCollision", name);
        th.vocab.add(name, 1);
        th.symbol[v.id] = name;
    }
    auto C = [&](const HintikkaValue& v, const std::string& var) { return f::atom(th.symbol.at(v.id), var); };
    auto in_universe = [&](const HintikkaValue& v) { return th.symbol.count(v.id) != 0; };

    std::vector<Formula> some, excl;
    for (size_t i = 0; i < universe.size(); ++i) {
        some.push_back(C(universe[i], "x"));
        for (size_t j = i + 1; j < universe.size(); ++j)
            excl.push_back(f::disj(f::neg(C(universe[i], "x")), f::neg(C(universe[j], "x"))));
    }
    std::vector<Formula> parts{f::forall("x", f::conj(f::disj(some), f::conj(excl)))};

    Formula kid = f::atom(succ, "x", "y");
    Formula leaf = f::neg(f::exists("y", kid));
    Formula int1 = f::count(Cmp::Eq, 1, "y", kid);
    Formula int2 = f::count(Cmp::Eq, 2, "y", kid);
    auto child = [&](const HintikkaValue& v) { return f::exists("y", f::conj(kid, C(v, "y"))); };

    std::vector<Formula> leaves, ints1, ints2;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << labels.size()); ++m) {
        std::vector<bool> bits;
        std::vector<Formula> lits;
        for (size_t i = 0; i < labels.size(); ++i) {
            bool on = (m >> i) & 1;
            bits.push_back(on);
            lits.push_back(on ? f::atom(labels[i], "x") : f::neg(f::atom(labels[i], "x")));
        }
        Formula this_u = f::conj(lits);
        HintikkaValue o = e->value(one_point(cfg.vocab, bits));
        if (in_universe(o)) leaves.push_back(f::implies(f::conj(leaf, this_u), C(o, "x")));
        for (auto& b : universe) {
            HintikkaValue ob = compose(SmoothOp::RootEdge, o, b);
            if (in_universe(ob)) ints1.push_back(f::implies(f::conj({int1, this_u, child(b)}), C(ob, "x")));
            for (auto& c : universe) {
                if (c.digest < b.digest) continue;
                HintikkaValue r = compose(SmoothOp::RootEdge, ob, c);
                HintikkaValue r2 = compose(SmoothOp::RootEdge, compose(SmoothOp::RootEdge, o, c), b);
                if (r != r2) throw Error("InvariantViolation", "two-children rule depends on attachment order");
                if (!in_universe(r)) continue;
                Formula kids = b == c ? f::count(Cmp::Eq, 2, "y", f::conj(kid, C(b, "y")))
                                      : f::conj(child(b), child(c));
                ints2.push_back(f::implies(f::conj({int2, this_u, kids}), C(r, "x")));
            }
        }
    }
    parts.push_back(f::forall("x", f::conj(leaves)));
    parts.push_back(f::forall("x", f::conj(ints1)));
    parts.push_back(f::forall("x", f::conj(ints2)));
    th.sentence = f::conj(parts);
    return th;
}

Formula omega_hin(const Theta& th, const std::vector<HintikkaValue>& universe, const Formula& omega) {
    std::vector<Formula> good;
    for (auto& v : universe) {
        auto e = engine_for(v.engine->config());
        if (evaluate(e->witness(v), omega)) good.push_back(f::atom(th.symbol.at(v.id), "x"));
    }
    Formula rt = f::forall("y", f::neg(f::atom(succ, "y", "x")));
    return f::forall("x", f::implies(rt, f::disj(good)));
}

Structure theta_expansion(const Structure& t, const Theta& th, const HintikkaConfig& cfg) {
    auto a = annotate_tree(t, cfg, false);
    Structure r = t;
    for (auto& [id, name] : th.symbol) r.add_symbol(name, 1);
    for (int u = 0; u < t.size(); ++u) {
        auto it = th.symbol.find(a.node[u].id);
        if (it == th.symbol.end()) throw Error("CapExceeded", "subtree value outside the Theta universe");
        r.set(it->second, u);
    }
    return r;
}

}  // namespace msosep
