#include <algorithm>
#include <deque>
#include <numeric>

#include "msosep/structures.hpp"

namespace msosep {

int Digraph::arcs() const {
    int c = 0;
    for (Set s : out) c += popcount(s);
    return c;
}

Digraph Digraph::symmetric() const {
    Digraph g(n);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (u != v && has_arc(u, v)) g.edge(u, v);
    return g;
}

std::vector<std::pair<int, int>> Digraph::edges() const {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (has_arc(u, v) || has_arc(v, u)) e.emplace_back(u, v);
    return e;
}

Digraph gaifman(const Structure& s) {
    Digraph g(s.size());
    for (auto& b : s.vocab().binary())
        for (int u = 0; u < s.size(); ++u)
            for (int v = 0; v < s.size(); ++v)
                if (u != v && s.holds(b, u, v)) g.edge(u, v);
    return g;
}

int elimination_width(const Digraph& g0, const std::vector<int>& order) {
    Digraph g = g0.symmetric();
    Set alive = full_set(g.n);
    int w = 0;
    for (int v : order) {
        Set nb = g.out[v] & alive & ~bit(v);
        w = std::max(w, popcount(nb));
        for (int a = 0; a < g.n; ++a)
            if (has(nb, a)) g.out[a] |= nb & ~bit(a);
        alive &= ~bit(v);
    }
    return w;
}

int treewidth_bruteforce(const Digraph& g) {
    if (g.n > 8) throw Error("TooLarge", std::to_string(g.n));
    std::vector<int> order(g.n);
    std::iota(order.begin(), order.end(), 0);
    int best = g.n;
    do {
        best = std::min(best, elimination_width(g, order));
    } while (std::next_permutation(order.begin(), order.end()));
    return g.n == 0 ? 0 : best;
}

namespace {

// |Q(S, v)|: vertices outside S ∪ {v} reachable from v through S
int q_size(const Digraph& g, Set S, int v) {
    Set seen = bit(v), frontier = bit(v), result = 0;
    while (frontier) {
        int u = __builtin_ctzll(frontier);
        frontier &= frontier - 1;
        Set nb = g.out[u] & ~seen;
        seen |= nb;
        result |= nb & ~S;
        frontier |= nb & S;
    }
    return popcount(result);
}

}  // namespace

TreeDecompositionOrder treewidth_order(const Digraph& g0) {
    Digraph g = g0.symmetric();
    int n = g.n;
    if (n > kTreewidthMax) throw Error("TooLarge", std::to_string(n));
    TreeDecompositionOrder r;
    if (n == 0) return r;
    // tw[S]: best width eliminating exactly S first
    std::vector<std::uint8_t> tw(std::size_t{1} << n, 0);
    for (std::size_t S = 1; S < tw.size(); ++S) {
        int best = n;
        Set rest = S;
        while (rest) {
            int v = __builtin_ctzll(rest);
            rest &= rest - 1;
            Set prev = S & ~bit(v);
            int w = std::max<int>(tw[prev], q_size(g, prev, v));
            best = std::min(best, w);
        }
        tw[S] = static_cast<std::uint8_t>(best);
    }
    Set S = full_set(n);
    r.width = tw[S];
    std::vector<int> rev;
    while (S) {
        Set rest = S;
        int pick = -1;
        while (rest) {
            int v = __builtin_ctzll(rest);
            rest &= rest - 1;
            Set prev = S & ~bit(v);
            if (std::max<int>(tw[prev], q_size(g, prev, v)) == tw[S]) { pick = v; break; }
        }
        rev.push_back(pick);
        S &= ~bit(pick);
    }
    r.order.assign(rev.rbegin(), rev.rend());
    return r;
}

int treewidth(const Digraph& g) { return treewidth_order(g).width; }

int Orientation::max_out() const {
    size_t m = 0;
    for (auto& o : out) m = std::max(m, o.size());
    return static_cast<int>(m);
}

namespace {

// Each edge picks its tail; vertex capacity k-1. Augmenting-path assignment,
// exact by the Hakimi orientation criterion.
std::optional<Orientation> orient_flow(const Digraph& g, int cap) {
    auto es = g.edges();
    int m = static_cast<int>(es.size());
    std::vector<int> tail(m, -1);
    std::vector<int> load(g.n, 0);
    std::vector<std::vector<int>> owned(g.n);
    for (int e = 0; e < m; ++e) {
        // BFS over vertices; moving an owned edge to its other endpoint frees a slot
        std::vector<int> from_edge(g.n, -1), prev(g.n, -1);
        std::vector<char> seen(g.n, 0);
        std::deque<int> q;
        for (int v : {es[e].first, es[e].second}) {
            seen[v] = 1;
            q.push_back(v);
        }
        int found = -1;
        while (!q.empty() && found < 0) {
            int v = q.front();
            q.pop_front();
            if (load[v] < cap) { found = v; break; }
            for (int f : owned[v]) {
                int other = es[f].first == v ? es[f].second : es[f].first;
                if (seen[other]) continue;
                seen[other] = 1;
                from_edge[other] = f;
                prev[other] = v;
                q.push_back(other);
            }
        }
        if (found < 0) return std::nullopt;
        ++load[found];
        int v = found;
        while (prev[v] >= 0) {
            int f = from_edge[v], p = prev[v];
            owned[p].erase(std::find(owned[p].begin(), owned[p].end(), f));
            owned[v].push_back(f);
            tail[f] = v;
            v = p;
        }
        owned[v].push_back(e);
        tail[e] = v;
    }
    Orientation o;
    o.out.assign(g.n, {});
    for (int e = 0; e < m; ++e) {
        int t = tail[e];
        o.out[t].push_back(es[e].first == t ? es[e].second : es[e].first);
    }
    for (auto& l : o.out) std::sort(l.begin(), l.end());
    return o;
}

std::optional<Orientation> orient_greedy(const Digraph& g, int cap) {
    Set alive = full_set(g.n);
    Orientation o;
    o.out.assign(g.n, {});
    for (int step = 0; step < g.n; ++step) {
        int best = -1, bd = g.n + 1;
        for (int v = 0; v < g.n; ++v) {
            if (!has(alive, v)) continue;
            int d = popcount(g.out[v] & alive & ~bit(v));
            if (d < bd) { bd = d; best = v; }
        }
        if (bd > cap) return std::nullopt;
        Set nb = g.out[best] & alive & ~bit(best);
        for (int u = 0; u < g.n; ++u)
            if (has(nb, u)) o.out[best].push_back(u);
        alive &= ~bit(best);
    }
    return o;
}

}  // namespace

OrientResult try_orient_k_bounded(const Digraph& g0, int k) {
    Digraph g = g0.symmetric();
    OrientResult r;
    int cap = k - 1;
    if (cap < 0) cap = -1;
    if (cap >= 0) {
        r.orientation = orient_greedy(g, cap);
        if (!r.orientation) r.orientation = orient_flow(g, cap);
    }
    if (r.orientation) return r;
    if (g.n <= 20) {
        for (Set H = 1; H < (Set{1} << g.n); ++H) {
            int e = 0;
            for (int u = 0; u < g.n; ++u)
                if (has(H, u)) e += popcount(g.out[u] & H);
            e /= 2;
            if (e > cap * popcount(H)) {
                for (int u = 0; u < g.n; ++u)
                    if (has(H, u)) r.certificate.push_back(u);
                break;
            }
        }
    }
    return r;
}

Orientation orient_k_bounded(const Digraph& g, int k) {
    auto r = try_orient_k_bounded(g, k);
    if (!r.orientation) {
        std::string cert;
        for (int v : r.certificate) cert += (cert.empty() ? "" : ",") + std::to_string(v);
        throw Error("NotKBounded", "k=" + std::to_string(k) + (cert.empty() ? "" : " dense set {" + cert + "}"));
    }
    return *r.orientation;
}

std::string r_symbol(int i) { return "R_" + std::to_string(i); }

Structure oriented_k_tree_expand(const Structure& s, int k) {
    Digraph g = gaifman(s);
    int n = g.n;
    auto td = treewidth_order(g);
    if (td.width > k) throw Error("TreewidthExceeded", "tw=" + std::to_string(td.width) + " > k=" + std::to_string(k));
    // fill-in graph of the elimination order
    Digraph h = g;
    {
        Set alive = full_set(n);
        for (int v : td.order) {
            Set nb = h.out[v] & alive & ~bit(v);
            for (int a = 0; a < n; ++a)
                if (has(nb, a)) h.out[a] |= nb & ~bit(a);
            alive &= ~bit(v);
        }
    }
    std::vector<int> rev(td.order.rbegin(), td.order.rend());
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[rev[i]] = i;
    int m = std::min(n, k + 1);
    std::vector<Set> pad(n, 0);
    Set initial = 0;
    for (int i = 0; i < m; ++i) initial |= bit(rev[i]);
    for (int i = 0; i < m; ++i) pad[rev[i]] = initial & ~bit(rev[i]);
    for (int i = m; i < n; ++i) {
        int v = rev[i];
        Set earlier = 0;
        for (int j = 0; j < i; ++j) earlier |= bit(rev[j]);
        Set e = h.out[v] & earlier;
        int parent = rev[0];
        for (int j = i - 1; j >= 0; --j)
            if (has(e, rev[j])) { parent = rev[j]; break; }
        Set pool = pad[parent] | bit(parent);
        if ((e & ~pool) != 0) throw Error("InternalError", "fill-in graph is not chordal along the order");
        Set p = e;
        for (int j = 0; j < n && popcount(p) < k; ++j)
            if (has(pool, rev[j]) && !has(p, rev[j])) p |= bit(rev[j]);
        pad[v] = p;
    }
    Structure r = s;
    for (int i = 1; i <= k; ++i) {
        if (r.vocab().has(r_symbol(i))) throw Error("NameCollision", r_symbol(i));
        r.add_symbol(r_symbol(i), 2);
    }
    for (int v = 0; v < n; ++v) {
        std::vector<int> targets;
        for (int u = 0; u < n; ++u)
            if (has(pad[v], u)) targets.push_back(u);
        for (int i = 0; i < k; ++i) r.set(r_symbol(i + 1), v, i < static_cast<int>(targets.size()) ? targets[i] : v);
    }
    return r;
}

}  // namespace msosep
