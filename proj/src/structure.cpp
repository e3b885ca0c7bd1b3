#include <algorithm>
#include <numeric>
#include <sstream>

#include "msosep/structures.hpp"

namespace msosep {

Structure::Structure(int n, const Vocabulary& v) : n_(n), vocab_() {
    if (n < 1) throw Error("EmptyUniverse", "structures have at least one element");
    if (n > kMaxUniverse) throw Error("TooLarge", std::to_string(n));
    for (auto& [name, a] : v.symbols()) add_symbol(name, a);
}

void Structure::add_symbol(const std::string& s, int arity) {
    if (rels_.count(s)) {
        if (rels_[s].arity != arity) throw Error("ArityMismatch", s);
        return;
    }
    vocab_.add(s, arity);
    rels_[s] = Relation{arity, std::vector<Set>(arity == 1 ? 1 : n_, 0)};
}

void Structure::drop_symbol(const std::string& s) {
    rels_.erase(s);
    Vocabulary v;
    for (auto& [name, a] : vocab_.symbols())
        if (name != s) v.add(name, a);
    vocab_ = v;
}

const Relation& Structure::rel(const std::string& s) const {
    auto it = rels_.find(s);
    if (it == rels_.end()) throw Error("UnknownSymbol", s);
    return it->second;
}

Relation& Structure::rel_mut(const std::string& s) {
    auto it = rels_.find(s);
    if (it == rels_.end()) throw Error("UnknownSymbol", s);
    return it->second;
}

void Structure::set(const std::string& s, int u, bool on) {
    auto& r = rel_mut(s);
    if (r.arity != 1) throw Error("ArityMismatch", s);
    if (on) r.rows[0] |= bit(u);
    else r.rows[0] &= ~bit(u);
}

void Structure::set(const std::string& s, int u, int v, bool on) {
    auto& r = rel_mut(s);
    if (r.arity != 2) throw Error("ArityMismatch", s);
    if (on) r.rows[u] |= bit(v);
    else r.rows[u] &= ~bit(v);
}

void Structure::set_unary(const std::string& s, Set x) {
    auto& r = rel_mut(s);
    if (r.arity != 1) throw Error("ArityMismatch", s);
    r.rows[0] = x & full_set(n_);
}

Set Structure::column(const std::string& s, int v) const {
    const auto& r = rel(s);
    Set c = 0;
    for (int u = 0; u < n_; ++u)
        if (has(r.rows[u], v)) c |= bit(u);
    return c;
}

std::vector<std::pair<int, int>> Structure::pairs(const std::string& s) const {
    const auto& r = rel(s);
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < n_; ++u)
        for (int v = 0; v < n_; ++v)
            if (has(r.rows[u], v)) out.emplace_back(u, v);
    return out;
}

std::string Structure::to_text() const {
    std::ostringstream o;
    o << "universe " << n_ << "\n";
    for (auto& [name, r] : rels_) {
        std::vector<std::string> ts;
        if (r.arity == 1) {
            for (int u = 0; u < n_; ++u)
                if (has(r.rows[0], u)) ts.push_back(std::to_string(u));
        } else {
            for (auto [u, v] : pairs(name)) ts.push_back("(" + std::to_string(u) + "," + std::to_string(v) + ")");
        }
        o << name;
        if (ts.empty() && r.arity == 2) o << "/2";
        o << " = {";
        for (size_t i = 0; i < ts.size(); ++i) o << (i ? ", " : "") << ts[i];
        o << "}\n";
    }
    return o.str();
}

Structure Structure::parse(const std::string& text, const Vocabulary* vocab) {
    std::istringstream in(text);
    std::string line;
    int n = -1;
    struct Pending {
        std::string name;
        int arity;
        std::vector<std::pair<int, int>> tuples;
    };
    std::vector<Pending> rels;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string t;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) t += c;
        if (t.empty()) continue;
        if (t.rfind("universe", 0) == 0) {
            n = std::stoi(t.substr(8));
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos || t.size() < eq + 3 || t[eq + 1] != '{' || t.back() != '}')
            throw Error("SyntaxError", "structure line '" + line + "'");
        Pending p;
        p.name = t.substr(0, eq);
        p.arity = 0;
        auto slash = p.name.find('/');
        if (slash != std::string::npos) {
            p.arity = std::stoi(p.name.substr(slash + 1));
            p.name.resize(slash);
        }
        std::string body = t.substr(eq + 2, t.size() - eq - 3);
        size_t i = 0;
        while (i < body.size()) {
            if (body[i] == ',') { ++i; continue; }
            if (body[i] == '(') {
                auto close = body.find(')', i);
                if (close == std::string::npos) throw Error("SyntaxError", line);
                auto inner = body.substr(i + 1, close - i - 1);
                auto comma = inner.find(',');
                if (comma == std::string::npos) throw Error("SyntaxError", line);
                p.tuples.emplace_back(std::stoi(inner.substr(0, comma)), std::stoi(inner.substr(comma + 1)));
                if (p.arity == 1) throw Error("ArityMismatch", p.name);
                p.arity = 2;
                i = close + 1;
            } else {
                size_t j = i;
                while (j < body.size() && std::isdigit(static_cast<unsigned char>(body[j]))) ++j;
                if (j == i) throw Error("SyntaxError", line);
                p.tuples.emplace_back(std::stoi(body.substr(i, j - i)), -1);
                if (p.arity == 2) throw Error("ArityMismatch", p.name);
                p.arity = 1;
                i = j;
            }
        }
        if (vocab && vocab->has(p.name)) {
            if (p.arity && p.arity != vocab->arity(p.name)) throw Error("ArityMismatch", p.name);
            p.arity = vocab->arity(p.name);
        }
        if (!p.arity) p.arity = 1;
        rels.push_back(p);
    }
    if (n < 1) throw Error("SyntaxError", "missing or empty universe");
    Structure s(n, vocab ? *vocab : Vocabulary{});
    for (auto& p : rels) {
        s.add_symbol(p.name, p.arity);
        for (auto [u, v] : p.tuples) {
            if (u < 0 || u >= n || (p.arity == 2 && (v < 0 || v >= n)))
                throw Error("SyntaxError", "element out of range in " + p.name);
            if (p.arity == 1) s.set(p.name, u);
            else s.set(p.name, u, v);
        }
    }
    return s;
}

std::string Structure::key() const {
    std::string k = std::to_string(n_) + ";";
    for (auto& [name, r] : rels_) {
        k += name + ":";
        for (Set x : r.rows) k += std::to_string(x) + ",";
        k += ";";
    }
    return k;
}

Structure disjoint_union(const Structure& a, const Structure& b) {
    if (!(a.vocab() == b.vocab())) throw Error("VocabularyMismatch");
    int n = a.size(), m = b.size();
    Structure r(n + m, a.vocab());
    for (auto& [name, ar] : a.vocab().symbols()) {
        if (ar == 1) {
            r.set_unary(name, a.unary_set(name) | (b.unary_set(name) << n));
        } else {
            auto& rr = r.rel_mut(name);
            for (int u = 0; u < n; ++u) rr.rows[u] = a.row(name, u);
            for (int u = 0; u < m; ++u) rr.rows[n + u] = b.row(name, u) << n;
        }
    }
    return r;
}

Structure reduct(const Structure& s, const Vocabulary& sub) {
    Structure r(s.size(), Vocabulary{});
    for (auto& [name, a] : sub.symbols()) {
        if (s.vocab().arity(name) != a) throw Error("VocabularyMismatch", name);
        r.add_symbol(name, a);
        r.rel_mut(name) = s.rel(name);
    }
    return r;
}

Structure expand(const Structure& s, const Structure& extra) {
    if (extra.size() != s.size()) throw Error("UniverseMismatch");
    Structure r = s;
    for (auto& [name, a] : extra.vocab().symbols()) {
        r.add_symbol(name, a);
        r.rel_mut(name) = extra.rel(name);
    }
    return r;
}

Structure substructure(const Structure& s, Set subset) {
    subset &= full_set(s.size());
    if (!subset) throw Error("EmptySubset");
    std::vector<int> keep;
    for (int u = 0; u < s.size(); ++u)
        if (has(subset, u)) keep.push_back(u);
    Structure r(static_cast<int>(keep.size()), s.vocab());
    for (auto& [name, a] : s.vocab().symbols()) {
        for (size_t i = 0; i < keep.size(); ++i) {
            if (a == 1) {
                if (s.holds(name, keep[i])) r.set(name, static_cast<int>(i));
            } else {
                for (size_t j = 0; j < keep.size(); ++j)
                    if (s.holds(name, keep[i], keep[j])) r.set(name, static_cast<int>(i), static_cast<int>(j));
            }
        }
    }
    return r;
}

Structure permute(const Structure& s, const std::vector<int>& p) {
    Structure r(s.size(), s.vocab());
    for (auto& [name, a] : s.vocab().symbols()) {
        for (int u = 0; u < s.size(); ++u) {
            if (a == 1) {
                if (s.holds(name, u)) r.set(name, p[u]);
            } else {
                for (int v = 0; v < s.size(); ++v)
                    if (s.holds(name, u, v)) r.set(name, p[u], p[v]);
            }
        }
    }
    return r;
}

namespace {

// invariant per element used to prune the isomorphism search
std::vector<std::vector<int>> element_profiles(const Structure& s) {
    std::vector<std::vector<int>> prof(s.size());
    for (auto& [name, a] : s.vocab().symbols()) {
        for (int u = 0; u < s.size(); ++u) {
            if (a == 1) {
                prof[u].push_back(s.holds(name, u));
            } else {
                prof[u].push_back(s.holds(name, u, u));
                prof[u].push_back(popcount(s.row(name, u)));
                prof[u].push_back(popcount(s.column(name, u)));
            }
        }
    }
    return prof;
}

}  // namespace

std::optional<std::vector<int>> find_isomorphism(const Structure& a, const Structure& b) {
    if (a.size() != b.size() || !(a.vocab() == b.vocab())) return std::nullopt;
    int n = a.size();
    auto pa = element_profiles(a), pb = element_profiles(b);
    {
        auto sa = pa, sb = pb;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        if (sa != sb) return std::nullopt;
    }
    auto bins = a.vocab().binary();
    std::vector<int> map(n, -1);
    Set used = 0;
    std::function<bool(int)> go = [&](int u) -> bool {
        if (u == n) return true;
        for (int v = 0; v < n; ++v) {
            if (has(used, v) || pa[u] != pb[v]) continue;
            bool ok = true;
            for (auto& r : bins) {
                for (int w = 0; w < u && ok; ++w) {
                    if (a.holds(r, u, w) != b.holds(r, v, map[w])) ok = false;
                    if (a.holds(r, w, u) != b.holds(r, map[w], v)) ok = false;
                }
                if (!ok) break;
            }
            if (!ok) continue;
            map[u] = v;
            used |= bit(v);
            if (go(u + 1)) return true;
            used &= ~bit(v);
            map[u] = -1;
        }
        return false;
    };
    if (!go(0)) return std::nullopt;
    return map;
}

bool isomorphic(const Structure& a, const Structure& b) { return find_isomorphism(a, b).has_value(); }

}  // namespace msosep
