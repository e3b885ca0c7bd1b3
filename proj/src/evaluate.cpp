#include <unordered_map>

#include "msosep/structures.hpp"

namespace msosep {

namespace {

// Terms and variables resolved to slots once; the tree is then walked with flat arrays.
struct CNode {
    Kind kind;
    const Relation* rel = nullptr;
    int slot = -1;               // bound FO slot / set slot / sub slot
    int t0 = -1, t1 = -1;        // term slots; negative = constant -(c+1)
    Cmp cmp = Cmp::Ge;
    int count = 0;
    std::vector<int> card;       // set slots for Card
    int card_lhs = 0;
    std::vector<int> kids;
    std::vector<int> memo_fo;    // free FO slots when memoized
    bool memo = false;
    bool heavy = false;          // contains a set/sub quantifier
};

class Evaluator {
public:
    Evaluator(const Structure& s, const EvalOptions& o) : s_(s), o_(o), n_(s.size()) {}

    bool run(const Formula& f, const Assignment& a) {
        Scope sc;
        for (auto& [v, e] : a.fo) {
            if (e < 0 || e >= n_) throw Error("ElementOutOfRange", v);
            int slot = new_fo();
            sc.fo[v].push_back(slot);
            init_fo_.emplace_back(slot, e);
        }
        for (auto& [v, x] : a.sets) {
            int slot = new_set();
            sc.sets[v].push_back(slot);
            init_set_.emplace_back(slot, x);
        }
        for (auto& [v, rows] : a.subs) {
            int slot = new_sub();
            sc.subs[v].push_back(slot);
            init_sub_.emplace_back(slot, rows);
        }
        int root = compile(f, sc);
        fo_.assign(nfo_, -1);
        sets_.assign(nset_, 0);
        subs_.assign(nsub_, std::vector<Set>(n_, 0));
        for (auto& [s, e] : init_fo_) fo_[s] = e;
        for (auto& [s, x] : init_set_) sets_[s] = x;
        for (auto& [s, r] : init_sub_) subs_[s] = r;
        memo_.resize(nodes_.size());
        return eval(root);
    }

private:
    const Structure& s_;
    EvalOptions o_;
    int n_;
    std::vector<CNode> nodes_;
    int nfo_ = 0, nset_ = 0, nsub_ = 0;
    std::vector<std::pair<int, int>> init_fo_;
    std::vector<std::pair<int, Set>> init_set_;
    std::vector<std::pair<int, std::vector<Set>>> init_sub_;
    std::vector<int> fo_;
    std::vector<Set> sets_;
    std::vector<std::vector<Set>> subs_;
    std::vector<std::unordered_map<std::uint64_t, bool>> memo_;

    struct Scope {
        std::map<std::string, std::vector<int>> fo, sets, subs;
    };

    int new_fo() { return nfo_++; }
    int new_set() { return nset_++; }
    int new_sub() { return nsub_++; }

    int term(const std::string& t, const Scope& sc) {
        if (is_term_constant(t)) {
            int c = std::stoi(t);
            if (c >= n_) throw Error("ElementOutOfRange", t);
            return -(c + 1);
        }
        auto it = sc.fo.find(t);
        if (it == sc.fo.end() || it->second.empty()) throw Error("UnassignedFreeVariable", t);
        return it->second.back();
    }

    static int lookup(const std::map<std::string, std::vector<int>>& m, const std::string& v) {
        auto it = m.find(v);
        if (it == m.end() || it->second.empty()) throw Error("UnassignedFreeVariable", v);
        return it->second.back();
    }

    int compile(const Formula& f, Scope& sc) {
        CNode c;
        c.kind = f->kind;
        switch (f->kind) {
            case Kind::Unary: case Kind::Binary: {
                c.rel = &s_.rel(f->name);
                int want = f->kind == Kind::Unary ? 1 : 2;
                if (c.rel->arity != want) throw Error("ArityMismatch", f->name);
                c.t0 = term(f->terms[0], sc);
                if (want == 2) c.t1 = term(f->terms[1], sc);
                break;
            }
            case Kind::Equal:
                c.t0 = term(f->terms[0], sc);
                c.t1 = term(f->terms[1], sc);
                break;
            case Kind::SetAtom:
                c.slot = lookup(sc.sets, f->name);
                c.t0 = term(f->terms[0], sc);
                break;
            case Kind::SubAtom:
                c.slot = lookup(sc.subs, f->name);
                c.t0 = term(f->terms[0], sc);
                c.t1 = term(f->terms[1], sc);
                break;
            case Kind::Card:
                for (auto& v : f->terms) c.card.push_back(lookup(sc.sets, v));
                c.card_lhs = f->count;
                break;
            case Kind::Forall: case Kind::Exists: case Kind::Count: {
                c.slot = new_fo();
                c.cmp = f->cmp;
                c.count = f->count;
                sc.fo[f->name].push_back(c.slot);
                c.kids.push_back(compile(f->kids[0], sc));
                sc.fo[f->name].pop_back();
                c.heavy = nodes_[c.kids[0]].heavy;
                break;
            }
            case Kind::SetForall: case Kind::SetExists:
                c.slot = new_set();
                sc.sets[f->name].push_back(c.slot);
                c.kids.push_back(compile(f->kids[0], sc));
                sc.sets[f->name].pop_back();
                c.heavy = true;
                break;
            case Kind::SubExists: case Kind::SubForall:
                c.rel = &s_.rel(f->guard);
                if (c.rel->arity != 2) throw Error("ArityMismatch", f->guard);
                c.slot = new_sub();
                sc.subs[f->name].push_back(c.slot);
                c.kids.push_back(compile(f->kids[0], sc));
                sc.subs[f->name].pop_back();
                c.heavy = true;
                break;
            default:
                for (auto& k : f->kids) {
                    c.kids.push_back(compile(k, sc));
                    c.heavy |= nodes_[c.kids.back()].heavy;
                }
        }
        if (c.heavy && is_quantifier(f->kind) && free_set_vars(f).empty()) {
            auto fv = free_vars(f);
            if (fv.size() <= 8) {
                c.memo = true;
                for (auto& v : fv) c.memo_fo.push_back(lookup(sc.fo, v));
            }
        }
        nodes_.push_back(std::move(c));
        return static_cast<int>(nodes_.size()) - 1;
    }

    int val(int t) const { return t >= 0 ? fo_[t] : -t - 1; }

    bool eval(int id) {
        const CNode& c = nodes_[id];
        if (c.memo) {
            std::uint64_t key = 0;
            for (int s : c.memo_fo) key = key * 64 + static_cast<std::uint64_t>(fo_[s]);
            auto& m = memo_[id];
            auto it = m.find(key);
            if (it != m.end()) return it->second;
            bool r = eval_raw(c);
            memo_[id].emplace(key, r);
            return r;
        }
        return eval_raw(c);
    }

    bool eval_raw(const CNode& c) {
        switch (c.kind) {
            case Kind::True: return true;
            case Kind::False: return false;
            case Kind::Unary: return has(c.rel->rows[0], val(c.t0));
            case Kind::Binary: return has(c.rel->rows[val(c.t0)], val(c.t1));
            case Kind::Equal: return val(c.t0) == val(c.t1);
            case Kind::SetAtom: return has(sets_[c.slot], val(c.t0));
            case Kind::SubAtom: return has(subs_[c.slot][val(c.t0)], val(c.t1));
            case Kind::Card: {
                int l = 0, r = 0;
                for (size_t i = 0; i < c.card.size(); ++i)
                    (static_cast<int>(i) < c.card_lhs ? l : r) += popcount(sets_[c.card[i]]);
                return l < r;
            }
            case Kind::Not: return !eval(c.kids[0]);
            case Kind::And:
                for (int k : c.kids)
                    if (!eval(k)) return false;
                return true;
            case Kind::Or:
                for (int k : c.kids)
                    if (eval(k)) return true;
                return false;
            case Kind::Implies: return !eval(c.kids[0]) || eval(c.kids[1]);
            case Kind::Iff: return eval(c.kids[0]) == eval(c.kids[1]);
            case Kind::Forall: {
                int saved = fo_[c.slot];
                bool r = true;
                for (int e = 0; e < n_ && r; ++e) {
                    fo_[c.slot] = e;
                    r = eval(c.kids[0]);
                }
                fo_[c.slot] = saved;
                return r;
            }
            case Kind::Exists: {
                int saved = fo_[c.slot];
                bool r = false;
                for (int e = 0; e < n_ && !r; ++e) {
                    fo_[c.slot] = e;
                    r = eval(c.kids[0]);
                }
                fo_[c.slot] = saved;
                return r;
            }
            case Kind::Count: {
                int saved = fo_[c.slot];
                int cnt = 0;
                int stop = c.cmp == Cmp::Ge ? c.count : c.count + 1;
                for (int e = 0; e < n_ && cnt < stop; ++e) {
                    fo_[c.slot] = e;
                    if (eval(c.kids[0])) ++cnt;
                }
                fo_[c.slot] = saved;
                if (c.cmp == Cmp::Ge) return cnt >= c.count;
                if (c.cmp == Cmp::Le) return cnt <= c.count;
                return cnt == c.count;
            }
            case Kind::SetForall: case Kind::SetExists: {
                if (n_ > o_.set_quantifier_cap) throw Error("CapExceeded", "set quantifier over universe of size " + std::to_string(n_));
                bool want = c.kind == Kind::SetExists;
                Set saved = sets_[c.slot];
                Set all = full_set(n_);
                bool r = !want;
                Set x = 0;
                for (;;) {
                    sets_[c.slot] = x;
                    if (eval(c.kids[0]) == want) { r = want; break; }
                    if (x == all) break;
                    x = (x - all) & all;  // next subset of `all`
                }
                sets_[c.slot] = saved;
                return r;
            }
            case Kind::SubExists: case Kind::SubForall: {
                std::vector<std::pair<int, int>> tuples;
                for (int u = 0; u < n_; ++u)
                    for (int v = 0; v < n_; ++v)
                        if (has(c.rel->rows[u], v)) tuples.emplace_back(u, v);
                int m = static_cast<int>(tuples.size());
                if (m > o_.sub_quantifier_cap) throw Error("CapExceeded", "relation-subset quantifier over " + std::to_string(m) + " tuples");
                bool want = c.kind == Kind::SubExists;
                auto saved = subs_[c.slot];
                bool r = !want;
                for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
                    auto& rows = subs_[c.slot];
                    std::fill(rows.begin(), rows.end(), 0);
                    for (int i = 0; i < m; ++i)
                        if ((mask >> i) & 1) rows[tuples[i].first] |= bit(tuples[i].second);
                    if (eval(c.kids[0]) == want) { r = want; break; }
                }
                subs_[c.slot] = saved;
                return r;
            }
        }
        return false;
    }
};

}  // namespace

bool evaluate(const Structure& s, const Formula& f, const Assignment& a, const EvalOptions& o) {
    return Evaluator(s, o).run(f, a);
}

}  // namespace msosep
