#include "msosep/sat.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace msosep {

// ---------------------------------------------------------------- CDCL

SatSolver::SatSolver() {
    assign_.push_back(0);
    level_.push_back(0);
    reason_.push_back(-1);
    activity_.push_back(0);
    heap_pos_.push_back(-1);
    phase_.push_back(-1);
    model_.push_back(0);
    seen_.push_back(0);
    watches_.resize(2);
}

int SatSolver::new_var() {
    int v = static_cast<int>(assign_.size());
    assign_.push_back(0);
    level_.push_back(0);
    reason_.push_back(-1);
    activity_.push_back(0);
    heap_pos_.push_back(-1);
    phase_.push_back(-1);
    model_.push_back(0);
    seen_.push_back(0);
    watches_.resize(2 * v + 2);
    heap_insert(v);
    return v;
}

void SatSolver::check_deadline() {
    if (deadline_ && Clock::now() > *deadline_) throw Error("TimeCap", "sat search");
}

void SatSolver::enqueue(int c, int reason) {
    int v = var_of(c);
    assign_[v] = (c & 1) ? -1 : 1;
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(c);
}

int SatSolver::attach(std::vector<int> lits) {
    int ci = static_cast<int>(clauses_.size());
    watches_[lits[0]].push_back(ci);
    watches_[lits[1]].push_back(ci);
    clauses_.push_back({std::move(lits)});
    return ci;
}

void SatSolver::add_clause(std::vector<int> lits) {
    if (unsat_) return;
    backtrack(0);
    std::vector<int> cs;
    for (int l : lits) {
        if (l == 0 || std::abs(l) > num_vars()) throw Error("BadLiteral", std::to_string(l));
        cs.push_back(code(l));
    }
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    std::vector<int> kept;
    for (size_t i = 0; i < cs.size(); ++i) {
        if (i + 1 < cs.size() && cs[i + 1] == neg(cs[i])) return;  // tautology
        int val = value(cs[i]);
        if (val == 1) return;
        if (val == 0) kept.push_back(cs[i]);
    }
    if (kept.empty()) {
        unsat_ = true;
        return;
    }
    if (kept.size() == 1) {
        enqueue(kept[0], -1);
        if (propagate() >= 0) unsat_ = true;
        return;
    }
    attach(std::move(kept));
}

int SatSolver::propagate() {
    while (qhead_ < trail_.size()) {
        int p = trail_[qhead_++];
        int fl = neg(p);
        auto& ws = watches_[fl];
        size_t i = 0, j = 0;
        while (i < ws.size()) {
            int ci = ws[i++];
            auto& lits = clauses_[ci].lits;
            if (lits[0] == fl) std::swap(lits[0], lits[1]);
            if (value(lits[0]) == 1) {
                ws[j++] = ci;
                continue;
            }
            bool moved = false;
            for (size_t k = 2; k < lits.size(); ++k) {
                if (value(lits[k]) != -1) {
                    std::swap(lits[1], lits[k]);
                    watches_[lits[1]].push_back(ci);
                    moved = true;
                    break;
                }
            }
            if (moved) continue;
            ws[j++] = ci;
            if (value(lits[0]) == -1) {
                while (i < ws.size()) ws[j++] = ws[i++];
                ws.resize(j);
                qhead_ = trail_.size();
                return ci;
            }
            enqueue(lits[0], ci);
        }
        ws.resize(j);
    }
    return -1;
}

void SatSolver::bump(int v) {
    activity_[v] += var_inc_;
    if (activity_[v] > 1e100) {
        for (auto& a : activity_) a *= 1e-100;
        var_inc_ *= 1e-100;
    }
    if (heap_pos_[v] >= 0) heap_up(heap_pos_[v]);
}

void SatSolver::analyze(int confl, std::vector<int>& learnt, int& bt_level) {
    learnt.assign(1, 0);
    int path = 0, p = -1;
    int idx = static_cast<int>(trail_.size()) - 1;
    int c = confl;
    do {
        for (int q : clauses_[c].lits) {
            if (q == p) continue;
            int v = var_of(q);
            if (!seen_[v] && level_[v] > 0) {
                seen_[v] = 1;
                bump(v);
                if (level_[v] >= decision_level())
                    ++path;
                else
                    learnt.push_back(q);
            }
        }
        while (!seen_[var_of(trail_[idx])]) --idx;
        p = trail_[idx--];
        c = reason_[var_of(p)];
        seen_[var_of(p)] = 0;
        --path;
    } while (path > 0);
    learnt[0] = neg(p);
    bt_level = 0;
    int maxi = 1;
    for (size_t i = 1; i < learnt.size(); ++i) {
        if (level_[var_of(learnt[i])] > bt_level) {
            bt_level = level_[var_of(learnt[i])];
            maxi = static_cast<int>(i);
        }
    }
    if (learnt.size() > 1) std::swap(learnt[1], learnt[maxi]);
    for (int q : learnt) seen_[var_of(q)] = 0;
}

void SatSolver::backtrack(int lvl) {
    if (decision_level() <= lvl) return;
    for (int i = static_cast<int>(trail_.size()) - 1; i >= trail_lim_[lvl]; --i) {
        int v = var_of(trail_[i]);
        phase_[v] = assign_[v];
        assign_[v] = 0;
        reason_[v] = -1;
        if (heap_pos_[v] < 0) heap_insert(v);
    }
    trail_.resize(trail_lim_[lvl]);
    trail_lim_.resize(lvl);
    qhead_ = trail_.size();
}

void SatSolver::heap_up(int i) {
    int v = heap_[i];
    while (i > 0) {
        int parent = (i - 1) / 2;
        if (activity_[heap_[parent]] >= activity_[v]) break;
        heap_[i] = heap_[parent];
        heap_pos_[heap_[i]] = i;
        i = parent;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
}

void SatSolver::heap_down(int i) {
    int v = heap_[i];
    int n = static_cast<int>(heap_.size());
    for (;;) {
        int c = 2 * i + 1;
        if (c >= n) break;
        if (c + 1 < n && activity_[heap_[c + 1]] > activity_[heap_[c]]) ++c;
        if (activity_[heap_[c]] <= activity_[v]) break;
        heap_[i] = heap_[c];
        heap_pos_[heap_[i]] = i;
        i = c;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
}

void SatSolver::heap_insert(int v) {
    heap_.push_back(v);
    heap_pos_[v] = static_cast<int>(heap_.size()) - 1;
    heap_up(heap_pos_[v]);
}

int SatSolver::heap_pop() {
    int v = heap_[0];
    heap_pos_[v] = -1;
    int last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
        heap_[0] = last;
        heap_pos_[last] = 0;
        heap_down(0);
    }
    return v;
}

namespace {
double luby(double y, int x) {
    int size = 1, seq = 0;
    while (size < x + 1) {
        ++seq;
        size = 2 * size + 1;
    }
    while (size - 1 != x) {
        size = (size - 1) >> 1;
        --seq;
        x = x % size;
    }
    double r = 1;
    for (int i = 0; i < seq; ++i) r *= y;
    return r;
}
}  // namespace

SatSolver::Result SatSolver::solve(const std::vector<int>& assumptions) {
    if (unsat_) return Unsat;
    backtrack(0);
    if (propagate() >= 0) {
        unsat_ = true;
        return Unsat;
    }
    std::vector<int> assume;
    for (int l : assumptions) assume.push_back(code(l));
    int restarts = 0;
    long long budget = static_cast<long long>(100 * luby(2, restarts));
    long long local = 0, decisions = 0;
    std::vector<int> learnt;
    for (;;) {
        int confl = propagate();
        if (confl >= 0) {
            ++conflicts_;
            ++local;
            if ((conflicts_ & 255) == 0) check_deadline();
            if (decision_level() == 0) {
                unsat_ = true;
                return Unsat;
            }
            int bt;
            analyze(confl, learnt, bt);
            backtrack(bt);
            if (learnt.size() == 1) {
                enqueue(learnt[0], -1);
            } else {
                int ci = attach(learnt);
                enqueue(learnt[0], ci);
            }
            var_inc_ /= 0.95;
            continue;
        }
        if (local >= budget) {
            backtrack(0);
            local = 0;
            budget = static_cast<long long>(100 * luby(2, ++restarts));
        }
        int next = -1;
        while (decision_level() < static_cast<int>(assume.size())) {
            int a = assume[decision_level()];
            if (value(a) == 1) {
                trail_lim_.push_back(static_cast<int>(trail_.size()));
            } else if (value(a) == -1) {
                backtrack(0);
                return Unsat;
            } else {
                next = a;
                break;
            }
        }
        if (next < 0) {
            int v = 0;
            while (!heap_.empty()) {
                int c = heap_pop();
                if (assign_[c] == 0) {
                    v = c;
                    break;
                }
            }
            if (v == 0) {
                model_ = assign_;
                backtrack(0);
                return Sat;
            }
            next = phase_[v] > 0 ? 2 * v : 2 * v + 1;
            if ((++decisions & 4095) == 0) check_deadline();
        }
        trail_lim_.push_back(static_cast<int>(trail_.size()));
        enqueue(next, -1);
    }
}

// ---------------------------------------------------------------- grounding

namespace {
int flip(int pol) { return pol == 1 ? 2 : pol == 2 ? 1 : 3; }
}  // namespace

Grounder::Grounder(SatSolver& solver, int n, const Vocabulary& vocab, const Structure* fixed,
                   const GroundOptions& o)
    : solver_(solver), n_(n), vocab_(vocab), fixed_(fixed), o_(o) {
    if (n < 1 || n > kMaxUniverse) throw Error("TooLarge", "universe " + std::to_string(n));
    if (fixed_ && fixed_->size() != n) throw Error("UniverseMismatch");
    if (solver_.num_vars() == 0) {
        solver_.new_var();
        solver_.add_clause({kTrue});
    }
    for (auto& [sym, a] : vocab_.symbols()) {
        if (fixed_ && fixed_->interprets(sym)) continue;
        int cnt = a == 1 ? n : n * n;
        auto& vs = atoms_[sym];
        for (int i = 0; i < cnt; ++i) {
            vs.push_back(solver_.new_var());
            order_.push_back(vs.back());
        }
    }
}

int Grounder::atom(const std::string& sym, int u, int v) {
    if (fixed_ && fixed_->interprets(sym)) {
        bool b = v < 0 ? fixed_->holds(sym, u) : fixed_->holds(sym, u, v);
        return b ? kTrue : kFalse;
    }
    auto it = atoms_.find(sym);
    if (it == atoms_.end()) throw Error("UnknownSymbol", sym);
    return it->second[v < 0 ? u : u * n_ + v];
}

Structure Grounder::model() const {
    Structure s(n_, vocab_);
    for (auto& [sym, a] : vocab_.symbols()) {
        if (fixed_ && fixed_->interprets(sym)) {
            s.rel_mut(sym) = fixed_->rel(sym);
            continue;
        }
        auto& vs = atoms_.at(sym);
        for (int u = 0; u < n_; ++u) {
            if (a == 1) {
                s.set(sym, u, solver_.model_value(vs[u]));
            } else {
                for (int w = 0; w < n_; ++w) s.set(sym, u, w, solver_.model_value(vs[u * n_ + w]));
            }
        }
    }
    return s;
}

int Grounder::conj(std::vector<int> lits) {
    std::vector<int> ls;
    for (int l : lits) {
        if (l == kFalse) return kFalse;
        if (l != kTrue) ls.push_back(l);
    }
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    for (int l : ls)
        if (l > 0 && std::binary_search(ls.begin(), ls.end(), -l)) return kFalse;
    if (ls.empty()) return kTrue;
    if (ls.size() == 1) return ls[0];
    auto it = and_cache_.find(ls);
    if (it != and_cache_.end()) return it->second;
    int g = solver_.new_var();
    std::vector<int> big{g};
    for (int l : ls) {
        solver_.add_clause({-g, l});
        big.push_back(-l);
    }
    solver_.add_clause(big);
    and_cache_.emplace(std::move(ls), g);
    return g;
}

int Grounder::disj(std::vector<int> lits) {
    for (auto& l : lits) l = -l;
    return -conj(std::move(lits));
}

int Grounder::at_least(std::vector<int> lits, int t) {
    std::vector<int> ls;
    for (int l : lits) {
        if (l == kTrue)
            --t;
        else if (l != kFalse)
            ls.push_back(l);
    }
    int m = static_cast<int>(ls.size());
    if (t <= 0) return kTrue;
    if (t > m) return kFalse;
    if (t == 1) return disj(ls);
    if (t == m) return conj(ls);
    std::vector<int> prev(t + 1, kFalse), cur(t + 1);
    prev[0] = kTrue;
    for (int i = 0; i < m; ++i) {
        cur[0] = kTrue;
        for (int j = 1; j <= t; ++j) cur[j] = disj({prev[j], conj({ls[i], prev[j - 1]})});
        prev = cur;
    }
    return prev[t];
}

int Grounder::term(const std::string& t, const Env& env) const {
    if (is_term_constant(t)) {
        int c = std::stoi(t);
        if (c >= n_) throw Error("ElementOutOfRange", t);
        return c;
    }
    auto it = env.fo.find(t);
    if (it == env.fo.end()) throw Error("UnassignedFreeVariable", t);
    return it->second;
}

const std::vector<std::string>& Grounder::node_free(const Formula& f) {
    auto it = free_cache_.find(f.get());
    if (it != free_cache_.end()) return it->second;
    std::vector<std::string> v;
    for (auto& x : free_vars(f)) v.push_back(x);
    v.push_back("|");
    for (auto& x : free_set_vars(f)) v.push_back(x);
    return free_cache_.emplace(f.get(), std::move(v)).first->second;
}

int Grounder::ground(const Formula& f) {
    Env env;
    return rec(f, env, 1);
}

int Grounder::set_quant(const Formula& f, Env& env, int pol, bool universal) {
    const std::string& X = f->name;
    auto saved = env.sets.find(X) != env.sets.end() ? std::optional<SetVal>(env.sets[X]) : std::nullopt;
    auto restore = [&] {
        if (saved)
            env.sets[X] = *saved;
        else
            env.sets.erase(X);
    };
    int r;
    if ((!universal && pol == 1) || (universal && pol == 2)) {
        SetVal sv;
        for (int i = 0; i < n_; ++i) sv.lits.push_back(solver_.new_var());
        env.sets[X] = sv;
        r = rec(f->kids[0], env, pol);
    } else {
        if (n_ > o_.set_enum_cap) throw Error("CapExceeded", "set quantifier over " + std::to_string(n_) + " elements");
        std::vector<int> parts;
        for (Set m = 0; m < (Set{1} << n_); ++m) {
            SetVal sv;
            for (int i = 0; i < n_; ++i) sv.lits.push_back(has(m, i) ? kTrue : kFalse);
            env.sets[X] = sv;
            int l = rec(f->kids[0], env, pol);
            if (l == (universal ? kFalse : kTrue)) {
                parts.assign(1, l);
                break;
            }
            parts.push_back(l);
        }
        r = universal ? conj(parts) : disj(parts);
    }
    restore();
    return r;
}

int Grounder::sub_quant(const Formula& f, Env& env, int pol, bool universal) {
    const std::string& P = f->name;
    const std::string& G = f->guard;
    auto saved = env.sets.find(P) != env.sets.end() ? std::optional<SetVal>(env.sets[P]) : std::nullopt;
    std::vector<int> guard(n_ * n_);
    for (int u = 0; u < n_; ++u)
        for (int v = 0; v < n_; ++v) guard[u * n_ + v] = atom(G, u, v);
    int r;
    if ((!universal && pol == 1) || (universal && pol == 2)) {
        SetVal sv;
        for (int g : guard) {
            if (g == kFalse) {
                sv.lits.push_back(kFalse);
            } else {
                int p = solver_.new_var();
                if (g != kTrue) solver_.add_clause({-p, g});
                sv.lits.push_back(p);
            }
        }
        env.sets[P] = sv;
        r = rec(f->kids[0], env, pol);
    } else {
        std::vector<int> tuples;
        for (int i = 0; i < n_ * n_; ++i) {
            if (guard[i] == kTrue)
                tuples.push_back(i);
            else if (guard[i] != kFalse)
                throw Error("CapExceeded", "sub quantifier over an unfixed guard " + G);
        }
        if (static_cast<int>(tuples.size()) > o_.sub_enum_cap)
            throw Error("CapExceeded", "sub quantifier over " + std::to_string(tuples.size()) + " tuples");
        std::vector<int> parts;
        for (Set m = 0; m < (Set{1} << tuples.size()); ++m) {
            SetVal sv;
            sv.lits.assign(n_ * n_, kFalse);
            for (size_t i = 0; i < tuples.size(); ++i)
                if (has(m, static_cast<int>(i))) sv.lits[tuples[i]] = kTrue;
            env.sets[P] = sv;
            int l = rec(f->kids[0], env, pol);
            if (l == (universal ? kFalse : kTrue)) {
                parts.assign(1, l);
                break;
            }
            parts.push_back(l);
        }
        r = universal ? conj(parts) : disj(parts);
    }
    if (saved)
        env.sets[P] = *saved;
    else
        env.sets.erase(P);
    return r;
}

int Grounder::rec(const Formula& f, Env& env, int pol) {
    if ((++steps_ & 8191) == 0 && o_.deadline && Clock::now() > *o_.deadline)
        throw Error("TimeCap", "grounding");
    switch (f->kind) {
        case Kind::True: return kTrue;
        case Kind::False: return kFalse;
        case Kind::Unary: return atom(f->name, term(f->terms[0], env));
        case Kind::Binary: return atom(f->name, term(f->terms[0], env), term(f->terms[1], env));
        case Kind::Equal: return term(f->terms[0], env) == term(f->terms[1], env) ? kTrue : kFalse;
        case Kind::SetAtom: {
            auto it = env.sets.find(f->name);
            if (it == env.sets.end()) throw Error("UnboundVariable", f->name);
            return it->second.lits[term(f->terms[0], env)];
        }
        case Kind::SubAtom: {
            auto it = env.sets.find(f->name);
            if (it == env.sets.end()) throw Error("UnboundVariable", f->name);
            return it->second.lits[term(f->terms[0], env) * n_ + term(f->terms[1], env)];
        }
        case Kind::Card: {
            std::vector<int> ls;
            int lhs = 0;
            for (size_t i = 0; i < f->terms.size(); ++i) {
                auto it = env.sets.find(f->terms[i]);
                if (it == env.sets.end()) throw Error("UnboundVariable", f->terms[i]);
                for (int l : it->second.lits) {
                    if (static_cast<int>(i) < f->count) {
                        ls.push_back(-l);
                        ++lhs;
                    } else {
                        ls.push_back(l);
                    }
                }
            }
            return at_least(ls, lhs + 1);
        }
        case Kind::Not: return -rec(f->kids[0], env, flip(pol));
        case Kind::And:
        case Kind::Or: {
            bool is_and = f->kind == Kind::And;
            std::vector<int> ls;
            for (auto& k : f->kids) {
                int l = rec(k, env, pol);
                if (l == (is_and ? kFalse : kTrue)) return l;
                ls.push_back(l);
            }
            return is_and ? conj(ls) : disj(ls);
        }
        case Kind::Implies: {
            int a = rec(f->kids[0], env, flip(pol));
            if (a == kFalse) return kTrue;
            return disj({-a, rec(f->kids[1], env, pol)});
        }
        case Kind::Iff: {
            int a = rec(f->kids[0], env, 3), b = rec(f->kids[1], env, 3);
            return conj({disj({-a, b}), disj({a, -b})});
        }
        default: break;
    }
    // quantifiers: memoized on the values of their free variables
    std::vector<long long> key{reinterpret_cast<long long>(f.get()), pol};
    bool sets = false;
    for (auto& v : node_free(f)) {
        if (v == "|") {
            sets = true;
            continue;
        }
        if (!sets) {
            key.push_back(term(v, env));
        } else {
            auto it = env.sets.find(v);
            if (it == env.sets.end()) throw Error("UnboundVariable", v);
            key.push_back(-1);
            for (int l : it->second.lits) key.push_back(l);
        }
    }
    auto mit = memo_.find(key);
    if (mit != memo_.end()) return mit->second;

    int r;
    switch (f->kind) {
        case Kind::Forall:
        case Kind::Exists:
        case Kind::Count: {
            const std::string& v = f->name;
            auto old = env.fo.find(v) != env.fo.end() ? std::optional<int>(env.fo[v]) : std::nullopt;
            int bpol = pol;
            if (f->kind == Kind::Count) bpol = f->cmp == Cmp::Ge ? pol : f->cmp == Cmp::Le ? flip(pol) : 3;
            bool universal = f->kind == Kind::Forall;
            std::vector<int> ls;
            for (int e = 0; e < n_; ++e) {
                env.fo[v] = e;
                int l = rec(f->kids[0], env, bpol);
                if (f->kind != Kind::Count && l == (universal ? kFalse : kTrue)) {
                    ls.assign(1, l);
                    break;
                }
                ls.push_back(l);
            }
            if (old)
                env.fo[v] = *old;
            else
                env.fo.erase(v);
            if (f->kind == Kind::Forall)
                r = conj(ls);
            else if (f->kind == Kind::Exists)
                r = disj(ls);
            else if (f->cmp == Cmp::Ge)
                r = at_least(ls, f->count);
            else if (f->cmp == Cmp::Le)
                r = -at_least(ls, f->count + 1);
            else
                r = conj({at_least(ls, f->count), -at_least(ls, f->count + 1)});
            break;
        }
        case Kind::SetForall: r = set_quant(f, env, pol, true); break;
        case Kind::SetExists: r = set_quant(f, env, pol, false); break;
        case Kind::SubForall: r = sub_quant(f, env, pol, true); break;
        case Kind::SubExists: r = sub_quant(f, env, pol, false); break;
        default: throw Error("Internal", "unhandled formula kind");
    }
    memo_.emplace(std::move(key), r);
    return r;
}

// ---------------------------------------------------------------- shapes

namespace {

struct ShapeRef {
    int size, index;
    bool operator<(const ShapeRef& o) const { return std::tie(size, index) < std::tie(o.size, o.index); }
    bool operator<=(const ShapeRef& o) const { return !(o < *this); }
};
using ShapeKids = std::vector<ShapeRef>;

const std::vector<ShapeKids>& shapes_of(int n, std::map<int, std::vector<ShapeKids>>& memo) {
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    std::vector<ShapeKids> out;
    if (n == 1) {
        out.push_back({});
    } else {
        int c = static_cast<int>(shapes_of(n - 1, memo).size());
        for (int i = 0; i < c; ++i) out.push_back({{n - 1, i}});
        for (int s1 = 1; s1 <= (n - 1) / 2; ++s1) {
            int s2 = n - 1 - s1;
            int c1 = static_cast<int>(shapes_of(s1, memo).size());
            int c2 = static_cast<int>(shapes_of(s2, memo).size());
            for (int i = 0; i < c1; ++i)
                for (int j = 0; j < c2; ++j) {
                    ShapeRef a{s1, i}, b{s2, j};
                    if (a <= b) out.push_back({a, b});
                }
        }
    }
    return memo.emplace(n, std::move(out)).first->second;
}

int build_shape(const ShapeRef& r, std::map<int, std::vector<ShapeKids>>& memo, Digraph& g, int& next) {
    int me = next++;
    for (auto& k : shapes_of(r.size, memo)[r.index]) {
        int c = build_shape(k, memo, g, next);
        g.arc(me, c);
    }
    return me;
}

}  // namespace

std::vector<Digraph> binary_tree_shapes(int n) {
    if (n < 1 || n > kMaxUniverse) throw Error("TooLarge", "tree size " + std::to_string(n));
    std::map<int, std::vector<ShapeKids>> memo;
    std::vector<Digraph> out;
    int cnt = static_cast<int>(shapes_of(n, memo).size());
    for (int i = 0; i < cnt; ++i) {
        Digraph g(n);
        int next = 0;
        build_shape({n, i}, memo, g, next);
        out.push_back(g);
    }
    return out;
}

bool is_binary_tree(const Structure& s, const std::string& sym) {
    if (!s.interprets(sym) || s.vocab().arity(sym) != 2) return false;
    int n = s.size();
    std::vector<int> indeg(n, 0);
    int root = -1;
    for (int u = 0; u < n; ++u) {
        if (popcount(s.row(sym, u)) > 2) return false;
        for (int v = 0; v < n; ++v)
            if (s.holds(sym, u, v)) ++indeg[v];
    }
    for (int v = 0; v < n; ++v) {
        if (indeg[v] == 0) {
            if (root >= 0) return false;
            root = v;
        } else if (indeg[v] > 1) {
            return false;
        }
    }
    if (root < 0) return false;
    Set seen = bit(root), frontier = bit(root);
    while (frontier) {
        Set nxt = 0;
        for (int u = 0; u < n; ++u)
            if (has(frontier, u)) nxt |= s.row(sym, u);
        frontier = nxt & ~seen;
        seen |= nxt;
    }
    return seen == full_set(n);
}

// ---------------------------------------------------------------- search

namespace {

int max_constant(const Formula& f) {
    int m = -1;
    for (auto& t : f->terms)
        if (is_term_constant(t)) m = std::max(m, std::stoi(t));
    for (auto& k : f->kids) m = std::max(m, max_constant(k));
    return m;
}

bool shape_ok(const Structure& s, const ShapeConstraint& sc) {
    if (sc.kind != ShapeConstraint::Treewidth) return true;
    return treewidth(gaifman(reduct(s, s.vocab().intersect(sc.reduct)))) <= sc.k;
}

struct Search {
    const Formula& phi;
    const Vocabulary& vocab;
    const SearchBudget& b;
    std::optional<Clock::time_point> deadline;
    long long calls = 0;

    void tick() const {
        if (deadline && Clock::now() > *deadline) throw Error("TimeCap", "bounded search");
    }

    std::optional<Structure> with_sat(int n, const Structure* fixed) {
        SatSolver solver;
        solver.set_deadline(deadline);
        GroundOptions go;
        go.deadline = deadline;
        Grounder g(solver, n, vocab, fixed, go);
        g.require(phi);
        const auto& atoms = g.free_atoms();

        auto gaif_lit = [&](int u, int v) {
            std::vector<int> ls;
            for (auto& B : vocab.intersect(b.shape.reduct).binary()) {
                ls.push_back(g.atom(B, u, v));
                ls.push_back(g.atom(B, v, u));
            }
            return g.disj(ls);
        };
        // solve under assumptions until a model passes the shape check
        auto attempt = [&](const std::vector<int>& assume) -> std::optional<Structure> {
            for (;;) {
                ++calls;
                if (solver.solve(assume) == SatSolver::Unsat) return std::nullopt;
                Structure m = g.model();
                if (shape_ok(m, b.shape)) return m;
                Digraph gf = gaifman(reduct(m, m.vocab().intersect(b.shape.reduct)));
                auto edges = gf.edges();
                for (size_t i = 0; i < edges.size();) {
                    Digraph h(n);
                    for (size_t j = 0; j < edges.size(); ++j)
                        if (j != i) h.edge(edges[j].first, edges[j].second);
                    if (treewidth(h) > b.shape.k)
                        edges.erase(edges.begin() + static_cast<long>(i));
                    else
                        ++i;
                }
                std::vector<int> block;
                for (auto& [u, v] : edges) block.push_back(-gaif_lit(u, v));
                solver.add_clause(block);
            }
        };
        auto best = attempt({});
        if (!best) return std::nullopt;
        auto values = [&](const Structure& m) {
            std::vector<bool> out;
            for (auto& [sym, a] : vocab.symbols()) {
                if (fixed && fixed->interprets(sym)) continue;
                for (int u = 0; u < n; ++u) {
                    if (a == 1)
                        out.push_back(m.holds(sym, u));
                    else
                        for (int w = 0; w < n; ++w) out.push_back(m.holds(sym, u, w));
                }
            }
            return out;
        };
        std::vector<bool> cur = values(*best);
        std::vector<int> assume;
        for (int i = static_cast<int>(atoms.size()) - 1; i >= 0; --i) {
            if (!cur[i]) {
                assume.push_back(-atoms[i]);
                continue;
            }
            auto trial = assume;
            trial.push_back(-atoms[i]);
            auto m = attempt(trial);
            if (m) {
                best = m;
                cur = values(*m);
                assume.push_back(-atoms[i]);
            } else {
                assume.push_back(atoms[i]);
            }
        }
        return best;
    }

    std::optional<Structure> with_enumeration(int n, const Structure* fixed) {
        Structure s(n, vocab);
        std::vector<std::pair<std::string, int>> slots;  // symbol, flat index
        for (auto& [sym, a] : vocab.symbols()) {
            if (fixed && fixed->interprets(sym)) {
                s.rel_mut(sym) = fixed->rel(sym);
                continue;
            }
            int cnt = a == 1 ? n : n * n;
            for (int i = 0; i < cnt; ++i) slots.emplace_back(sym, i);
        }
        if (slots.size() > 30) throw Error("CapExceeded", "enumeration over 2^" + std::to_string(slots.size()));
        for (std::uint64_t code = 0; code < (std::uint64_t{1} << slots.size()); ++code) {
            if ((code & 1023) == 0) tick();
            for (size_t i = 0; i < slots.size(); ++i) {
                auto& [sym, idx] = slots[i];
                bool on = (code >> i) & 1;
                if (vocab.arity(sym) == 1)
                    s.set(sym, idx, on);
                else
                    s.set(sym, idx / n, idx % n, on);
            }
            ++calls;
            if (shape_ok(s, b.shape) && evaluate(s, phi)) return s;
        }
        return std::nullopt;
    }

    std::optional<Structure> one(int n, const Structure* fixed) {
        return b.engine == SearchBudget::Sat ? with_sat(n, fixed) : with_enumeration(n, fixed);
    }
};

}  // namespace

SatResult bounded_sat(const Formula& phi, const Vocabulary& vocab, const SearchBudget& budget) {
    if (budget.max_size < 1 || budget.max_size > kMaxUniverse) throw Error("CapExceeded", "max size");
    check_vocabulary(phi, vocab);
    if (!free_vars(phi).empty()) throw Error("UnassignedFreeVariable", *free_vars(phi).begin());
    Search s{phi, vocab, budget, std::nullopt};
    if (budget.time_cap_seconds > 0)
        s.deadline = Clock::now() + std::chrono::microseconds(static_cast<long long>(budget.time_cap_seconds * 1e6));
    if (budget.shape.kind == ShapeConstraint::Tree && vocab.arity(budget.shape.symbol) != 2)
        throw Error("UnknownSymbol", budget.shape.symbol);
    SatResult res;
    int lo = std::max({budget.min_size, 1, max_constant(phi) + 1});
    for (int n = lo; n <= budget.max_size; ++n) {
        if (budget.shape.kind == ShapeConstraint::Tree) {
            Vocabulary tv;
            tv.add(budget.shape.symbol, 2);
            for (auto& shape : binary_tree_shapes(n)) {
                Structure fixed(n, tv);
                for (int u = 0; u < n; ++u) fixed.rel_mut(budget.shape.symbol).rows[u] = shape.out[u];
                auto m = s.one(n, &fixed);
                if (m) {
                    res.sat = true;
                    res.model = *m;
                    break;
                }
            }
        } else {
            auto m = s.one(n, nullptr);
            if (m) {
                res.sat = true;
                res.model = *m;
            }
        }
        res.solver_calls = s.calls;
        if (res.sat) break;
        res.sizes_searched = n;
    }
    res.solver_calls = s.calls;
    return res;
}

}  // namespace msosep
