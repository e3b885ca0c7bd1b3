#include <cctype>
#include <set>

#include "msosep/logic.hpp"

namespace msosep {

namespace {

enum class Tok { Ident, Num, LParen, RParen, Comma, Dot, LBrack, RBrack, Not, And, Or, Imp, Iff, Eq, Le, Ge, Lt, Plus, End };

struct Token {
    Tok t;
    std::string s;
    size_t pos;
};

std::vector<Token> lex(const std::string& in) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < in.size()) {
        char c = in[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        size_t p = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < in.size() && (std::isalnum(static_cast<unsigned char>(in[i])) || in[i] == '_' || in[i] == '\'')) ++i;
            out.push_back({Tok::Ident, in.substr(p, i - p), p});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < in.size() && std::isdigit(static_cast<unsigned char>(in[i]))) ++i;
            out.push_back({Tok::Num, in.substr(p, i - p), p});
            continue;
        }
        auto two = in.compare(i, 2, "->") == 0;
        if (in.compare(i, 3, "<->") == 0) { out.push_back({Tok::Iff, "<->", p}); i += 3; continue; }
        if (two) { out.push_back({Tok::Imp, "->", p}); i += 2; continue; }
        if (in.compare(i, 2, "<=") == 0) { out.push_back({Tok::Le, "<=", p}); i += 2; continue; }
        if (in.compare(i, 2, ">=") == 0) { out.push_back({Tok::Ge, ">=", p}); i += 2; continue; }
        Tok t;
        switch (c) {
            case '(': t = Tok::LParen; break;
            case ')': t = Tok::RParen; break;
            case ',': t = Tok::Comma; break;
            case '.': t = Tok::Dot; break;
            case '[': t = Tok::LBrack; break;
            case ']': t = Tok::RBrack; break;
            case '~': t = Tok::Not; break;
            case '&': t = Tok::And; break;
            case '|': t = Tok::Or; break;
            case '=': t = Tok::Eq; break;
            case '<': t = Tok::Lt; break;
            case '+': t = Tok::Plus; break;
            default: throw Error("SyntaxError", "unexpected '" + std::string(1, c) + "' at " + std::to_string(p));
        }
        out.push_back({t, std::string(1, c), p});
        ++i;
    }
    out.push_back({Tok::End, "", in.size()});
    return out;
}

class Parser {
public:
    Parser(const std::string& text, const Vocabulary& v, const ParseOptions& o)
        : toks_(lex(text)), vocab_(v), opt_(o) {
        for (auto& s : o.set_vars) sets_.push_back(s);
    }

    Formula run() {
        auto f = iff();
        if (peek().t != Tok::End) fail("trailing input");
        return f;
    }

private:
    std::vector<Token> toks_;
    size_t at_ = 0;
    const Vocabulary& vocab_;
    const ParseOptions& opt_;
    std::vector<std::string> fo_, sets_, subs_;

    const Token& peek(size_t o = 0) const { return toks_[std::min(at_ + o, toks_.size() - 1)]; }
    Token take() { return toks_[at_ < toks_.size() - 1 ? at_++ : at_]; }
    [[noreturn]] void fail(const std::string& what) const {
        throw Error("SyntaxError", what + " at " + std::to_string(peek().pos));
    }
    void expect(Tok t, const char* what) {
        if (peek().t != t) fail(std::string("expected ") + what);
        take();
    }
    std::string ident(const char* what) {
        if (peek().t != Tok::Ident) fail(std::string("expected ") + what);
        return take().s;
    }

    static bool contains(const std::vector<std::string>& v, const std::string& s) {
        for (auto it = v.rbegin(); it != v.rend(); ++it)
            if (*it == s) return true;
        return false;
    }

    Formula iff() {
        auto l = imp();
        while (peek().t == Tok::Iff) {
            take();
            l = f::iff(l, imp());
        }
        return l;
    }

    Formula imp() {
        auto l = disj();
        if (peek().t == Tok::Imp) {
            take();
            return f::implies(l, imp());
        }
        return l;
    }

    Formula disj() {
        std::vector<Formula> ks{conj()};
        while (peek().t == Tok::Or) {
            take();
            ks.push_back(conj());
        }
        return f::disj(std::move(ks));
    }

    Formula conj() {
        std::vector<Formula> ks{unary()};
        while (peek().t == Tok::And) {
            take();
            ks.push_back(unary());
        }
        return f::conj(std::move(ks));
    }

    bool quantifier_ahead() const {
        const auto& t = peek();
        if (t.t != Tok::Ident) return false;
        if (t.s == "A" || t.s == "E") return peek(1).t == Tok::Ident || (t.s == "E" && peek(1).t == Tok::LBrack);
        if (t.s == "ASet" || t.s == "ESet" || t.s == "ASub" || t.s == "ESub") return peek(1).t == Tok::Ident;
        return false;
    }

    Formula unary() {
        if (peek().t == Tok::Not) {
            take();
            return f::neg(unary());
        }
        if (quantifier_ahead()) return quantified();
        return primary();
    }

    Formula quantified() {
        std::string q = take().s;
        if (q == "A" || q == "E") {
            Cmp cmp = Cmp::Ge;
            int n = -1;
            if (peek().t == Tok::LBrack) {
                take();
                auto c = take();
                if (c.t == Tok::Le) cmp = Cmp::Le;
                else if (c.t == Tok::Ge) cmp = Cmp::Ge;
                else if (c.t == Tok::Eq) cmp = Cmp::Eq;
                else fail("expected <=, >= or =");
                if (peek().t != Tok::Num) fail("expected counting bound");
                n = std::stoi(take().s);
                expect(Tok::RBrack, "]");
            }
            std::string v = ident("variable");
            expect(Tok::Dot, ".");
            fo_.push_back(v);
            auto body = iff();
            fo_.pop_back();
            if (n >= 0) return f::count(cmp, n, v, body);
            return q == "A" ? f::forall(v, body) : f::exists(v, body);
        }
        if (q == "ASet" || q == "ESet") {
            std::string v = ident("set variable");
            expect(Tok::Dot, ".");
            sets_.push_back(v);
            auto body = iff();
            sets_.pop_back();
            return q == "ASet" ? f::set_forall(v, body) : f::set_exists(v, body);
        }
        std::string v = ident("relation variable");
        expect(Tok::Le, "<=");
        std::string g = ident("guard symbol");
        int a = vocab_.arity(g);
        if (!a) throw Error("UnknownSymbol", g);
        if (a != 2) throw Error("ArityMismatch", g);
        expect(Tok::Dot, ".");
        subs_.push_back(v);
        auto body = iff();
        subs_.pop_back();
        return q == "ASub" ? f::sub_forall(v, g, body) : f::sub_exists(v, g, body);
    }

    std::string term() {
        auto t = take();
        if (t.t == Tok::Num) return t.s;
        if (t.t != Tok::Ident) { --at_; fail("expected term"); }
        if (!contains(fo_, t.s)) {
            if (opt_.free_vars) {
                bool ok = false;
                for (auto& v : *opt_.free_vars) ok |= v == t.s;
                if (!ok) throw Error("UnboundVariable", t.s);
            }
        }
        return t.s;
    }

    Formula card_atom() {
        auto side = [&] {
            std::vector<std::string> r;
            for (;;) {
                expect(Tok::Or, "|");
                std::string v = ident("set variable");
                if (!contains(sets_, v)) throw Error("CardVarNotInPrefix", v);
                r.push_back(v);
                expect(Tok::Or, "|");
                if (peek().t != Tok::Plus) break;
                take();
            }
            return r;
        };
        auto l = side();
        expect(Tok::Lt, "<");
        auto r = side();
        return f::card(l, r);
    }

    Formula primary() {
        const auto& t = peek();
        if (t.t == Tok::LParen) {
            take();
            auto inner = iff();
            expect(Tok::RParen, ")");
            return inner;
        }
        if (t.t == Tok::Or && opt_.allow_card) return card_atom();
        if (t.t == Tok::Ident && t.s == "true" && peek(1).t != Tok::LParen) { take(); return f::top(); }
        if (t.t == Tok::Ident && t.s == "false" && peek(1).t != Tok::LParen) { take(); return f::bot(); }
        if (t.t == Tok::Ident && peek(1).t == Tok::LParen) {
            std::string name = take().s;
            take();
            std::vector<std::string> args{term()};
            if (peek().t == Tok::Comma) {
                take();
                args.push_back(term());
            }
            expect(Tok::RParen, ")");
            if (contains(sets_, name)) {
                if (args.size() != 1) throw Error("ArityMismatch", name);
                return f::set_atom(name, args[0]);
            }
            if (contains(subs_, name)) {
                if (args.size() != 2) throw Error("ArityMismatch", name);
                return f::sub_atom(name, args[0], args[1]);
            }
            int a = vocab_.arity(name);
            if (!a) throw Error("UnknownSymbol", name);
            if (a != static_cast<int>(args.size())) throw Error("ArityMismatch", name);
            return a == 1 ? f::atom(name, args[0]) : f::atom(name, args[0], args[1]);
        }
        if (t.t == Tok::Ident || t.t == Tok::Num) {
            std::string a = term();
            expect(Tok::Eq, "=");
            std::string b = term();
            return f::eq(a, b);
        }
        fail("expected formula");
    }
};

int prec(Kind k) {
    switch (k) {
        case Kind::Iff: return 1;
        case Kind::Implies: return 2;
        case Kind::Or: return 3;
        case Kind::And: return 4;
        case Kind::Not: return 5;
        default: return is_quantifier(k) ? 0 : 6;
    }
}

void print(const Formula& f, int ctx, std::string& out) {
    bool wrap = prec(f->kind) < ctx;
    if (wrap) out += '(';
    switch (f->kind) {
        case Kind::True: out += "true"; break;
        case Kind::False: out += "false"; break;
        case Kind::Unary: case Kind::SetAtom:
            out += f->name + "(" + f->terms[0] + ")";
            break;
        case Kind::Binary: case Kind::SubAtom:
            out += f->name + "(" + f->terms[0] + "," + f->terms[1] + ")";
            break;
        case Kind::Equal: out += f->terms[0] + " = " + f->terms[1]; break;
        case Kind::Card:
            for (size_t i = 0; i < f->terms.size(); ++i) {
                if (i == static_cast<size_t>(f->count)) out += " < ";
                else if (i) out += " + ";
                out += "|" + f->terms[i] + "|";
            }
            break;
        case Kind::Not:
            out += "~";
            if (f->kids[0]->kind == Kind::Equal || f->kids[0]->kind == Kind::Card) {
                out += "(";
                print(f->kids[0], 0, out);
                out += ")";
            } else {
                print(f->kids[0], 5, out);
            }
            break;
        case Kind::And: case Kind::Or:
            for (size_t i = 0; i < f->kids.size(); ++i) {
                if (i) out += f->kind == Kind::And ? " & " : " | ";
                print(f->kids[i], prec(f->kind) + 1, out);
            }
            break;
        case Kind::Implies:
            print(f->kids[0], 3, out);
            out += " -> ";
            print(f->kids[1], 2, out);
            break;
        case Kind::Iff:
            print(f->kids[0], 2, out);
            out += " <-> ";
            print(f->kids[1], 2, out);
            break;
        case Kind::Forall: out += "A " + f->name + ". "; print(f->kids[0], 0, out); break;
        case Kind::Exists: out += "E " + f->name + ". "; print(f->kids[0], 0, out); break;
        case Kind::Count: {
            const char* c = f->cmp == Cmp::Le ? "<=" : f->cmp == Cmp::Ge ? ">=" : "=";
            out += "E[" + std::string(c) + std::to_string(f->count) + "] " + f->name + ". ";
            print(f->kids[0], 0, out);
            break;
        }
        case Kind::SetForall: out += "ASet " + f->name + ". "; print(f->kids[0], 0, out); break;
        case Kind::SetExists: out += "ESet " + f->name + ". "; print(f->kids[0], 0, out); break;
        case Kind::SubExists: out += "ESub " + f->name + " <= " + f->guard + ". "; print(f->kids[0], 0, out); break;
        case Kind::SubForall: out += "ASub " + f->name + " <= " + f->guard + ". "; print(f->kids[0], 0, out); break;
    }
    if (wrap) out += ')';
}

}  // namespace

Formula parse_formula(const std::string& text, const Vocabulary& vocab, const ParseOptions& opt) {
    return Parser(text, vocab, opt).run();
}

Formula parse_sentence(const std::string& text, const Vocabulary& vocab) {
    ParseOptions o;
    o.free_vars = std::vector<std::string>{};
    return parse_formula(text, vocab, o);
}

std::string print_formula(const Formula& f) {
    std::string out;
    print(f, 0, out);
    return out;
}

}  // namespace msosep
