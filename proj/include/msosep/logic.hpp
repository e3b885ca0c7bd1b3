#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "msosep/error.hpp"

namespace msosep {

class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::initializer_list<std::pair<std::string, int>> syms);

    void add(const std::string& name, int arity);
    bool has(const std::string& name) const { return syms_.count(name) != 0; }
    int arity(const std::string& name) const;  // 0 when absent
    std::vector<std::string> unary() const;
    std::vector<std::string> binary() const;
    std::vector<std::string> names() const;
    const std::map<std::string, int>& symbols() const { return syms_; }
    size_t size() const { return syms_.size(); }
    bool empty() const { return syms_.empty(); }

    Vocabulary unite(const Vocabulary& o) const;
    Vocabulary intersect(const Vocabulary& o) const;
    Vocabulary minus(const Vocabulary& o) const;
    bool subset_of(const Vocabulary& o) const;

    bool operator==(const Vocabulary& o) const { return syms_ == o.syms_; }

    // "name/arity" per line
    static Vocabulary parse(const std::string& text);
    std::string to_string() const;

private:
    std::map<std::string, int> syms_;
};

enum class Kind {
    True, False,
    Unary, Binary, Equal, SetAtom, SubAtom,
    Card,  // |X1|+..+|Xn| < |Y1|+..+|Ym|; lhs count in `count`
    Not, And, Or, Implies, Iff,
    Forall, Exists, Count,
    SetForall, SetExists, SubExists, SubForall
};

enum class Cmp { Le, Ge, Eq };

struct Node;
using Formula = std::shared_ptr<const Node>;

// name: symbol, set/sub variable, or bound variable depending on kind.
// terms: variable names or decimal element constants.
struct Node {
    Kind kind;
    std::string name;
    std::string guard;
    std::vector<std::string> terms;
    Cmp cmp = Cmp::Ge;
    int count = 0;
    std::vector<Formula> kids;
};

namespace f {
Formula top();
Formula bot();
Formula atom(const std::string& sym, const std::string& t);
Formula atom(const std::string& sym, const std::string& t, const std::string& u);
Formula eq(const std::string& t, const std::string& u);
Formula set_atom(const std::string& var, const std::string& t);
Formula sub_atom(const std::string& var, const std::string& t, const std::string& u);
Formula card(const std::vector<std::string>& lhs, const std::vector<std::string>& rhs);
Formula neg(Formula a);
Formula conj(std::vector<Formula> kids);  // [] -> true, [a] -> a
Formula disj(std::vector<Formula> kids);  // [] -> false, [a] -> a
Formula conj(Formula a, Formula b);
Formula disj(Formula a, Formula b);
Formula implies(Formula a, Formula b);
Formula iff(Formula a, Formula b);
Formula forall(const std::string& v, Formula body);
Formula exists(const std::string& v, Formula body);
Formula count(Cmp c, int n, const std::string& v, Formula body);
Formula set_forall(const std::string& v, Formula body);
Formula set_exists(const std::string& v, Formula body);
Formula sub_exists(const std::string& v, const std::string& guard, Formula body);
Formula sub_forall(const std::string& v, const std::string& guard, Formula body);
Formula make(Kind k, const Node& proto, std::vector<Formula> kids);
}  // namespace f

bool is_quantifier(Kind k);
bool is_term_constant(const std::string& t);

struct ParseOptions {
    // when set, FO variables must be bound or listed here
    std::optional<std::vector<std::string>> free_vars;
    bool allow_card = false;
    std::vector<std::string> set_vars;  // pre-bound set variables (cardinality prefix)
};

Formula parse_formula(const std::string& text, const Vocabulary& vocab, const ParseOptions& opt = {});
Formula parse_sentence(const std::string& text, const Vocabulary& vocab);
std::string print_formula(const Formula& f);

bool structurally_equal(const Formula& a, const Formula& b);
int quantifier_rank(const Formula& f);
bool is_quantifier_free(const Formula& f);
std::set<std::string> free_vars(const Formula& f);
std::set<std::string> free_set_vars(const Formula& f);  // set and sub variables
std::set<std::string> all_var_names(const Formula& f);
Vocabulary vocabulary_of(const Formula& f, const Vocabulary& ambient);
std::set<std::string> symbols_of(const Formula& f);
void check_vocabulary(const Formula& f, const Vocabulary& vocab);  // UnknownSymbol / ArityMismatch
size_t formula_size(const Formula& f);

// alpha-renames bound variables into {x, y}; nullopt when impossible
std::optional<Formula> c2_rename(const Formula& f);
bool is_c2(const Formula& f);

// simultaneous capture-avoiding substitution of free FO variables by terms
Formula substitute(const Formula& f, const std::map<std::string, std::string>& sub);
// replace every atom of symbol `sym` by `repl` instantiated on the atom's terms;
// params are the free variables of repl standing for the arguments
Formula replace_symbol(const Formula& f, const std::string& sym,
                       const std::vector<std::string>& params, const Formula& repl);
Formula rename_symbols(const Formula& f, const std::map<std::string, std::string>& ren);

std::string copy_name(const std::string& sym);
Vocabulary copy_vocabulary(const Vocabulary& v);
Formula copy_formula(const Formula& f, const Vocabulary& v);

std::string fresh_name(const std::string& base, const std::set<std::string>& taken);

}  // namespace msosep
