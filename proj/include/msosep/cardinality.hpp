#pragma once
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msosep/sat.hpp"
#include "msosep/structures.hpp"

namespace msosep {

// exists X_1..X_m . matrix, where only the X_i may occur in |..| < |..| atoms.
// Prefix syntax: "ESet X." or the short form "EX." (capital after the E).
struct CardSentence {
    std::vector<std::string> prefix;
    Formula matrix;  // prefix variables appear as set atoms
    Vocabulary vocab;

    std::vector<Formula> card_atoms() const;  // distinct, in order of occurrence
    Formula sentence() const;                 // the closed MSO-with-card formula
};

// SyntaxError, CardVarNotInPrefix, UnknownSymbol, ArityMismatch
CardSentence parse_card(const std::string& text, const Vocabulary& vocab);

// Symbols introduced for one atom sum_i |X_i| < sum_j |Y_j|. Items are the pairs
// (i, x in X_i) on the left and (j, y in Y_j) on the right; B[i][j](x, y) links
// item (i, x) to item (j, y). w_dom[i] marks left items with a link, w_img[j]
// right items with a link.
struct CardAtomRewrite {
    Formula atom;
    std::vector<std::string> lhs, rhs;
    std::vector<std::vector<std::string>> b;
    std::vector<std::string> w_dom, w_img;
    Formula substitute;  // goes into alpha
    Formula axioms;      // goes into beta
};

struct CardRewrite {
    std::vector<std::string> prefix;  // now unary symbols
    std::vector<CardAtomRewrite> atoms;
    Formula alpha;     // MSO over cb
    Formula beta;      // C2 over cu
    Vocabulary base;   // vocabulary of the input
    Vocabulary cb;     // base + prefix + W symbols
    Vocabulary cu;     // cb + B symbols
    int k = 0;         // tree-width bound the pair is meant for (on the base binaries)
};

CardRewrite rewrite_card(const CardSentence& rho, int k);

// a over rw.base plus the prefix symbols; returns an expansion by the atom
// symbols satisfying alpha & beta, if one exists (SAT over the fixed structure)
std::optional<Structure> card_expansion(const CardRewrite& rw, const Structure& a);
// the same for a single atom: substitute & axioms
std::optional<Structure> atom_expansion(const CardAtomRewrite& at, const Structure& a);

// direct truth of sum |X_i| < sum |Y_j| on a structure interpreting the sets as unary symbols
bool card_atom_direct(const Formula& atom, const Structure& a);

struct CardDecision {
    bool sat = false;
    int n_max = 0;
    int sizes_searched = 0;            // every size up to this has no model
    Structure model;                   // base + prefix symbols
    std::map<std::string, Set> sets;   // prefix instantiation
    Structure expanded;                // the alpha & beta model found
};

// bounded search for a model of rho with tw <= k; the model is rechecked by
// direct evaluation (VerificationFailed otherwise). CapExceeded, TimeCap.
CardDecision decide_card_bounded(const CardSentence& rho, int k, int n_max, double time_cap_seconds = 0);

}  // namespace msosep
