#pragma once
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "msosep/types.hpp"

namespace msosep {

struct SeparationOptions {
    long long type_cap = kDefaultTypeCap;  // for fully syntactic delta / color sentences
    bool strict = true;                    // assert every proof-step claim during swaps
    std::ostream* trace = nullptr;         // one line per swap
};

// Vocabularies and fixed component sentences. The annotation symbols P_t are
// unary and named after the 2-type they annotate; only those realized in a
// structure are ever materialized (see relevant_* below).
struct SeparationContext {
    Vocabulary cb, cu;        // inputs
    int k = 0;
    Formula alpha, beta;      // beta as given
    ScottForm nf;             // beta's normal form
    Formula beta_nf;          // nf.sentence()
    std::vector<std::string> r_syms, messages, sigma;  // sigma = messages + R
    int colors = 0;
    Vocabulary main;          // C_B u nf.vocab u R u colors
    TypeSignature sig;        // over main
    Formula sigma_f, sigma_g, sigma_c;
    SeparationOptions opts;

    bool is_sigma_type(const TwoType& t) const;
    bool is_r_type(const TwoType& t) const;
    bool in_delta_bounded(const TwoType& t) const;  // R-type, or sigma-type whose inverse is an R-type
};

SeparationContext build_separation(const Formula& alpha, const Vocabulary& cb, const Formula& beta,
                                   const Vocabulary& cu, int k, const SeparationOptions& o = {});

std::string p_symbol(const TwoType& t);
bool is_p_symbol(const std::string& name);

enum class Side { Bounded, Unbounded };

Formula delta_conjunct(const SeparationContext& c, const TwoType& t);
Formula color_conjunct(const SeparationContext& c, const TwoType& t, const std::string& m, const std::string& m2);

// complete syntactic sentences; TypeExplosion past opts.type_cap 2-types
Formula delta_sentence(const SeparationContext& c, Side side);
Formula color_sentence(const SeparationContext& c);

// the conjuncts of the above that are not trivially true on s (s uses C_U+ names);
// every omitted conjunct mentions a P_t that is empty in s and a type s does not realize
Formula relevant_delta(const SeparationContext& c, Side side, const Structure& s);
Formula relevant_color(const SeparationContext& c, const Structure& s);

// one side of the separated pair, over C_U+ names (uncopied)
Formula bounded_core(const SeparationContext& c, const Structure& s);    // alpha & nu_B & sigma_color
Formula unbounded_core(const SeparationContext& c, const Structure& s);  // beta_nf & nu_U & sigma_color

// alpha+ = copy(bounded_core), beta+ = unbounded_core; relevance taken from both halves of f
std::pair<Formula, Formula> separated_sentences(const SeparationContext& c, const Structure& f);
bool satisfies_separated(const SeparationContext& c, const Structure& f);
bool satisfies_bounded_side(const SeparationContext& c, const Structure& n_prime);
bool satisfies_unbounded_side(const SeparationContext& c, const Structure& n);

// halves of a C_U+ u C_B+ structure, both named over C_U+
Structure unbounded_half(const SeparationContext& c, const Structure& f);
Structure bounded_half(const SeparationContext& c, const Structure& f);
Structure join_halves(const SeparationContext& c, const Structure& n, const Structure& n_prime);

struct Expansion {
    Structure full;     // over C_U+ u C_B+
    Structure n;        // unbounded half
    Structure n_prime;  // bounded half renamed back
};
// M over C_B u C_U with M |= alpha & beta and tw(M|C_B) <= k
Expansion expand_to_separated(const Structure& m, const SeparationContext& c);

// rank^i_u as bits [u][i-1]
std::vector<std::vector<int>> rank_contributions(const SeparationContext& c, const Structure& n, const Structure& n_prime);
int rank(const SeparationContext& c, const Structure& n, const Structure& n_prime);
// for every (u, i) with rank bit 0: the 2-type through R_i at u agrees across the pair
bool type_agreement(const SeparationContext& c, const Structure& n, const Structure& n_prime);

struct SwapStep {
    int which_case = 0;  // 1 or 2
    int u = -1, v = -1, w = -1, a = -1, j = 0;
    int rank_before = 0, rank_after = 0;
    std::string trace() const;
};

struct Normalization {
    std::vector<Structure> sequence;  // N_0 .. N_p
    std::vector<SwapStep> steps;
};

Normalization edge_swap_normalize(const SeparationContext& c, const Structure& n, const Structure& n_prime);

// M = N_p on C_B u C_U; checks N_p|C_B = N'|C_B, alpha & beta and tw(M|C_B) <= k
Structure extract_model(const SeparationContext& c, const Structure& np, const Structure& n_prime);

// (N, N') pairs with positive rank built from an expansion: N is the unbounded half with
// a 1-type preserving transposition applied, or with one R-edge moved to an equal-typed target
std::vector<std::pair<Structure, Structure>> swap_instances(const SeparationContext& c, const Expansion& e,
                                                            int limit = 16);

}  // namespace msosep
