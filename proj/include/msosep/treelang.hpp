#pragma once
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msosep/structures.hpp"

namespace msosep {

// Result of a transduction: the structure plus, per new element, the source element it came from.
struct Transduced {
    Structure s;
    std::vector<int> origin;
};

// phi has free variable x; unary psi has x, binary psi has x and y.
struct TranslationScheme {
    std::string name;
    Vocabulary source, target;
    Formula phi;
    std::map<std::string, Formula> psi;
    // optional fast path computing the same map as the formulas
    std::function<std::optional<Transduced>(const Structure&)> native;

    int quantifier_rank() const;
    bool quantifier_free() const { return quantifier_rank() == 0; }
    void validate() const;  // VocabularyMismatch / free variable violations
};

// formula-only application; nullopt when phi selects nothing
std::optional<Transduced> apply_generic(const TranslationScheme& t, const Structure& a);
// uses the native path when present
std::optional<Transduced> apply_transduction(const TranslationScheme& t, const Structure& a);

Formula induced_translation(const TranslationScheme& t, const Formula& theta);

// (t1 o t2)* = t2* after t1*
TranslationScheme compose_schemes(const TranslationScheme& t1, const TranslationScheme& t2);
TranslationScheme identity_scheme(const Vocabulary& v);
// adds psi_C = C(x[,y]) for each symbol of extra, on both sides
TranslationScheme extend_with_copies(const TranslationScheme& t, const Vocabulary& extra);

// K label classes. Symbol names of the tree vocabulary:
std::string label_symbol(int i);  // Label_1..Label_K
extern const char* const kBlank;  // Label_blank
extern const char* const kRoot;   // root
extern const char* const kSucc;   // s
Vocabulary tree_vocabulary(int K);          // V
Vocabulary r_vocabulary(int K);             // R_1..R_K
Vocabulary xi_vocabulary(const Vocabulary& c, int K);  // un(C) plus U_B_j, U_B_inv_j, U_B_self
std::string u_symbol(const std::string& b, int j);
std::string u_inv_symbol(const std::string& b, int j);
std::string u_self_symbol(const std::string& b);

Formula enc_sentence(int K);
bool is_aligned_encoding(const Structure& t, int K);

// there is P within s forming a directed simple path from a to b; when label is
// nonempty the vertices entered by P must avoid it
Formula dpath_formula(const std::string& a, const std::string& b, const std::string& label = "");
bool dpath_native(const Structure& t, int a, int b, const std::string& label = "");

// extra: unary symbols carried through unchanged (the annotation symbols)
TranslationScheme interpret_scheme(int K, const Vocabulary& extra = {});
TranslationScheme undecorate_scheme(int K, const Vocabulary& extra = {});
TranslationScheme structurize_scheme(const Vocabulary& c, int K);

struct Encoding {
    Structure tree;            // over tree_vocabulary(K) plus xi_vocabulary(C, K)
    std::vector<int> node_of;  // element of M -> tree node
    int K = 0;
};

// needs tw(M) <= K-1; throws TreewidthExceeded, RoundTripFailed
Encoding encode_structure(const Structure& m, int K);
int encoding_size_bound(int n);  // 2n - 1

struct TrDom {
    TranslationScheme tr;  // C_B u C_U over V u Xi_{C_B} u (C_U \ C_B)
    Formula dom;
    int K = 0;
};
TrDom build_tr_and_dom(const Vocabulary& cb, const Vocabulary& cu, int K);

std::string serialize_scheme(const TranslationScheme& t);
TranslationScheme parse_scheme(const std::string& text);

}  // namespace msosep
