#pragma once
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "msosep/hintikka.hpp"
#include "msosep/sat.hpp"
#include "msosep/separation.hpp"
#include "msosep/treelang.hpp"

namespace msosep {

struct ReduceOptions {
    int k = 1;
    bool emit_c2 = false;         // replace the MSO part by Theta & omega_hin
    int theta_tree_cap = 3;       // value universe: all trees up to this many nodes
    long long type_cap = kDefaultTypeCap;
    bool strict = true;
    std::ostream* trace = nullptr;
};

struct StageRecord {
    std::string stage;
    std::string detail;
};

struct ReductionArtifact {
    Formula alpha, beta;
    Vocabulary cb, cu;
    int k = 0, K = 0;

    bool separation_needed = false;               // C_B and C_U share a binary symbol
    std::optional<SeparationContext> separation;  // when needed
    Formula alpha_plus, beta_plus;
    Vocabulary cb_plus, cu_plus;

    TrDom trdom;
    Formula omega;       // tr#(alpha+), the MSO part over trees
    Formula beta_prime;  // tr#(beta+), C2
    Formula alpha_prime; // dom & omega

    // --emit-c2
    std::optional<HintikkaConfig> hintikka_cfg;
    std::optional<Theta> theta;
    std::vector<HintikkaValue> value_universe;
    Formula gamma;       // Theta & omega_hin, or omega itself when omega is C2 already

    Formula delta;       // dom & omega & beta' (or the C2 assembly)
    Vocabulary delta_vocab;
    bool delta_is_c2 = false;
    std::vector<StageRecord> log;

    std::string to_text() const;
};

// CapExceeded / TypeExplosion when a stage outgrows its caps
ReductionArtifact reduce(const Formula& alpha, const Vocabulary& cb, const Formula& beta, const Vocabulary& cu,
                         const ReduceOptions& o = {});

// documented size map: a model with n elements has an encoding tree of at most f(n) nodes
int size_map(int n0, int k);

// tree model of delta for M over C_B u C_U with M |= alpha & beta and tw(M|C_B) <= k
Structure encode_for_delta(const ReductionArtifact& art, const Structure& m);
// M over C_B u C_U read back from a tree model of delta; VerificationFailed when
// the result is not a model of alpha & beta with tw <= k
Structure extract_from_tree(const ReductionArtifact& art, const Structure& tree);

struct EndToEnd {
    int n0 = 0, tree_cap = 0;
    SatResult direct, tree;
    bool constructive_ok = true;        // encode_for_delta(direct model) |= delta
    std::optional<Structure> extracted; // from the tree model
    bool agree = false;
    std::string note;
};

// direct search on alpha & beta (tw <= k on C_B, size <= n0) against the search for a
// tree model of delta of size <= size_map(n0, k)
EndToEnd end_to_end(const ReductionArtifact& art, int n0, double time_cap_seconds = 0);

struct VerifyOptions {
    std::string mutant;  // "" or "sigma-g-polarity"
    double time_cap_seconds = 0;
    std::ostream* trace = nullptr;
};

struct VerifyReport {
    std::string stage, suite;
    bool passed = true;
    long long checked = 0, failed = 0;
    std::string summary;
    std::vector<std::string> counterexamples;  // structure text plus context
    std::string to_text() const;               // "key: value" lines
};

std::vector<std::string> verify_stages();
// suite "quick" or "full"; UnknownSuite for anything else or an unknown stage
VerifyReport verify_stage(const std::string& stage, const std::string& suite = "quick", const VerifyOptions& o = {});

// the sigma_g polarity mutant: the left side of the iff in sigma_g is negated
void mutate_sigma_g(SeparationContext& c);

}  // namespace msosep
