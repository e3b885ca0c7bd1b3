#include "msosep/pipeline.hpp"

#include <sstream>

namespace msosep {

namespace {

Vocabulary binaries_of(const Vocabulary& v) {
    Vocabulary r;
    for (auto& b : v.binary()) r.add(b, 2);
    return r;
}

void note(ReductionArtifact& a, const std::string& stage, const std::string& detail) {
    a.log.push_back({stage, detail});
}

std::string sz(const Formula& f) { return std::to_string(formula_size(f)); }

// every symbol of v that s lacks is added empty
Structure complete(const Structure& s, const Vocabulary& v) {
    Structure r = s;
    for (auto& [name, ar] : v.symbols())
        if (!r.interprets(name)) r.add_symbol(name, ar);
    return r;
}

}  // namespace

int size_map(int n0, int /*k*/) { return encoding_size_bound(n0); }

ReductionArtifact reduce(const Formula& alpha, const Vocabulary& cb, const Formula& beta, const Vocabulary& cu,
                         const ReduceOptions& o) {
    if (o.k < 0) throw Error("InvalidArgument", "k >= 0");
    check_vocabulary(alpha, cb);
    check_vocabulary(beta, cu);
    if (!is_c2(beta)) throw Error("NotC2", "beta");
    ReductionArtifact a;
    a.alpha = alpha;
    a.beta = beta;
    a.cb = cb;
    a.cu = cu;
    a.k = o.k;
    a.K = o.k + 1;

    for (auto& b : cb.binary()) a.separation_needed |= cu.arity(b) == 2;
    if (a.separation_needed) {
        SeparationOptions so;
        so.type_cap = o.type_cap;
        so.strict = o.strict;
        so.trace = o.trace;
        a.separation = build_separation(alpha, cb, beta, cu, o.k, so);
        const auto& c = *a.separation;
        Formula bounded = f::conj({c.alpha, c.sigma_f, c.sigma_g, c.sigma_c, delta_sentence(c, Side::Bounded),
                                   color_sentence(c)});
        Formula unbounded = f::conj({c.beta_nf, c.sigma_f, c.sigma_g, delta_sentence(c, Side::Unbounded), color_sentence(c)});
        a.cu_plus = c.main;
        for (auto& s : symbols_of(bounded))
            if (is_p_symbol(s)) a.cu_plus.add(s, 1);
        for (auto& s : symbols_of(unbounded))
            if (is_p_symbol(s)) a.cu_plus.add(s, 1);
        a.alpha_plus = copy_formula(bounded, a.cu_plus);
        a.beta_plus = unbounded;
        a.cb_plus = copy_vocabulary(a.cu_plus);
        note(a, "separation", "shared binary symbols; " + std::to_string(c.sigma.size()) + " message symbols, " +
                                  std::to_string(c.colors) + " colors, |C_U+| = " + std::to_string(a.cu_plus.size()));
    } else {
        a.alpha_plus = alpha;
        a.beta_plus = beta;
        a.cb_plus = cb;
        a.cu_plus = cu;
        note(a, "separation", "identity: C_B and C_U share no binary symbol");
    }

    a.trdom = build_tr_and_dom(a.cb_plus, a.cu_plus, a.K);
    a.omega = induced_translation(a.trdom.tr, a.alpha_plus);
    a.beta_prime = induced_translation(a.trdom.tr, a.beta_plus);
    if (!is_c2(a.beta_prime)) throw Error("InvariantViolation", "tr#(beta+) is not C2");
    a.alpha_prime = f::conj(a.trdom.dom, a.omega);
    note(a, "tree-interpretation", "K = " + std::to_string(a.K) + "; |tr#(alpha+)| = " + sz(a.omega) +
                                       ", |tr#(beta+)| = " + sz(a.beta_prime) + ", qr(omega) = " +
                                       std::to_string(quantifier_rank(a.omega)));

    a.delta_vocab = a.trdom.tr.source;
    if (!o.emit_c2) {
        a.delta = f::conj({a.trdom.dom, a.omega, a.beta_prime});
        note(a, "hintikka", "skipped: MSO part kept, decided by direct evaluation");
    } else if (auto r = c2_rename(a.omega)) {
        a.gamma = *r;
        a.delta = f::conj({a.trdom.dom, a.gamma, a.beta_prime});
        note(a, "hintikka", "MSO part is already C2");
    } else {
        Vocabulary hv{{kSucc, 2}, {kRoot, 1}};
        for (auto& s : symbols_of(a.omega)) hv.add(s, a.delta_vocab.arity(s));
        auto cfg = config_for(a.omega, hv);
        a.hintikka_cfg = cfg;
        a.value_universe = tree_value_universe(cfg, o.theta_tree_cap);
        a.theta = emit_theta_symbolic(cfg, a.value_universe);
        a.gamma = f::conj(a.theta->sentence, omega_hin(*a.theta, a.value_universe, a.omega));
        a.delta = f::conj({a.trdom.dom, a.gamma, a.beta_prime});
        a.delta_vocab = a.delta_vocab.unite(a.theta->vocab);
        note(a, "hintikka", "Theta over " + std::to_string(a.value_universe.size()) + " values of trees with at most " +
                                std::to_string(o.theta_tree_cap) + " nodes, q = " + std::to_string(cfg.q));
    }
    a.delta_is_c2 = is_c2(a.delta);
    if (o.emit_c2 && !a.delta_is_c2) throw Error("InvariantViolation", "assembled delta is not C2");
    note(a, "assembly", "|delta| = " + sz(a.delta) + " over " + std::to_string(a.delta_vocab.size()) + " symbols" +
                            (a.delta_is_c2 ? ", C2" : ", MSO part kept"));
    return a;
}

std::string ReductionArtifact::to_text() const {
    std::ostringstream out;
    out << "k: " << k << "\nlabels: " << K << "\n";
    out << "alpha: " << print_formula(alpha) << "\nbeta: " << print_formula(beta) << "\n";
    out << "C_B:" << cb.to_string() << "\nC_U:" << cu.to_string() << "\n";
    for (auto& r : log) out << "stage " << r.stage << ": " << r.detail << "\n";
    out << "alpha+: " << print_formula(alpha_plus) << "\n";
    out << "beta+: " << print_formula(beta_plus) << "\n";
    out << "dom: " << print_formula(trdom.dom) << "\n";
    out << "omega: " << print_formula(omega) << "\n";
    out << "beta': " << print_formula(beta_prime) << "\n";
    if (theta) out << "theta symbols: " << theta->symbol.size() << "\n";
    out << "delta vocabulary size: " << delta_vocab.size() << "\n";
    out << "delta is C2: " << (delta_is_c2 ? "yes" : "no") << "\n";
    out << "delta: " << print_formula(delta) << "\n";
    return out.str();
}

Structure encode_for_delta(const ReductionArtifact& art, const Structure& m) {
    Structure base;
    if (art.separation_needed) {
        auto e = expand_to_separated(m, *art.separation);
        base = complete(e.full, art.cb_plus.unite(art.cu_plus));
    } else {
        base = reduct(m, art.cb.unite(art.cu));
    }
    auto enc = encode_structure(reduct(base, art.cb_plus), art.K);
    Structure t = enc.tree;
    const Vocabulary unbounded_only = art.cu_plus.minus(art.cb_plus);
    for (auto& [name, ar] : unbounded_only.symbols()) {
        t.add_symbol(name, ar);
        if (ar == 1) {
            for (int u = 0; u < base.size(); ++u)
                if (base.holds(name, u)) t.set(name, enc.node_of[u]);
        } else {
            for (auto [u, v] : base.pairs(name)) t.set(name, enc.node_of[u], enc.node_of[v]);
        }
    }
    if (art.theta) {
        const auto& cfg = *art.hintikka_cfg;
        Structure labelled = theta_expansion(reduct(t, cfg.vocab), *art.theta, cfg);
        t = expand(t, reduct(labelled, art.theta->vocab.minus(cfg.vocab)));
    }
    return complete(t, art.delta_vocab);
}

Structure extract_from_tree(const ReductionArtifact& art, const Structure& tree) {
    auto tr = apply_transduction(art.trdom.tr, reduct(tree, art.trdom.tr.source));
    if (!tr) throw Error("VerificationFailed", "tree selects no element");
    Structure m;
    if (art.separation_needed) {
        const auto& c = *art.separation;
        Structure n = unbounded_half(c, tr->s), np = bounded_half(c, tr->s);
        auto norm = edge_swap_normalize(c, n, np);
        m = extract_model(c, norm.sequence.back(), np);
    } else {
        m = reduct(tr->s, art.cb.unite(art.cu));
    }
    Structure base = reduct(m, art.cb.unite(art.cu));
    if (!evaluate(base, art.alpha) || !evaluate(base, art.beta))
        throw Error("VerificationFailed", "extracted structure is not a model of alpha & beta");
    if (treewidth(gaifman(reduct(base, binaries_of(art.cb)))) > art.k)
        throw Error("VerificationFailed", "extracted structure exceeds the tree-width bound");
    return base;
}

EndToEnd end_to_end(const ReductionArtifact& art, int n0, double time_cap_seconds) {
    EndToEnd r;
    r.n0 = n0;
    r.tree_cap = size_map(n0, art.k);
    SearchBudget direct;
    direct.max_size = n0;
    direct.time_cap_seconds = time_cap_seconds;
    direct.shape.kind = ShapeConstraint::Treewidth;
    direct.shape.k = art.k;
    direct.shape.reduct = binaries_of(art.cb);
    r.direct = bounded_sat(f::conj(art.alpha, art.beta), art.cb.unite(art.cu), direct);

    SearchBudget tb;
    tb.max_size = r.tree_cap;
    tb.time_cap_seconds = time_cap_seconds;
    tb.shape.kind = ShapeConstraint::Tree;
    tb.shape.symbol = kSucc;
    r.tree = bounded_sat(art.delta, art.delta_vocab, tb);

    std::ostringstream why;
    if (r.direct.sat) {
        Structure t = encode_for_delta(art, r.direct.model);
        r.constructive_ok = t.size() <= r.tree_cap && is_binary_tree(t, kSucc) && evaluate(t, art.delta);
        if (!r.constructive_ok) why << "encoding of the direct model fails delta; ";
    }
    bool extracted_ok = true;
    if (r.tree.sat) {
        try {
            r.extracted = extract_from_tree(art, r.tree.model);
        } catch (const Error& e) {
            if (e.is_cap()) throw;
            extracted_ok = false;
            why << "extraction: " << e.what() << "; ";
        }
    }
    bool ok = true;
    if (r.direct.sat && !(r.tree.sat && r.constructive_ok)) ok = false;
    if (r.tree.sat && !extracted_ok) ok = false;
    if (r.extracted && r.extracted->size() <= n0 && !r.direct.sat) {
        ok = false;
        why << "tree model decodes to a small model the direct search missed; ";
    }
    if (!r.tree.sat && r.direct.sat) why << "no tree model within " << r.tree_cap << "; ";
    r.agree = ok;
    r.note = why.str();
    return r;
}

void mutate_sigma_g(SeparationContext& c) {
    // A x. A y. (~x = y -> (ra <-> adj))  becomes  ... (~ra <-> adj)
    const Formula& fa = c.sigma_g;
    const Formula& fb = fa->kids.at(0);
    const Formula& imp = fb->kids.at(0);
    const Formula& iff = imp->kids.at(1);
    Formula flipped = f::iff(f::neg(iff->kids.at(0)), iff->kids.at(1));
    c.sigma_g = f::forall(fa->name, f::forall(fb->name, f::implies(imp->kids.at(0), flipped)));
}

}  // namespace msosep
