// msosep command line: parse, scott, separate, encode, reduce, sat, verify
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "msosep/cardinality.hpp"
#include "msosep/pipeline.hpp"

using namespace msosep;

namespace {

// "@path" reads the file, anything else is taken literally
std::string text_arg(const std::string& s) {
    if (s.empty() || s[0] != '@') return s;
    std::ifstream in(s.substr(1));
    if (!in) throw Error("IOError", "cannot read " + s.substr(1));
    std::stringstream b;
    b << in.rdbuf();
    return b.str();
}

// "E/2,A/1" or a file with one symbol per line
Vocabulary vocab_arg(const std::string& s) {
    std::string t = text_arg(s);
    for (auto& ch : t)
        if (ch == ',' || ch == ';') ch = '\n';
    return Vocabulary::parse(t);
}

Structure structure_arg(const std::string& s, const Vocabulary* v = nullptr) { return Structure::parse(text_arg(s), v); }

Vocabulary binaries_only(const Vocabulary& v) {
    Vocabulary r;
    for (auto& b : v.binary()) r.add(b, 2);
    return r;
}

struct Common {
    int k = 1, q = 1, max_size = 4;
    double time_cap = 0;
    bool trace = false, emit_c2 = false, strict = true, dump_values = false;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bounded reasoning toolkit for MSO over bounded tree-width parts with C2 side conditions"};
    app.require_subcommand(1);
    Common g;
    auto flags = [&](CLI::App* sc) {
        sc->add_option("--k", g.k, "tree-width bound")->check(CLI::NonNegativeNumber);
        sc->add_option("--q", g.q, "quantifier rank for value digests")->check(CLI::NonNegativeNumber);
        sc->add_option("--max-size", g.max_size, "largest structure searched")->check(CLI::PositiveNumber);
        sc->add_option("--time-cap", g.time_cap, "seconds, 0 for none")->check(CLI::NonNegativeNumber);
        sc->add_flag("--trace", g.trace, "one line per edge swap");
        sc->add_flag("--emit-c2", g.emit_c2, "replace the MSO part by a C2 labelling");
        sc->add_flag("--strict-asserts,!--no-strict-asserts", g.strict, "assert every normalization step");
        sc->add_flag("--dump-values", g.dump_values, "print a value digest per tree node");
    };

    std::string formula, vocab = "", alpha, beta, cb, cu, model_file, structure_file, stage = "all", suite = "quick",
                                     mutant, tree_symbol;
    bool card = false, tw_shape = false;
    int n0 = 0;

    auto* parse = app.add_subcommand("parse", "parse and print a formula");
    parse->add_option("formula", formula, "formula text or @file")->required();
    parse->add_option("--vocab", vocab, "symbols, e.g. E/2,A/1 or @file");
    parse->add_flag("--card", card, "cardinality sentence with an existential set prefix");
    flags(parse);

    auto* scott = app.add_subcommand("scott", "normal form of a C2 sentence");
    scott->add_option("formula", formula)->required();
    scott->add_option("--vocab", vocab);
    flags(scott);

    auto* separate = app.add_subcommand("separate", "separation context, optional model expansion and swaps");
    for (auto* sc : {separate}) {
        sc->add_option("--alpha", alpha, "MSO sentence over the bounded vocabulary")->required();
        sc->add_option("--cb", cb, "bounded vocabulary")->required();
        sc->add_option("--beta", beta, "C2 sentence over the unbounded vocabulary")->required();
        sc->add_option("--cu", cu, "unbounded vocabulary")->required();
    }
    separate->add_option("--model", model_file, "structure over both vocabularies (text or @file)");
    flags(separate);

    auto* encode = app.add_subcommand("encode", "encode a structure as a labelled binary tree");
    encode->add_option("structure", structure_file, "structure text or @file")->required();
    flags(encode);

    auto* reduce_cmd = app.add_subcommand("reduce", "build the tree sentence delta");
    reduce_cmd->add_option("--alpha", alpha)->required();
    reduce_cmd->add_option("--cb", cb)->required();
    reduce_cmd->add_option("--beta", beta)->required();
    reduce_cmd->add_option("--cu", cu)->required();
    reduce_cmd->add_option("--check", n0, "run both bounded searches up to this many elements");
    flags(reduce_cmd);

    auto* sat = app.add_subcommand("sat", "bounded model search");
    sat->add_option("formula", formula)->required();
    sat->add_option("--vocab", vocab);
    sat->add_option("--tree", tree_symbol, "only binary trees over this symbol");
    sat->add_flag("--tw", tw_shape, "tree-width of the binary symbols at most --k");
    sat->add_flag("--card", card, "cardinality sentence; searched through its rewrite");
    flags(sat);

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("--stage", stage, "stage name or all");
    verify->add_option("--suite", suite, "quick or full");
    verify->add_option("--mutant", mutant, "sigma-g-polarity");
    flags(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*parse) {
            Vocabulary v = vocab_arg(vocab);
            if (card) {
                auto rho = parse_card(text_arg(formula), v);
                std::cout << print_formula(rho.sentence()) << "\n";
                std::cout << "prefix:";
                for (auto& p : rho.prefix) std::cout << " " << p;
                std::cout << "\ncardinality atoms: " << rho.card_atoms().size() << "\n";
                return 0;
            }
            auto f = parse_sentence(text_arg(formula), v);
            std::cout << print_formula(f) << "\n";
            std::cout << "quantifier rank: " << quantifier_rank(f) << "\n";
            std::cout << "C2: " << (is_c2(f) ? "yes" : "no") << "\n";
            return 0;
        }
        if (*scott) {
            Vocabulary v = vocab_arg(vocab);
            auto nf = scott_normal_form(parse_sentence(text_arg(formula), v), v);
            std::cout << print_formula(nf.sentence()) << "\n";
            std::cout << "vocabulary:\n" << nf.vocab.to_string();
            return 0;
        }
        if (*separate) {
            Vocabulary vb = vocab_arg(cb), vu = vocab_arg(cu);
            SeparationOptions so;
            so.strict = g.strict;
            so.trace = g.trace ? &std::cout : nullptr;
            auto c = build_separation(parse_sentence(text_arg(alpha), vb), vb, parse_sentence(text_arg(beta), vu), vu,
                                      g.k, so);
            std::cout << "message symbols: " << c.sigma.size() << "\ncolors: " << c.colors << "\n";
            std::cout << "beta normal form: " << print_formula(c.beta_nf) << "\n";
            if (model_file.empty()) return 0;
            Vocabulary all = vb.unite(vu);
            Structure m = structure_arg(model_file, &all);
            auto e = expand_to_separated(m, c);
            bool ok = satisfies_separated(c, e.full);
            std::cout << "expansion:\n" << e.full.to_text();
            std::cout << "alpha+ & beta+: " << (ok ? "satisfied" : "violated") << "\n";
            for (auto& [n, np] : swap_instances(c, e, 4)) {
                auto norm = edge_swap_normalize(c, n, np);
                std::cout << "normalization: rank " << rank(c, n, np) << " -> "
                          << rank(c, norm.sequence.back(), np) << " in " << norm.steps.size() << " swaps\n";
                if (g.trace)
                    for (auto& st : norm.steps) std::cout << "  " << st.trace() << "\n";
                auto back = extract_model(c, norm.sequence.back(), np);
                ok &= evaluate(back, c.alpha) && evaluate(back, c.beta);
            }
            return ok ? 0 : 1;
        }
        if (*encode) {
            Structure m = structure_arg(structure_file);
            int K = g.k + 1;
            auto enc = encode_structure(m, K);
            std::cout << enc.tree.to_text();
            std::cout << "# nodes: " << enc.tree.size() << " (bound " << encoding_size_bound(m.size()) << ")\n";
            std::cout << "# element -> node:";
            for (size_t u = 0; u < enc.node_of.size(); ++u) std::cout << " " << u << "->" << enc.node_of[u];
            std::cout << "\n";
            auto back = apply_transduction(build_tr_and_dom(m.vocab(), Vocabulary(), K).tr, enc.tree);
            bool ok = back && isomorphic(back->s, m);
            std::cout << "# round trip: " << (ok ? "isomorphic" : "FAILED") << "\n";
            if (g.dump_values) {
                HintikkaConfig cfg;
                cfg.vocab = tree_vocabulary(K);
                cfg.q = g.q;
                cfg.max_universe = std::max(cfg.max_universe, enc.tree.size());
                auto a = annotate_tree(reduct(enc.tree, cfg.vocab), cfg);
                for (size_t u = 0; u < a.node.size(); ++u)
                    std::cout << "# value " << u << ": " << a.node[u].hex() << "\n";
            }
            return ok ? 0 : 1;
        }
        if (*reduce_cmd) {
            Vocabulary vb = vocab_arg(cb), vu = vocab_arg(cu);
            ReduceOptions ro;
            ro.k = g.k;
            ro.emit_c2 = g.emit_c2;
            ro.strict = g.strict;
            ro.trace = g.trace ? &std::cout : nullptr;
            auto art = reduce(parse_sentence(text_arg(alpha), vb), vb, parse_sentence(text_arg(beta), vu), vu, ro);
            std::cout << art.to_text();
            if (n0 <= 0) return 0;
            auto r = end_to_end(art, n0, g.time_cap);
            std::cout << "direct search (size <= " << n0 << "): "
                      << (r.direct.sat ? "SAT" : "NO_MODEL_WITHIN " + std::to_string(n0)) << "\n";
            std::cout << "tree search (size <= " << r.tree_cap << "): "
                      << (r.tree.sat ? "SAT" : "NO_MODEL_WITHIN " + std::to_string(r.tree_cap)) << "\n";
            if (r.extracted) std::cout << "extracted model:\n" << r.extracted->to_text();
            std::cout << "agree: " << (r.agree ? "yes" : "no") << (r.note.empty() ? "" : " (" + r.note + ")") << "\n";
            return r.agree ? 0 : 1;
        }
        if (*sat) {
            Vocabulary v = vocab_arg(vocab);
            if (card) {
                auto d = decide_card_bounded(parse_card(text_arg(formula), v), g.k, g.max_size, g.time_cap);
                if (!d.sat) {
                    std::cout << "NO_MODEL_UP_TO " << d.n_max << " (bounded search only; not a proof of unsatisfiability)\n";
                    return 1;
                }
                std::cout << "SAT\n" << d.model.to_text();
                return 0;
            }
            SearchBudget b;
            b.max_size = g.max_size;
            b.time_cap_seconds = g.time_cap;
            if (!tree_symbol.empty()) {
                b.shape.kind = ShapeConstraint::Tree;
                b.shape.symbol = tree_symbol;
            } else if (tw_shape) {
                b.shape.kind = ShapeConstraint::Treewidth;
                b.shape.k = g.k;
                b.shape.reduct = binaries_only(v);
            }
            auto r = bounded_sat(parse_sentence(text_arg(formula), v), v, b);
            if (!r.sat) {
                std::cout << "NO_MODEL_WITHIN max-size " << g.max_size
                          << " (bounded search only; not a proof of unsatisfiability)\n";
                return 1;
            }
            std::cout << "SAT\n" << r.model.to_text();
            return 0;
        }
        if (*verify) {
            VerifyOptions o;
            o.mutant = mutant;
            o.time_cap_seconds = g.time_cap;
            o.trace = g.trace ? &std::cout : nullptr;
            std::vector<std::string> stages = stage == "all" ? verify_stages() : std::vector<std::string>{stage};
            bool all = true;
            for (auto& st : stages) {
                auto rep = verify_stage(st, suite, o);
                std::cout << rep.to_text() << "\n";
                all &= rep.passed;
            }
            return all ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_cap() ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
