#include "csa/inp.hpp"

#include <algorithm>
#include <cmath>

#include "csa/autodiff.hpp"
#include "csa/nn.hpp"
#include "csa/pe.hpp"
#include "csa/relations.hpp"

namespace csa::inp {

std::string scheme_name(PeScheme scheme) {
    switch (scheme) {
        case PeScheme::csa: return "csa";
        case PeScheme::sequential: return "sequential";
        case PeScheme::tree: return "tree";
        case PeScheme::triplet: return "triplet";
        case PeScheme::laplacian: return "laplacian";
    }
    return "?";
}

PeScheme scheme_from_name(const std::string& name) {
    if (name == "csa") return PeScheme::csa;
    if (name == "sequential") return PeScheme::sequential;
    if (name == "tree") return PeScheme::tree;
    if (name == "triplet") return PeScheme::triplet;
    if (name == "laplacian") return PeScheme::laplacian;
    throw UsageError("unknown pe scheme: " + name);
}

std::vector<std::vector<int>> extract_paths(const ast::Ast& tree, int k) {
    std::vector<std::vector<int>> out;
    const int n = tree.size();
    for (int end = 0; end < n; ++end) {
        // walk k+1 steps up; the chain endpoints are (ancestor, end)
        std::vector<int> chain{end};
        int cur = end;
        for (int step = 0; step < k + 1 && tree.nodes[cur].parent; ++step) {
            cur = *tree.nodes[cur].parent;
            chain.push_back(cur);
        }
        if (static_cast<int>(chain.size()) == k + 2) {
            std::reverse(chain.begin(), chain.end());
            out.push_back(std::move(chain));
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.front() != b.front() ? a.front() < b.front() : a.back() < b.back();
    });
    return out;
}

InpDataset build_dataset(const std::vector<ast::DatasetRecord>& corpus, const InpBuildConfig& cfg, uint64_t seed) {
    if (corpus.empty()) throw EmptyCorpus("inp: empty corpus");
    ast::Vocabulary type_vocab = ast::build_vocab(corpus, ast::VocabSource::node_types, 1 << 20);

    // split by AST so no encoding leaks between train and test
    std::vector<int> order(corpus.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng split_rng = derive_rng(seed, "inp.split");
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[split_rng.below(i)]);
    const size_t train_count = static_cast<size_t>(corpus.size() * cfg.split_ratio);

    // per-scheme encoder state shared across the corpus
    nn::ParamStore store;
    std::unique_ptr<pe::Cse> cse;
    std::unique_ptr<pe::TreePe> tree_pe;
    std::unique_ptr<pe::TripletPe> triplet_pe;
    int pe_dim = cfg.d_pe;
    if (cfg.scheme == PeScheme::csa) {
        pe::CseConfig cse_cfg;
        cse_cfg.d_pe = cfg.d_pe;
        cse_cfg.layers = cfg.cse_layers;
        cse_cfg.heads = cfg.cse_heads;
        cse_cfg.p_max = cfg.p_max;
        Rng init_rng = derive_rng(seed, "inp.cse");
        cse = std::make_unique<pe::Cse>(store, "cse", type_vocab.size(), cse_cfg, init_rng);
    } else if (cfg.scheme == PeScheme::tree) {
        pe::TreePeConfig tcfg;
        tcfg.d_pe = cfg.d_pe;
        tree_pe = std::make_unique<pe::TreePe>(tcfg, seed);
    } else if (cfg.scheme == PeScheme::triplet) {
        triplet_pe = std::make_unique<pe::TripletPe>(cfg.d_pe, seed);
        std::vector<const ast::Ast*> train_asts;
        for (size_t i = 0; i < train_count; ++i) train_asts.push_back(&corpus[order[i]].ast);
        triplet_pe->fit(train_asts);
    } else if (cfg.scheme == PeScheme::laplacian) {
        pe_dim = cfg.k_eig;
    }

    auto encode_ast = [&](const ast::Ast& tree) -> std::vector<double> {
        switch (cfg.scheme) {
            case PeScheme::csa: {
                auto ids = ast::encode_node_types(tree, type_vocab);
                auto relations = rel::compute(tree, cfg.p_max);
                return cse->forward(ids, relations).value();
            }
            case PeScheme::sequential: return pe::sequential_pe(tree.size(), cfg.d_pe);
            case PeScheme::tree: return tree_pe->compute(tree);
            case PeScheme::triplet: return triplet_pe->compute(tree);
            case PeScheme::laplacian: return pe::laplacian_pe(tree, cfg.k_eig);
        }
        return {};
    };

    InpDataset ds;
    ds.k = cfg.k;
    ds.label_vocab = type_vocab.size();
    ds.pe_dim = pe_dim;
    for (size_t rank = 0; rank < order.size(); ++rank) {
        const ast::Ast& tree = corpus[order[rank]].ast;
        auto paths = extract_paths(tree, cfg.k);
        if (paths.empty()) continue;
        if (static_cast<int>(paths.size()) > cfg.cap) {
            Rng path_rng = derive_rng(seed, "inp.paths", static_cast<uint64_t>(order[rank]));
            for (int i = 0; i < cfg.cap; ++i)
                std::swap(paths[i], paths[i + path_rng.below(paths.size() - i)]);
            paths.resize(cfg.cap);
        }
        std::vector<double> encoding = encode_ast(tree);
        auto pe_row = [&](int v) {
            return std::vector<double>(encoding.begin() + static_cast<size_t>(v) * pe_dim,
                                       encoding.begin() + static_cast<size_t>(v + 1) * pe_dim);
        };
        auto& bucket = rank < train_count ? ds.train : ds.test;
        for (const auto& path : paths) {
            InpExample ex;
            ex.pe_a = pe_row(path.front());
            ex.pe_b = pe_row(path.back());
            for (size_t i = 1; i + 1 < path.size(); ++i)
                ex.labels.push_back(type_vocab.encode(tree.nodes[path[i]].node_type));
            bucket.push_back(std::move(ex));
        }
    }
    if (ds.train.empty() || ds.test.empty()) throw EmptyDataset("inp: no usable paths in corpus");
    return ds;
}

ProbeResult train_probe(const InpDataset& ds, const ProbeConfig& cfg, uint64_t seed) {
    using namespace ad;
    if (ds.train.empty()) throw EmptyDataset("probe: empty dataset");
    const int in_dim = 2 * ds.pe_dim;
    const int k = ds.k;
    const int vocab = ds.label_vocab;

    nn::ParamStore store;
    Rng init_rng = derive_rng(seed, "probe.init");
    nn::Linear l1(store, "probe.l1", in_dim, cfg.hidden, init_rng);
    nn::Linear l2(store, "probe.l2", cfg.hidden, cfg.hidden, init_rng);
    std::vector<nn::Linear> heads;
    for (int j = 0; j < k; ++j)
        heads.emplace_back(store, "probe.head" + std::to_string(j), cfg.hidden, vocab, init_rng);

    auto features = [&](const std::vector<const InpExample*>& batch) {
        std::vector<double> x(batch.size() * static_cast<size_t>(in_dim));
        for (size_t r = 0; r < batch.size(); ++r) {
            std::copy(batch[r]->pe_a.begin(), batch[r]->pe_a.end(), x.begin() + r * in_dim);
            std::copy(batch[r]->pe_b.begin(), batch[r]->pe_b.end(), x.begin() + r * in_dim + ds.pe_dim);
        }
        return Tensor::from({static_cast<int>(batch.size()), in_dim}, std::move(x));
    };
    auto hidden = [&](const Tensor& x) { return relu(l2(relu(l1(x)))); };

    nn::AdamW opt;
    opt.lr = cfg.lr;
    std::vector<int> order(ds.train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng = derive_rng(seed, "probe.shuffle", static_cast<uint64_t>(epoch));
        for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        for (size_t start = 0; start < order.size(); start += cfg.batch) {
            std::vector<const InpExample*> batch;
            for (size_t i = start; i < order.size() && i < start + cfg.batch; ++i)
                batch.push_back(&ds.train[order[i]]);
            Tape tape;
            Tensor h = hidden(features(batch));
            Tensor loss;
            for (int j = 0; j < k; ++j) {
                std::vector<int> targets;
                for (const auto* ex : batch) targets.push_back(ex->labels[j]);
                Tensor ce = cross_entropy(heads[j](h), targets, /*pad_id=*/-1);
                loss = loss.defined() ? add(loss, ce) : ce;
            }
            loss = scale(loss, 1.0 / k);
            tape.backward(loss);
            opt.step(store);
            store.zero_grads();
        }
    }

    // test accuracy
    long exact = 0, position_hits = 0;
    const auto& test = ds.test;
    for (size_t start = 0; start < test.size(); start += cfg.batch) {
        std::vector<const InpExample*> batch;
        for (size_t i = start; i < test.size() && i < start + cfg.batch; ++i) batch.push_back(&test[i]);
        Tensor h = hidden(features(batch));
        std::vector<std::vector<int>> predictions(batch.size(), std::vector<int>(k));
        for (int j = 0; j < k; ++j) {
            Tensor logits = heads[j](h);
            for (size_t r = 0; r < batch.size(); ++r) {
                const double* row = logits.value().data() + r * vocab;
                int best = 0;
                for (int c = 1; c < vocab; ++c)
                    if (row[c] > row[best]) best = c;
                predictions[r][j] = best;
            }
        }
        for (size_t r = 0; r < batch.size(); ++r) {
            bool all = true;
            for (int j = 0; j < k; ++j) {
                if (predictions[r][j] == batch[r]->labels[j]) ++position_hits;
                else all = false;
            }
            if (all) ++exact;
        }
    }
    ProbeResult result;
    result.exact_acc = static_cast<double>(exact) / test.size();
    result.per_position_acc = static_cast<double>(position_hits) / (test.size() * static_cast<size_t>(k));
    return result;
}

} // namespace csa::inp
