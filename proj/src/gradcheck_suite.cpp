#include "csa/gradcheck_suite.hpp"

#include "csa/model.hpp"

namespace csa::ad {

namespace {

Tensor random_tensor(Rng& rng, Shape shape, double s = 1.0) {
    std::vector<double> v(numel_of(shape));
    for (auto& x : v) x = rng.normal(0.0, s);
    return Tensor::from(std::move(shape), std::move(v));
}

double encoder_frozen_mask_check(Rng& rng) {
    ast::Vocabulary vocab;
    vocab.id_to_token = {"<pad>", "<unk>", "<bos>", "<eos>", "a", "b"};
    vocab.max_size = 100;
    for (size_t i = 4; i < vocab.id_to_token.size(); ++i)
        vocab.token_to_id[vocab.id_to_token[i]] = static_cast<int>(i);
    model::ModelConfig cfg;
    cfg.d_pe = 8;
    cfg.d_emb = 8;
    cfg.d_dec = 8;
    cfg.enc_layers = 1;
    cfg.dec_layers = 1;
    cfg.cse_layers = 0; // the check targets the encoder layer itself
    cfg.heads = 2;
    cfg.k_clusters = 3;
    cfg.p_max = 10;
    cfg.dropout = 0.0;
    model::Summarizer net(cfg, vocab, vocab, rng.next_u64());
    ast::Ast tree;
    tree.nodes.resize(5);
    std::vector<int> parents{-1, 0, 0, 1, 1};
    for (int i = 0; i < 5; ++i) {
        tree.nodes[i].id = i;
        tree.nodes[i].node_type = i % 2 ? "a" : "b";
        if (parents[i] >= 0) {
            tree.nodes[i].parent = parents[i];
            tree.nodes[i].child_index = static_cast<int>(tree.nodes[parents[i]].children.size());
            tree.nodes[parents[i]].children.push_back(i);
        }
    }
    auto [ids, rel] = net.prepare_inputs(tree);
    // unit-scale embeddings keep the checked gradients clear of the
    // central-difference resolution floor
    for (const char* emb : {"cse.type_embed", "enc.node_embed"})
        for (auto& x : net.params().get(emb).impl->value) x = rng.normal();
    Tensor readout = random_tensor(rng, {5, 16});
    auto loss_fn = [&](const Tensor&) {
        model::EncodeOptions opt;
        opt.path = model::SbmPath::relaxed;
        model::EncodeResult enc = net.encode(ids, rel, opt);
        return add(sum(mul(enc.memory, readout)), enc.sparsity_mean);
    };
    double worst = 0;
    for (const char* pname : {"enc.layer0.head0.clusters", "enc.layer0.q.weight", "enc.node_embed"})
        worst = std::max(worst, gradcheck(loss_fn, net.params().get(pname)));
    return worst;
}

} // namespace

std::vector<GradcheckRow> run_gradcheck_suite(uint64_t seed, double tolerance) {
    std::vector<GradcheckRow> rows;
    auto run = [&](const std::string& name, auto&& fn) {
        double worst = 0;
        for (uint64_t rep = 0; rep < 5; ++rep) {
            Rng rng = derive_rng(seed, "gradcheck." + name, rep);
            worst = std::max(worst, fn(rng));
        }
        rows.push_back({name, worst, worst < tolerance});
    };
    run("matmul", [&](Rng& rng) {
        Tensor b = random_tensor(rng, {5, 3});
        return gradcheck([&](const Tensor& x) { return sum(matmul(x, b)); }, random_tensor(rng, {4, 5}));
    });
    run("matmul_rhs", [&](Rng& rng) {
        Tensor a = random_tensor(rng, {4, 5});
        return gradcheck([&](const Tensor& x) { return sum(matmul(a, x)); }, random_tensor(rng, {5, 3}));
    });
    run("transpose", [&](Rng& rng) {
        Tensor w = random_tensor(rng, {3, 4});
        return gradcheck([&](const Tensor& x) { return sum(mul(transpose(x), w)); }, random_tensor(rng, {4, 3}));
    });
    run("add", [&](Rng& rng) {
        Tensor b = random_tensor(rng, {4, 3});
        return gradcheck([&](const Tensor& x) { return sum(add(x, b)); }, random_tensor(rng, {4, 3}));
    });
    run("add_bias", [&](Rng& rng) {
        Tensor a = random_tensor(rng, {4, 3});
        return gradcheck([&](const Tensor& x) { return sum(add(a, x)); }, random_tensor(rng, {3}));
    });
    run("mul", [&](Rng& rng) {
        Tensor b = random_tensor(rng, {4, 3});
        return gradcheck([&](const Tensor& x) { return sum(mul(x, b)); }, random_tensor(rng, {4, 3}));
    });
    run("scale", [&](Rng& rng) {
        return gradcheck([](const Tensor& x) { return sum(scale(x, -1.7)); }, random_tensor(rng, {4, 3}));
    });
    run("relu", [&](Rng& rng) {
        return gradcheck([](const Tensor& x) { return sum(relu(x)); }, random_tensor(rng, {4, 3}));
    });
    run("sigmoid", [&](Rng& rng) {
        return gradcheck([](const Tensor& x) { return sum(sigmoid(x)); }, random_tensor(rng, {4, 3}));
    });
    run("softmax", [&](Rng& rng) {
        Tensor w = random_tensor(rng, {3, 7});
        return gradcheck([&](const Tensor& x) { return sum(mul(softmax(x), w)); }, random_tensor(rng, {3, 7}));
    });
    run("layer_norm", [&](Rng& rng) {
        Tensor gain = random_tensor(rng, {6});
        Tensor bias = random_tensor(rng, {6});
        Tensor w = random_tensor(rng, {3, 6});
        return gradcheck([&](const Tensor& x) { return sum(mul(layer_norm(x, gain, bias), w)); },
                         random_tensor(rng, {3, 6}));
    });
    run("dropout", [&](Rng& rng) {
        return gradcheck(
            [](const Tensor& x) {
                Rng frozen(4242);
                return sum(dropout(x, 0.3, frozen, true));
            },
            random_tensor(rng, {5, 4}));
    });
    run("cross_entropy", [&](Rng& rng) {
        std::vector<int> targets{2, 0, 1};
        return gradcheck([&](const Tensor& x) { return cross_entropy(x, targets, 0); }, random_tensor(rng, {3, 4}));
    });
    run("mean", [&](Rng& rng) {
        return gradcheck([](const Tensor& x) { return mean(x); }, random_tensor(rng, {4, 5}));
    });
    run("sum", [&](Rng& rng) {
        return gradcheck([](const Tensor& x) { return sum(x); }, random_tensor(rng, {4, 5}));
    });
    run("concat_slice", [&](Rng& rng) {
        Tensor other = random_tensor(rng, {3, 4});
        return gradcheck([&](const Tensor& x) { return mean(slice_cols(concat_cols(x, other), 1, 6)); },
                         random_tensor(rng, {3, 2}));
    });
    run("gather_rows", [&](Rng& rng) {
        return gradcheck([](const Tensor& x) { return mean(gather_rows(x, {0, 2, 2, 1})); },
                         random_tensor(rng, {4, 3}));
    });
    run("masked_fill", [&](Rng& rng) {
        std::vector<uint8_t> mask{1, 0, 1, 1, 1, 0};
        return gradcheck([&](const Tensor& x) { return sum(masked_fill(x, mask, -2.0)); },
                         random_tensor(rng, {2, 3}));
    });
    run("pick_rel_row", [&](Rng& rng) {
        std::vector<uint32_t> idx{0, 2, 1, 3};
        return gradcheck([&](const Tensor& x) { return sum(pick_rel(x, idx, 2, PickAxis::row_i)); },
                         random_tensor(rng, {2, 4}));
    });
    run("pick_rel_col", [&](Rng& rng) {
        std::vector<uint32_t> idx{0, 2, 1, 3};
        return gradcheck([&](const Tensor& x) { return sum(pick_rel(x, idx, 2, PickAxis::row_j)); },
                         random_tensor(rng, {2, 4}));
    });
    run("encoder_frozen_mask", [&](Rng& rng) { return encoder_frozen_mask_check(rng); });

    // negative control: a deliberately wrong backward rule must be caught
    {
        Rng rng = derive_rng(seed, "gradcheck.negative");
        auto broken = [](const Tensor& x) {
            std::vector<double> out_v(x.value().size());
            for (size_t i = 0; i < out_v.size(); ++i) out_v[i] = 2.0 * x.value()[i];
            Tensor r = Tensor::from(x.shape(), std::move(out_v));
            if (Tape::active()) {
                r.impl->tracked = true;
                auto xi = x.impl, oi = r.impl;
                Tape::active()->record(oi, [xi, oi] {
                    xi->ensure_grad();
                    for (size_t i = 0; i < oi->grad.size(); ++i) xi->grad[i] += oi->grad[i];
                });
            }
            return sum(r);
        };
        double err = gradcheck(broken, random_tensor(rng, {3, 3}));
        rows.push_back({"negative_control", err, err > tolerance});
    }
    return rows;
}

} // namespace csa::ad
