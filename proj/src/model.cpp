#include "csa/model.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace csa::model {

using namespace ad;
using nlohmann::json;

std::string attention_mode_name(AttentionMode mode) { return mode == AttentionMode::sbm ? "sbm" : "vanilla"; }

AttentionMode attention_mode_from_name(const std::string& name) {
    if (name == "sbm") return AttentionMode::sbm;
    if (name == "vanilla") return AttentionMode::vanilla;
    throw UsageError("unknown attention mode: " + name);
}

void ModelConfig::validate() const {
    if (d_model() % heads != 0) throw ConfigError("d_pe + d_emb must be divisible by heads");
    if (d_pe % heads != 0) throw ConfigError("d_pe must be divisible by heads");
    if (d_dec % heads != 0) throw ConfigError("decoder dim must be divisible by heads");
    if (k_clusters < 1) throw ConfigError("k_clusters must be >= 1");
    if (max_summary < 1 || max_nodes < 1) throw ConfigError("length limits must be positive");
}

ModelConfig ModelConfig::preset(const std::string& name) {
    ModelConfig cfg;
    if (name == "python") {
        cfg.d_pe = 256;
        cfg.d_emb = 256;
    } else if (name == "java") {
        cfg.d_pe = 128;
        cfg.d_emb = 640;
    } else {
        throw UsageError("unknown preset: " + name + " (expected python or java)");
    }
    return cfg;
}

std::string ModelConfig::to_json() const {
    json j;
    j["d_pe"] = d_pe;
    j["d_emb"] = d_emb;
    j["d_dec"] = d_dec;
    j["enc_layers"] = enc_layers;
    j["dec_layers"] = dec_layers;
    j["cse_layers"] = cse_layers;
    j["heads"] = heads;
    j["k_clusters"] = k_clusters;
    j["lambda_sparsity"] = lambda_sparsity;
    j["p_max"] = p_max;
    j["max_nodes"] = max_nodes;
    j["max_summary"] = max_summary;
    j["node_vocab"] = node_vocab_limit;
    j["summary_vocab"] = summary_vocab_limit;
    j["attention_mode"] = attention_mode_name(attention_mode);
    j["lr"] = lr;
    j["dropout"] = dropout;
    j["ffn_mult"] = ffn_mult;
    j["average_sparsity"] = average_sparsity;
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("bad config json: ") + e.what());
    }
    ModelConfig cfg;
    if (j.contains("preset")) cfg = preset(j["preset"].get<std::string>());
    auto get = [&](const char* key, auto& slot) {
        if (j.contains(key)) slot = j[key].template get<std::decay_t<decltype(slot)>>();
    };
    get("d_pe", cfg.d_pe);
    get("d_emb", cfg.d_emb);
    get("d_dec", cfg.d_dec);
    get("enc_layers", cfg.enc_layers);
    get("dec_layers", cfg.dec_layers);
    get("cse_layers", cfg.cse_layers);
    get("heads", cfg.heads);
    get("k_clusters", cfg.k_clusters);
    get("lambda_sparsity", cfg.lambda_sparsity);
    get("p_max", cfg.p_max);
    get("max_nodes", cfg.max_nodes);
    get("max_summary", cfg.max_summary);
    get("node_vocab", cfg.node_vocab_limit);
    get("summary_vocab", cfg.summary_vocab_limit);
    get("lr", cfg.lr);
    get("dropout", cfg.dropout);
    get("ffn_mult", cfg.ffn_mult);
    get("average_sparsity", cfg.average_sparsity);
    if (j.contains("attention_mode")) cfg.attention_mode = attention_mode_from_name(j["attention_mode"]);
    cfg.validate();
    return cfg;
}

namespace {

uint64_t mix_step_record(long step, int record) {
    return static_cast<uint64_t>(step) * 1000003ULL + static_cast<uint64_t>(record);
}

std::vector<uint8_t> valid_pair_mask(int n, int valid_n) {
    std::vector<uint8_t> mask(static_cast<size_t>(n) * n, 0);
    for (int i = 0; i < valid_n; ++i)
        for (int j = 0; j < valid_n; ++j) mask[static_cast<size_t>(i) * n + j] = 1;
    for (int i = 0; i < n; ++i) mask[static_cast<size_t>(i) * n + i] = 1; // keep pad rows well-defined
    return mask;
}

} // namespace

Summarizer::Summarizer(ModelConfig cfg, ast::Vocabulary node_vocab, ast::Vocabulary summary_vocab, uint64_t seed)
    : cfg_(cfg), node_vocab_(std::move(node_vocab)), summary_vocab_(std::move(summary_vocab)) {
    cfg_.validate();
    Rng rng = derive_rng(seed, "init");
    pe::CseConfig cse_cfg;
    cse_cfg.d_pe = cfg_.d_pe;
    cse_cfg.layers = cfg_.cse_layers;
    cse_cfg.heads = cfg_.heads;
    cse_cfg.p_max = cfg_.p_max;
    cse_cfg.ffn_mult = cfg_.ffn_mult;
    cse_cfg.dropout = cfg_.dropout;
    cse_ = std::make_unique<pe::Cse>(store_, "cse", node_vocab_.size(), cse_cfg, rng);

    node_embed_ = store_.create("enc.node_embed", {node_vocab_.size(), cfg_.d_emb}, nn::Init::normal02, rng);
    const int d = cfg_.d_model();
    const int dh = d / cfg_.heads;
    for (int l = 0; l < cfg_.enc_layers; ++l) {
        EncLayer layer;
        std::string lp = "enc.layer" + std::to_string(l);
        layer.q = nn::Linear(store_, lp + ".q", d, d, rng);
        layer.k = nn::Linear(store_, lp + ".k", d, d, rng);
        layer.v = nn::Linear(store_, lp + ".v", d, d, rng);
        for (int h = 0; h < cfg_.heads; ++h) {
            layer.clusters.push_back(store_.create(lp + ".head" + std::to_string(h) + ".clusters",
                                                   {cfg_.k_clusters, dh}, nn::Init::normal02, rng));
        }
        layer.proj_out = nn::Linear(store_, lp + ".proj_out", d, d, rng);
        layer.ffn_in = nn::Linear(store_, lp + ".ffn_in", d, d * cfg_.ffn_mult, rng);
        layer.ffn_out = nn::Linear(store_, lp + ".ffn_out", d * cfg_.ffn_mult, d, rng);
        layer.ln_attn = nn::LayerNorm(store_, lp + ".ln_attn", d, rng);
        layer.ln_ffn = nn::LayerNorm(store_, lp + ".ln_ffn", d, rng);
        enc_layers_.push_back(std::move(layer));
    }

    token_embed_ = store_.create("dec.token_embed", {summary_vocab_.size(), cfg_.d_dec}, nn::Init::normal02, rng);
    const int dd = cfg_.d_dec;
    for (int l = 0; l < cfg_.dec_layers; ++l) {
        DecLayer layer;
        std::string lp = "dec.layer" + std::to_string(l);
        layer.self_q = nn::Linear(store_, lp + ".self_q", dd, dd, rng);
        layer.self_k = nn::Linear(store_, lp + ".self_k", dd, dd, rng);
        layer.self_v = nn::Linear(store_, lp + ".self_v", dd, dd, rng);
        layer.cross_q = nn::Linear(store_, lp + ".cross_q", dd, dd, rng);
        layer.cross_k = nn::Linear(store_, lp + ".cross_k", d, dd, rng);
        layer.cross_v = nn::Linear(store_, lp + ".cross_v", d, dd, rng);
        layer.self_proj = nn::Linear(store_, lp + ".self_proj", dd, dd, rng);
        layer.cross_proj = nn::Linear(store_, lp + ".cross_proj", dd, dd, rng);
        layer.ffn_in = nn::Linear(store_, lp + ".ffn_in", dd, dd * cfg_.ffn_mult, rng);
        layer.ffn_out = nn::Linear(store_, lp + ".ffn_out", dd * cfg_.ffn_mult, dd, rng);
        layer.ln_self = nn::LayerNorm(store_, lp + ".ln_self", dd, rng);
        layer.ln_cross = nn::LayerNorm(store_, lp + ".ln_cross", dd, rng);
        layer.ln_ffn = nn::LayerNorm(store_, lp + ".ln_ffn", dd, rng);
        dec_layers_.push_back(std::move(layer));
    }
    out_proj_ = nn::Linear(store_, "dec.out_proj", dd, summary_vocab_.size(), rng);
    dec_pe_ = Tensor::from({cfg_.max_summary + 1, dd}, pe::sequential_pe(cfg_.max_summary + 1, dd));
}

std::pair<std::vector<int>, rel::RelationMatrices> Summarizer::prepare_inputs(const ast::Ast& tree,
                                                                              int pad_to) const {
    std::vector<int> ids = ast::encode_node_types(tree, node_vocab_);
    const int real_n = static_cast<int>(ids.size());
    const int n = pad_to > real_n ? pad_to : real_n;
    ids.resize(n, ast::Vocabulary::kPad);
    rel::RelationMatrices real = rel::compute(tree, cfg_.p_max);
    if (n == real_n) return {std::move(ids), std::move(real)};
    rel::RelationMatrices padded;
    padded.p_max = real.p_max;
    padded.parent_child = rel::IntMat(n);
    padded.sibling = rel::IntMat(n);
    for (int i = 0; i < real_n; ++i) {
        for (int j = 0; j < real_n; ++j) {
            padded.parent_child.at(i, j) = real.parent_child.at(i, j);
            padded.sibling.at(i, j) = real.sibling.at(i, j);
        }
    }
    return {std::move(ids), std::move(padded)};
}

EncodeResult Summarizer::encode(const std::vector<int>& type_ids, const rel::RelationMatrices& rel,
                                const EncodeOptions& opt) const {
    const int n = static_cast<int>(type_ids.size());
    const int valid_n = opt.valid_n < 0 ? n : opt.valid_n;
    const int d = cfg_.d_model();
    const int dh = d / cfg_.heads;
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Rng dropout_rng = derive_rng(opt.seed, "dropout", mix_step_record(opt.step, opt.record_index));
    auto maybe_dropout = [&](Tensor t) { return opt.train ? dropout(t, cfg_.dropout, dropout_rng, true) : t; };

    Tensor csa_pe = cse_->forward(type_ids, rel, opt.train, opt.train ? &dropout_rng : nullptr);
    Tensor emb = gather_rows(node_embed_, type_ids);
    Tensor x = concat_cols(csa_pe, emb);

    std::vector<uint8_t> valid = valid_pair_mask(n, valid_n);
    EncodeResult result;
    std::vector<Tensor> sparsity_terms;
    bool use_sbm = cfg_.attention_mode == AttentionMode::sbm && opt.path != SbmPath::vanilla;

    for (size_t l = 0; l < enc_layers_.size(); ++l) {
        const EncLayer& layer = enc_layers_[l];
        Tensor q_all = layer.q(x), k_all = layer.k(x), v_all = layer.v(x);
        std::vector<Tensor> head_outputs;
        std::vector<HeadTrace> layer_traces;
        for (int h = 0; h < cfg_.heads; ++h) {
            Tensor q = slice_cols(q_all, h * dh, (h + 1) * dh);
            Tensor k = slice_cols(k_all, h * dh, (h + 1) * dh);
            Tensor v = slice_cols(v_all, h * dh, (h + 1) * dh);
            Tensor raw = scale(matmul(q, transpose(k)), inv_scale);
            Tensor attn;
            HeadTrace trace;
            if (use_sbm) {
                sbm::SbmMaskBundle bundle = sbm::link_probability(q, k, layer.clusters[h]);
                sparsity_terms.push_back(sbm::sparsity_penalty_masked(bundle.link_prob, valid, 1.0));
                if (opt.path == SbmPath::relaxed) {
                    Tensor gated = mul(bundle.link_prob, raw);
                    attn = softmax(masked_fill(gated, valid, -1e30));
                } else {
                    std::vector<uint8_t> mask;
                    if (opt.force_mask_all_true) {
                        mask = valid;
                    } else {
                        Rng head_rng = derive_rng(opt.seed ^ splitmix64((l << 8) | static_cast<unsigned>(h)),
                                                  "bernoulli", mix_step_record(opt.step, opt.record_index));
                        mask = sbm::sample_mask(bundle.link_prob, head_rng,
                                                opt.train ? sbm::SampleMode::train : sbm::SampleMode::eval);
                        for (size_t i = 0; i < mask.size(); ++i) mask[i] = mask[i] & valid[i];
                        for (int i = 0; i < n; ++i) mask[static_cast<size_t>(i) * n + i] = 1;
                    }
                    attn = softmax(sbm_mask_apply(raw, bundle.link_prob, mask));
                    trace.mask = mask;
                }
                if (opt.capture) trace.link_prob = bundle.link_prob.value();
            } else {
                attn = softmax(masked_fill(raw, valid, -1e30));
                if (opt.capture) trace.mask = valid;
            }
            if (opt.capture) {
                trace.attn = attn.value();
                layer_traces.push_back(std::move(trace));
            }
            head_outputs.push_back(matmul(attn, v));
        }
        Tensor attn_out = maybe_dropout(layer.proj_out(concat_cols(head_outputs)));
        x = layer.ln_attn(add(x, attn_out));
        Tensor ffn = maybe_dropout(layer.ffn_out(relu(layer.ffn_in(x))));
        x = layer.ln_ffn(add(x, ffn));
        if (opt.capture) result.traces.push_back(std::move(layer_traces));
    }
    result.memory = x;
    if (sparsity_terms.empty()) {
        result.sparsity_mean = Tensor::scalar(0.0);
    } else {
        Tensor total = sparsity_terms[0];
        for (size_t i = 1; i < sparsity_terms.size(); ++i) total = add(total, sparsity_terms[i]);
        result.sparsity_mean = cfg_.average_sparsity ? scale(total, 1.0 / sparsity_terms.size()) : total;
    }
    return result;
}

ad::Tensor Summarizer::decode_logits(const Tensor& memory, const std::vector<int>& prefix_ids, int valid_n,
                                     bool train, Rng* dropout_rng) const {
    const int t = static_cast<int>(prefix_ids.size());
    if (t < 1) throw ShapeError("decode: empty prefix");
    if (t > cfg_.max_summary + 1) throw PrefixTooLong("decode: prefix exceeds max summary length");
    const int n = memory.dim(0);
    const int vn = valid_n < 0 ? n : valid_n;
    const int dd = cfg_.d_dec;

    auto maybe_dropout = [&](Tensor x) {
        return train && dropout_rng ? dropout(x, cfg_.dropout, *dropout_rng, true) : x;
    };

    std::vector<double> pe_rows(static_cast<size_t>(t) * dd);
    std::copy(dec_pe_.value().begin(), dec_pe_.value().begin() + static_cast<size_t>(t) * dd, pe_rows.begin());
    Tensor x = add(gather_rows(token_embed_, prefix_ids), Tensor::from({t, dd}, std::move(pe_rows)));
    x = maybe_dropout(x);

    std::vector<uint8_t> causal(static_cast<size_t>(t) * t, 0);
    for (int i = 0; i < t; ++i)
        for (int j = 0; j <= i; ++j) causal[static_cast<size_t>(i) * t + j] = 1;
    std::vector<uint8_t> cross(static_cast<size_t>(t) * n, 0);
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < vn; ++j) cross[static_cast<size_t>(i) * n + j] = 1;

    const int dhd = dd / cfg_.heads;
    auto per_head_attention = [&](const Tensor& q_all, const Tensor& k_all, const Tensor& v_all,
                                  const std::vector<uint8_t>& mask) {
        std::vector<Tensor> outputs;
        for (int h = 0; h < cfg_.heads; ++h) {
            outputs.push_back(sbm::masked_attention(slice_cols(q_all, h * dhd, (h + 1) * dhd),
                                                    slice_cols(k_all, h * dhd, (h + 1) * dhd),
                                                    slice_cols(v_all, h * dhd, (h + 1) * dhd), mask));
        }
        return concat_cols(outputs);
    };
    for (const DecLayer& layer : dec_layers_) {
        Tensor self_out = per_head_attention(layer.self_q(x), layer.self_k(x), layer.self_v(x), causal);
        x = layer.ln_self(add(x, maybe_dropout(layer.self_proj(self_out))));
        Tensor cross_out =
            per_head_attention(layer.cross_q(x), layer.cross_k(memory), layer.cross_v(memory), cross);
        x = layer.ln_cross(add(x, maybe_dropout(layer.cross_proj(cross_out))));
        Tensor ffn = maybe_dropout(layer.ffn_out(relu(layer.ffn_in(x))));
        x = layer.ln_ffn(add(x, ffn));
    }
    return out_proj_(x);
}

std::vector<double> Summarizer::decode_step(const Tensor& memory, const std::vector<int>& prefix_ids,
                                            int valid_n) const {
    Tensor logits = decode_logits(memory, prefix_ids, valid_n, false, nullptr);
    const int v = logits.dim(1);
    const int t = logits.dim(0);
    return {logits.value().begin() + static_cast<size_t>(t - 1) * v, logits.value().end()};
}

std::vector<int> Summarizer::greedy_decode(const ast::Ast& tree) const {
    auto [ids, rel] = prepare_inputs(tree);
    EncodeOptions opt;
    EncodeResult enc = encode(ids, rel, opt);
    std::vector<int> prefix{ast::Vocabulary::kBos};
    std::vector<int> out;
    while (static_cast<int>(out.size()) < cfg_.max_summary) {
        std::vector<double> logits = decode_step(enc.memory, prefix);
        int best = 0;
        for (size_t i = 1; i < logits.size(); ++i)
            if (logits[i] > logits[best]) best = static_cast<int>(i); // ties keep the lowest id
        if (best == ast::Vocabulary::kEos) break;
        out.push_back(best);
        prefix.push_back(best);
    }
    return out;
}

std::vector<std::string> Summarizer::summarize(const ast::Ast& tree) const {
    std::vector<std::string> out;
    for (int id : greedy_decode(tree)) out.push_back(summary_vocab_.decode(id));
    return out;
}

std::pair<double, double> Summarizer::train_step(const std::vector<const ast::DatasetRecord*>& batch,
                                                 nn::AdamW& opt, long step, uint64_t seed) {
    if (batch.empty()) throw EmptyCorpus("train_step: empty batch");
    int pad_to = 0;
    for (const auto* rec : batch) pad_to = std::max(pad_to, rec->ast.size());
    double total_loss = 0.0, total_sparsity = 0.0;
    const double inv_batch = 1.0 / batch.size();
    for (size_t r = 0; r < batch.size(); ++r) {
        const ast::DatasetRecord& rec = *batch[r];
        Tape tape;
        auto [ids, rel] = prepare_inputs(rec.ast, pad_to);
        EncodeOptions eopt;
        eopt.train = true;
        eopt.seed = seed;
        eopt.step = step;
        eopt.record_index = static_cast<int>(r);
        eopt.valid_n = rec.ast.size();
        EncodeResult enc = encode(ids, rel, eopt);

        std::vector<int> summary_ids;
        for (const auto& tok : rec.summary_tokens) {
            if (static_cast<int>(summary_ids.size()) >= cfg_.max_summary) break;
            summary_ids.push_back(summary_vocab_.encode(tok));
        }
        std::vector<int> prefix{ast::Vocabulary::kBos};
        prefix.insert(prefix.end(), summary_ids.begin(), summary_ids.end());
        std::vector<int> targets = summary_ids;
        targets.push_back(ast::Vocabulary::kEos);

        Rng dec_rng = derive_rng(seed, "dropout.dec", mix_step_record(step, static_cast<int>(r)));
        Tensor logits = decode_logits(enc.memory, prefix, rec.ast.size(), true, &dec_rng);
        Tensor ce = cross_entropy(logits, targets, ast::Vocabulary::kPad);
        Tensor loss = add(ce, scale(enc.sparsity_mean, cfg_.lambda_sparsity));
        double loss_value = loss.item();
        if (!std::isfinite(loss_value))
            throw NaNLoss("non-finite loss at step " + std::to_string(step) + ", record " + rec.ast.origin_id);
        total_loss += loss_value * inv_batch;
        total_sparsity += enc.sparsity_mean.item() * inv_batch;
        tape.backward(scale(loss, inv_batch));
    }
    opt.step(store_);
    store_.zero_grads();
    return {total_loss, total_sparsity};
}

void save_model(const Summarizer& model, const TrainState& state, const std::string& path) {
    json meta;
    meta["kind"] = "csa-model";
    meta["config"] = json::parse(model.config().to_json());
    meta["node_vocab"] = model.node_vocab().id_to_token;
    meta["summary_vocab"] = model.summary_vocab().id_to_token;
    meta["node_vocab_max"] = model.node_vocab().max_size;
    meta["summary_vocab_max"] = model.summary_vocab().max_size;
    meta["step"] = state.step;
    meta["seed"] = state.seed;
    meta["best_metric"] = state.best_metric;
    meta["opt_step_count"] = state.optimizer.step_count;
    meta["lr"] = state.optimizer.lr;
    meta["weight_decay"] = state.optimizer.weight_decay;

    nn::Checkpoint ckpt;
    ckpt.meta_json = meta.dump();
    auto& store = const_cast<Summarizer&>(model).params();
    for (const auto& name : store.names()) ckpt.add("p." + name, store.get(name));
    for (const auto& [name, m] : state.optimizer.m)
        ckpt.add("m." + name, ad::Tensor::from({static_cast<int>(m.size())}, m));
    for (const auto& [name, v] : state.optimizer.v)
        ckpt.add("v." + name, ad::Tensor::from({static_cast<int>(v.size())}, v));
    nn::save_checkpoint(ckpt, path);
}

LoadedModel load_model(const std::string& path) {
    nn::Checkpoint ckpt = nn::load_checkpoint(path);
    json meta;
    try {
        meta = json::parse(ckpt.meta_json);
    } catch (const json::exception& e) {
        throw CorruptCheckpoint(std::string("bad checkpoint metadata: ") + e.what());
    }
    if (!meta.contains("kind") || meta["kind"] != "csa-model") throw CorruptCheckpoint("not a model checkpoint");
    ModelConfig cfg = ModelConfig::from_json(meta["config"].dump());
    auto rebuild_vocab = [](const json& tokens, int max_size) {
        ast::Vocabulary vocab;
        vocab.max_size = max_size;
        vocab.id_to_token = tokens.get<std::vector<std::string>>();
        for (size_t i = 4; i < vocab.id_to_token.size(); ++i)
            vocab.token_to_id[vocab.id_to_token[i]] = static_cast<int>(i);
        return vocab;
    };
    LoadedModel out;
    out.state.seed = meta["seed"].get<uint64_t>();
    out.state.step = meta["step"].get<long>();
    out.state.best_metric = meta.value("best_metric", -1.0);
    out.model = std::make_unique<Summarizer>(cfg, rebuild_vocab(meta["node_vocab"], meta["node_vocab_max"]),
                                             rebuild_vocab(meta["summary_vocab"], meta["summary_vocab_max"]),
                                             out.state.seed);
    out.state.optimizer.lr = meta.value("lr", cfg.lr);
    out.state.optimizer.weight_decay = meta.value("weight_decay", 0.01);
    out.state.optimizer.step_count = meta.value("opt_step_count", 0L);
    auto& store = out.model->params();
    for (const auto& name : store.names()) {
        const ad::Tensor* saved = ckpt.find("p." + name);
        if (!saved) throw CorruptCheckpoint("checkpoint missing parameter: " + name);
        ad::Tensor live = store.get(name);
        if (saved->shape() != live.shape()) throw CorruptCheckpoint("shape mismatch for parameter: " + name);
        live.impl->value = saved->value();
        const ad::Tensor* m = ckpt.find("m." + name);
        const ad::Tensor* v = ckpt.find("v." + name);
        if (m) out.state.optimizer.m[name] = m->value();
        if (v) out.state.optimizer.v[name] = v->value();
    }
    return out;
}

std::vector<std::vector<int>> bucket_batches(const std::vector<ast::DatasetRecord>& records, int batch_size,
                                             uint64_t seed, long epoch) {
    std::vector<int> order(records.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        int na = records[a].ast.size(), nb = records[b].ast.size();
        return na != nb ? na < nb : a < b;
    });
    std::vector<std::vector<int>> batches;
    for (size_t i = 0; i < order.size(); i += batch_size) {
        std::vector<int> batch;
        for (size_t j = i; j < order.size() && j < i + batch_size; ++j) batch.push_back(order[j]);
        batches.push_back(std::move(batch));
    }
    Rng rng = derive_rng(seed, "shuffle", static_cast<uint64_t>(epoch));
    for (size_t i = batches.size(); i > 1; --i) std::swap(batches[i - 1], batches[rng.below(i)]);
    return batches;
}

} // namespace csa::model
