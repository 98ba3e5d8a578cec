#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "csa/ast.hpp"
#include "csa/autodiff.hpp"
#include "csa/nn.hpp"
#include "csa/pe.hpp"
#include "csa/relations.hpp"
#include "csa/sbm.hpp"

namespace csa::model {

enum class AttentionMode { sbm, vanilla };

std::string attention_mode_name(AttentionMode mode);
AttentionMode attention_mode_from_name(const std::string& name);

struct ModelConfig {
    int d_pe = 256;
    int d_emb = 256;
    int d_dec = 512;
    int enc_layers = 4;
    int dec_layers = 4;
    int cse_layers = 4;
    int heads = 8;
    int k_clusters = 10;
    double lambda_sparsity = 1e-2;
    int p_max = 150;
    int max_nodes = 150;
    int max_summary = 50;
    int node_vocab_limit = 10000;
    int summary_vocab_limit = 20000;
    AttentionMode attention_mode = AttentionMode::sbm;
    double lr = 1e-4;
    double dropout = 0.1;
    int ffn_mult = 2;
    bool average_sparsity = true; // average (vs sum) the penalty over layers/heads

    int d_model() const { return d_pe + d_emb; }
    void validate() const;

    static ModelConfig preset(const std::string& name); // "python" | "java"
    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

// How the encoder treats the SBM mask path.
enum class SbmPath {
    sampled, // Bernoulli mask (train) / threshold (eval), straight-through gradients
    relaxed, // A = link_prob (*) raw, fully differentiable; gradcheck route
    vanilla  // no mask beyond padding
};

struct HeadTrace {
    std::vector<uint8_t> mask;
    std::vector<double> link_prob;
    std::vector<double> attn; // post-softmax weights
};

struct EncodeResult {
    ad::Tensor memory;        // [n, d_model]
    ad::Tensor sparsity_mean; // scalar, mean link density over layers/heads (0 for vanilla)
    std::vector<std::vector<HeadTrace>> traces; // filled when capture=true
};

struct EncodeOptions {
    bool train = false;
    SbmPath path = SbmPath::sampled;
    bool force_mask_all_true = false;
    bool capture = false;
    uint64_t seed = 0;
    long step = 0;
    int record_index = 0;
    int valid_n = -1; // default: all nodes are real
};

class Summarizer {
  public:
    Summarizer(ModelConfig cfg, ast::Vocabulary node_vocab, ast::Vocabulary summary_vocab, uint64_t seed);

    EncodeResult encode(const std::vector<int>& type_ids, const rel::RelationMatrices& rel,
                        const EncodeOptions& opt) const;

    // teacher-forcing logits for every prefix position; prefix must start with BOS
    ad::Tensor decode_logits(const ad::Tensor& memory, const std::vector<int>& prefix_ids, int valid_n,
                             bool train, Rng* dropout_rng) const;

    // next-token logits after the given prefix (eval mode)
    std::vector<double> decode_step(const ad::Tensor& memory, const std::vector<int>& prefix_ids,
                                    int valid_n = -1) const;

    std::vector<int> greedy_decode(const ast::Ast& tree) const;
    std::vector<std::string> summarize(const ast::Ast& tree) const;

    // one optimizer step over the batch (gradient accumulation per record);
    // returns {total loss, sparsity term} for logging
    std::pair<double, double> train_step(const std::vector<const ast::DatasetRecord*>& batch, nn::AdamW& opt,
                                         long step, uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    const ast::Vocabulary& node_vocab() const { return node_vocab_; }
    const ast::Vocabulary& summary_vocab() const { return summary_vocab_; }
    nn::ParamStore& params() { return store_; }
    const pe::Cse& cse() const { return *cse_; }

    // record -> padded inputs helper (also used by tests)
    std::pair<std::vector<int>, rel::RelationMatrices> prepare_inputs(const ast::Ast& tree, int pad_to = -1) const;

  private:
    struct EncLayer {
        nn::Linear q, k, v; // full width, sliced per head
        std::vector<ad::Tensor> clusters; // per head, [k, dh]
        nn::Linear proj_out, ffn_in, ffn_out;
        nn::LayerNorm ln_attn, ln_ffn;
    };
    struct DecLayer {
        nn::Linear self_q, self_k, self_v;
        nn::Linear cross_q, cross_k, cross_v; // k/v project the encoder memory
        nn::Linear self_proj, cross_proj, ffn_in, ffn_out;
        nn::LayerNorm ln_self, ln_cross, ln_ffn;
    };

    ModelConfig cfg_;
    ast::Vocabulary node_vocab_, summary_vocab_;
    nn::ParamStore store_;
    std::unique_ptr<pe::Cse> cse_;
    ad::Tensor node_embed_;  // [node_vocab, d_emb]
    ad::Tensor token_embed_; // [summary_vocab, d_dec]
    std::vector<EncLayer> enc_layers_;
    std::vector<DecLayer> dec_layers_;
    nn::Linear out_proj_;
    ad::Tensor dec_pe_; // constant sinusoidal rows [max_summary+1, d_dec]
};

// ---- training state & checkpointing ----
struct TrainState {
    long step = 0;
    uint64_t seed = 0;
    nn::AdamW optimizer;
    double best_metric = -1.0;
};

void save_model(const Summarizer& model, const TrainState& state, const std::string& path);
struct LoadedModel {
    std::unique_ptr<Summarizer> model;
    TrainState state;
};
LoadedModel load_model(const std::string& path);

// bucket records by node count, shuffle batch order per epoch
std::vector<std::vector<int>> bucket_batches(const std::vector<ast::DatasetRecord>& records, int batch_size,
                                             uint64_t seed, long epoch);

} // namespace csa::model
