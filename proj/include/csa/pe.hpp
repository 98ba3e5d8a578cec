#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "csa/ast.hpp"
#include "csa/autodiff.hpp"
#include "csa/nn.hpp"
#include "csa/relations.hpp"

namespace csa::pe {

// ---- sinusoidal encoding over pre-order node index ----
// row-major [n, d]
std::vector<double> sequential_pe(int n, int d);

// ---- tree encoding: per-level weighted one-hot child indices ----
struct TreePeConfig {
    int max_degree = 32; // child indices clamp here
    int max_depth = 16;  // deepest levels kept when exceeded
    int d_pe = 64;
};

class TreePe {
  public:
    TreePe(TreePeConfig cfg, uint64_t seed);
    std::vector<double> compute(const ast::Ast& ast) const; // [n, d_pe]
    const TreePeConfig& config() const { return cfg_; }

  private:
    TreePeConfig cfg_;
    std::vector<double> level_weights_; // [max_depth, max_degree]
};

// ---- triplet encoding: (depth, parent level-position, own level-position) ----
class TripletPe {
  public:
    TripletPe(int d_pe, uint64_t seed);
    void fit(const std::vector<const ast::Ast*>& train_asts);
    std::vector<double> compute(const ast::Ast& ast) const; // unseen triplets use the UNK row
    int table_size() const { return static_cast<int>(rows_.size()); }

  private:
    std::vector<std::array<int, 3>> triplets_of(const ast::Ast& ast) const;
    int d_pe_;
    uint64_t seed_;
    std::map<std::array<int, 3>, int> table_;
    std::vector<std::vector<double>> rows_; // rows_[0] is UNK
};

// ---- graph Laplacian eigenvectors ----
struct EighResult {
    std::vector<double> eigenvalues;   // ascending
    std::vector<double> eigenvectors;  // column k = eigenvector of eigenvalues[k], row-major [n,n]
};

// cyclic Jacobi on a dense symmetric matrix
EighResult jacobi_eigh(const std::vector<double>& sym, int n, double tol = 1e-10, int max_sweeps = 100);

// symmetric-normalized Laplacian of the undirected parent-child graph
std::vector<double> normalized_laplacian(const ast::Ast& ast);

// columns = eigenvectors of the k smallest nonzero eigenvalues, sign
// canonicalized, zero-padded when the spectrum is too small; [n, k_eig]
std::vector<double> laplacian_pe(const ast::Ast& ast, int k_eig);

// ---- Code Structure Embedder ----
struct CseConfig {
    int d_pe = 256;
    int layers = 4;
    int heads = 8;
    int p_max = 150;
    int ffn_mult = 2;
    double dropout = 0.1;
    // empty = default assignment: even heads parent_child, odd heads sibling
    std::vector<rel::RelationKind> head_assignment;
    bool mask_unrelated = true;

    int d_head() const { return d_pe / heads; }
    std::vector<rel::RelationKind> resolved_assignment() const;
    void validate() const;
};

// Disentangled-attention stack over node types and tree relations whose
// output serves as per-node positional encoding.
class Cse {
  public:
    Cse(nn::ParamStore& store, const std::string& prefix, int type_vocab, CseConfig cfg, Rng& init_rng);

    ad::Tensor forward(const std::vector<int>& type_ids, const rel::RelationMatrices& rel, bool train = false,
                       Rng* dropout_rng = nullptr) const;

    long relative_table_scalars_per_layer() const;
    const CseConfig& config() const { return cfg_; }

  private:
    struct Head {
        ad::Tensor w_qhat, w_khat; // [dh, dh] projections of the table slice
        rel::RelationKind kind;
    };
    struct Layer {
        nn::Linear q, k, v; // full width, sliced per head
        std::vector<Head> heads;
        ad::Tensor rel_parent, rel_sibling; // [(2p+1), d_pe]
        nn::Linear proj_out, ffn_in, ffn_out;
        nn::LayerNorm ln_attn, ln_ffn;
    };
    CseConfig cfg_;
    ad::Tensor type_embed_;
    std::vector<Layer> layers_;
};

} // namespace csa::pe
