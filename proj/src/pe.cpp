#include "csa/pe.hpp"

#include <algorithm>
#include <cmath>

namespace csa::pe {

std::vector<double> sequential_pe(int n, int d) {
    if (d % 2 != 0) throw OddDim("sequential_pe: dimension must be even");
    std::vector<double> out(static_cast<size_t>(n) * d);
    for (int pos = 0; pos < n; ++pos) {
        for (int i = 0; i < d / 2; ++i) {
            double f = std::pow(10000.0, 2.0 * i / d);
            out[static_cast<size_t>(pos) * d + 2 * i] = std::sin(pos / f);
            out[static_cast<size_t>(pos) * d + 2 * i + 1] = std::cos(pos / f);
        }
    }
    return out;
}

TreePe::TreePe(TreePeConfig cfg, uint64_t seed) : cfg_(cfg) {
    Rng rng = derive_rng(seed, "tree_pe");
    level_weights_.resize(static_cast<size_t>(cfg.max_depth) * cfg.max_degree);
    for (auto& w : level_weights_) w = rng.normal(0.0, 1.0);
}

std::vector<double> TreePe::compute(const ast::Ast& tree) const {
    const int n = tree.size();
    const int dt = cfg_.max_degree;
    std::vector<double> out(static_cast<size_t>(n) * cfg_.d_pe, 0.0);
    for (int v = 0; v < n; ++v) {
        // child indices from the node upward; root contributes nothing
        std::vector<int> chain;
        int cur = v;
        while (tree.nodes[cur].parent) {
            chain.push_back(std::min(tree.nodes[cur].child_index, dt - 1));
            cur = *tree.nodes[cur].parent;
        }
        if (static_cast<int>(chain.size()) > cfg_.max_depth) chain.resize(cfg_.max_depth); // deepest levels kept
        for (size_t level = 0; level < chain.size(); ++level) {
            long flat = static_cast<long>(level) * dt + chain[level]; // block position before truncation
            if (flat >= cfg_.d_pe) break;
            out[static_cast<size_t>(v) * cfg_.d_pe + flat] = level_weights_[static_cast<size_t>(level) * dt + chain[level]];
        }
    }
    return out;
}

TripletPe::TripletPe(int d_pe, uint64_t seed) : d_pe_(d_pe), seed_(seed) {
    Rng rng = derive_rng(seed_, "triplet_pe_unk");
    rows_.emplace_back(d_pe_);
    for (auto& x : rows_[0]) x = rng.normal(0.0, 1.0);
}

std::vector<std::array<int, 3>> TripletPe::triplets_of(const ast::Ast& tree) const {
    const int n = tree.size();
    std::vector<int> depth(n, 0);
    for (int v = 1; v < n; ++v) depth[v] = depth[*tree.nodes[v].parent] + 1;
    // width position = rank within the set of nodes at the same depth, by id
    std::map<int, int> seen_at_depth;
    std::vector<int> width(n, 0);
    for (int v = 0; v < n; ++v) width[v] = seen_at_depth[depth[v]]++;
    std::vector<std::array<int, 3>> out(n);
    for (int v = 0; v < n; ++v) {
        int parent_width = tree.nodes[v].parent ? width[*tree.nodes[v].parent] : 0;
        out[v] = {depth[v], parent_width, width[v]};
    }
    return out;
}

void TripletPe::fit(const std::vector<const ast::Ast*>& train_asts) {
    Rng rng = derive_rng(seed_, "triplet_pe_rows");
    for (const ast::Ast* tree : train_asts) {
        for (const auto& trip : triplets_of(*tree)) {
            if (table_.count(trip)) continue;
            table_[trip] = static_cast<int>(rows_.size());
            rows_.emplace_back(d_pe_);
            for (auto& x : rows_.back()) x = rng.normal(0.0, 1.0);
        }
    }
}

std::vector<double> TripletPe::compute(const ast::Ast& tree) const {
    auto trips = triplets_of(tree);
    std::vector<double> out(trips.size() * static_cast<size_t>(d_pe_));
    for (size_t v = 0; v < trips.size(); ++v) {
        auto it = table_.find(trips[v]);
        const auto& row = it == table_.end() ? rows_[0] : rows_[it->second];
        std::copy(row.begin(), row.end(), out.begin() + v * d_pe_);
    }
    return out;
}

EighResult jacobi_eigh(const std::vector<double>& sym, int n, double tol, int max_sweeps) {
    std::vector<double> a = sym;
    std::vector<double> vecs(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) vecs[static_cast<size_t>(i) * n + i] = 1.0;
    auto off_norm = [&] {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) s += a[static_cast<size_t>(i) * n + j] * a[static_cast<size_t>(i) * n + j];
        return std::sqrt(s);
    };
    int sweep = 0;
    while (off_norm() > tol) {
        if (++sweep > max_sweeps) throw ConvergenceError("jacobi: sweep budget exhausted");
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a[static_cast<size_t>(p) * n + q];
                if (std::abs(apq) < 1e-300) continue;
                double app = a[static_cast<size_t>(p) * n + p];
                double aqq = a[static_cast<size_t>(q) * n + q];
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int i = 0; i < n; ++i) {
                    double aip = a[static_cast<size_t>(i) * n + p];
                    double aiq = a[static_cast<size_t>(i) * n + q];
                    a[static_cast<size_t>(i) * n + p] = c * aip - s * aiq;
                    a[static_cast<size_t>(i) * n + q] = s * aip + c * aiq;
                }
                for (int j = 0; j < n; ++j) {
                    double apj = a[static_cast<size_t>(p) * n + j];
                    double aqj = a[static_cast<size_t>(q) * n + j];
                    a[static_cast<size_t>(p) * n + j] = c * apj - s * aqj;
                    a[static_cast<size_t>(q) * n + j] = s * apj + c * aqj;
                }
                for (int i = 0; i < n; ++i) {
                    double vip = vecs[static_cast<size_t>(i) * n + p];
                    double viq = vecs[static_cast<size_t>(i) * n + q];
                    vecs[static_cast<size_t>(i) * n + p] = c * vip - s * viq;
                    vecs[static_cast<size_t>(i) * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    // sort ascending by eigenvalue, carrying columns along
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return a[static_cast<size_t>(x) * n + x] < a[static_cast<size_t>(y) * n + y]; });
    EighResult out;
    out.eigenvalues.resize(n);
    out.eigenvectors.assign(static_cast<size_t>(n) * n, 0.0);
    for (int k = 0; k < n; ++k) {
        out.eigenvalues[k] = a[static_cast<size_t>(order[k]) * n + order[k]];
        for (int i = 0; i < n; ++i)
            out.eigenvectors[static_cast<size_t>(i) * n + k] = vecs[static_cast<size_t>(i) * n + order[k]];
    }
    return out;
}

std::vector<double> normalized_laplacian(const ast::Ast& tree) {
    const int n = tree.size();
    std::vector<double> adj(static_cast<size_t>(n) * n, 0.0);
    std::vector<double> degree(n, 0.0);
    for (int v = 1; v < n; ++v) {
        int p = *tree.nodes[v].parent;
        adj[static_cast<size_t>(v) * n + p] = adj[static_cast<size_t>(p) * n + v] = 1.0;
        degree[v] += 1.0;
        degree[p] += 1.0;
    }
    std::vector<double> lap(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        lap[static_cast<size_t>(i) * n + i] = degree[i] > 0.0 ? 1.0 : 0.0;
        for (int j = 0; j < n; ++j) {
            if (adj[static_cast<size_t>(i) * n + j] != 0.0)
                lap[static_cast<size_t>(i) * n + j] = -1.0 / std::sqrt(degree[i] * degree[j]);
        }
    }
    return lap;
}

std::vector<double> laplacian_pe(const ast::Ast& tree, int k_eig) {
    const int n = tree.size();
    std::vector<double> out(static_cast<size_t>(n) * k_eig, 0.0);
    if (n < 2) return out;
    EighResult eig = jacobi_eigh(normalized_laplacian(tree), n);
    int col = 0;
    for (int k = 0; k < n && col < k_eig; ++k) {
        if (eig.eigenvalues[k] < 1e-8) continue; // skip the zero mode
        // canonical sign: first nonzero component positive
        double sign = 1.0;
        for (int i = 0; i < n; ++i) {
            double x = eig.eigenvectors[static_cast<size_t>(i) * n + k];
            if (std::abs(x) > 1e-9) {
                sign = x > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        for (int i = 0; i < n; ++i)
            out[static_cast<size_t>(i) * k_eig + col] = sign * eig.eigenvectors[static_cast<size_t>(i) * n + k];
        ++col;
    }
    return out;
}

std::vector<rel::RelationKind> CseConfig::resolved_assignment() const {
    if (!head_assignment.empty()) return head_assignment;
    std::vector<rel::RelationKind> out(heads);
    for (int h = 0; h < heads; ++h)
        out[h] = h % 2 == 0 ? rel::RelationKind::parent_child : rel::RelationKind::sibling;
    return out;
}

void CseConfig::validate() const {
    if (d_pe % heads != 0) throw ConfigError("cse: d_pe must be divisible by heads");
    if (p_max < 1) throw ConfigError("cse: p_max must be >= 1");
    auto assignment = resolved_assignment();
    if (static_cast<int>(assignment.size()) != heads) throw ConfigError("cse: head_assignment size != heads");
    if (heads >= 2) {
        bool has_parent = false, has_sibling = false;
        for (auto k : assignment) {
            if (k == rel::RelationKind::parent_child) has_parent = true;
            else has_sibling = true;
        }
        if (!has_parent || !has_sibling)
            throw ConfigError("cse: with >=2 heads both relation kinds must be assigned");
    }
}

Cse::Cse(nn::ParamStore& store, const std::string& prefix, int type_vocab, CseConfig cfg, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    cfg_.head_assignment = cfg_.resolved_assignment();
    const int dh = cfg_.d_head();
    const int rows = 2 * cfg_.p_max + 1;
    type_embed_ = store.create(prefix + ".type_embed", {type_vocab, cfg_.d_pe}, nn::Init::normal02, rng);
    for (int l = 0; l < cfg_.layers; ++l) {
        Layer layer;
        std::string lp = prefix + ".layer" + std::to_string(l);
        layer.rel_parent = store.create(lp + ".rel_parent", {rows, cfg_.d_pe}, nn::Init::normal02, rng);
        layer.rel_sibling = store.create(lp + ".rel_sibling", {rows, cfg_.d_pe}, nn::Init::normal02, rng);
        layer.q = nn::Linear(store, lp + ".q", cfg_.d_pe, cfg_.d_pe, rng);
        layer.k = nn::Linear(store, lp + ".k", cfg_.d_pe, cfg_.d_pe, rng);
        layer.v = nn::Linear(store, lp + ".v", cfg_.d_pe, cfg_.d_pe, rng);
        for (int h = 0; h < cfg_.heads; ++h) {
            std::string hp = lp + ".head" + std::to_string(h);
            Head head;
            head.w_qhat = store.create(hp + ".qhat", {dh, dh}, nn::Init::glorot, rng);
            head.w_khat = store.create(hp + ".khat", {dh, dh}, nn::Init::glorot, rng);
            head.kind = cfg_.head_assignment[h];
            layer.heads.push_back(std::move(head));
        }
        layer.proj_out = nn::Linear(store, lp + ".proj_out", cfg_.d_pe, cfg_.d_pe, rng);
        layer.ffn_in = nn::Linear(store, lp + ".ffn_in", cfg_.d_pe, cfg_.d_pe * cfg_.ffn_mult, rng);
        layer.ffn_out = nn::Linear(store, lp + ".ffn_out", cfg_.d_pe * cfg_.ffn_mult, cfg_.d_pe, rng);
        layer.ln_attn = nn::LayerNorm(store, lp + ".ln_attn", cfg_.d_pe, rng);
        layer.ln_ffn = nn::LayerNorm(store, lp + ".ln_ffn", cfg_.d_pe, rng);
        layers_.push_back(std::move(layer));
    }
}

long Cse::relative_table_scalars_per_layer() const {
    return 2L * (2L * cfg_.p_max + 1) * cfg_.d_pe;
}

ad::Tensor Cse::forward(const std::vector<int>& type_ids, const rel::RelationMatrices& rel, bool train,
                        Rng* dropout_rng) const {
    using namespace ad;
    const int n = static_cast<int>(type_ids.size());
    if (n < 1) throw ShapeError("cse: empty input");
    if (rel.parent_child.n != n) throw ShapeError("cse: relation matrices sized for a different ast");
    const int dh = cfg_.d_head();
    const double inv_scale = 1.0 / std::sqrt(3.0 * dh);

    auto idx_parent = rel::to_indices(rel.parent_child, rel.p_max);
    auto idx_sibling = rel::to_indices(rel.sibling, rel.p_max);
    auto mask_parent = rel::relation_mask(rel, rel::RelationKind::parent_child);
    auto mask_sibling = rel::relation_mask(rel, rel::RelationKind::sibling);
    const uint32_t two_p = static_cast<uint32_t>(2 * rel.p_max);

    auto maybe_dropout = [&](Tensor t) {
        return train && dropout_rng ? dropout(t, cfg_.dropout, *dropout_rng, true) : t;
    };

    Tensor x = gather_rows(type_embed_, type_ids);
    for (const Layer& layer : layers_) {
        Tensor q_all = layer.q(x), k_all = layer.k(x), v_all = layer.v(x);
        std::vector<Tensor> head_outputs;
        for (int h = 0; h < cfg_.heads; ++h) {
            const Head& head = layer.heads[h];
            bool is_parent = head.kind == rel::RelationKind::parent_child;
            const auto& idx = is_parent ? idx_parent : idx_sibling;
            const auto& kind_mask = is_parent ? mask_parent : mask_sibling;
            const Tensor& table = is_parent ? layer.rel_parent : layer.rel_sibling;

            Tensor q = slice_cols(q_all, h * dh, (h + 1) * dh);
            Tensor k = slice_cols(k_all, h * dh, (h + 1) * dh);
            Tensor v = slice_cols(v_all, h * dh, (h + 1) * dh);
            Tensor rel_slice = slice_cols(table, h * dh, (h + 1) * dh); // [(2p+1), dh]
            Tensor content = matmul(q, transpose(k));
            // content -> position: q_i against the projected embedding of delta(i, j)
            Tensor k_hat = matmul(rel_slice, head.w_khat);
            Tensor q_to_rel = matmul(q, transpose(k_hat)); // [n, 2p+1]
            Tensor content_pos = pick_rel(q_to_rel, idx, n, PickAxis::row_i);
            // position -> content: projected embedding of delta(j, i) against k_j
            Tensor q_hat = matmul(rel_slice, head.w_qhat);
            Tensor k_to_rel = matmul(k, transpose(q_hat)); // [n, 2p+1]
            std::vector<uint32_t> idx_rev(idx.size());
            for (size_t i = 0; i < idx.size(); ++i) idx_rev[i] = two_p - idx[i];
            Tensor pos_content = pick_rel(k_to_rel, idx_rev, n, PickAxis::row_j);

            Tensor scores = scale(add(add(content, content_pos), pos_content), inv_scale);
            if (cfg_.mask_unrelated) scores = masked_fill(scores, kind_mask, -1e30);
            Tensor attn = softmax(scores);
            head_outputs.push_back(matmul(attn, v));
        }
        Tensor attn_out = maybe_dropout(layer.proj_out(concat_cols(head_outputs)));
        x = layer.ln_attn(add(x, attn_out));
        Tensor ffn = maybe_dropout(layer.ffn_out(relu(layer.ffn_in(x))));
        x = layer.ln_ffn(add(x, ffn));
    }
    return x;
}

} // namespace csa::pe
