#include "csa/sbm.hpp"

#include <cmath>

namespace csa::sbm {

using namespace ad;

SbmMaskBundle link_probability(const Tensor& q, const Tensor& k, const Tensor& clusters) {
    if (q.shape().size() != 2 || k.shape().size() != 2 || clusters.shape().size() != 2)
        throw ShapeError("link_probability: 2-d tensors required");
    if (q.dim(1) != clusters.dim(1) || k.dim(1) != clusters.dim(1))
        throw ShapeError("link_probability: feature dims disagree");
    SbmMaskBundle bundle;
    Tensor ct = transpose(clusters);
    bundle.assign_q = softmax(matmul(q, ct));
    bundle.assign_k = softmax(matmul(k, ct));
    Tensor raw = sigmoid(matmul(clusters, ct));
    bundle.cluster_link = scale(add(raw, transpose(raw)), 0.5); // exact symmetry
    bundle.link_prob = matmul(matmul(bundle.assign_q, bundle.cluster_link), transpose(bundle.assign_k));
    // convex combination of [0,1] entries; clamp away 1-ulp overshoot
    for (auto& p : bundle.link_prob.impl->value) p = std::min(1.0, std::max(0.0, p));
    return bundle;
}

std::vector<uint8_t> sample_mask(const Tensor& link_prob, Rng& rng, SampleMode mode) {
    if (link_prob.shape().size() != 2 || link_prob.dim(0) != link_prob.dim(1))
        throw ShapeError("sample_mask: square matrix required");
    const int n = link_prob.dim(0);
    std::vector<uint8_t> mask(link_prob.value().size());
    for (size_t i = 0; i < mask.size(); ++i) {
        double p = link_prob.value()[i];
        mask[i] = mode == SampleMode::train ? rng.bernoulli(p) : p >= 0.5;
    }
    for (int i = 0; i < n; ++i) mask[static_cast<size_t>(i) * n + i] = 1;
    return mask;
}

Tensor masked_attention(const Tensor& q, const Tensor& k, const Tensor& v, const std::vector<uint8_t>& mask) {
    if (q.dim(1) != k.dim(1) || k.dim(0) != v.dim(0)) throw ShapeError("masked_attention: shapes disagree");
    Tensor scores = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(q.dim(1))));
    scores = masked_fill(scores, mask, -1e30);
    return matmul(softmax(scores), v);
}

Tensor sparsity_penalty(const Tensor& link_prob, double lambda) { return scale(mean(link_prob), lambda); }

Tensor sparsity_penalty_masked(const Tensor& link_prob, const std::vector<uint8_t>& valid_pairs, double lambda) {
    if (valid_pairs.size() != link_prob.value().size()) throw ShapeError("sparsity_penalty_masked: size mismatch");
    long count = 0;
    std::vector<double> weights(valid_pairs.size(), 0.0);
    for (size_t i = 0; i < valid_pairs.size(); ++i) {
        if (valid_pairs[i]) {
            weights[i] = 1.0;
            ++count;
        }
    }
    if (count == 0) return Tensor::scalar(0.0);
    Tensor w = Tensor::from(link_prob.shape(), std::move(weights));
    return scale(sum(mul(link_prob, w)), lambda / count);
}

RelationshipBreakdown mask_relationship_breakdown(const std::vector<uint8_t>& mask,
                                                  const rel::RelationMatrices& rel) {
    const int n = rel.parent_child.n;
    if (mask.size() != static_cast<size_t>(n) * n) throw ShapeError("breakdown: mask size mismatch");
    long total = 0, parent = 0, sibling = 0, neither = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j || !mask[static_cast<size_t>(i) * n + j]) continue;
            ++total;
            bool is_parent = rel.parent_child.at(i, j) != 0;
            bool is_sibling = rel.sibling.at(i, j) != 0;
            if (is_parent) ++parent;
            if (is_sibling) ++sibling;
            if (!is_parent && !is_sibling) ++neither;
        }
    }
    if (total == 0) throw EmptyMask("breakdown: no off-diagonal pair unmasked");
    RelationshipBreakdown out;
    out.unmasked_pairs = total;
    out.parent_child_pct = static_cast<double>(parent) / total;
    out.sibling_pct = static_cast<double>(sibling) / total;
    out.neither_pct = static_cast<double>(neither) / total;
    return out;
}

} // namespace csa::sbm
