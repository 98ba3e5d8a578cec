#pragma once

#include <cstdint>
#include <vector>

#include "csa/autodiff.hpp"
#include "csa/relations.hpp"
#include "csa/rng.hpp"

namespace csa::sbm {

// Everything the stochastic-block-model path produces for one head.
struct SbmMaskBundle {
    ad::Tensor assign_q, assign_k; // [n, k], rows sum to 1
    ad::Tensor cluster_link;       // [k, k], symmetric, entries in [0, 1]
    ad::Tensor link_prob;          // [n, n], entries in [0, 1]
    std::vector<uint8_t> mask;     // filled by the caller via sample_mask
};

// assign = row-softmax of content-to-cluster scores, cluster_link =
// symmetrized sigmoid(C C^T), link_prob = assign_q * cluster_link * assign_k^T
SbmMaskBundle link_probability(const ad::Tensor& q, const ad::Tensor& k, const ad::Tensor& clusters);

enum class SampleMode { train, eval };

// train: independent Bernoulli draws; eval: deterministic threshold at 0.5.
// Diagonal is forced true in both modes.
std::vector<uint8_t> sample_mask(const ad::Tensor& link_prob, Rng& rng, SampleMode mode);

// softmax(mask ? q k^T / sqrt(d) : -inf) v
ad::Tensor masked_attention(const ad::Tensor& q, const ad::Tensor& k, const ad::Tensor& v,
                            const std::vector<uint8_t>& mask);

// lambda * mean(link_prob)
ad::Tensor sparsity_penalty(const ad::Tensor& link_prob, double lambda);
// restricted to pairs flagged valid (padded batches)
ad::Tensor sparsity_penalty_masked(const ad::Tensor& link_prob, const std::vector<uint8_t>& valid_pairs,
                                   double lambda);

struct RelationshipBreakdown {
    double parent_child_pct = 0.0;
    double sibling_pct = 0.0;
    double neither_pct = 0.0;
    long unmasked_pairs = 0;
};

// Fractions of unmasked off-diagonal ordered pairs falling into each
// relationship; each ratio is over the unmasked total.
RelationshipBreakdown mask_relationship_breakdown(const std::vector<uint8_t>& mask,
                                                  const rel::RelationMatrices& rel);

} // namespace csa::sbm
