#pragma once

#include <string>
#include <vector>

#include "csa/errors.hpp"

namespace csa::metrics {

struct EvalPair {
    std::vector<std::string> candidate;
    std::vector<std::string> reference;
};

// corpus BLEU with n = 1..4, uniform weights, clipped counts, brevity
// penalty, add-one smoothing on zero n-gram precisions; reported x100
double bleu4(const std::vector<EvalPair>& pairs);

// per-sentence BLEU averaged over the corpus (alternative reduction)
double bleu4_sentence_mean(const std::vector<EvalPair>& pairs);

// mean per-pair LCS F-measure (beta = 1.2), x100
double rouge_l(const std::vector<EvalPair>& pairs, double beta = 1.2);

int lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

} // namespace csa::metrics
