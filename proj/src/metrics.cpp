#include "csa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace csa::metrics {

namespace {

constexpr int kMaxOrder = 4;

std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& tokens, int n) {
    std::map<std::vector<std::string>, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i)
        ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
    return counts;
}

struct BleuCounts {
    long correct[kMaxOrder] = {0, 0, 0, 0};
    long total[kMaxOrder] = {0, 0, 0, 0};
    long candidate_len = 0;
    long reference_len = 0;

    void add(const EvalPair& pair) {
        candidate_len += static_cast<long>(pair.candidate.size());
        reference_len += static_cast<long>(pair.reference.size());
        for (int n = 1; n <= kMaxOrder; ++n) {
            auto cand = ngram_counts(pair.candidate, n);
            auto ref = ngram_counts(pair.reference, n);
            for (const auto& [gram, count] : cand) {
                total[n - 1] += count;
                auto it = ref.find(gram);
                if (it != ref.end()) correct[n - 1] += std::min(count, it->second);
            }
        }
    }

    double score() const {
        if (candidate_len == 0) return 0.0;
        double log_precision = 0.0;
        for (int n = 0; n < kMaxOrder; ++n) {
            double p;
            if (correct[n] == 0) p = 1.0 / (total[n] + 1.0); // add-one smoothing on zero precisions
            else p = static_cast<double>(correct[n]) / total[n];
            log_precision += std::log(p);
        }
        double bp = candidate_len < reference_len
                        ? std::exp(1.0 - static_cast<double>(reference_len) / candidate_len)
                        : 1.0;
        return 100.0 * bp * std::exp(log_precision / kMaxOrder);
    }
};

} // namespace

double bleu4(const std::vector<EvalPair>& pairs) {
    if (pairs.empty()) throw EmptyCorpus("bleu4: no pairs");
    BleuCounts counts;
    for (const auto& pair : pairs) {
        if (pair.reference.empty()) throw DataError("bleu4: empty reference");
        counts.add(pair);
    }
    return counts.score();
}

double bleu4_sentence_mean(const std::vector<EvalPair>& pairs) {
    if (pairs.empty()) throw EmptyCorpus("bleu4: no pairs");
    double total = 0.0;
    for (const auto& pair : pairs) {
        if (pair.reference.empty()) throw DataError("bleu4: empty reference");
        BleuCounts counts;
        counts.add(pair);
        total += counts.score();
    }
    return total / pairs.size();
}

int lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const size_t m = a.size(), n = b.size();
    std::vector<int> prev(n + 1, 0), cur(n + 1, 0);
    for (size_t i = 1; i <= m; ++i) {
        for (size_t j = 1; j <= n; ++j) {
            if (a[i - 1] == b[j - 1]) cur[j] = prev[j - 1] + 1;
            else cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

double rouge_l(const std::vector<EvalPair>& pairs, double beta) {
    if (pairs.empty()) throw EmptyCorpus("rouge_l: no pairs");
    double total = 0.0;
    const double b2 = beta * beta;
    for (const auto& pair : pairs) {
        if (pair.reference.empty()) throw DataError("rouge_l: empty reference");
        int lcs = lcs_length(pair.candidate, pair.reference);
        if (lcs == 0 || pair.candidate.empty()) continue;
        double p = static_cast<double>(lcs) / pair.candidate.size();
        double r = static_cast<double>(lcs) / pair.reference.size();
        total += (1.0 + b2) * r * p / (r + b2 * p);
    }
    return 100.0 * total / pairs.size();
}

} // namespace csa::metrics
