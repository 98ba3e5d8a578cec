#include <doctest.h>

#include <cmath>

#include "csa/metrics.hpp"
#include "csa/rng.hpp"
#include "helpers.hpp"

using namespace csa;
using namespace csa::metrics;

namespace {
std::vector<std::string> toks(std::initializer_list<const char*> words) {
    std::vector<std::string> out;
    for (const char* w : words) out.emplace_back(w);
    return out;
}
} // namespace

TEST_CASE("bleu4 identity scores 100") {
    std::vector<EvalPair> pairs{{toks({"a", "b", "c", "d", "e"}), toks({"a", "b", "c", "d", "e"})}};
    CHECK(bleu4(pairs) == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("bleu4 brevity-penalty fixture") {
    // cand "a b c d" vs ref "a b c d e": precisions all 1, BP = exp(-1/4)
    std::vector<EvalPair> pairs{{toks({"a", "b", "c", "d"}), toks({"a", "b", "c", "d", "e"})}};
    double expected = 100.0 * std::exp(1.0 - 5.0 / 4.0);
    CHECK(bleu4(pairs) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(bleu4(pairs) == doctest::Approx(77.8800783).epsilon(1e-7));
}

TEST_CASE("bleu4 disjoint vocabulary sits at the smoothed floor") {
    std::vector<EvalPair> pairs{
        {toks({"q", "w", "e", "r", "t", "y", "u", "i", "o", "p"}),
         toks({"a", "b", "c", "d", "e2", "f", "g", "h", "j", "k"})}};
    double score = bleu4(pairs);
    CHECK(score > 0.0); // add-one smoothing keeps it off exact zero
    CHECK(score < 15.0);
    std::vector<EvalPair> empty_cand{{{}, toks({"a"})}};
    CHECK(bleu4(empty_cand) == 0.0);
}

TEST_CASE("bleu4 errors on an empty corpus") {
    CHECK_THROWS_AS(bleu4({}), EmptyCorpus);
    CHECK_THROWS_AS(rouge_l({}), EmptyCorpus);
}

TEST_CASE("rouge identity and fixture") {
    std::vector<EvalPair> same{{toks({"a", "b", "c"}), toks({"a", "b", "c"})}};
    CHECK(rouge_l(same) == doctest::Approx(100.0).epsilon(1e-9));
    // cand "a b c" vs ref "a c b": LCS = 2, P = R = 2/3 -> F = 2/3
    std::vector<EvalPair> fixture{{toks({"a", "b", "c"}), toks({"a", "c", "b"})}};
    CHECK(rouge_l(fixture) == doctest::Approx(200.0 / 3.0).epsilon(1e-9));
    std::vector<EvalPair> disjoint{{toks({"x"}), toks({"a"})}};
    CHECK(rouge_l(disjoint) == 0.0);
}

TEST_CASE("lcs dynamic programming matches the recursive oracle") {
    // exhaustive over a small alphabet
    const char* alphabet[] = {"a", "b", "c"};
    std::vector<std::vector<std::string>> all;
    for (int len = 0; len <= 4; ++len) {
        long combos = 1;
        for (int i = 0; i < len; ++i) combos *= 3;
        for (long code = 0; code < combos; ++code) {
            std::vector<std::string> s;
            long c = code;
            for (int i = 0; i < len; ++i) {
                s.push_back(alphabet[c % 3]);
                c /= 3;
            }
            all.push_back(std::move(s));
        }
    }
    for (size_t i = 0; i < all.size(); i += 7)
        for (size_t j = 0; j < all.size(); j += 5)
            CHECK(lcs_length(all[i], all[j]) == helpers::lcs_recursive(all[i], all[j]));

    // random strings up to 10 tokens
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        auto draw = [&] {
            std::vector<std::string> s;
            int len = static_cast<int>(rng.below(11));
            for (int i = 0; i < len; ++i) s.push_back(alphabet[rng.below(3)]);
            return s;
        };
        auto a = draw(), b = draw();
        CHECK(lcs_length(a, b) == helpers::lcs_recursive(a, b));
    }
}

TEST_CASE("metrics are order-invariant over the corpus") {
    std::vector<EvalPair> pairs{
        {toks({"a", "b", "c"}), toks({"a", "b"})},
        {toks({"x", "y"}), toks({"x", "y", "z"})},
        {toks({"m"}), toks({"m", "n"})},
    };
    std::vector<EvalPair> reversed(pairs.rbegin(), pairs.rend());
    CHECK(bleu4(pairs) == bleu4(reversed)); // integer counts commute exactly
    CHECK(rouge_l(pairs) == doctest::Approx(rouge_l(reversed)).epsilon(1e-12));
}

TEST_CASE("sentence-mean bleu reduction differs from corpus bleu") {
    std::vector<EvalPair> pairs{
        {toks({"a", "b", "c", "d"}), toks({"a", "b", "c", "d"})},
        {toks({"x"}), toks({"q", "r", "s", "t"})},
    };
    double corpus = bleu4(pairs);
    double mean = bleu4_sentence_mean(pairs);
    CHECK(corpus >= 0.0);
    CHECK(mean >= 0.0);
    CHECK(corpus != doctest::Approx(mean).epsilon(1e-6));
}
