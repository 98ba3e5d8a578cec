#pragma once

#include <string>
#include <vector>

#include "csa/ast.hpp"

namespace csa::inp {

enum class PeScheme { csa, sequential, tree, triplet, laplacian };

std::string scheme_name(PeScheme scheme);
PeScheme scheme_from_name(const std::string& name);

struct InpExample {
    std::vector<double> pe_a, pe_b; // endpoint encodings
    std::vector<int> labels;        // k intermediate node-type ids
};

struct InpDataset {
    std::vector<InpExample> train, test;
    int k = 1;
    int label_vocab = 0;
    int pe_dim = 0;
};

// all downward ancestor-to-descendant paths with exactly k intermediate
// nodes, ordered by (start id, end id); each path lists k+2 node ids
std::vector<std::vector<int>> extract_paths(const ast::Ast& tree, int k);

struct InpBuildConfig {
    int k = 1;
    PeScheme scheme = PeScheme::csa;
    int cap = 10;          // max paths sampled per ast
    double split_ratio = 0.8;
    int d_pe = 64;
    int cse_layers = 2;
    int cse_heads = 4;
    int p_max = 150;
    int k_eig = 16;        // laplacian columns
};

InpDataset build_dataset(const std::vector<ast::DatasetRecord>& corpus, const InpBuildConfig& cfg, uint64_t seed);

struct ProbeConfig {
    int hidden = 256;
    int epochs = 30;
    double lr = 1e-3;
    int batch = 32;
};

struct ProbeResult {
    double exact_acc = 0.0;        // all k positions correct
    double per_position_acc = 0.0; // mean over positions
};

// two-hidden-layer MLP on concat(pe_a, pe_b) with k parallel softmax heads
ProbeResult train_probe(const InpDataset& ds, const ProbeConfig& cfg, uint64_t seed);

} // namespace csa::inp
