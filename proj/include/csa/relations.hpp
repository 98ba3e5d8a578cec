#pragma once

#include <cstdint>
#include <vector>

#include "csa/ast.hpp"

namespace csa::rel {

// Dense square matrix of small signed distances.
struct IntMat {
    int n = 0;
    std::vector<int> v;

    IntMat() = default;
    explicit IntMat(int size) : n(size), v(static_cast<size_t>(size) * size, 0) {}
    int& at(int i, int j) { return v[static_cast<size_t>(i) * n + j]; }
    int at(int i, int j) const { return v[static_cast<size_t>(i) * n + j]; }
    bool operator==(const IntMat&) const = default;
};

using BoolMat = std::vector<uint8_t>; // n*n row-major

struct RelationMatrices {
    IntMat parent_child; // +d: row is ancestor of column at distance d
    IntMat sibling;      // signed horizontal distance among same-parent nodes
    int p_max = 150;
};

enum class RelationKind { parent_child, sibling };

IntMat compute_parent_child(const ast::Ast& ast);
IntMat compute_sibling(const ast::Ast& ast);

IntMat clip(const IntMat& m, int p_max);

// delta + p_max; index p_max is the shared zero/no-relation/self slot.
std::vector<uint32_t> to_indices(const IntMat& m, int p_max);

RelationMatrices compute(const ast::Ast& ast, int p_max = 150);

// true where the chosen relation is nonzero, plus the diagonal.
BoolMat relation_mask(const RelationMatrices& rel, RelationKind kind);

// debugging dump, rows "i,j,p,s"
std::string to_csv(const RelationMatrices& rel);

} // namespace csa::rel
