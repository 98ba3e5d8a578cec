#include "csa/relations.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace csa::rel {

IntMat compute_parent_child(const ast::Ast& ast) {
    const int n = ast.size();
    IntMat out(n);
    for (int j = 0; j < n; ++j) {
        int d = 0;
        std::optional<int> up = ast.nodes[j].parent;
        while (up) {
            ++d;
            out.at(*up, j) = d;
            out.at(j, *up) = -d;
            up = ast.nodes[*up].parent;
        }
    }
    return out;
}

IntMat compute_sibling(const ast::Ast& ast) {
    const int n = ast.size();
    IntMat out(n);
    for (const auto& node : ast.nodes) {
        const auto& ch = node.children;
        for (size_t a = 0; a < ch.size(); ++a) {
            for (size_t b = a + 1; b < ch.size(); ++b) {
                int d = static_cast<int>(b - a);
                out.at(ch[a], ch[b]) = d;
                out.at(ch[b], ch[a]) = -d;
            }
        }
    }
    return out;
}

IntMat clip(const IntMat& m, int p_max) {
    IntMat out = m;
    for (int& x : out.v) x = std::clamp(x, -p_max, p_max);
    return out;
}

std::vector<uint32_t> to_indices(const IntMat& m, int p_max) {
    std::vector<uint32_t> out(m.v.size());
    for (size_t i = 0; i < m.v.size(); ++i) {
        int d = m.v[i];
        if (std::abs(d) > p_max) throw RangeError("to_indices: |delta| exceeds p_max; clip first");
        out[i] = static_cast<uint32_t>(d + p_max);
    }
    return out;
}

RelationMatrices compute(const ast::Ast& ast, int p_max) {
    RelationMatrices rel;
    rel.p_max = p_max;
    rel.parent_child = clip(compute_parent_child(ast), p_max);
    rel.sibling = clip(compute_sibling(ast), p_max);
    return rel;
}

BoolMat relation_mask(const RelationMatrices& rel, RelationKind kind) {
    const IntMat& m = kind == RelationKind::parent_child ? rel.parent_child : rel.sibling;
    BoolMat out(m.v.size(), 0);
    for (size_t i = 0; i < m.v.size(); ++i) out[i] = m.v[i] != 0;
    for (int i = 0; i < m.n; ++i) out[static_cast<size_t>(i) * m.n + i] = 1; // self always attendable
    return out;
}

std::string to_csv(const RelationMatrices& rel) {
    std::ostringstream out;
    out << "i,j,p,s\n";
    for (int i = 0; i < rel.parent_child.n; ++i)
        for (int j = 0; j < rel.parent_child.n; ++j)
            out << i << "," << j << "," << rel.parent_child.at(i, j) << "," << rel.sibling.at(i, j) << "\n";
    return out.str();
}

} // namespace csa::rel
