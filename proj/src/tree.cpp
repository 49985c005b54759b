#include "bethe/tree.hpp"

#include <cmath>

#include "bethe/errors.hpp"

namespace bethe {

std::int64_t ball_vertex_count(int K, int ell) {
    // 1 + (K+1)(K^ell - 1)/(K - 1)
    std::int64_t pw = 1;
    for (int i = 0; i < ell; ++i) pw *= K;
    return 1 + static_cast<std::int64_t>(K + 1) * (pw - 1) / (K - 1);
}

std::int64_t halfspace_vertex_count(int K, int ell) {
    // (K^{ell+1} - 1)/(K - 1)
    std::int64_t pw = 1;
    for (int i = 0; i <= ell; ++i) pw *= K;
    return (pw - 1) / (K - 1);
}

std::vector<std::int64_t> TreeGeometry::path(int r) const {
    std::vector<std::int64_t> p;
    p.reserve(static_cast<std::size_t>(r) + 1);
    std::int64_t v = 0;
    p.push_back(v);
    for (int i = 0; i < r; ++i) {
        if (first_child[static_cast<std::size_t>(v)] < 0)
            throw validation_error("tree path exceeds depth");
        v = first_child[static_cast<std::size_t>(v)];
        p.push_back(v);
    }
    return p;
}

TreeGeometry build_tree(int K, int ell, TreeKind kind, std::int64_t vertex_cap) {
    if (K < 2) throw validation_error("invalid-connectivity: K must be >= 2");
    if (ell < 0) throw validation_error("invalid tree depth");
    // overflow-safe count check
    double approx = (kind == TreeKind::Ball)
                        ? 1.0 + (K + 1.0) * (std::pow(K, ell) - 1.0) / (K - 1.0)
                        : (std::pow(K, ell + 1) - 1.0) / (K - 1.0);
    if (approx > static_cast<double>(vertex_cap)) throw validation_error("tree-too-large");

    const std::int64_t n = (kind == TreeKind::Ball) ? ball_vertex_count(K, ell)
                                                    : halfspace_vertex_count(K, ell);
    if (n > vertex_cap) throw validation_error("tree-too-large");

    TreeGeometry t;
    t.kind = kind;
    t.K = K;
    t.ell = ell;
    t.n_vertices = n;
    t.parent.assign(static_cast<std::size_t>(n), -1);
    t.first_child.assign(static_cast<std::size_t>(n), -1);
    t.child_count.assign(static_cast<std::size_t>(n), 0);
    t.depth.assign(static_cast<std::size_t>(n), 0);

    std::int64_t next = 1;
    for (std::int64_t v = 0; v < n; ++v) {
        const int d = t.depth[static_cast<std::size_t>(v)];
        if (d == ell) continue;  // leaf
        const int nc = (v == 0 && kind == TreeKind::Ball) ? K + 1 : K;
        t.first_child[static_cast<std::size_t>(v)] = next;
        t.child_count[static_cast<std::size_t>(v)] = nc;
        for (int c = 0; c < nc; ++c) {
            t.parent[static_cast<std::size_t>(next)] = v;
            t.depth[static_cast<std::size_t>(next)] = d + 1;
            ++next;
        }
    }
    return t;
}

}  // namespace bethe
