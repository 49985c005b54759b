#pragma once

#include <cstdint>
#include <vector>

namespace bethe {

enum class TreeKind { Ball, HalfSpace };

// Truncated tree, breadth-first indexed so parent < child everywhere.
// Ball(ell): root has K+1 children, interior vertices K children, all
// vertices within distance ell of the root.  HalfSpace(ell): root has K
// children (the branch toward the removed side is absent).
struct TreeGeometry {
    TreeKind kind = TreeKind::Ball;
    int K = 2;
    int ell = 0;
    std::int64_t n_vertices = 0;
    std::vector<std::int64_t> parent;       // -1 for the root
    std::vector<std::int64_t> first_child;  // -1 for leaves
    std::vector<int> child_count;
    std::vector<int> depth;

    // canonical path 0 = x_0, x_1, ..., x_r (first-child chain)
    std::vector<std::int64_t> path(int r) const;
};

std::int64_t ball_vertex_count(int K, int ell);
std::int64_t halfspace_vertex_count(int K, int ell);

// Throws validation_error("tree-too-large") past the vertex cap.
TreeGeometry build_tree(int K, int ell, TreeKind kind,
                        std::int64_t vertex_cap = 10'000'000);

}  // namespace bethe
