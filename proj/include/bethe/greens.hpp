#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bethe/model.hpp"
#include "bethe/tree.hpp"

namespace bethe {

// Matrix Green's functions G = (H - z)^{-1} on truncated tree strips.
//
// Conventions (checked against the lambda=0 closed forms and a dense
// resolvent oracle rather than taken on faith):
//   * hopping 1/2 between neighboring sites, so the Schur complement that
//     eliminates a branch contributes -(1/4) * (branch root Green block);
//   * half-space recursion  G^(d) = [A + lambda V - z - (1/4) sum_children
//     G^(d-1)]^{-1}, leaves G^(0) = [A + lambda V - z]^{-1};
//   * diagonal block at the origin uses all K+1 branches;
//   * off-diagonal factorization along the path x_0=0,...,x_r:
//     G(0,x_r) = (-1/2)^r [prod_j G^(x_{j-1}|x_j)] G(x_r,x_r).
//
// At lambda = 0 the sweep degenerates to an iterated Moebius-type map whose
// plain iterates oscillate with period two near the real axis and need about
// 1/eta levels to settle.  Deterministic (lambda = 0 or zero-disorder) deep
// Green's values are therefore computed with the damped self-consistent
// iteration, which is the deep-tree limit of the same recursion.

// Channelwise closed form of the lambda=0 half-space Green's limit:
// g_i = (2/K) (-(z - a_i) + sqrt((z - a_i)^2 - K)) with Im g_i > 0,
// assembled in the eigenbasis of A; converges to the band limit as eta -> 0.
CMatrix lambda0_halfspace_closed_form(const ModelParams& p, ComplexEnergy z);

// eta -> 0 band limit of the half-space Green's function,
// (2/K)(-(E - A) + i sqrt(K - (E - A)^2)); requires E inside the overlap
// interval (throws unsupported-energy otherwise).
CMatrix halfspace_green_band_limit(const ModelParams& p, double E);

// Exact leaf-to-root sweep on HalfSpace(depth) with explicit potentials
// (BFS-indexed as in build_tree).  Requires eta > 0.
CMatrix halfspace_green_finite(const ModelParams& p, std::span<const RMatrix> potentials,
                               ComplexEnergy z, int depth);

// Deterministic variant (lambda = 0 or Zero disorder): damped iteration of
// the depth map, capped at max(depth, 5000) steps, early exit at 1e-12.
CMatrix halfspace_green_finite(const ModelParams& p, ComplexEnergy z, int depth);

// One random half-space Green's sample of the given depth, potentials drawn
// on the fly from the counter-based stream key.  Falls back to the
// deterministic variant when the model has no randomness.
CMatrix halfspace_green_sample(const ModelParams& p, ComplexEnergy z, int depth,
                               uint64_t stream_key);

// Self-consistent half-space Green's function for lambda = 0:
//   G = [A - z - (K/4) G]^{-1},
// damped iteration (factor 0.5 engaged when the error stalls), tolerance
// 1e-12 in max-norm, at most 1e5 steps.  eta = 0 admitted for E strictly
// inside I_{A,K}.
CMatrix halfspace_green_fixedpoint(const ModelParams& p, ComplexEnergy z);

// Diagonal Green's block at the origin.
CMatrix full_green_diag(const ModelParams& p, ComplexEnergy z, int depth);  // lambda = 0
CMatrix full_green_diag_sample(const ModelParams& p, ComplexEnergy z, int depth,
                               uint64_t stream_key);
// Explicit-potential assembly on Ball(ell), branch depths consistent with the
// ball truncation; equals the dense (0,0) block.
CMatrix full_green_diag_on_ball(const ModelParams& p, const TreeGeometry& tree,
                                std::span<const RMatrix> potentials, ComplexEnergy z);

// lambda = 0 path value G(0,x_r) from fixed-point factors.
CMatrix offdiag_green_path(const ModelParams& p, ComplexEnergy z, int r);

// Explicit-potential path value on Ball(ell); equals the dense (0,x_r) block.
CMatrix offdiag_green_on_ball(const ModelParams& p, const TreeGeometry& tree,
                              std::span<const RMatrix> potentials, ComplexEnergy z, int r);

// Sampler for the infinite-volume half-space Green's distribution by
// population dynamics.  The distribution is the fixed point of
//   G  =d  [A + lambda V - z - (1/4) sum_{i=1}^K G_i]^{-1},  G_i iid copies,
// which an exact iid tree sample only reaches at depth ~ 1/eta (cost
// K^depth); the pool iterates the map over a large population instead and
// converges at the same per-sweep rate for N * sweeps work.  Construction is
// sequential and fully determined by (z, size, sweeps, seed); draws are
// keyed, so results are independent of worker count.
class HalfspacePool {
  public:
    // sweeps_min is raised to ~12/(1-q0) with q0 = max_i K |g_i|^2 / 4
    // evaluated at lambda = 0 (the contraction rate scale of the map)
    HalfspacePool(const ModelParams& p, ComplexEnergy z, std::size_t size, int sweeps_min,
                  uint64_t seed);
    CMatrix draw(uint64_t key) const;
    int sweeps() const { return sweeps_; }
    std::size_t size() const { return scalar_.empty() ? mats_.size() : scalar_.size(); }

  private:
    int m_ = 1;
    int sweeps_ = 0;
    std::vector<cplx> scalar_;    // m == 1 fast path
    std::vector<CMatrix> mats_;   // general m
};

// Dense resolvent oracle: assembles (H_Lambda - z) with Dirichlet boundary
// and solves by sparse LU.  Returns the m x m blocks <x|(H-z)^{-1}|y> for the
// requested (x, y) pairs.
std::vector<CMatrix> dense_green(const ModelParams& p, const TreeGeometry& tree,
                                 std::span<const RMatrix> potentials, ComplexEnergy z,
                                 const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs);

// All blocks <x|(H-z)^{-1}|y> for fixed y (one factorization, m solves).
std::vector<CMatrix> dense_green_source_blocks(const ModelParams& p, const TreeGeometry& tree,
                                               std::span<const RMatrix> potentials,
                                               ComplexEnergy z, std::int64_t y);

// Entrywise imaginary part (G - conj(G))/(2i) of a symmetric Green's block;
// real symmetric, positive definite for diagonal blocks with eta > 0.
RMatrix green_imaginary(const CMatrix& G);

double operator_norm(const CMatrix& G);

}  // namespace bethe
