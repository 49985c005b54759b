#include "bethe/greens.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <Eigen/SVD>
#include <cmath>
#include <functional>

#include "bethe/errors.hpp"
#include "bethe/rng.hpp"

namespace bethe {

namespace {

constexpr double kFixedPointTol = 1e-13;
constexpr int kFixedPointMaxIter = 100000;

CMatrix a_as_complex(const ModelParams& p) { return p.A.cast<cplx>(); }

double max_abs_diff(const CMatrix& X, const CMatrix& Y) {
    return (X - Y).cwiseAbs().maxCoeff();
}

// Damped iteration of G -> F(G).  The plain map is used while the step size
// decays; once it stalls (near-unimodular multiplier) the 0.5-damped map
// takes over.
CMatrix damped_iterate(const std::function<CMatrix(const CMatrix&)>& F, CMatrix G,
                       int max_iter, bool* converged) {
    double prev_err = -1.0;
    bool damp = false;
    for (int it = 0; it < max_iter; ++it) {
        CMatrix next = F(G);
        if (damp) next = 0.5 * (G + next);
        const double err = max_abs_diff(next, G);
        G = std::move(next);
        if (err < kFixedPointTol) {
            if (converged) *converged = true;
            return G;
        }
        if (!damp && prev_err >= 0.0 && err > 0.95 * prev_err) damp = true;
        prev_err = err;
    }
    if (converged) *converged = false;
    return G;
}

}  // namespace

CMatrix lambda0_halfspace_closed_form(const ModelParams& p, ComplexEnergy z) {
    const double K = static_cast<double>(p.K);
    Eigen::VectorXcd g(p.m);
    for (int i = 0; i < p.m; ++i) {
        const cplx w = z.z() - p.a_eigs(i);
        const cplx s = std::sqrt(w * w - K);
        cplx gi = (2.0 / K) * (-w + s);
        if (gi.imag() < 0.0) gi = (2.0 / K) * (-w - s);
        g(i) = gi;
    }
    return p.a_vecs.cast<cplx>() * g.asDiagonal() * p.a_vecs.transpose().cast<cplx>();
}

CMatrix halfspace_green_band_limit(const ModelParams& p, double E) {
    const double K = static_cast<double>(p.K);
    Eigen::VectorXcd d(p.m);
    for (int i = 0; i < p.m; ++i) {
        const double u = E - p.a_eigs(i);
        if (K - u * u <= 0.0)
            throw validation_error("unsupported-energy: E outside the overlap interval");
        d(i) = (2.0 / K) * cplx(-u, std::sqrt(K - u * u));
    }
    return p.a_vecs.cast<cplx>() * d.asDiagonal() * p.a_vecs.transpose().cast<cplx>();
}

CMatrix halfspace_green_fixedpoint(const ModelParams& p, ComplexEnergy z) {
    if (!p.deterministic())
        throw validation_error("halfspace_green_fixedpoint requires lambda = 0");
    const CMatrix Ac = a_as_complex(p);
    const double K4 = p.K / 4.0;
    const int m = p.m;
    auto F = [&](const CMatrix& G) -> CMatrix {
        return (Ac - z.z() * CMatrix::Identity(m, m) - K4 * G).inverse();
    };
    CMatrix G0;
    if (z.eta > 0.0) {
        G0 = (Ac - z.z() * CMatrix::Identity(m, m)).inverse();
    } else {
        const auto iv = spectral_interval(p);
        if (!iv || z.E <= iv->first || z.E >= iv->second)
            throw validation_error("unsupported-energy: eta = 0 needs E inside I_{A,K}");
        G0 = halfspace_green_band_limit(p, z.E);
    }
    bool ok = false;
    CMatrix G = damped_iterate(F, G0, kFixedPointMaxIter, &ok);
    if (!ok) throw numerical_error("fixed-point-diverged");
    return G;
}

CMatrix halfspace_green_finite(const ModelParams& p, ComplexEnergy z, int depth) {
    if (!p.deterministic())
        throw validation_error("deterministic half-space Green needs lambda = 0");
    const CMatrix Ac = a_as_complex(p);
    const double K4 = p.K / 4.0;
    const int m = p.m;
    if (z.eta <= 0.0) throw validation_error("requires-positive-eta");
    auto F = [&](const CMatrix& G) -> CMatrix {
        return (Ac - z.z() * CMatrix::Identity(m, m) - K4 * G).inverse();
    };
    CMatrix G = (Ac - z.z() * CMatrix::Identity(m, m)).inverse();
    if (depth <= 30) {
        // exact truncated operator: depth plain steps
        for (int d = 0; d < depth; ++d) G = F(G);
        return G;
    }
    // deep tree: damped self-consistent iteration (the plain iterates
    // oscillate near the real axis and would need ~1/eta levels)
    return damped_iterate(F, G, std::max(depth, 5000), nullptr);
}

// ---------------------------------------------------------------------------
// explicit-potential sweeps on a TreeGeometry

namespace {

CMatrix checked_inverse(const CMatrix& M) {
    CMatrix inv = M.inverse();
    if (!inv.allFinite()) throw numerical_error("numerical-breakdown: singular intermediate");
    return inv;
}

// Green's block of the subtree rooted at `v`, Dirichlet outside.
CMatrix subtree_sweep(const ModelParams& p, const TreeGeometry& t,
                      std::span<const RMatrix> pots, ComplexEnergy z, std::int64_t v) {
    const int m = p.m;
    CMatrix M = p.A.cast<cplx>() + p.lambda * pots[static_cast<std::size_t>(v)].cast<cplx>() -
                z.z() * CMatrix::Identity(m, m);
    const std::int64_t fc = t.first_child[static_cast<std::size_t>(v)];
    const int nc = t.child_count[static_cast<std::size_t>(v)];
    for (int c = 0; c < nc; ++c)
        M -= 0.25 * subtree_sweep(p, t, pots, z, fc + c);
    return checked_inverse(M);
}

void check_eta(ComplexEnergy z) {
    if (z.eta <= 0.0) throw validation_error("requires-positive-eta");
}

void check_pots(const TreeGeometry& t, std::span<const RMatrix> pots) {
    if (static_cast<std::int64_t>(pots.size()) != t.n_vertices)
        throw validation_error("potential list does not match tree size");
}

}  // namespace

CMatrix halfspace_green_finite(const ModelParams& p, std::span<const RMatrix> potentials,
                               ComplexEnergy z, int depth) {
    check_eta(z);
    const TreeGeometry t = build_tree(p.K, depth, TreeKind::HalfSpace);
    check_pots(t, potentials);
    return subtree_sweep(p, t, potentials, z, 0);
}

CMatrix full_green_diag_on_ball(const ModelParams& p, const TreeGeometry& tree,
                                std::span<const RMatrix> potentials, ComplexEnergy z) {
    check_eta(z);
    check_pots(tree, potentials);
    return subtree_sweep(p, tree, potentials, z, 0);
}

CMatrix offdiag_green_on_ball(const ModelParams& p, const TreeGeometry& tree,
                              std::span<const RMatrix> potentials, ComplexEnergy z, int r) {
    check_eta(z);
    check_pots(tree, potentials);
    if (r < 0 || r > tree.ell) throw validation_error("path length exceeds tree depth");
    const int m = p.m;
    const auto path = tree.path(r);
    auto local = [&](std::int64_t v) -> CMatrix {
        return p.A.cast<cplx>() + p.lambda * potentials[static_cast<std::size_t>(v)].cast<cplx>() -
               z.z() * CMatrix::Identity(m, m);
    };
    // off-path branch sum at path vertex j, excluding the path continuation
    auto side_sum = [&](int j, bool exclude_next) -> CMatrix {
        const std::int64_t v = path[static_cast<std::size_t>(j)];
        const std::int64_t fc = tree.first_child[static_cast<std::size_t>(v)];
        const int nc = tree.child_count[static_cast<std::size_t>(v)];
        CMatrix s = CMatrix::Zero(m, m);
        for (int c = 0; c < nc; ++c) {
            const std::int64_t w = fc + c;
            if (exclude_next && j < r && w == path[static_cast<std::size_t>(j) + 1]) continue;
            s += subtree_sweep(p, tree, potentials, z, w);
        }
        return s;
    };

    if (r == 0) return checked_inverse(local(0) - 0.25 * side_sum(0, false));

    CMatrix prod = CMatrix::Identity(m, m);
    CMatrix R;  // G^(x_j | x_{j+1})
    for (int j = 0; j < r; ++j) {
        CMatrix M = local(path[static_cast<std::size_t>(j)]) - 0.25 * side_sum(j, true);
        if (j > 0) M -= 0.25 * R;
        R = checked_inverse(M);
        prod = prod * R;
    }
    CMatrix Mend = local(path[static_cast<std::size_t>(r)]) - 0.25 * (R + side_sum(r, false));
    const CMatrix Grr = checked_inverse(Mend);
    return std::pow(-0.5, r) * prod * Grr;
}

// ---------------------------------------------------------------------------
// randomized half-space samples (level sweep, potentials drawn on the fly)

namespace {

std::int64_t ipow(std::int64_t b, int e) {
    std::int64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

cplx halfspace_sample_m1(const ModelParams& p, ComplexEnergy z, int depth, uint64_t key) {
    RngStream rs(key);
    const double sig = p.disorder.variant == DisorderVariant::GOE
                           ? p.disorder.sigma * std::sqrt(2.0)
                           : p.disorder.sigma;
    const double ls = p.lambda * sig;
    const double aE = p.A(0, 0) - z.E;
    const double eta = z.eta;
    const int K = p.K;

    // flat re/im buffers, reused across calls on the same thread
    thread_local std::vector<double> bre, bim, ure, uim;
    const std::size_t nleaf = static_cast<std::size_t>(ipow(K, depth));
    bre.resize(nleaf);
    bim.resize(nleaf);
    for (std::size_t i = 0; i < nleaf; ++i) {
        const double wr = aE + ls * rs.normal();
        const double inv = 1.0 / (wr * wr + eta * eta);
        bre[i] = wr * inv;
        bim[i] = eta * inv;  // -(-eta) / |w|^2
    }
    for (int lev = depth - 1; lev >= 0; --lev) {
        const std::size_t n = static_cast<std::size_t>(ipow(K, lev));
        ure.resize(n);
        uim.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double sr = 0.0, si = 0.0;
            const std::size_t base = i * static_cast<std::size_t>(K);
            for (int c = 0; c < K; ++c) {
                sr += bre[base + static_cast<std::size_t>(c)];
                si += bim[base + static_cast<std::size_t>(c)];
            }
            const double wr = aE + ls * rs.normal() - 0.25 * sr;
            const double wi = -eta - 0.25 * si;
            const double inv = 1.0 / (wr * wr + wi * wi);
            ure[i] = wr * inv;
            uim[i] = -wi * inv;
        }
        bre.swap(ure);
        bim.swap(uim);
    }
    return {bre[0], bim[0]};
}

CMatrix halfspace_sample_generic(const ModelParams& p, ComplexEnergy z, int depth,
                                 uint64_t key) {
    RngStream rs(key);
    const int m = p.m;
    const CMatrix Ac = p.A.cast<cplx>();
    const CMatrix zI = z.z() * CMatrix::Identity(m, m);
    std::vector<CMatrix> cur(static_cast<std::size_t>(ipow(p.K, depth)));
    for (auto& g : cur) {
        const RMatrix V = sample_potential_one(p.disorder, m, rs);
        g = (Ac + p.lambda * V.cast<cplx>() - zI).inverse();
    }
    std::vector<CMatrix> up;
    for (int lev = depth - 1; lev >= 0; --lev) {
        const std::size_t n = static_cast<std::size_t>(ipow(p.K, lev));
        up.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            CMatrix s = CMatrix::Zero(m, m);
            for (int c = 0; c < p.K; ++c)
                s += cur[i * static_cast<std::size_t>(p.K) + static_cast<std::size_t>(c)];
            const RMatrix V = sample_potential_one(p.disorder, m, rs);
            up[i] = (Ac + p.lambda * V.cast<cplx>() - zI - 0.25 * s).inverse();
        }
        cur.swap(up);
    }
    return cur[0];
}

}  // namespace

CMatrix halfspace_green_sample(const ModelParams& p, ComplexEnergy z, int depth,
                               uint64_t stream_key) {
    check_eta(z);
    if (p.deterministic()) return halfspace_green_finite(p, z, depth);
    if (halfspace_vertex_count(p.K, depth) > 50'000'000)
        throw validation_error("tree-too-large");
    if (p.m == 1) {
        CMatrix G(1, 1);
        G(0, 0) = halfspace_sample_m1(p, z, depth, stream_key);
        return G;
    }
    return halfspace_sample_generic(p, z, depth, stream_key);
}

CMatrix full_green_diag(const ModelParams& p, ComplexEnergy z, int depth) {
    (void)depth;  // deterministic branches are taken at their deep-tree limit
    if (!p.deterministic())
        throw validation_error("full_green_diag without potentials needs lambda = 0");
    if (z.eta <= 0.0) throw validation_error("requires-positive-eta");
    const CMatrix g = halfspace_green_fixedpoint(p, z);
    const int m = p.m;
    return (a_as_complex(p) - z.z() * CMatrix::Identity(m, m) - 0.25 * (p.K + 1) * g)
        .inverse();
}

CMatrix full_green_diag_sample(const ModelParams& p, ComplexEnergy z, int depth,
                               uint64_t stream_key) {
    if (p.deterministic()) return full_green_diag(p, z, depth);
    check_eta(z);
    const int m = p.m;
    CMatrix s = CMatrix::Zero(m, m);
    for (int b = 0; b < p.K + 1; ++b)
        s += halfspace_green_sample(p, z, depth, rng_key(stream_key, 1000u + b));
    RngStream rs(rng_key(stream_key, 999u));
    const RMatrix V = sample_potential_one(p.disorder, m, rs);
    return (a_as_complex(p) + p.lambda * V.cast<cplx>() -
            z.z() * CMatrix::Identity(m, m) - 0.25 * s)
        .inverse();
}

CMatrix offdiag_green_path(const ModelParams& p, ComplexEnergy z, int r) {
    if (!p.deterministic())
        throw validation_error("offdiag_green_path without potentials needs lambda = 0");
    if (r == 0) return full_green_diag(p, z, 0);
    const CMatrix g = halfspace_green_fixedpoint(p, z);
    const CMatrix G00 = full_green_diag(p, z, 0);
    CMatrix prod = CMatrix::Identity(p.m, p.m);
    for (int j = 0; j < r; ++j) prod = prod * g;
    return std::pow(-0.5, r) * prod * G00;
}

// ---------------------------------------------------------------------------
// population-dynamics pool

HalfspacePool::HalfspacePool(const ModelParams& p, ComplexEnergy z, std::size_t size,
                             int sweeps_min, uint64_t seed) {
    check_eta(z);
    if (p.deterministic())
        throw validation_error("pool sampling is for disordered models; lambda = 0 is exact");
    if (size < 1024) throw validation_error("pool too small");
    m_ = p.m;
    const int K = p.K;

    // contraction-rate scale from the lambda = 0 closed form
    double q0 = 0.0;
    {
        ModelParams p0 = p;
        p0.lambda = 0.0;
        const CMatrix g = lambda0_halfspace_closed_form(p0, z);
        for (int i = 0; i < p.m; ++i) {
            const cplx gi = (p.a_vecs.col(i).transpose().cast<cplx>() * g *
                             p.a_vecs.col(i).cast<cplx>())(0);
            q0 = std::max(q0, K * std::norm(gi) / 4.0);
        }
    }
    const double rate = std::max(1e-4, 1.0 - std::min(q0, 1.0));
    sweeps_ = std::max(sweeps_min, static_cast<int>(std::ceil(12.0 / rate)));
    sweeps_ = std::min(sweeps_, 50000);

    RngStream rs(rng_key(seed, 0xB001u));
    const cplx zz = z.z();
    if (m_ == 1) {
        const double sig = p.disorder.variant == DisorderVariant::GOE
                               ? p.disorder.sigma * std::sqrt(2.0)
                               : p.disorder.sigma;
        const double a = p.A(0, 0);
        scalar_.resize(size);
        for (auto& g : scalar_) g = 1.0 / (a + p.lambda * sig * rs.normal() - zz);
        for (int t = 0; t < sweeps_; ++t)
            for (std::size_t i = 0; i < size; ++i) {
                cplx s = 0.0;
                for (int c = 0; c < K; ++c) s += scalar_[rs.next_u64() % size];
                scalar_[i] = 1.0 / (a + p.lambda * sig * rs.normal() - zz - 0.25 * s);
            }
    } else {
        const CMatrix Ac = p.A.cast<cplx>();
        const CMatrix zI = zz * CMatrix::Identity(m_, m_);
        mats_.resize(size);
        for (auto& g : mats_) {
            const RMatrix V = sample_potential_one(p.disorder, m_, rs);
            g = (Ac + p.lambda * V.cast<cplx>() - zI).inverse();
        }
        for (int t = 0; t < sweeps_; ++t)
            for (std::size_t i = 0; i < size; ++i) {
                CMatrix s = CMatrix::Zero(m_, m_);
                for (int c = 0; c < K; ++c) s += mats_[rs.next_u64() % size];
                const RMatrix V = sample_potential_one(p.disorder, m_, rs);
                mats_[i] = (Ac + p.lambda * V.cast<cplx>() - zI - 0.25 * s).inverse();
            }
    }
}

CMatrix HalfspacePool::draw(uint64_t key) const {
    const std::size_t n = size();
    const std::size_t idx = static_cast<std::size_t>(rng_mix(key)) % n;
    if (m_ == 1) {
        CMatrix G(1, 1);
        G(0, 0) = scalar_[idx];
        return G;
    }
    return mats_[idx];
}

// ---------------------------------------------------------------------------
// dense oracle

namespace {

Eigen::SparseMatrix<cplx> assemble_h_minus_z(const ModelParams& p, const TreeGeometry& t,
                                             std::span<const RMatrix> pots, ComplexEnergy z) {
    const int m = p.m;
    const std::int64_t N = t.n_vertices * m;
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<std::size_t>(N) * static_cast<std::size_t>(m + 2));
    for (std::int64_t x = 0; x < t.n_vertices; ++x) {
        const RMatrix& V = pots[static_cast<std::size_t>(x)];
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                cplx v = p.A(j, k) + p.lambda * V(j, k);
                if (j == k) v -= z.z();
                if (v != cplx(0.0, 0.0))
                    trip.emplace_back(x * m + j, x * m + k, v);
            }
        const std::int64_t par = t.parent[static_cast<std::size_t>(x)];
        if (par >= 0)
            for (int j = 0; j < m; ++j) {
                trip.emplace_back(x * m + j, par * m + j, cplx(0.5, 0.0));
                trip.emplace_back(par * m + j, x * m + j, cplx(0.5, 0.0));
            }
    }
    Eigen::SparseMatrix<cplx> H(N, N);
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

}  // namespace

std::vector<CMatrix> dense_green_source_blocks(const ModelParams& p, const TreeGeometry& tree,
                                               std::span<const RMatrix> potentials,
                                               ComplexEnergy z, std::int64_t y) {
    check_eta(z);
    check_pots(tree, potentials);
    const int m = p.m;
    auto H = assemble_h_minus_z(p, tree, potentials, z);
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
    lu.compute(H);
    if (lu.info() != Eigen::Success) throw numerical_error("numerical-breakdown in dense solve");
    const std::int64_t N = tree.n_vertices * m;
    Eigen::MatrixXcd cols(N, m);
    for (int k = 0; k < m; ++k) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(N);
        e(y * m + k) = 1.0;
        cols.col(k) = lu.solve(e);
    }
    std::vector<CMatrix> blocks(static_cast<std::size_t>(tree.n_vertices));
    for (std::int64_t x = 0; x < tree.n_vertices; ++x)
        blocks[static_cast<std::size_t>(x)] = cols.block(x * m, 0, m, m);
    return blocks;
}

std::vector<CMatrix> dense_green(const ModelParams& p, const TreeGeometry& tree,
                                 std::span<const RMatrix> potentials, ComplexEnergy z,
                                 const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs) {
    std::vector<CMatrix> out;
    out.reserve(pairs.size());
    std::int64_t cached_y = -1;
    std::vector<CMatrix> col;
    for (const auto& [x, y] : pairs) {
        if (y != cached_y) {
            col = dense_green_source_blocks(p, tree, potentials, z, y);
            cached_y = y;
        }
        out.push_back(col[static_cast<std::size_t>(x)]);
    }
    return out;
}

RMatrix green_imaginary(const CMatrix& G) {
    const double scale = 1.0 + G.cwiseAbs().maxCoeff();
    if ((G - G.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw validation_error("invalid-green: block is not symmetric");
    return G.imag();
}

double operator_norm(const CMatrix& G) {
    Eigen::JacobiSVD<CMatrix> svd(G);
    return svd.singularValues()(0);
}

}  // namespace bethe
