#include <cmath>

#include "bethe/errors.hpp"
#include "bethe/greens.hpp"
#include "bethe/model.hpp"
#include "bethe/rng.hpp"
#include "bethe/tree.hpp"
#include "doctest.h"

using namespace bethe;

namespace {

ModelParams scalar_params(int K, double lambda = 0.0,
                          DisorderVariant v = DisorderVariant::Zero, double sigma = 1.0) {
    return validate_params(K, 1, RMatrix::Zero(1, 1), lambda, {v, sigma});
}

RMatrix diag2(double a, double b) {
    RMatrix A = RMatrix::Zero(2, 2);
    A(0, 0) = a;
    A(1, 1) = b;
    return A;
}

std::vector<RMatrix> draw_potentials(const ModelParams& p, const TreeGeometry& t,
                                     uint64_t seed) {
    return sample_potential(p.disorder, p.m, seed, static_cast<std::size_t>(t.n_vertices));
}

}  // namespace

TEST_CASE("half-space base case, depth 0") {
    auto p = scalar_params(2);
    std::vector<RMatrix> pots{RMatrix::Zero(1, 1)};
    ComplexEnergy z{0.0, 1.0};  // z = i
    auto G = halfspace_green_finite(p, pots, z, 0);
    CHECK(std::abs(G(0, 0) - cplx(0.0, 1.0)) < 1e-15);  // 1/(-i) = i
}

TEST_CASE("half-space recursion matches dense solve") {
    for (int K : {2, 3})
        for (int m : {1, 2}) {
            RMatrix A = (m == 1) ? RMatrix::Zero(1, 1) : diag2(-0.5, 0.5);
            auto p = validate_params(K, m, A, 0.5,
                                     {DisorderVariant::DiagonalGaussianIID, 1.0});
            const int depth = 3;
            auto tree = build_tree(K, depth, TreeKind::HalfSpace);
            ComplexEnergy z{0.2, 0.7};
            for (uint64_t s = 0; s < 5; ++s) {
                auto pots = draw_potentials(p, tree, 100 + s);
                auto G = halfspace_green_finite(p, pots, z, depth);
                auto D = dense_green(p, tree, pots, z, {{0, 0}});
                CHECK((G - D[0]).cwiseAbs().maxCoeff() <
                      1e-10 * D[0].cwiseAbs().maxCoeff());
            }
        }
}

TEST_CASE("deterministic deep half-space equals closed form") {
    // K=4, m=1, A=0, E=0, eta=1e-8, depth 200 -> i
    auto p = scalar_params(4);
    auto G = halfspace_green_finite(p, ComplexEnergy{0.0, 1e-8}, 200);
    CHECK(std::abs(G(0, 0) - cplx(0.0, 1.0)) < 1e-4);
}

TEST_CASE("fixed point: value, residual and eta->0 limit") {
    auto p = scalar_params(4);
    auto G = halfspace_green_fixedpoint(p, ComplexEnergy{0.0, 1e-8});
    CHECK(std::abs(G(0, 0) - cplx(0.0, 1.0)) < 1e-6);  // band limit at A=0, E=0 is i

    // m=2 channel closed form at E=0, eta=1e-8
    auto q = validate_params(4, 2, diag2(-0.5, 0.5), 0.0, {});
    auto G2 = halfspace_green_fixedpoint(q, ComplexEnergy{0.0, 1e-8});
    const cplx want0(-0.25, std::sqrt(15.0) / 4.0);  // channel a=-1/2
    const cplx want1(0.25, std::sqrt(15.0) / 4.0);   // channel a=+1/2
    CHECK(std::abs(G2(0, 0) - want0) < 1e-6);
    CHECK(std::abs(G2(1, 1) - want1) < 1e-6);
    CHECK(std::abs(G2(0, 1)) < 1e-10);

    // residual of the defining equation
    for (double eta : {1.0, 0.1, 1e-4, 1e-8}) {
        ComplexEnergy z{0.3, eta};
        auto F = halfspace_green_fixedpoint(p, z);
        CMatrix rhs = (p.A.cast<cplx>() - z.z() * CMatrix::Identity(1, 1) -
                       (p.K / 4.0) * F)
                          .inverse();
        CHECK((F - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }

    // eta->0 along a grid: error against the band limit monotone decreasing
    const CMatrix target = halfspace_green_band_limit(p, 0.5);
    double prev = 1e9;
    for (double eta : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
        auto F = halfspace_green_fixedpoint(p, ComplexEnergy{0.5, eta});
        const double err = (F - target).cwiseAbs().maxCoeff();
        CHECK(err < prev + 1e-14);
        prev = err;
    }

    // eta = 0 inside the band is supported, outside rejected
    auto F0 = halfspace_green_fixedpoint(p, ComplexEnergy{0.5, 0.0});
    CHECK((F0 - target).cwiseAbs().maxCoeff() < 1e-10);
    CHECK_THROWS_AS(halfspace_green_fixedpoint(p, ComplexEnergy{3.0, 0.0}),
                    validation_error);
}

TEST_CASE("full diagonal block: lambda=0 closed form and dense oracle") {
    // |G(0,0)|^2 = 8/9 at K=2, m=1, E=0, eta=1e-6
    auto p = scalar_params(2);
    auto G = full_green_diag(p, ComplexEnergy{0.0, 1e-6}, 200);
    CHECK(std::norm(G(0, 0)) == doctest::Approx(8.0 / 9.0).epsilon(1e-3));

    // symmetric output and dense agreement for random potentials
    auto q = validate_params(2, 2, diag2(-0.5, 0.5), 0.3,
                             {DisorderVariant::DiagonalGaussianIID, 1.0});
    const int depth = 4;
    auto tree = build_tree(2, depth, TreeKind::Ball);
    ComplexEnergy z{0.1, 0.5};
    for (uint64_t s = 0; s < 5; ++s) {
        auto pots = draw_potentials(q, tree, 200 + s);
        auto Gb = full_green_diag_on_ball(q, tree, pots, z);
        CHECK((Gb - Gb.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        auto D = dense_green(q, tree, pots, z, {{0, 0}});
        CHECK((Gb - D[0]).cwiseAbs().maxCoeff() < 1e-10 * D[0].cwiseAbs().maxCoeff());
    }
}

TEST_CASE("off-diagonal path factorization") {
    // r=0 reduces to the diagonal block
    auto p = scalar_params(2);
    ComplexEnergy z{0.0, 0.1};
    auto d0 = offdiag_green_path(p, z, 0);
    auto G00 = full_green_diag(p, z, 0);
    CHECK((d0 - G00).cwiseAbs().maxCoeff() < 1e-14);

    // lambda=0 scalar closed form: (-1/2)^3 g^3 G00
    auto d3 = offdiag_green_path(p, z, 3);
    const cplx g = halfspace_green_fixedpoint(p, z)(0, 0);
    const cplx want = std::pow(-0.5, 3) * std::pow(g, 3) * G00(0, 0);
    CHECK(std::abs(d3(0, 0) - want) < 1e-12);

    // dense oracle on a shared ball sample
    for (int K : {2, 3})
        for (int m : {1, 2}) {
            RMatrix A = (m == 1) ? RMatrix::Zero(1, 1) : diag2(-0.5, 0.5);
            auto q = validate_params(K, m, A, 0.4,
                                     {DisorderVariant::DiagonalGaussianIID, 1.0});
            auto tree = build_tree(K, 4, TreeKind::Ball);
            ComplexEnergy zz{0.2, 0.6};
            auto pots = draw_potentials(q, tree, 31 + static_cast<uint64_t>(K));
            auto path = tree.path(3);
            for (int r = 1; r <= 3; ++r) {
                auto Gr = offdiag_green_on_ball(q, tree, pots, zz, r);
                auto D = dense_green(q, tree, pots, zz,
                                     {{0, path[static_cast<std::size_t>(r)]}});
                CHECK((Gr - D[0]).cwiseAbs().maxCoeff() <
                      1e-9 * (1.0 + D[0].cwiseAbs().maxCoeff()));
            }
        }
}

TEST_CASE("dense oracle properties") {
    auto p = validate_params(2, 2, diag2(-0.5, 0.5), 0.5,
                             {DisorderVariant::GOE, 0.8});
    auto tree = build_tree(2, 3, TreeKind::Ball);
    auto pots = draw_potentials(p, tree, 9);
    ComplexEnergy z{0.0, 1.0};
    auto path = tree.path(2);
    auto blocks = dense_green(p, tree, pots, z,
                              {{0, path[2]}, {path[2], static_cast<std::int64_t>(0)}});
    // block (x,y) is the transpose of block (y,x)
    CHECK((blocks[0] - blocks[1].transpose()).cwiseAbs().maxCoeff() < 1e-12);
    // norm bound ||G|| <= 1/eta
    for (const auto& B : blocks) CHECK(operator_norm(B) <= 1.0 / z.eta + 1e-12);
}

TEST_CASE("green_imaginary") {
    CMatrix G = cplx(0.0, 1.0) * CMatrix::Identity(2, 2);
    CHECK((green_imaginary(G) - RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
    CMatrix R = CMatrix::Identity(2, 2) * cplx(2.0, 0.0);
    CHECK(green_imaginary(R).cwiseAbs().maxCoeff() == 0.0);

    CMatrix bad(2, 2);
    bad << cplx(1, 0), cplx(2, 0), cplx(3, 0), cplx(4, 0);
    CHECK_THROWS_AS(green_imaginary(bad), validation_error);

    // positive definiteness of Im G for sampled diagonal blocks
    auto p = validate_params(2, 2, diag2(-0.5, 0.5), 0.4,
                             {DisorderVariant::DiagonalGaussianIID, 1.0});
    ComplexEnergy z{0.3, 0.2};
    for (uint64_t s = 0; s < 100; ++s) {
        auto G = full_green_diag_sample(p, z, 4, rng_key(42, s));
        RMatrix im = green_imaginary(G);
        Eigen::SelfAdjointEigenSolver<RMatrix> es(im);
        CHECK(es.eigenvalues()(0) > 0.0);
    }
}

TEST_CASE("sampled half-space reproducibility and dense consistency in law") {
    auto p = scalar_params(2, 0.5, DisorderVariant::DiagonalGaussianIID);
    ComplexEnergy z{0.1, 0.4};
    auto g1 = halfspace_green_sample(p, z, 6, rng_key(7, 0));
    auto g2 = halfspace_green_sample(p, z, 6, rng_key(7, 0));
    CHECK((g1 - g2).cwiseAbs().maxCoeff() == 0.0);
    auto g3 = halfspace_green_sample(p, z, 6, rng_key(7, 1));
    CHECK((g1 - g3).cwiseAbs().maxCoeff() > 0.0);
    CHECK(green_imaginary(g1)(0, 0) > 0.0);
}
