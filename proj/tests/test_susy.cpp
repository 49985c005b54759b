#include <cmath>

#include "bethe/errors.hpp"
#include "bethe/greens.hpp"
#include "bethe/identities.hpp"
#include "bethe/rng.hpp"
#include "bethe/susy.hpp"
#include "doctest.h"

using namespace bethe;

namespace {

CMatrix random_sym_b(int m, RngStream& rs) {
    CMatrix B(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            B(i, j) = cplx(rs.normal(), rs.normal());
            B(j, i) = B(i, j);
        }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(RMatrix(B.imag()));
    B += cplx(0.0, 1.0) * (std::max(0.0, -es.eigenvalues()(0)) + 1.0) *
         CMatrix::Identity(m, m);
    return B;
}

Eigen::VectorXcd random_vec(int m, RngStream& rs) {
    Eigen::VectorXcd v(m);
    for (int i = 0; i < m; ++i) v(i) = cplx(rs.normal(), rs.normal());
    return v;
}

}  // namespace

TEST_CASE("matrix_derivative closed form") {
    // empty pair: unchanged
    GaussianSF f{cplx(0.0, 2.0) * CMatrix::Identity(2, 2), cplx(1.0, 0.0)};
    auto g = matrix_derivative({0u}, {0u}, f);
    CHECK(g.c == f.c);

    // m=1 singleton: (i/4) b
    GaussianSF s{cplx(0.7, 1.1) * CMatrix::Identity(1, 1), 1.0};
    auto d = matrix_derivative({1u}, {1u}, s);
    CHECK(std::abs(d.c - cplx(0.0, 0.25) * cplx(0.7, 1.1)) < 1e-15);

    CHECK_THROWS_AS(matrix_derivative({1u}, {3u}, s), validation_error);
}

TEST_CASE("matrix_derivative vs central finite differences, m=2") {
    // f(M) = exp((i/4) Tr(B M)) on Sym(2); dtilde_{jk} f = (i/4) B_{jk} f and
    // D_{{1,2},{1,2}} f = det((i/4) B) f
    RngStream rs(rng_key(11));
    const CMatrix B = random_sym_b(2, rs);
    auto f = [&](const RMatrix& M) {
        return std::exp(cplx(0.0, 0.25) * (B.cast<cplx>() * M.cast<cplx>()).trace());
    };
    const double h = 1e-3;
    RMatrix M0(2, 2);
    M0 << 0.4, -0.1, -0.1, 0.9;

    auto dtilde = [&](int j, int k, const RMatrix& M) {
        RMatrix Mp = M, Mm = M;
        Mp(j, k) += h;
        Mp(k, j) = Mp(j, k);
        Mm(j, k) -= h;
        Mm(k, j) = Mm(j, k);
        cplx d = (f(Mp) - f(Mm)) / (2.0 * h);
        if (j != k) d *= 0.5;  // dtilde = (1/2) d for off-diagonal entries
        return d;
    };
    const cplx fv = f(M0);
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
            CHECK(std::abs(dtilde(j, k, M0) - cplx(0.0, 0.25) * B(j, k) * fv) < 1e-6);

    // nested FD for the 2x2 determinant operator
    auto dd12 = [&](const RMatrix& M) {
        // (dt11 dt22 - dt12 dt21) f via second differences
        auto bump = [&](const RMatrix& Mb, int j, int k, double s) {
            RMatrix R = Mb;
            R(j, k) += s;
            R(k, j) = R(j, k);
            return R;
        };
        cplx t11_22 = (f(bump(bump(M, 0, 0, h), 1, 1, h)) - f(bump(bump(M, 0, 0, h), 1, 1, -h)) -
                       f(bump(bump(M, 0, 0, -h), 1, 1, h)) + f(bump(bump(M, 0, 0, -h), 1, 1, -h))) /
                      (4.0 * h * h);
        cplx t12_21 = (f(bump(M, 0, 1, 2.0 * h)) - 2.0 * f(M) + f(bump(M, 0, 1, -2.0 * h))) /
                      (4.0 * h * h) * 0.25;
        return t11_22 - t12_21;
    };
    const cplx want = gaussian_minor_product(B, {0b11u}, {0b11u}) * fv;
    CHECK(std::abs(dd12(M0) - want) < 1e-6);
}

TEST_CASE("T rule quadrature gate, m=n=1") {
    std::string note;
    CHECK(t_quadrature_check_m1(cplx(0.0, 1.0), 1e-10, &note));
    CHECK(t_quadrature_check_m1(cplx(0.7, 1.3), 1e-10, &note));
}

TEST_CASE("T fixed point and involution") {
    GaussianSF f{cplx(0.0, 2.0) * CMatrix::Identity(1, 1), 1.0};
    auto Tf = T_gaussian(f);
    CHECK(std::abs(Tf.B(0, 0) - cplx(0.0, 2.0)) < 1e-15);  // -4/(2i) = 2i

    RngStream rs(rng_key(21));
    for (int t = 0; t < 50; ++t) {
        const int m = 1 + static_cast<int>(rs.next_u64() % 3);
        CMatrix B = random_sym_b(m, rs);
        auto g = T_gaussian(T_gaussian({B, cplx(0.3, 0.1)}));
        CHECK((g.B - B).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + B.cwiseAbs().maxCoeff()));
    }
    CMatrix notint = cplx(0.0, -1.0) * CMatrix::Identity(1, 1);
    CHECK_THROWS_AS(T_gaussian({notint, 1.0}), validation_error);
}

TEST_CASE("bbT scalar value, involution, compositional consistency") {
    // m=1, B=2i, v=1: (i/2)(-4/(2i)) v = (i/2)(2i) = -1
    VectorGaussianSF f{cplx(0.0, 2.0) * CMatrix::Identity(1, 1), Eigen::VectorXcd::Ones(1)};
    auto g = bbT_gaussian(f);
    CHECK(std::abs(g.v(0) - cplx(-1.0, 0.0)) < 1e-15);

    RngStream rs(rng_key(22));
    for (int t = 0; t < 50; ++t) {
        const int m = 1 + static_cast<int>(rs.next_u64() % 3);
        VectorGaussianSF h{random_sym_b(m, rs), random_vec(m, rs)};
        auto hh = bbT_gaussian(bbT_gaussian(h));
        CHECK((hh.v - h.v).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + h.v.cwiseAbs().maxCoeff()));
    }

    // 2 dpartial (T f) via matrix_derivative singletons equals bbT
    RngStream rs2(rng_key(23));
    const int m = 2;
    VectorGaussianSF h{random_sym_b(m, rs2), random_vec(m, rs2)};
    auto Th_B = -4.0 * h.B.inverse();
    auto bb = bbT_gaussian(h);
    for (int j = 0; j < m; ++j) {
        cplx acc = 0.0;
        for (int k = 0; k < m; ++k) {
            // dtilde_{jk} on the Gaussian brings down (i/4) Bhat_{jk}
            acc += 2.0 * cplx(0.0, 0.25) * Th_B(j, k) * h.v(k);
        }
        CHECK(std::abs(acc - bb.v(j)) < 1e-13);
    }
}

TEST_CASE("super-Taylor expansion on Gaussians") {
    RngStream rs(rng_key(31));
    // m=1, n=1 explicit one-step expansion
    CHECK(super_taylor_check(1, 1, random_sym_b(1, rs), 1e-12));
    CHECK(super_taylor_check(2, 1, random_sym_b(2, rs), 1e-12));
    CHECK(super_taylor_check(2, 2, random_sym_b(2, rs), 1e-12));
}

TEST_CASE("vector expansion coefficients") {
    RngStream rs(rng_key(32));
    CHECK(vexp_coefficient_check(1, 1, random_sym_b(1, rs), random_vec(1, rs), 1e-9));
    CHECK(vexp_coefficient_check(2, 1, random_sym_b(2, rs), random_vec(2, rs), 1e-9));
    CHECK(vexp_coefficient_check(2, 2, random_sym_b(2, rs), random_vec(2, rs), 1e-9));
}

TEST_CASE("theorem DT on the Gaussian family") {
    RngStream rs(rng_key(33));
    CHECK(bbT_pairing_check(1, 1, cplx(0.0, 2.0) * CMatrix::Identity(1, 1),
                     Eigen::VectorXcd::Ones(1), 1e-9));
    CHECK(bbT_pairing_check(1, 1, random_sym_b(1, rs), random_vec(1, rs), 1e-9));
    CHECK(bbT_pairing_check(2, 1, random_sym_b(2, rs), random_vec(2, rs), 1e-9));
}

TEST_CASE("Leibniz rule on products of Gaussians") {
    RngStream rs(rng_key(34));
    CHECK(leibniz_product_check(1, random_sym_b(1, rs), random_sym_b(1, rs), 1e-12));
    CHECK(leibniz_product_check(2, random_sym_b(2, rs), random_sym_b(2, rs), 1e-12));
}

TEST_CASE("lambda0 fixed point: values and cross-module agreement") {
    auto p = validate_params(4, 1, RMatrix::Zero(1, 1), 0.0, {});
    auto B = susy_lambda0_fixed_point(p, ComplexEnergy{0.0, 1e-8});
    CHECK(std::abs(B(0, 0) - cplx(0.0, 1.0)) < 1e-6);  // band limit at A=0, E=0 is i

    // residual of the defining equation
    const CMatrix shift =
        4.0 * (ComplexEnergy{0.0, 1e-8}.z() * CMatrix::Identity(1, 1) - p.A.cast<cplx>());
    const CMatrix res = B + 4.0 * (static_cast<double>(p.K) * B + shift).inverse();
    CHECK(res.cwiseAbs().maxCoeff() < 1e-12);

    for (int K : {2, 4})
        for (int m : {1, 2}) {
            RMatrix A = RMatrix::Zero(m, m);
            if (m == 2) {
                A(0, 0) = -0.5;
                A(1, 1) = 0.5;
            }
            auto q = validate_params(K, m, A, 0.0, {});
            auto iv = spectral_interval(q);
            for (double frac : {0.25, 0.5, 0.75}) {
                const double E = iv->first + frac * (iv->second - iv->first);
                ComplexEnergy z{E, 1e-8};
                auto b1 = susy_lambda0_fixed_point(q, z);
                auto b2 = halfspace_green_fixedpoint(q, z);
                auto b3 = halfspace_green_band_limit(q, E);
                CHECK((b1 - b2).cwiseAbs().maxCoeff() < 1e-10);
                CHECK((b1 - b3).cwiseAbs().maxCoeff() < 1e-6);
            }
        }
}

TEST_CASE("closed-form bilinears") {
    auto p = validate_params(2, 1, RMatrix::Zero(1, 1), 0.0, {});
    auto b = closed_form_bilinears(p, 0.0);
    CHECK(b.xi_xi == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
    CHECK(b.xi_theta == doctest::Approx(8.0 * std::sqrt(2.0) / 9.0).epsilon(1e-12));
    CHECK(b.theta_theta == doctest::Approx(16.0 / 9.0).epsilon(1e-12));
    CHECK(b.theta_factor(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // m=2 decouples into scalar channels
    RMatrix A = RMatrix::Zero(2, 2);
    A(0, 0) = -0.5;
    A(1, 1) = 0.5;
    auto q = validate_params(4, 2, A, 0.0, {});
    auto b2 = closed_form_bilinears(q, 0.0);
    auto s1 = validate_params(4, 1, RMatrix::Constant(1, 1, -0.5), 0.0, {});
    auto s2 = validate_params(4, 1, RMatrix::Constant(1, 1, 0.5), 0.0, {});
    auto c1 = closed_form_bilinears(s1, 0.0);
    auto c2 = closed_form_bilinears(s2, 0.0);
    CHECK(b2.xi_xi == doctest::Approx(c1.xi_xi + c2.xi_xi).epsilon(1e-12));
    CHECK(b2.xi_theta == doctest::Approx(c1.xi_theta + c2.xi_theta).epsilon(1e-12));
    CHECK(b2.theta_theta == doctest::Approx(c1.theta_theta + c2.theta_theta).epsilon(1e-12));

    // strictly positive across the open interval
    auto iv = spectral_interval(p);
    for (double frac : {0.02, 0.2, 0.5, 0.8, 0.98}) {
        const double E = iv->first + frac * (iv->second - iv->first);
        auto v = closed_form_bilinears(p, E);
        CHECK(v.xi_xi > 0.0);
        CHECK(v.xi_theta > 0.0);
        CHECK(v.theta_theta > 0.0);
    }
    CHECK_THROWS_AS(closed_form_bilinears(p, 5.0), validation_error);
}

TEST_CASE("pair family: xi/theta construction and transform") {
    auto p = validate_params(2, 1, RMatrix::Zero(1, 1), 0.0, {});
    ComplexEnergy z{0.3, 1e-7};

    // theta differs from xi by the Im-part prefactor, which approaches the
    // closed-form factor as eta -> 0
    auto xi = xi_pair_lambda0(p, z);
    auto th = theta_pair_lambda0(p, z);
    CHECK((xi.Bplus - th.Bplus).cwiseAbs().maxCoeff() == 0.0);
    CHECK((xi.P - CMatrix::Identity(1, 1)).cwiseAbs().maxCoeff() == 0.0);
    auto cf = closed_form_bilinears(p, z.E);
    CHECK(th.P(0, 0).real() ==
          doctest::Approx(cf.theta_factor(0, 0)).epsilon(1e-5));
    CHECK((xi.Bminus - xi.Bplus.conjugate()).cwiseAbs().maxCoeff() == 0.0);

    // the pair transform is an involution and keeps the prefactor
    auto tt = pair_transform(pair_transform(th));
    CHECK((tt.Bplus - th.Bplus).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((tt.Bminus - th.Bminus).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((tt.P - th.P).cwiseAbs().maxCoeff() == 0.0);

    // products add parameters; xi^K picks up K times the parameter
    auto x2 = pair_product(xi, xi);
    CHECK((x2.Bplus - 2.0 * xi.Bplus).cwiseAbs().maxCoeff() < 1e-14);
    auto gp = gaussian_product(GaussianSF{xi.Bplus, 2.0}, GaussianSF{xi.Bplus, 3.0});
    CHECK(std::abs(gp.c - cplx(6.0, 0.0)) < 1e-15);
}

TEST_CASE("verify_suite fast level all green") {
    auto results = verify_suite(false, 4242);
    for (const auto& r : results) {
        INFO(r.name << " " << r.params << " " << r.detail);
        CHECK(r.pass);
    }
}
