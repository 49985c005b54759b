#include "bethe/susy.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "bethe/errors.hpp"
#include "bethe/grassmann.hpp"
#include "bethe/greens.hpp"

namespace bethe {

using grassmann::Element;
using grassmann::Gen;
using grassmann::Universe;
using GElem = Element<cplx>;

RMatrix im_part(const CMatrix& B) { return B.imag(); }

bool im_positive_definite(const CMatrix& B) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(im_part(B));
    return es.eigenvalues()(0) > 0.0;
}

namespace {

std::vector<int> subset_elems(unsigned s) {
    std::vector<int> e;
    for (int k = 1; k <= 16; ++k)
        if (s & (1u << (k - 1))) e.push_back(k);
    return e;
}

cplx submatrix_det(const CMatrix& M, unsigned rows, unsigned cols) {
    const auto r = subset_elems(rows), c = subset_elems(cols);
    if (r.size() != c.size()) throw validation_error("minor needs |rows| = |cols|");
    const int d = static_cast<int>(r.size());
    if (d == 0) return {1.0, 0.0};
    CMatrix S(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            S(i, j) = M(r[static_cast<std::size_t>(i)] - 1, c[static_cast<std::size_t>(j)] - 1);
    return S.determinant();
}

// (i/4) Tr(B Psi^{o2}) as an exact element of the algebra
GElem quad_form_element(const Universe* u, std::uint8_t tag, const CMatrix& B, int m, int n) {
    GElem x(u);
    for (int l = 1; l <= n; ++l)
        for (int j = 1; j <= m; ++j)
            for (int k = 1; k <= m; ++k) {
                const cplx w = cplx(0.0, 0.25) * B(j - 1, k - 1) * 0.5;
                if (w == cplx(0.0, 0.0)) continue;
                GElem t1 = GElem::generator(u, {tag, true, j, l}) *
                           GElem::generator(u, {tag, false, k, l});
                GElem t2 = GElem::generator(u, {tag, true, k, l}) *
                           GElem::generator(u, {tag, false, j, l});
                x = x + w * (t1 + t2);
            }
    return x;
}

// Grassmann part of e^{s * i Phi.Phi'}, s = +1/-1 (tags: unprimed, primed)
GElem pairing_element(const Universe* u, std::uint8_t tag, std::uint8_t tagp, double s, int m,
                      int n) {
    GElem p = GElem::one(u);
    const cplx half_i(0.0, 0.5 * s);
    for (int k = 1; k <= m; ++k)
        for (int l = 1; l <= n; ++l) {
            GElem f1 = GElem::one(u) + half_i * (GElem::generator(u, {tag, true, k, l}) *
                                                 GElem::generator(u, {tagp, false, k, l}));
            GElem f2 = GElem::one(u) + half_i * (GElem::generator(u, {tagp, true, k, l}) *
                                                 GElem::generator(u, {tag, false, k, l}));
            p = p * f1 * f2;
        }
    return p;
}

// coefficient of Psi_{abar,a} (tag) in e: the monomial is a single signed
// term, so divide out its sign
cplx coeff_of_monomial(const GElem& e, const Universe* u, std::uint8_t tag,
                       const SubsetTuple& abar, const SubsetTuple& a) {
    GElem mono = grassmann::monomial_tuple<cplx>(u, tag, abar, a);
    if (mono.terms().size() != 1) throw numerical_error("degenerate monomial");
    const auto& [mask, sign] = *mono.terms().begin();
    return e.coefficient(mask) / sign;
}

std::vector<SubsetTuple> all_subset_tuples(int m, int n) {
    const unsigned top = 1u << m;
    std::vector<SubsetTuple> out;
    SubsetTuple cur(static_cast<std::size_t>(n), 0u);
    std::function<void(int)> rec = [&](int l) {
        if (l == n) {
            out.push_back(cur);
            return;
        }
        for (unsigned s = 0; s < top; ++s) {
            cur[static_cast<std::size_t>(l)] = s;
            rec(l + 1);
        }
    };
    rec(0);
    return out;
}

// all (abar, a) with |abar_1| = |a_1| + k and |abar_l| = |a_l| otherwise
std::vector<std::pair<SubsetTuple, SubsetTuple>> all_pnk(int m, int n, int k) {
    std::vector<std::pair<SubsetTuple, SubsetTuple>> out;
    const auto tuples = all_subset_tuples(m, n);
    for (const auto& abar : tuples)
        for (const auto& a : tuples) {
            bool ok = grassmann::popcnt(abar[0]) == grassmann::popcnt(a[0]) + k;
            for (int l = 1; ok && l < n; ++l)
                ok = grassmann::popcnt(abar[static_cast<std::size_t>(l)]) ==
                     grassmann::popcnt(a[static_cast<std::size_t>(l)]);
            if (ok) out.emplace_back(abar, a);
        }
    return out;
}

SubsetTuple drop_first_replica_elem(const SubsetTuple& t, int k) {
    SubsetTuple r = t;
    r[0] &= ~(1u << (k - 1));
    return r;
}

// DD coefficient sgn(a) sum_k (-1)^{k-1} minors(B; abar - [[abar_1k]], a) v_{abar_1k}
cplx dd_coefficient(const CMatrix& B, const Eigen::VectorXcd& v, const SubsetTuple& abar,
                    const SubsetTuple& a) {
    const auto bar1 = subset_elems(abar[0]);
    cplx acc = 0.0;
    double alt = 1.0;
    for (std::size_t k = 0; k < bar1.size(); ++k) {
        const SubsetTuple redbar = drop_first_replica_elem(abar, bar1[k]);
        acc += alt * gaussian_minor_product(B, redbar, a) * v(bar1[k] - 1);
        alt = -alt;
    }
    return static_cast<double>(grassmann::sgn_tuple(a)) * acc;
}

cplx det_power_inv(const CMatrix& M, int n) {
    const cplx d = M.determinant();
    cplx r = 1.0;
    for (int i = 0; i < n; ++i) r /= d;
    return r;
}

}  // namespace

cplx gaussian_minor_product(const CMatrix& B, const SubsetTuple& abar, const SubsetTuple& a) {
    const CMatrix Bp = cplx(0.0, 0.25) * B;
    cplx prod = 1.0;
    for (std::size_t l = 0; l < a.size(); ++l) prod *= submatrix_det(Bp, abar[l], a[l]);
    return prod;
}

GaussianSF matrix_derivative(const SubsetTuple& abar, const SubsetTuple& a,
                             const GaussianSF& f) {
    const int m = static_cast<int>(f.B.rows());
    for (std::size_t l = 0; l < a.size(); ++l) {
        if ((abar[l] | a[l]) >= (1u << m)) throw validation_error("invalid-index");
        if (grassmann::popcnt(abar[l]) != grassmann::popcnt(a[l]))
            throw validation_error("matrix_derivative needs (abar,a) in P^n");
    }
    return {f.B, f.c * gaussian_minor_product(f.B, abar, a)};
}

GaussianSF T_gaussian(const GaussianSF& f) {
    if (!im_positive_definite(f.B)) throw validation_error("not-integrable: Im B must be > 0");
    return {-4.0 * f.B.inverse(), f.c};
}

VectorGaussianSF bbT_gaussian(const VectorGaussianSF& f) {
    if (!im_positive_definite(f.B)) throw validation_error("not-integrable: Im B must be > 0");
    const CMatrix Bhat = -4.0 * f.B.inverse();
    return {Bhat, cplx(0.0, 0.5) * (Bhat * f.v)};
}

bool t_quadrature_check_m1(cplx b, double tol, std::string* note) {
    // fermionic factor, exact: integrate out (psibar, psi) from
    // e^{i Phi'.Phi} (1 + (i/4) b psibar psi)
    Universe u = Universe::join(Universe::supermatrix(0, 1, 1), Universe::supermatrix(1, 1, 1));
    GElem integrand = pairing_element(&u, 0, 1, +1.0, 1, 1) *
                      (GElem::one(&u) + cplx(0.0, 0.25) * b *
                                            (GElem::generator(&u, {0, true, 1, 1}) *
                                             GElem::generator(&u, {0, false, 1, 1})));
    GElem gamma = grassmann::berezin_all(integrand, 0, 1, 1);
    const cplx g0 = coeff_of_monomial(gamma, &u, 1, {0u}, {0u});
    const cplx g1 = coeff_of_monomial(gamma, &u, 1, {1u}, {1u});

    // bosonic factor by 2D composite Gauss-Legendre quadrature
    const double imb = b.imag();
    if (imb <= 0.0) throw validation_error("not-integrable");
    const double L = std::sqrt(4.0 * 130.0 / imb);
    const int panels = 160, gl = 8;
    static const double gx[8] = {-0.9602898564975363, -0.7966664774136267,
                                 -0.5255324099163290, -0.1834346424956498,
                                 0.1834346424956498,  0.5255324099163290,
                                 0.7966664774136267,  0.9602898564975363};
    static const double gw[8] = {0.1012285362903763, 0.2223810344533745,
                                 0.3137066458778873, 0.3626837833783620,
                                 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    std::vector<double> nodes, weights;
    const double h = 2.0 * L / panels;
    for (int pnl = 0; pnl < panels; ++pnl) {
        const double a0 = -L + pnl * h;
        for (int q = 0; q < gl; ++q) {
            nodes.push_back(a0 + 0.5 * h * (gx[q] + 1.0));
            weights.push_back(0.5 * h * gw[q]);
        }
    }
    auto line = [&](double pp) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double x = nodes[i];
            acc += weights[i] *
                   std::exp(cplx(0.0, 1.0) * (pp * x) + cplx(0.0, 0.25) * b * (x * x));
        }
        return acc;
    };
    // the 2D integral factorizes over the two components of phi
    auto bos = [&](double p1, double p2) {
        return line(p1) * line(p2) / 3.14159265358979323846;
    };

    const cplx bhat = -4.0 / b;
    double worst = 0.0;
    for (auto [p1, p2] : {std::pair{0.3, -0.2}, std::pair{1.1, 0.7}}) {
        const cplx N = bos(p1, p2);
        const cplx gauss = std::exp(cplx(0.0, 0.25) * bhat * (p1 * p1 + p2 * p2));
        worst = std::max(worst, std::abs(g0 * N - gauss));
        worst = std::max(worst, std::abs(g1 * N - cplx(0.0, 0.25) * bhat * gauss));
    }
    if (note) {
        std::ostringstream os;
        os << "max deviation " << worst;
        *note = os.str();
    }
    return worst < tol;
}

bool super_taylor_check(int m, int n, const CMatrix& B, double tol, std::string* note) {
    Universe u = Universe::supermatrix(0, m, n);
    GElem lhs = grassmann::exp_nilpotent(quad_form_element(&u, 0, B, m, n));
    GElem rhs(&u);
    for (const auto& [abar, a] : all_pnk(m, n, 0)) {
        const cplx coeff = gaussian_minor_product(B, abar, a) *
                           static_cast<double>(grassmann::sgn_tuple(a));
        rhs = rhs + coeff * grassmann::monomial_tuple<cplx>(&u, 0, abar, a);
    }
    double worst = 0.0;
    GElem diff = lhs - rhs;
    for (const auto& [mask, c] : diff.terms()) worst = std::max(worst, std::abs(c));
    if (note) *note = "max coefficient deviation " + std::to_string(worst);
    return worst < tol;
}

bool vexp_coefficient_check(int m, int n, const CMatrix& B, const Eigen::VectorXcd& v,
                            double tol, std::string* note) {
    Universe u = Universe::supermatrix(0, m, n);
    GElem expo = grassmann::exp_nilpotent(quad_form_element(&u, 0, B, m, n));
    GElem psibar_f(&u), psi_f(&u);
    for (int k = 1; k <= m; ++k) {
        psibar_f = psibar_f + v(k - 1) * GElem::generator(&u, {0, true, k, 1});
        psi_f = psi_f + v(k - 1) * GElem::generator(&u, {0, false, k, 1});
    }
    psibar_f = psibar_f * expo;
    psi_f = psi_f * expo;

    double worst = 0.0;
    // Psibar . f  over P^n_1
    for (const auto& [abar, a] : all_pnk(m, n, 1)) {
        const cplx got = coeff_of_monomial(psibar_f, &u, 0, abar, a);
        const cplx want = dd_coefficient(B, v, abar, a);
        worst = std::max(worst, std::abs(got - want));
    }
    // Psi . f  over P^n_{-1}, coefficient (-1)^{|abar_1|} DD_{a,abar}
    for (const auto& [abar, a] : all_pnk(m, n, -1)) {
        const cplx got = coeff_of_monomial(psi_f, &u, 0, abar, a);
        cplx want = dd_coefficient(B, v, a, abar);
        if (grassmann::popcnt(abar[0]) & 1) want = -want;
        worst = std::max(worst, std::abs(got - want));
    }
    if (note) *note = "max coefficient deviation " + std::to_string(worst);
    return worst < tol;
}

bool bbT_pairing_check(int m, int n, const CMatrix& B, const Eigen::VectorXcd& v, double tol,
                std::string* note) {
    const VectorGaussianSF Tf = bbT_gaussian({B, v});

    Universe u = Universe::join(Universe::supermatrix(0, m, n), Universe::supermatrix(1, m, n));
    GElem expo = grassmann::exp_nilpotent(quad_form_element(&u, 0, B, m, n));
    const cplx bos = std::pow(2.0, m * n) * det_power_inv(CMatrix(cplx(0.0, -0.5) * B), n);

    double worst = 0.0;
    for (double s : {+1.0, -1.0}) {
        const cplx pref = cplx(0.0, s);  // +i with e^{+i Phi.Phi'}, -i with e^{-...}
        GElem pair = pairing_element(&u, 0, 1, s, m, n);
        // Psibar variant
        GElem fbar(&u);
        for (int k = 1; k <= m; ++k)
            fbar = fbar + v(k - 1) * GElem::generator(&u, {0, true, k, 1});
        GElem rhs_bar = grassmann::berezin_all(pair * (fbar * expo), 0, m, n);
        for (const auto& [abar, a] : all_pnk(m, n, 1)) {
            const cplx lhs = dd_coefficient(Tf.B, Tf.v, abar, a);
            const cplx rhs = pref * bos * coeff_of_monomial(rhs_bar, &u, 1, abar, a);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        // Psi variant
        GElem fvec(&u);
        for (int k = 1; k <= m; ++k)
            fvec = fvec + v(k - 1) * GElem::generator(&u, {0, false, k, 1});
        GElem rhs_psi = grassmann::berezin_all(pair * (fvec * expo), 0, m, n);
        for (const auto& [abar, a] : all_pnk(m, n, -1)) {
            cplx lhs = dd_coefficient(Tf.B, Tf.v, a, abar);
            if (grassmann::popcnt(abar[0]) & 1) lhs = -lhs;
            const cplx rhs = pref * bos * coeff_of_monomial(rhs_psi, &u, 1, abar, a);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    if (note) *note = "max coefficient deviation " + std::to_string(worst);
    return worst < tol;
}

bool leibniz_product_check(int m, const CMatrix& Bf, const CMatrix& Bg, double tol,
                           std::string* note) {
    using GR = GaussianRational;
    const int n = 1;
    Universe u = Universe::supermatrix(0, m, n);
    double worst = 0.0;
    for (const auto& [abar, a] : all_pnk(m, n, 0)) {
        const cplx lhs = gaussian_minor_product(Bf + Bg, abar, a);
        cplx rhs = 0.0;
        for (const auto& [bbar, bb] : all_pnk(m, n, 0)) {
            bool sub = true;
            SubsetTuple bbarp(1), bp(1);
            for (int l = 0; l < n; ++l) {
                const auto lu = static_cast<std::size_t>(l);
                if ((bbar[lu] & ~abar[lu]) || (bb[lu] & ~a[lu])) {
                    sub = false;
                    break;
                }
                bbarp[lu] = abar[lu] & ~bbar[lu];
                bp[lu] = a[lu] & ~bb[lu];
            }
            if (!sub) continue;
            if (grassmann::popcnt(bbarp[0]) != grassmann::popcnt(bp[0])) continue;
            auto mono1 = grassmann::monomial_tuple<GR>(&u, 0, bbar, bb);
            auto mono2 = grassmann::monomial_tuple<GR>(&u, 0, bbarp, bp);
            auto mono12 = grassmann::monomial_tuple<GR>(&u, 0, abar, a);
            auto prod = mono1 * mono2;
            if (prod.is_zero()) continue;
            const auto& [mask12, sign12] = *mono12.terms().begin();
            const GR ratio = prod.coefficient(mask12) * sign12;  // sign12^2 = 1
            const double sgn4 = ratio.value().real();
            const double sgns = grassmann::sgn_tuple(bb) * grassmann::sgn_tuple(bp) *
                                grassmann::sgn_tuple(a) / sgn4;
            rhs += sgns * gaussian_minor_product(Bg, bbar, bb) *
                   gaussian_minor_product(Bf, bbarp, bp);
        }
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    if (note) *note = "max deviation " + std::to_string(worst);
    return worst < tol;
}

PairGaussianSF xi_pair_lambda0(const ModelParams& p, ComplexEnergy z) {
    const CMatrix g = halfspace_green_fixedpoint(p, z);
    return {g, g.conjugate(), CMatrix::Identity(p.m, p.m)};
}

PairGaussianSF theta_pair_lambda0(const ModelParams& p, ComplexEnergy z) {
    const CMatrix g = halfspace_green_fixedpoint(p, z);
    // -2(dpartial_+ + dpartial_-) brings down -(i/2)(Bplus - Bminus) = Im g
    return {g, g.conjugate(), g.imag().cast<cplx>()};
}

PairGaussianSF pair_transform(const PairGaussianSF& f) {
    if (!im_positive_definite(f.Bplus) || !im_positive_definite(CMatrix(-f.Bminus)))
        throw validation_error("not-integrable: effective Im parts must be > 0");
    return {-4.0 * f.Bplus.inverse(), -4.0 * f.Bminus.inverse(), f.P};
}

PairGaussianSF pair_product(const PairGaussianSF& f, const PairGaussianSF& g) {
    return {f.Bplus + g.Bplus, f.Bminus + g.Bminus, f.P * g.P};
}

CMatrix susy_lambda0_fixed_point(const ModelParams& p, ComplexEnergy z) {
    if (!p.deterministic())
        throw validation_error("susy_lambda0_fixed_point requires lambda = 0");
    const int m = p.m;
    const CMatrix shift = 4.0 * (z.z() * CMatrix::Identity(m, m) - p.A.cast<cplx>());
    const double K = static_cast<double>(p.K);
    auto F = [&](const CMatrix& Bc) -> CMatrix { return -4.0 * (K * Bc + shift).inverse(); };

    CMatrix Bc;
    if (z.eta > 0.0) {
        Bc = (p.A.cast<cplx>() - z.z() * CMatrix::Identity(m, m)).inverse();
    } else {
        const auto iv = spectral_interval(p);
        if (!iv || z.E <= iv->first || z.E >= iv->second)
            throw validation_error("unsupported-energy: eta = 0 needs E inside I_{A,K}");
        Bc = halfspace_green_band_limit(p, z.E);
    }
    double prev = -1.0;
    bool damp = false;
    for (int it = 0; it < 100000; ++it) {
        CMatrix next = F(Bc);
        if (damp) next = 0.5 * (Bc + next);
        const double err = (next - Bc).cwiseAbs().maxCoeff();
        Bc = next;
        if (err < 1e-13) return Bc;
        if (!damp && prev >= 0.0 && err > 0.95 * prev) damp = true;
        prev = err;
    }
    throw numerical_error("fixed-point-diverged");
}

Lambda0Bilinears closed_form_bilinears(const ModelParams& p, double E) {
    const double K = static_cast<double>(p.K);
    Lambda0Bilinears out;
    Eigen::VectorXd tf(p.m);
    for (int i = 0; i < p.m; ++i) {
        const double ui = E - p.a_eigs(i);
        const double s2 = K - ui * ui;
        if (s2 <= 0.0) throw validation_error("unsupported-energy: E outside I_{A,K}");
        const double den = (K + 1.0) * (K + 1.0) - 4.0 * ui * ui;
        out.xi_xi += 4.0 * K / den;
        out.xi_theta += 8.0 * std::sqrt(s2) / den;
        out.theta_theta += 16.0 * s2 / (K * den);
        tf(i) = 2.0 * std::sqrt(s2) / K;
    }
    out.theta_factor = p.a_vecs * tf.asDiagonal() * p.a_vecs.transpose();
    return out;
}

}  // namespace bethe
