#include "bethe/identities.hpp"

#include <functional>
#include <sstream>

#include "bethe/errors.hpp"
#include "bethe/grassmann.hpp"
#include "bethe/greens.hpp"
#include "bethe/poly.hpp"
#include "bethe/rng.hpp"

namespace bethe {

namespace gr = grassmann;
using gr::Universe;
using GRat = GaussianRational;
using RElem = gr::Element<GRat>;

namespace {

std::vector<int> subset_elems(unsigned s) {
    std::vector<int> e;
    for (int k = 1; k <= 16; ++k)
        if (s & (1u << (k - 1))) e.push_back(k);
    return e;
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

std::vector<std::pair<SubsetTuple, SubsetTuple>> all_pn(int m, int n) {
    std::vector<std::pair<SubsetTuple, SubsetTuple>> out;
    const auto ts = all_subset_tuples(m, n);
    for (const auto& abar : ts)
        for (const auto& a : ts) {
            bool ok = true;
            for (int l = 0; ok && l < n; ++l)
                ok = gr::popcnt(abar[static_cast<std::size_t>(l)]) ==
                     gr::popcnt(a[static_cast<std::size_t>(l)]);
            if (ok) out.emplace_back(abar, a);
        }
    return out;
}

std::string tuple_str(const SubsetTuple& abar, const SubsetTuple& a) {
    std::ostringstream os;
    os << "abar=(";
    for (unsigned s : abar) os << s << ",";
    os << ") a=(";
    for (unsigned s : a) os << s << ",";
    os << ")";
    return os.str();
}

int extract_pm1(const GRat& c, const char* what) {
    if (c == GRat(1)) return 1;
    if (c == GRat(-1)) return -1;
    throw numerical_error(std::string(what) + ": expected a unit coefficient");
}

}  // namespace

int sgn4_engine(int m, int n, const SubsetTuple& abar, const SubsetTuple& a,
                const SubsetTuple& bbar, const SubsetTuple& b) {
    if (!gr::addable(abar, bbar) || !gr::addable(a, b))
        throw validation_error("not-addable");
    Universe u = Universe::supermatrix(0, m, n);
    RElem p = gr::monomial_tuple<GRat>(&u, 0, abar, a) * gr::monomial_tuple<GRat>(&u, 0, bbar, b);
    RElem target =
        gr::monomial_tuple<GRat>(&u, 0, gr::tuple_union(abar, bbar), gr::tuple_union(a, b));
    const auto& [mask, sgn] = *target.terms().begin();
    return extract_pm1(p.coefficient(mask) * sgn, "sgn4");
}

int sgn2_berezin(int m, int n, const SubsetTuple& abar, const SubsetTuple& a) {
    Universe u = Universe::supermatrix(0, m, n);
    const SubsetTuple abarc = gr::tuple_complement(abar, m);
    const SubsetTuple ac = gr::tuple_complement(a, m);
    RElem prod = gr::monomial_tuple<GRat>(&u, 0, abar, a) * gr::monomial_tuple<GRat>(&u, 0, abarc, ac);
    const long long s = gr::sgn_tuple(a) * gr::sgn_tuple(ac);
    RElem full = GRat(s) * prod;
    RElem integ = gr::berezin_all(full, 0, m, n);
    return extract_pm1(integ.coefficient(0), "sgn2_berezin");
}

int sgn2_closed(int m, int n, const SubsetTuple& abar, const SubsetTuple& a,
                const std::function<int(const SubsetTuple&)>& sgn_fn) {
    auto sg = sgn_fn ? sgn_fn : [](const SubsetTuple& t) { return gr::sgn_tuple(t); };
    const SubsetTuple abarc = gr::tuple_complement(abar, m);
    const SubsetTuple ac = gr::tuple_complement(a, m);
    const SubsetTuple I(static_cast<std::size_t>(n), (1u << m) - 1u);
    const int s4 = sgn4_engine(m, n, abar, a, abarc, ac);
    int v = sg(a) * sg(ac) * sg(I) * s4;  // s4 = 1/s4
    if ((m * n) & 1) v = -v;
    return v;
}

IdentityResult check_berezin_convention() {
    IdentityResult r{"berezin_convention", "m=1,n=1", false, ""};
    Universe u = Universe::supermatrix(0, 1, 1);
    RElem psibar_psi = gr::monomial<GRat>(&u, 0, 1u, 1u, 1);
    RElem one = RElem::one(&u);
    RElem i1 = gr::berezin(psibar_psi, 0, 1, 1);
    RElem i2 = gr::berezin(one, 0, 1, 1);
    const bool ok1 = i1.coefficient(0) == GRat(-1);  // int psibar psi = -1
    const bool ok2 = i2.is_zero();                   // int 1 = 0
    // int psi psibar = +1 by anticommutation
    RElem psi_psibar = RElem::generator(&u, {0, false, 1, 1}) *
                       RElem::generator(&u, {0, true, 1, 1});
    const bool ok3 = gr::berezin(psi_psibar, 0, 1, 1).coefficient(0) == GRat(1);
    r.pass = ok1 && ok2 && ok3;
    if (!r.pass) r.detail = "basic Berezin values wrong";
    return r;
}

IdentityResult check_top_integral(int m, int n) {
    IdentityResult r{"top_integral", "m=" + std::to_string(m) + ",n=" + std::to_string(n),
                     false, ""};
    Universe u = Universe::supermatrix(0, m, n);
    const SubsetTuple I(static_cast<std::size_t>(n), (1u << m) - 1u);
    RElem top = gr::monomial_tuple<GRat>(&u, 0, I, I);
    RElem integ = gr::berezin_all(top, 0, m, n);
    int want = gr::sgn_tuple(I);
    if ((m * n) & 1) want = -want;
    r.pass = integ.coefficient(0) == GRat(want) && integ.terms().size() == 1;
    if (!r.pass) r.detail = "int Psi_II DPsi != (-1)^{mn} sgn(I)";
    return r;
}

IdentityResult check_monomial_relation(int m) {
    IdentityResult r{"monomial_relation", "m=" + std::to_string(m), true, ""};
    Universe u = Universe::supermatrix(0, m, 2);
    for (int l = 1; l <= 2 && r.pass; ++l)
        for (unsigned abar = 0; abar < (1u << m) && r.pass; ++abar)
            for (unsigned a = 0; a < (1u << m); ++a) {
                if (gr::popcnt(abar) != gr::popcnt(a)) continue;
                RElem lhs = gr::monomial<GRat>(&u, 0, abar, a, l);
                const int c = gr::popcnt(a);
                const long long s = ((c * (c - 1) / 2) & 1) ? -1 : 1;
                RElem rhs = GRat(s) * gr::monomial_paired<GRat>(&u, 0, abar, a, l);
                if (!(lhs - rhs).is_zero()) {
                    r.pass = false;
                    r.detail = "l=" + std::to_string(l) + " " + tuple_str({abar}, {a});
                    break;
                }
            }
    return r;
}

IdentityResult check_sgn_singletons(int m, int n) {
    IdentityResult r{"sgn_singletons", "m=" + std::to_string(m) + ",n=" + std::to_string(n),
                     true, ""};
    for (int j = 1; j <= m && r.pass; ++j)
        for (int k = 1; k <= m; ++k) {
            SubsetTuple jj(static_cast<std::size_t>(n), 0u), kk(static_cast<std::size_t>(n), 0u);
            jj[0] = 1u << (j - 1);
            kk[0] = 1u << (k - 1);
            const int got = sgn2_berezin(m, n, jj, kk);
            int want = ((j + k) & 1) ? -1 : 1;
            if ((m * n) & 1) want = -want;
            if (got != want) {
                r.pass = false;
                r.detail = "j=" + std::to_string(j) + " k=" + std::to_string(k);
                break;
            }
        }
    return r;
}

IdentityResult check_sgn2_agreement(int m, int n,
                                    const std::function<int(const SubsetTuple&)>& sgn_fn) {
    IdentityResult r{"sgn2_agreement", "m=" + std::to_string(m) + ",n=" + std::to_string(n),
                     true, ""};
    for (const auto& [abar, a] : all_pn(m, n)) {
        const int via_berezin = sgn2_berezin(m, n, abar, a);
        const int via_closed = sgn2_closed(m, n, abar, a, sgn_fn);
        if (via_berezin != via_closed) {
            r.pass = false;
            r.detail = tuple_str(abar, a);
            return r;
        }
    }
    return r;
}

namespace {

template <class C>
IdentityResult pairing_expansion_impl(int m, int n, const char* mode_name, C i_half) {
    IdentityResult r{std::string("pairing_expansion_") + mode_name,
                     "m=" + std::to_string(m) + ",n=" + std::to_string(n), false, ""};
    if (m * n > 6) throw validation_error("pairing expansion guarded to m*n <= 6");
    Universe u = Universe::join(Universe::supermatrix(0, m, n), Universe::supermatrix(1, m, n));
    using El = gr::Element<C>;

    El lhs = El::one(&u);
    for (int k = 1; k <= m; ++k)
        for (int l = 1; l <= n; ++l) {
            El f1 = El::one(&u) + i_half * (El::generator(&u, {0, true, k, l}) *
                                            El::generator(&u, {1, false, k, l}));
            El f2 = El::one(&u) + i_half * (El::generator(&u, {1, true, k, l}) *
                                            El::generator(&u, {0, false, k, l}));
            lhs = lhs * f1 * f2;
        }

    El rhs(&u);
    const auto tuples = all_subset_tuples(m, n);
    for (const auto& abar : tuples)
        for (const auto& a : tuples) {
            const int w = gr::tuple_weight(abar) + gr::tuple_weight(a);
            C coeff = C(1);
            for (int i = 0; i < w; ++i) coeff = coeff * i_half;
            const long long sg =
                static_cast<long long>(gr::sgn_tuple(a)) * gr::sgn_tuple(abar);  // 1/sgn = sgn
            long long sign = sg * gr::s_factor(abar, a);
            if (gr::tuple_weight(a) & 1) sign = -sign;
            El term = gr::monomial_tuple<C>(&u, 1, abar, a) * gr::monomial_tuple<C>(&u, 0, a, abar);
            rhs = rhs + (coeff * C(sign)) * term;
        }

    r.pass = (lhs - rhs).is_zero();
    if (!r.pass) r.detail = "coefficient mismatch in the pairing expansion";

    // s(abar,a) = 1 on every P^n_k
    for (int k = -m; k <= m && r.pass; ++k)
        for (const auto& abar : tuples)
            for (const auto& a : tuples) {
                bool in = gr::popcnt(abar[0]) == gr::popcnt(a[0]) + k;
                for (int l = 1; in && l < n; ++l)
                    in = gr::popcnt(abar[static_cast<std::size_t>(l)]) ==
                         gr::popcnt(a[static_cast<std::size_t>(l)]);
                if (in && gr::s_factor(abar, a) != 1) {
                    r.pass = false;
                    r.detail = "s(abar,a) != 1 on P^n_k, " + tuple_str(abar, a);
                }
            }
    return r;
}

}  // namespace

IdentityResult check_pairing_expansion(int m, int n, bool float_mode) {
    if (float_mode) return pairing_expansion_impl<cplx>(m, n, "float", cplx(0.0, 0.5));
    return pairing_expansion_impl<GRat>(m, n, "exact", GRat::i_over(2));
}

IdentityResult check_product_associativity(uint64_t seed) {
    IdentityResult r{"product_associativity", "m=2,n=1,100 random triples", true, ""};
    Universe u = Universe::supermatrix(0, 2, 1);
    RngStream rs(rng_key(seed, 17u));
    auto random_elem = [&]() {
        gr::Element<cplx> e(&u);
        for (int t = 0; t < 6; ++t) {
            const std::uint64_t mask = rs.next_u64() & ((1u << u.size()) - 1u);
            e.add_term(mask, cplx(rs.normal(), rs.normal()));
        }
        return e;
    };
    for (int t = 0; t < 100; ++t) {
        auto e1 = random_elem(), e2 = random_elem(), e3 = random_elem();
        auto d = (e1 * e2) * e3 - e1 * (e2 * e3);
        double worst = 0.0;
        for (const auto& [mask, c] : d.terms()) worst = std::max(worst, std::abs(c));
        if (worst > 1e-12) {
            r.pass = false;
            r.detail = "associativity violated, deviation " + std::to_string(worst);
            break;
        }
    }
    // anticommutativity and nilpotency of generators
    auto g1 = RElem::generator(&u, {0, true, 1, 1});
    auto g2 = RElem::generator(&u, {0, false, 2, 1});
    if (!(g1 * g1).is_zero()) r.pass = false;
    if (!((g1 * g2) + (g2 * g1)).is_zero()) r.pass = false;
    return r;
}

// ---------------------------------------------------------------------------
// determinant identities over commuting indeterminates x_{jk} = x_{kj}

namespace {

SymPoly sub_det(int m, const std::vector<int>& rows, const std::vector<int>& cols) {
    const std::size_t d = rows.size();
    std::vector<std::vector<SymPoly>> M(d, std::vector<SymPoly>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            M[i][j] = SymPoly::variable(rows[i], cols[j], m);
    return poly_det(M);
}

std::vector<std::pair<unsigned, unsigned>> all_p1_pairs(int m) {
    // (abar, a) subsets of {1..m} with |abar| = |a| + 1
    std::vector<std::pair<unsigned, unsigned>> out;
    for (unsigned abar = 0; abar < (1u << m); ++abar)
        for (unsigned a = 0; a < (1u << m); ++a)
            if (gr::popcnt(abar) == gr::popcnt(a) + 1) out.emplace_back(abar, a);
    return out;
}

}  // namespace

IdentityResult check_det_cofactor(int m) {
    if (m < 1 || m > 4) throw validation_error("determinant identities support m <= 4");
    IdentityResult r{"det_cofactor_transpose", "m=" + std::to_string(m), true, ""};
    std::vector<std::vector<SymPoly>> D(static_cast<std::size_t>(m),
                                        std::vector<SymPoly>(static_cast<std::size_t>(m)));
    std::vector<std::vector<SymPoly>> Ds = D;
    for (int j = 1; j <= m; ++j)
        for (int k = 1; k <= m; ++k) {
            D[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(k - 1)] =
                SymPoly::variable(j, k, m);
            // transpose of the cofactor matrix: (-1)^{j+k} D_{{k}^c,{j}^c}
            std::vector<int> rows, cols;
            for (int t = 1; t <= m; ++t) {
                if (t != k) rows.push_back(t);
                if (t != j) cols.push_back(t);
            }
            SymPoly minor = sub_det(m, rows, cols);
            Ds[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(k - 1)] =
                (((j + k) & 1) ? -1LL : 1LL) * minor;
        }
    std::vector<int> full(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) full[static_cast<std::size_t>(i)] = i + 1;
    SymPoly det = sub_det(m, full, full);
    for (int j = 0; j < m && r.pass; ++j)
        for (int k = 0; k < m; ++k) {
            SymPoly lhs1, lhs2;
            for (int t = 0; t < m; ++t) {
                lhs1 = lhs1 + D[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)] *
                                  Ds[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
                lhs2 = lhs2 + Ds[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)] *
                                  D[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
            }
            SymPoly want = (j == k) ? det : SymPoly();
            if (!(lhs1 == want) || !(lhs2 == want)) {
                r.pass = false;
                r.detail = "entry (" + std::to_string(j + 1) + "," + std::to_string(k + 1) + ")";
                break;
            }
        }
    return r;
}

IdentityResult check_det_column_expansion(int m) {
    if (m < 1 || m > 4) throw validation_error("determinant identities support m <= 4");
    IdentityResult r{"det_column_expansion", "m=" + std::to_string(m), true, ""};
    for (const auto& [abar, a] : all_p1_pairs(m)) {
        const auto rows = subset_elems(abar);
        const auto cols = subset_elems(a);
        const auto ac = subset_elems(((1u << m) - 1u) & ~a);
        for (std::size_t j = 0; j < ac.size() && r.pass; ++j) {
            const int newcol = ac[j];
            // enlarged column set a cup {a^c_{1j}}, kept ascending
            std::vector<int> cols2 = cols;
            cols2.insert(std::lower_bound(cols2.begin(), cols2.end(), newcol), newcol);
            SymPoly lhs = sub_det(m, rows, cols2);
            SymPoly rhs;
            for (std::size_t k = 0; k < rows.size(); ++k) {
                std::vector<int> rows2 = rows;
                rows2.erase(rows2.begin() + static_cast<std::ptrdiff_t>(k));
                // (-1)^{k + a^c_{1j} - j + 1} with 1-based k and j
                const long long sgn =
                    (((k + 1) + static_cast<std::size_t>(newcol) - j) & 1) ? -1LL : 1LL;
                rhs = rhs + sgn * (sub_det(m, rows2, cols) *
                                   SymPoly::variable(rows[k], newcol, m));
            }
            if (!(lhs == rhs)) {
                r.pass = false;
                r.detail = "abar=" + std::to_string(abar) + " a=" + std::to_string(a) +
                           " col=" + std::to_string(newcol);
            }
        }
        if (!r.pass) break;
    }
    return r;
}

IdentityResult check_det_repeated_row(int m) {
    if (m < 1 || m > 4) throw validation_error("determinant identities support m <= 4");
    IdentityResult r{"det_repeated_row", "m=" + std::to_string(m), true, ""};
    for (const auto& [abar, a] : all_p1_pairs(m)) {
        const auto rows = subset_elems(abar);
        const auto cols = subset_elems(a);
        for (int kp : cols) {
            SymPoly acc;
            for (std::size_t k = 0; k < rows.size(); ++k) {
                std::vector<int> rows2 = rows;
                rows2.erase(rows2.begin() + static_cast<std::ptrdiff_t>(k));
                const long long sgn = (k & 1) ? -1LL : 1LL;  // (-1)^{k-1}, 1-based
                acc = acc + sgn * (sub_det(m, rows2, cols) * SymPoly::variable(rows[k], kp, m));
            }
            if (!acc.is_zero()) {
                r.pass = false;
                r.detail = "abar=" + std::to_string(abar) + " a=" + std::to_string(a) +
                           " col=" + std::to_string(kp);
                break;
            }
        }
        if (!r.pass) break;
    }
    return r;
}

// ---------------------------------------------------------------------------

std::vector<IdentityResult> verify_suite(bool full_level, uint64_t seed) {
    std::vector<IdentityResult> out;
    RngStream rs(rng_key(seed, 99u));
    auto random_sym_complex = [&](int m) {
        CMatrix B(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                B(i, j) = cplx(rs.normal(), rs.normal());
                B(j, i) = B(i, j);
            }
        // shift to make Im B positive definite
        RMatrix imB = B.imag();
        Eigen::SelfAdjointEigenSolver<RMatrix> es(imB);
        const double lift = std::max(0.0, -es.eigenvalues()(0)) + 0.5 + std::abs(rs.normal());
        B += cplx(0.0, 1.0) * lift * CMatrix::Identity(m, m);
        return B;
    };
    auto random_vec = [&](int m) {
        Eigen::VectorXcd v(m);
        for (int i = 0; i < m; ++i) v(i) = cplx(rs.normal(), rs.normal());
        return v;
    };

    out.push_back(check_berezin_convention());
    out.push_back(check_product_associativity(seed));
    for (int m = 1; m <= 2; ++m)
        for (int n = 1; n <= 2; ++n) out.push_back(check_top_integral(m, n));
    out.push_back(check_monomial_relation(3));
    out.push_back(check_sgn_singletons(2, 1));
    out.push_back(check_sgn_singletons(2, 2));
    for (int m = 1; m <= 2; ++m)
        for (int n = 1; n <= 2; ++n) out.push_back(check_sgn2_agreement(m, n));

    for (auto [m, n] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {2, 2}}) {
        out.push_back(check_pairing_expansion(m, n, false));
        out.push_back(check_pairing_expansion(m, n, true));
    }
    if (full_level) out.push_back(check_pairing_expansion(3, 1, false));

    for (int m = 1; m <= 3; ++m) {
        out.push_back(check_det_cofactor(m));
        out.push_back(check_det_column_expansion(m));
        out.push_back(check_det_repeated_row(m));
    }
    if (full_level) {
        out.push_back(check_det_cofactor(4));
        out.push_back(check_det_column_expansion(4));
        out.push_back(check_det_repeated_row(4));
    }

    // T rule validation gate (quadrature oracle), then the Gaussian-family
    // identities
    {
        IdentityResult r{"T_quadrature_gate", "m=1,n=1,b=i and b=0.7+1.3i", false, ""};
        std::string note;
        const bool ok1 = t_quadrature_check_m1(cplx(0.0, 1.0), 1e-10, &note);
        const bool ok2 = t_quadrature_check_m1(cplx(0.7, 1.3), 1e-10, &note);
        r.pass = ok1 && ok2;
        r.detail = note;
        out.push_back(r);
    }
    {
        IdentityResult r{"T_involution", "50 random B, m in {1,2,3}", true, ""};
        for (int t = 0; t < 50; ++t) {
            const int m = 1 + static_cast<int>(rs.next_u64() % 3);
            const CMatrix B = random_sym_complex(m);
            const GaussianSF f{B, cplx(1.3, -0.4)};
            const GaussianSF ttf = T_gaussian(T_gaussian(f));
            const double dev = (ttf.B - B).cwiseAbs().maxCoeff() + std::abs(ttf.c - f.c);
            if (dev > 1e-12 * (1.0 + B.cwiseAbs().maxCoeff())) {
                r.pass = false;
                r.detail = "T^2 deviation " + std::to_string(dev);
                break;
            }
        }
        out.push_back(r);
    }
    {
        IdentityResult r{"bbT_involution", "50 random (B, v), m in {1,2,3}", true, ""};
        for (int t = 0; t < 50; ++t) {
            const int m = 1 + static_cast<int>(rs.next_u64() % 3);
            const CMatrix B = random_sym_complex(m);
            const Eigen::VectorXcd v = random_vec(m);
            const VectorGaussianSF g = bbT_gaussian(bbT_gaussian({B, v}));
            const double dev = (g.B - B).cwiseAbs().maxCoeff() + (g.v - v).cwiseAbs().maxCoeff();
            if (dev > 1e-12 * (1.0 + v.cwiseAbs().maxCoeff() + B.cwiseAbs().maxCoeff())) {
                r.pass = false;
                r.detail = "bbT^2 deviation " + std::to_string(dev);
                break;
            }
        }
        out.push_back(r);
    }
    for (auto [m, n] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {2, 2}}) {
        IdentityResult r{"super_taylor", "m=" + std::to_string(m) + ",n=" + std::to_string(n),
                         false, ""};
        r.pass = super_taylor_check(m, n, random_sym_complex(m), 1e-12, &r.detail);
        out.push_back(r);
    }
    for (auto [m, n] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {2, 2}}) {
        IdentityResult r{"vexp_coefficients", "m=" + std::to_string(m) + ",n=" + std::to_string(n),
                         false, ""};
        r.pass = vexp_coefficient_check(m, n, random_sym_complex(m), random_vec(m), 1e-9,
                                        &r.detail);
        out.push_back(r);
    }
    {
        std::vector<std::pair<int, int>> cases{{1, 1}, {2, 1}};
        if (full_level) cases.emplace_back(2, 2);
        for (auto [m, n] : cases) {
            IdentityResult r{"bbT_pairing", "m=" + std::to_string(m) + ",n=" + std::to_string(n), false,
                             ""};
            r.pass = bbT_pairing_check(m, n, random_sym_complex(m), random_vec(m), 1e-9, &r.detail);
            out.push_back(r);
        }
    }
    for (int m = 1; m <= 2; ++m) {
        IdentityResult r{"leibniz_product", "m=" + std::to_string(m) + ",n=1", false, ""};
        r.pass = leibniz_product_check(m, random_sym_complex(m), random_sym_complex(m), 1e-12,
                                       &r.detail);
        out.push_back(r);
    }

    // lambda=0 three-way agreement: susy fixed point vs greens fixed point vs
    // the closed-form band limit
    {
        IdentityResult r{"lambda0_three_way", "K in {2,4}, m in {1,2}, quartile energies", true,
                         ""};
        for (int K : {2, 4})
            for (int m : {1, 2}) {
                RMatrix A = RMatrix::Zero(m, m);
                if (m == 2) {
                    A(0, 0) = -0.5;
                    A(1, 1) = 0.5;
                }
                const auto p = validate_params(K, m, A, 0.0, {});
                const auto iv = spectral_interval(p);
                for (double q : {0.25, 0.75}) {
                    const double E = iv->first + q * (iv->second - iv->first);
                    const ComplexEnergy z{E, 1e-8};
                    const CMatrix g1 = halfspace_green_fixedpoint(p, z);
                    const CMatrix g2 = susy_lambda0_fixed_point(p, z);
                    const CMatrix g3 = halfspace_green_band_limit(p, E);
                    const double dev = std::max((g1 - g2).cwiseAbs().maxCoeff(),
                                                (g1 - g3).cwiseAbs().maxCoeff());
                    if (dev > 1e-6) {
                        r.pass = false;
                        r.detail = "K=" + std::to_string(K) + " m=" + std::to_string(m) +
                                   " E=" + std::to_string(E) + " dev=" + std::to_string(dev);
                    }
                }
            }
        out.push_back(r);
    }
    return out;
}

}  // namespace bethe
