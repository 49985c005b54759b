#include "bethe/model.hpp"

#include <algorithm>
#include <cmath>

#include "bethe/errors.hpp"

namespace bethe {

ModelParams validate_params(int K, int m, const RMatrix& A, double lambda,
                            const DisorderSpec& disorder) {
    if (K < 2) throw validation_error("invalid-connectivity: K must be >= 2");
    if (m < 1) throw validation_error("invalid-width: m must be >= 1");
    if (A.rows() != m || A.cols() != m)
        throw validation_error("invalid-matrix: A must be m x m");
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (A(i, j) != A(j, i))
                throw validation_error("invalid-matrix: A must equal its transpose exactly");
    if (disorder.sigma < 0.0)
        throw validation_error("invalid-disorder: sigma must be nonnegative");

    ModelParams p;
    p.K = K;
    p.m = m;
    p.A = A;
    p.lambda = lambda;
    p.disorder = disorder;

    Eigen::SelfAdjointEigenSolver<RMatrix> es(A);
    p.a_eigs = es.eigenvalues();
    p.a_vecs = es.eigenvectors();
    const double gap = p.a_eigs(m - 1) - p.a_eigs(0);
    p.theorems_applicable = gap < 2.0 * std::sqrt(static_cast<double>(K));
    return p;
}

std::optional<std::pair<double, double>> spectral_interval(const ModelParams& p) {
    const double sK = std::sqrt(static_cast<double>(p.K));
    const double lo = -sK + p.a_eigs(p.m - 1);
    const double hi = sK + p.a_eigs(0);
    if (lo >= hi) return std::nullopt;
    return std::make_pair(lo, hi);
}

std::vector<std::pair<double, double>> free_spectrum(const ModelParams& p) {
    const double sK = std::sqrt(static_cast<double>(p.K));
    std::vector<std::pair<double, double>> bands;
    bands.reserve(static_cast<std::size_t>(p.m));
    for (int i = 0; i < p.m; ++i) bands.emplace_back(p.a_eigs(i) - sK, p.a_eigs(i) + sK);
    std::sort(bands.begin(), bands.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& b : bands) {
        if (!merged.empty() && b.first <= merged.back().second)
            merged.back().second = std::max(merged.back().second, b.second);
        else
            merged.push_back(b);
    }
    return merged;
}

RMatrix sample_potential_one(const DisorderSpec& d, int m, RngStream& stream) {
    RMatrix V = RMatrix::Zero(m, m);
    switch (d.variant) {
        case DisorderVariant::Zero:
            break;
        case DisorderVariant::DiagonalGaussianIID:
            for (int k = 0; k < m; ++k) V(k, k) = d.sigma * stream.normal();
            break;
        case DisorderVariant::GOE:
            for (int j = 0; j < m; ++j)
                for (int k = j; k < m; ++k) {
                    const double s = (j == k) ? d.sigma * std::sqrt(2.0) : d.sigma;
                    V(j, k) = s * stream.normal();
                    V(k, j) = V(j, k);
                }
            break;
    }
    return V;
}

std::vector<RMatrix> sample_potential(const DisorderSpec& d, int m, uint64_t seed,
                                      std::size_t count) {
    std::vector<RMatrix> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        RngStream s(rng_key(seed, static_cast<uint64_t>(i)));
        out.push_back(sample_potential_one(d, m, s));
    }
    return out;
}

cplx char_function(const DisorderSpec& d, const RMatrix& M) {
    if (M.rows() != M.cols()) throw validation_error("char_function: M must be square");
    if (!M.isApprox(M.transpose(), 0.0))
        throw validation_error("char_function: M must be symmetric");
    const double s2 = d.sigma * d.sigma;
    switch (d.variant) {
        case DisorderVariant::Zero:
            return {1.0, 0.0};
        case DisorderVariant::DiagonalGaussianIID: {
            double q = 0.0;
            for (int k = 0; k < M.rows(); ++k) q += M(k, k) * M(k, k);
            return {std::exp(-0.5 * s2 * q), 0.0};
        }
        case DisorderVariant::GOE: {
            const double q = (M * M).trace();
            return {std::exp(-s2 * q), 0.0};
        }
    }
    throw validation_error("char_function: no-closed-form for disorder variant");
}

}  // namespace bethe
