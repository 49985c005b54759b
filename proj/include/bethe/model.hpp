#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "bethe/rng.hpp"

namespace bethe {

using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using cplx = std::complex<double>;

// Random symmetric-matrix potential law.  All variants are Gaussian (or
// identically zero), so every mixed moment is finite and the characteristic
// function has a closed form.
enum class DisorderVariant { Zero, DiagonalGaussianIID, GOE };

struct DisorderSpec {
    DisorderVariant variant = DisorderVariant::Zero;
    double sigma = 1.0;  // standard-deviation scale
};

// z = E + i*eta
struct ComplexEnergy {
    double E = 0.0;
    double eta = 0.0;
    cplx z() const { return {E, eta}; }
};

// H = (1/2) Delta (x) 1 + 1 (x) A + lambda V on the tree strip with
// connectivity K and width m.  A is the free vertical operator.
struct ModelParams {
    int K = 2;
    int m = 1;
    RMatrix A;           // m x m real symmetric
    double lambda = 0.0;
    DisorderSpec disorder;
    bool theorems_applicable = false;  // a_max - a_min < 2*sqrt(K)

    // eigen-decomposition of A, filled by validate_params
    Eigen::VectorXd a_eigs;   // ascending
    RMatrix a_vecs;           // orthogonal, A = a_vecs * diag(a_eigs) * a_vecs^T

    bool deterministic() const {
        return lambda == 0.0 || disorder.variant == DisorderVariant::Zero;
    }
};

// Validates inputs and computes the spectral bookkeeping.  A violated
// overlap condition only clears theorems_applicable; the operator itself is
// fine.  Throws validation_error for K < 2 or a non-symmetric A (exact
// entrywise check).
ModelParams validate_params(int K, int m, const RMatrix& A, double lambda,
                            const DisorderSpec& disorder);

// Open interval (-sqrt(K)+a_max, sqrt(K)+a_min); nullopt when empty.
std::optional<std::pair<double, double>> spectral_interval(const ModelParams& p);

// Union of the shifted free bands [a_i - sqrt(K), a_i + sqrt(K)], merged.
std::vector<std::pair<double, double>> free_spectrum(const ModelParams& p);

// One Sym(m) draw from the given stream.
//   DiagonalGaussianIID: diagonal iid N(0, sigma^2), off-diagonal 0
//   GOE: diagonal N(0, 2 sigma^2), off-diagonal N(0, sigma^2), symmetric
RMatrix sample_potential_one(const DisorderSpec& d, int m, RngStream& stream);

// `count` iid samples from streams derived per sample index.
std::vector<RMatrix> sample_potential(const DisorderSpec& d, int m, uint64_t seed,
                                      std::size_t count);

// Characteristic function h(M) = E exp(-i Tr(M V)) for real symmetric M.
// Tr(MV) is a centered Gaussian, so h(M) = exp(-Var(Tr(MV))/2):
//   DiagonalGaussianIID: Var = sigma^2 sum_k M_kk^2
//   GOE: Var = sigma^2 (2 sum_k M_kk^2 + 4 sum_{j<k} M_jk^2) = 2 sigma^2 Tr(M^2)
//   Zero: h = 1
cplx char_function(const DisorderSpec& d, const RMatrix& M);

}  // namespace bethe
