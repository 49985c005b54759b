#pragma once

#include <vector>

#include "bethe/model.hpp"

namespace bethe {

// Closed-form calculus on the Gaussian supersymmetric family
//   f(Phi^{o2}) = c * exp((i/4) Tr(B Phi^{o2})),  B complex symmetric,
// Im B positive definite where an integral transform is applied.
//
// The supersymmetric Fourier transform T f = int e^{i Phi'.Phi} f DPhi maps
// this family to itself with parameter Bhat = -4 B^{-1} and unchanged
// prefactor (supersymmetric normalization).  That rule is validated against
// an independent quadrature-plus-exact-fermionic oracle at m = n = 1
// (t_quadrature_check_m1) before anything else relies on it.

struct GaussianSF {
    CMatrix B;
    cplx c = 1.0;
};

// component k is v_k * exp((i/4) Tr(B phi^{o2}))
struct VectorGaussianSF {
    CMatrix B;
    Eigen::VectorXcd v;
};

// Gaussian-type object on a (+, -) pair of supermatrices with a matrix
// prefactor:  P * exp((i/4) Tr(Bplus phi+^{o2}) - (i/4) Tr(Bminus phi-^{o2})).
// The signed parameters are stored explicitly; both transform by X -> -4X^{-1}
// under the tensor transform T (x) T.
struct PairGaussianSF {
    CMatrix Bplus, Bminus;
    CMatrix P;
};

// the lambda = 0 disorder-averaged objects: xi has unit prefactor and
// Bplus = g(z), Bminus = conj(g(z)) with g the half-space fixed point;
// theta = -2(dpartial_+ + dpartial_-) xi carries the prefactor Im g
PairGaussianSF xi_pair_lambda0(const ModelParams& p, ComplexEnergy z);
PairGaussianSF theta_pair_lambda0(const ModelParams& p, ComplexEnergy z);

// T (x) T image on the pair family; the prefactor is unchanged
PairGaussianSF pair_transform(const PairGaussianSF& f);

// pointwise product: parameters add, prefactors multiply
PairGaussianSF pair_product(const PairGaussianSF& f, const PairGaussianSF& g);
inline GaussianSF gaussian_product(const GaussianSF& f, const GaussianSF& g) {
    return {f.B + g.B, f.c * g.c};
}

// subsets of {1..m} as bitmasks (bit k-1 <-> index k), one per replica
using SubsetTuple = std::vector<unsigned>;

RMatrix im_part(const CMatrix& B);
bool im_positive_definite(const CMatrix& B);

// product over replicas of det((i/4)B[rows abar_l, cols a_l]); empty pair -> 1
cplx gaussian_minor_product(const CMatrix& B, const SubsetTuple& abar, const SubsetTuple& a);

// D_{abar,a} f for Gaussian f: the minor product times f
GaussianSF matrix_derivative(const SubsetTuple& abar, const SubsetTuple& a,
                             const GaussianSF& f);

GaussianSF T_gaussian(const GaussianSF& f);

// Tbb f := 2 bpartial T f ; on the Gaussian family the vector maps to
// (i/2) Bhat v with parameter Bhat = -4 B^{-1}
VectorGaussianSF bbT_gaussian(const VectorGaussianSF& f);

// Validation gates and identity checks (exact engine + independent
// oracles).  bbT_pairing_check verifies the intertwining identity
//   Psibar' . bbT f(Phi'^{o2}) = +-i int e^{+-i Phi.Phi'} Psibar . f(Phi^{o2}) DPhi
// (and its Psi variant) on the Gaussian family.  All return
// true on success and write a short failure note otherwise
bool t_quadrature_check_m1(cplx b, double tol, std::string* note = nullptr);
bool super_taylor_check(int m, int n, const CMatrix& B, double tol,
                        std::string* note = nullptr);
bool vexp_coefficient_check(int m, int n, const CMatrix& B, const Eigen::VectorXcd& v,
                            double tol, std::string* note = nullptr);
bool bbT_pairing_check(int m, int n, const CMatrix& B, const Eigen::VectorXcd& v, double tol,
                std::string* note = nullptr);
bool leibniz_product_check(int m, const CMatrix& Bf, const CMatrix& Bg, double tol,
                           std::string* note = nullptr);

// lambda=0 fixed point  B = -4 (K B + 4(z - A))^{-1}  (damped iteration);
// agrees with greens::halfspace_green_fixedpoint and with the band limit as eta->0
CMatrix susy_lambda0_fixed_point(const ModelParams& p, ComplexEnergy z);

// closed-form values of the transfer bilinears at lambda = 0, E in I_{A,K}
struct Lambda0Bilinears {
    double xi_xi = 0.0;        // Tr 4K [ (K+1)^2 - 4(E-A)^2 ]^{-1}
    double xi_theta = 0.0;     // Tr 8 sqrt(K-(E-A)^2) [ (K+1)^2 - 4(E-A)^2 ]^{-1}
    double theta_theta = 0.0;  // Tr 16 (K-(E-A)^2) [ K((K+1)^2 - 4(E-A)^2) ]^{-1}
    RMatrix theta_factor;      // 2 sqrt(K - (E-A)^2) / K
};
Lambda0Bilinears closed_form_bilinears(const ModelParams& p, double E);

}  // namespace bethe
