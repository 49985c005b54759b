#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bethe/model.hpp"
#include "bethe/tree.hpp"

namespace bethe {

// Transport observables: wave-packet spreading on truncated balls, Monte
// Carlo estimates of E Tr|G(0,x_r;z)|^2 and its Im-inserted variants, the
// shell-summed second moment J, the ballistic indicator eta^3 J, the
// Laplace/Plancherel identity and the Ward/positivity suite.

// default truncation depth ceil(log(1/eta)/log K) + 10
int default_depth(int K, double eta);

// r^2(t) = sum_{x,k} |x|^2 |<x,k| e^{-itH} |0,j>|^2 on Ball(ell) with
// Dirichlet boundary, by full eigendecomposition; j is 1-based.
double wavepacket_r2(const ModelParams& p, const TreeGeometry& tree,
                     std::span<const RMatrix> potentials, double t, int j);

// sum over j = 1..m
double r2_origin(const ModelParams& p, const TreeGeometry& tree,
                 std::span<const RMatrix> potentials, double t);

enum class Insertion { None, Right, Both };

struct EstimatorResult {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n_samples = 0;
    int r = 0;
    ComplexEnergy z;
    int depth = 0;
    uint64_t seed = 0;
};

// Monte Carlo estimate over independent path samples of
//   None : Tr |G(0,x_r)|^2
//   Right: Tr( Im^(x'|x_r) |G(0,x_r)|^2 )
//   Both : Tr( Im^(x'|x_r) G^* Im^(0'|0) G )
// Each sample assembles the path from fresh independent half-space branches;
// the insertion matrices are the imaginary parts of branch Green's functions
// that also enter the endpoint assemblies (the correlation the expectation
// identities require).  Deterministic models short-circuit to the fixed
// point with zero stderr.
EstimatorResult estimate_EG2(const ModelParams& p, ComplexEnergy z, int r, int depth,
                             std::size_t n_samples, uint64_t seed, Insertion ins,
                             int workers = 0);

struct TransportRow {
    double E = 0.0, eta = 0.0, lambda = 0.0;
    int r_max = 0;
    double J = 0.0, J_stderr = 0.0, indicator = 0.0;
    double qhat = 0.0;           // fitted geometric ratio K b_{rmax}/b_{rmax-1}
    double tail_estimate = 0.0;  // geometric-tail extrapolation beyond r_max
    bool tail_converged = false; // tail < 1% of J
};

// J ~ sum_{r=1}^{r_max} (K+1) K^{r-1} r^2 E Tr|G(0,x_r)|^2 with the shell
// count (K+1)K^{r-1}; throws numerical_error("tail-not-converged") if the
// fitted ratio is >= 1.
TransportRow j_function(const ModelParams& p, ComplexEnergy z, int r_max, int depth,
                        std::size_t n_samples, uint64_t seed, int workers = 0);

// rows of eta^3 J over an eta grid; depth <= 0 selects the default formula
std::vector<TransportRow> ballistic_indicator(const ModelParams& p, double E,
                                              const std::vector<double>& etas, int r_max,
                                              int depth, std::size_t n_samples, uint64_t seed,
                                              int workers = 0);

struct PlancherelReport {
    double lhs = 0.0;   // int_0^inf e^{-eta t} r^2(t) dt, closed form in eigenpairs
    double rhs = 0.0;   // (1/2pi) int dE sum_x |x|^2 Tr|G(0,x;E+i eta/2)|^2
    double reldiff = 0.0;
    double eta = 0.0;
    std::size_t quad_evals = 0;
};

// per-configuration identity on a finite ball (same truncated H both sides)
PlancherelReport plancherel_check(const ModelParams& p, const TreeGeometry& tree,
                                  std::span<const RMatrix> potentials, double eta);

struct UpperBoundReport {
    double integral = 0.0;  // the E-integrated quantity of plancherel_check
    double bound = 0.0;     // 4 pi m^2 K / eta^3
    double margin = 0.0;
    bool holds = false;
};

UpperBoundReport upper_bound_check(const ModelParams& p, const TreeGeometry& tree,
                                   std::span<const RMatrix> potentials, double eta);

struct WardCheck {
    std::string name;
    double value = 0.0;
    double stderr_ = 0.0;
    bool pass = false;
    bool inconclusive = false;
};

struct WardReport {
    int r_top = 0;
    std::size_t n_samples = 0;
    std::vector<double> a_mean, a_stderr;    // K^r E Tr(Im |G_r|^2)
    std::vector<double> b_mean, b_stderr;    // K^r E Tr |G_r|^2
    std::vector<double> tt_mean, tt_stderr;  // K^r E Tr(Im G* Im G)
    std::vector<WardCheck> checks;
    bool all_pass = false;
    bool inconclusive = false;
};

// Statistical verification, at 3 sigma, of
//   (i)  a_{r+1} = a_r - (4 eta / K) b_{r+1}
//   (ii) a_r strictly decreasing and positive; same for the both-insertion
//        sequence
// Branch depths follow the ball-consistent profile depth + (r_top - j) at
// path vertex j, which makes identity (i) exact for the truncated ensemble.
WardReport ward_identity_check(const ModelParams& p, ComplexEnergy z, int r_top, int depth,
                               std::size_t n_samples, uint64_t seed, int workers = 0);

}  // namespace bethe
