#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "cavcool/params.hpp"

namespace cavcool {

// Numerical evaluation of the general Fokker-Planck coefficients for atoms
// pinned at given positions, via the field Liouvillian truncated at n_max
// photons. Serves as an independent check on the analytic low-field forms.
//
// Superoperators act on column-stacked density matrices: the vector index of
// element rho(r, c) is c * (n_max+1) + r, matching Eigen's column-major
// reshaping. vec(A rho B) = (B^T kron A) vec(rho). All adjoints below follow
// this convention.

struct TruncatedLiouvillian {
  int n_max = 0;
  int fock_dim = 0;            // n_max + 1
  int dim = 0;                 // (n_max + 1)^2
  bool spontaneous = true;
  std::vector<double> positions;  // pinned k x_j
  Eigen::MatrixXcd generator;     // L0, dim x dim
  Params params;
};

// Fock-space ladder operator, a |n> = sqrt(n) |n-1>.
Eigen::MatrixXcd annihilation_op(int fock_dim);

// Builds L0 for the pinned configuration: cavity rotation at the effective
// detuning, coherent pump, cavity decay, and (optionally) the spontaneous
// scattering terms, which add a drive quadrature and raise the decay rate to
// kappa'. Requires n_max >= 1.
TruncatedLiouvillian build_liouvillian(std::span<const double> x, const Params& params,
                                       int n_max, bool spontaneous = true);

// Null state of L0, Hermitized, clipped to PSD (eigenvalue floor -1e-10) and
// normalized to unit trace. Throws on a degenerate null space or a residual
// above tolerance.
Eigen::MatrixXcd steady_state(const TruncatedLiouvillian& liou);

// Force operator on one atom:
//   F_j = S sin(kx_j)(a + a^dag) + U sin(2kx_j) a^dag a
//         - i (gamma'/2) s sin(kx_j) (a^dag - a)        [hbar k = 1]
// The last term is dropped when spontaneous emission is off.
Eigen::MatrixXcd force_operator(const TruncatedLiouvillian& liou, int atom);

struct OracleCoefficients {
  Eigen::VectorXd drift;      // Phi_j = Tr{sigma F_j}
  Eigen::MatrixXd friction;   // gamma_{jl}
  Eigen::MatrixXd diffusion;  // D_{jl}
  Eigen::MatrixXd cross;      // eta_{jl}
};

// Evaluates the stationary coefficient integrals exactly in the truncated
// space. Integrals of exp(L0 tau) against traceless operands reduce to linear
// solves: int_0^inf e^{L tau} Y dtau = -L^{-1} Y and the tau-weighted integral
// is L^{-2} Y, both restricted to the trace-free subspace via deflation of the
// known null pair (sigma_s, identity). Solver residuals above 1e-8 throw with
// a condition-number estimate.
OracleCoefficients coefficient_integrals(const TruncatedLiouvillian& liou,
                                         const Eigen::MatrixXcd& sigma);

// Convenience: build, solve and integrate in one call.
OracleCoefficients oracle_coefficients(std::span<const double> x, const Params& params,
                                       int n_max, bool spontaneous = true);

// <a> and <a^dag a> over a field state.
struct FieldExpectations {
  std::complex<double> a_mean;
  double n_mean = 0.0;
};
FieldExpectations field_expectations(const Eigen::MatrixXcd& sigma);

// Largest relative coefficient shift when raising the cutoff from n_max to
// n_max + 1; used to flag an insufficient truncation.
double oracle_convergence_shift(std::span<const double> x, const Params& params,
                                int n_max, bool spontaneous = true);

// Sup-norm deviation between oracle and analytic low-field coefficients, per
// family (drift, friction, diffusion, cross), each normalized by the largest
// analytic entry of that family. Returns the worst family value.
double oracle_vs_analytic_deviation(std::span<const double> x, const Params& params,
                                    int n_max, bool spontaneous);

}  // namespace cavcool
