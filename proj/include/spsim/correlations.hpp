#ifndef SPSIM_CORRELATIONS_HPP
#define SPSIM_CORRELATIONS_HPP

#include "spsim/ansatz.hpp"

// First- and second-order correlation kernels on the emission-time grid,
// assembled from the annihilation residuals of the truncated wavefunction.
//
// Applying (E(t1) + E'(t1))(E(t2) + E'(t2)) to the state leaves residual
// components in the vacuum, excited, one-photon and two-photon sectors; G2 is
// the sum of their squared norms (manifestly nonnegative) and G1 the inner
// product of the single-annihilation residuals (manifestly Hermitian and
// positive semidefinite). The same assembly serves the spectrally filtered
// kernels: detected (external) indices carry filtered amplitudes, while
// traced (internal) contractions keep unfiltered ones.

namespace spsim {

struct CorrelationKernels {
    Eigen::MatrixXcd g1;  // Hermitian
    Eigen::MatrixXd g2;   // symmetric, entrywise >= -roundoff
    double nbar = 0.0;
    TimeGrid grid;
    bool nyquist_warn = false;  // set by the filtered path in permissive mode
};

namespace detail {

// Final-time amplitudes entering the kernel assembly. The filtered pipeline
// swaps E, phi1g, phi1e, Y, m1, cross for filtered versions; the scalar norm
// partitions stay unfiltered in either case (traced photons see both filter
// ports).
struct KernelInputs {
    Eigen::VectorXcd E;       // leaked classical amplitude
    Eigen::VectorXcd phi1g;   // phi1g(T, .)
    Eigen::VectorXcd phi1e;   // phi1e(T, .), residual
    complexd cg{1.0, 0.0};
    complexd ce{0.0, 0.0};
    Eigen::MatrixXcd Y;       // phi2 + phi2^T (symmetric, both indices detected)
    Eigen::MatrixXcd m1;      // int dt_e Y*(t_e,t1) Y(t_e,t2) w(t_e)
    Eigen::VectorXcd cross;   // int dt_e phi1g*(t_e) Y(t_e,t) w(t_e)
    double p1g = 0.0, p1e = 0.0, p2 = 0.0;  // unfiltered norm partitions
    TimeGrid grid;
};

KernelInputs build_inputs(const AnsatzSolution& sol);
CorrelationKernels assemble_kernels(const KernelInputs& in);

}  // namespace detail

// Unfiltered kernels from a solved ansatz.
CorrelationKernels build_kernels(const AnsatzSolution& sol);

Eigen::MatrixXcd g1_kernel(const AnsatzSolution& sol);
Eigen::MatrixXd g2_kernel(const AnsatzSolution& sol);

// Trapezoidal trace of the g1 diagonal.
double mean_photons(const CorrelationKernels& kernels);

// Pulse-integrated normalized second-order correlation. Throws
// std::domain_error when nbar vanishes.
double g2_integrated(const CorrelationKernels& kernels);

}  // namespace spsim

#endif
