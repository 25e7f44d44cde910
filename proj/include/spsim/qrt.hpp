#ifndef SPSIM_QRT_HPP
#define SPSIM_QRT_HPP

#include "spsim/correlations.hpp"

// Independent cross-check of the wavefunction pipeline: the emitter is
// cascaded into a filter cavity (Fock cutoff 2 by default) and the filtered
// two-time correlators are computed from the Lindblad generator via the
// quantum regression theorem. A cavity of linewidth kappa realizes the
// Lorentzian filter of half-width gamma_f = kappa/2 (intensity FWHM match).
//
// Sign conventions follow the wavefunction pipeline: drive -(Omega/2)sigma_x
// (the same rotating frame as the CW master equation), emitter output
// i sqrt(gamma) sigma_-, and cavity transmission kernel -(kappa/2)
// e^{-(kappa/2) tau} for both the emitter field and the classical leak, so
// the detected field is a_out = sqrt(kappa/2) a - x alpha(t).

namespace spsim {

struct QrtParams {
    EmitterParams emitter{1.0};
    LeakageParams leak{0.0, 0.0};
    PulseParams pulse{1.0, 6.0, M_PI};
    double kappa = 2.0;
    int cavity_cutoff = 2;  // max cavity excitations; 2 suffices for G2

    QrtParams(const EmitterParams& e, const LeakageParams& l, const PulseParams& p,
              double kappa_, int cutoff = 2);
};

struct QrtState {
    Eigen::MatrixXcd rho;  // (cutoff+1)*2 square, cavity index major
    double t = 0.0;
};

QrtState initial_state(const QrtParams& params);

// Lindblad propagation to t_target with cached midpoint-exponential steps.
// Throws on trace drift beyond 1e-6.
QrtState propagate(const QrtState& state, const QrtParams& params, double t_target);

// Classical leak response of the filter cavity: (kappa/2) convolution of the
// input envelope Omega(t)/(2 sqrt(gamma)) with e^{-(kappa/2) tau}, in the
// numerically stable erfcx form. Real for a resonant cavity.
double leaked_alpha(const QrtParams& params, double t);

// Filtered G1/G2 kernels on the grid via the quantum regression theorem.
CorrelationKernels qrt_g1_g2(const QrtParams& params, const TimeGrid& grid);

// Diagnostics of the forward propagation on the grid nodes.
struct QrtPopulations {
    Eigen::VectorXd sigma_ee, cavity_n, trace;
    Eigen::VectorXcd a_expect;
    double min_eigenvalue = 0.0;  // most negative eigenvalue of rho seen
};
QrtPopulations qrt_populations(const QrtParams& params, const TimeGrid& grid);

}  // namespace spsim

#endif
