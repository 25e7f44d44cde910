#ifndef SPSIM_STEADY_STATE_HPP
#define SPSIM_STEADY_STATE_HPP

#include <vector>

#include "spsim/model.hpp"

// CW master-equation steady state of the driven two-level system with pure
// dephasing, and the input/output intensity ratio used to characterize the
// leakage fraction and phase from detuning scans.

namespace spsim {

struct SteadyState {
    double rho_gg = 1.0;
    double rho_ee = 0.0;
    complexd rho_eg{0.0, 0.0};
    complexd rho_ge{0.0, 0.0};
};

struct IntensityPoint {
    double delta = 0.0;        // detuning
    double drive_ratio = 0.0;  // I/I_sat = Omega^2/gamma^2
    double ratio = 0.0;        // I_out/I_in
    double efficiency = 1.0;   // combined in/outcoupling efficiency A
};

// Closed-form steady state (drive Hamiltonian -(Omega/2) sigma_x in the
// rotating frame; omega may be complex to represent a drive phase).
SteadyState solve_steady(const EmitterParams& emitter, complexd omega);

// Same state from a direct linear solve of the 4x4 stationarity system with
// the trace condition; regression oracle for the closed form.
SteadyState solve_steady_linear(const EmitterParams& emitter, complexd omega);

// I_out/I_in at detuning emitter.delta for drive intensity I/I_sat and
// efficiency a. Reduces to the dephasing-free expression when gamma_d = 0,
// and equals 1 identically when |x| e^{-i theta} = 1 and a = 1.
double intensity_ratio(const EmitterParams& emitter, const LeakageParams& leak,
                       double drive_ratio, double efficiency);

std::vector<IntensityPoint> intensity_curve(const EmitterParams& emitter,
                                            const LeakageParams& leak,
                                            double drive_ratio, double efficiency,
                                            const std::vector<double>& deltas);

}  // namespace spsim

#endif
