#ifndef SPSIM_ANSATZ_HPP
#define SPSIM_ANSATZ_HPP

#include <string>
#include <utility>

#include "spsim/model.hpp"

// Integrator for the two-photon-truncated wavefunction of the driven emitter
// and its emitted field. All amplitudes live on the shared uniform grid of
// emission times. Excited-state amplitudes (ce, phi1e) are stored in the
// rotated frame c~ = exp(i delta t) c; phi1g and phi2 are unrotated.
//
// phi2(t_e2, t_e1) is strictly lower triangular (second emission after the
// first) and carries no dynamics of its own: it is fixed by the boundary
// value i sqrt(gamma) exp(-i delta t_e2) phi1e(t_e2, t_e1) at the moment of
// the second emission.

namespace spsim {

struct SolveOptions {
    bool store_histories = true;    // keep the full (t, t_e1) one-photon arrays
    bool track_norm_series = true;  // record N(t) on every node
    double max_phase_per_substep = 0.03;  // RK4 substep control, radians
    double norm_tolerance = 1e-4;
};

struct AnsatzSolution {
    EmitterParams emitter{1.0};
    LeakageParams leak{0.0, 0.0};
    PulseParams pulse{1.0, 6.0, M_PI};
    TimeGrid grid;

    Eigen::VectorXcd cg, ce;                  // emitter trajectories
    Eigen::VectorXcd phi1g_final, phi1e_final;
    Eigen::MatrixXcd phi1g_hist, phi1e_hist;  // (t index, emission index); may be empty
    Eigen::MatrixXcd phi2;                    // (t_e2 index, t_e1 index)
    LeakedField leaked;

    Eigen::VectorXd norm_series;  // may be empty
    double norm_final = 1.0;
    double norm_error = 0.0;
    double residual_excited = 0.0;  // |ce(T)|^2, should be ~0 by grid construction
    bool converged = true;
};

// Emitter pair (c_g, c~_e) from the vacuum initial condition.
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> integrate_emitter(
    const EmitterParams& emitter, const PulseParams& pulse, const TimeGrid& grid,
    const SolveOptions& opts = {});

// One-photon amplitudes for every first-emission node; rows with t < t_e1 are zero.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> integrate_one_photon(
    const EmitterParams& emitter, const PulseParams& pulse, const TimeGrid& grid,
    const Eigen::VectorXcd& ce, const SolveOptions& opts = {});

// Two-photon amplitude from the phi1e history via the emission boundary rule.
Eigen::MatrixXcd extract_phi2(const EmitterParams& emitter, const TimeGrid& grid,
                              const Eigen::MatrixXcd& phi1e_hist);

AnsatzSolution solve_ansatz(const EmitterParams& emitter, const LeakageParams& leak,
                            const PulseParams& pulse, const TimeGrid& grid,
                            const SolveOptions& opts = {});

// Versioned binary dump of the final-time solution (little-endian 64-bit
// scalars, row-major complex arrays). Histories and the norm series are
// recomputable and not stored.
void save_solution(const std::string& path, const AnsatzSolution& sol);
AnsatzSolution load_solution(const std::string& path);

}  // namespace spsim

#endif
