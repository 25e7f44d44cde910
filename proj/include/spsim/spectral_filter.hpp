#ifndef SPSIM_SPECTRAL_FILTER_HPP
#define SPSIM_SPECTRAL_FILTER_HPP

#include "spsim/correlations.hpp"

// Lorentzian frequency filtering of the output field. Convention: the
// forward transform carries e^{+i omega t}, the inverse e^{-i omega t}, so
// the transmission gamma_f/(i(omega - omega_c) - gamma_f) has the causal
// kernel -gamma_f e^{-gamma_f tau} theta(tau) and T(omega_c) = -1. Time axes
// are zero-padded past the signal by max(10/gamma_f, 4/gamma) before the
// transform so the kernel tail cannot wrap into the window.

namespace spsim {

struct FilterSpec {
    double gamma_f;      // half width; intensity FWHM = 2 gamma_f
    double omega_c = 0;  // center offset from the rotating frame
    double pad_multiplier = 1.0;  // scales the zero-padding (convergence checks)

    FilterSpec(double gamma_f_, double omega_c_ = 0.0);
};

enum class NyquistPolicy {
    strict,      // throw when the filter is not resolved on the grid
    permissive,  // flag instead (wide-filter limit, sweep rows)
};

complexd transmission(const FilterSpec& spec, double omega);

// |T| at the signed Nyquist frequencies of the grid; > 0.05 means the
// discrete filter kernel is not resolved.
double nyquist_transmission(const FilterSpec& spec, const TimeGrid& grid);

struct CrossKernels {
    Eigen::MatrixXcd m1;  // Hermitian two-photon contraction
    Eigen::MatrixXcd m2;  // one-photon/two-photon contraction times leak
};

struct FilteredWavefunctions {
    Eigen::VectorXcd phi1g, phi1e, leaked;
    Eigen::MatrixXcd phi2;
    bool nyquist_warn = false;
};

// 1D amplitude filter (ket side). Bra-side filtering of an amplitude a is
// conj(apply_filter_1d(conj(a))). keep_padding returns the full padded
// response instead of truncating back to the input window.
Eigen::VectorXcd apply_filter_1d(const Eigen::VectorXcd& a, const TimeGrid& grid,
                                 const FilterSpec& spec, double gamma_emitter,
                                 bool keep_padding = false);

// 2D filter; axis 0 (rows) is conjugate (bra) when bra_axis0 is set.
Eigen::MatrixXcd apply_filter_2d(const Eigen::MatrixXcd& a, const TimeGrid& grid,
                                 const FilterSpec& spec, double gamma_emitter,
                                 bool bra_axis0);

// Forward transform with the paper-fixed convention, for spectral-domain
// checks: returns spectrum samples (scaled by dt) and their frequencies.
std::pair<Eigen::VectorXcd, Eigen::VectorXd> forward_spectrum(
    const Eigen::VectorXcd& a, double dt, int padded_len);

FilteredWavefunctions filter_wavefunctions(const AnsatzSolution& sol, const FilterSpec& spec,
                                           NyquistPolicy policy = NyquistPolicy::strict);

CrossKernels cross_kernels(const AnsatzSolution& sol);

CrossKernels filter_cross_kernels(const CrossKernels& kernels, const TimeGrid& grid,
                                  const FilterSpec& spec, double gamma_emitter,
                                  NyquistPolicy policy = NyquistPolicy::strict);

// Filtered correlation kernels: detected indices filtered, traced internal
// contractions unfiltered; assembly shared with the unfiltered path so the
// Hermitian/nonnegative structure survives the filter.
CorrelationKernels filtered_correlations(const AnsatzSolution& sol, const FilterSpec& spec,
                                         NyquistPolicy policy = NyquistPolicy::strict);

// Variant reusing precomputed unfiltered inputs (sweeps share them across
// filter widths; building m1 is the expensive part).
CorrelationKernels filtered_correlations(const AnsatzSolution& sol,
                                         const detail::KernelInputs& base,
                                         const FilterSpec& spec,
                                         NyquistPolicy policy = NyquistPolicy::strict);

}  // namespace spsim

#endif
