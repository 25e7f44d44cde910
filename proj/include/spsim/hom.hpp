#ifndef SPSIM_HOM_HPP
#define SPSIM_HOM_HPP

#include "spsim/correlations.hpp"

// Hong-Ou-Mandel coincidence probabilities, visibility, and the ratio
// F = (1 - V)/g2 relating the visibility deficit to the two-photon component,
// with the two-mode Fock toy model that pins F = 1, 2, 3 for two-photon
// states sharing two, one, or zero photons with the single-photon mode.

namespace spsim {

struct HomReport {
    double pcc = 0.0;       // coincidence numerator (1/4 prefactor included)
    double pcc_dist = 0.0;  // distinguishable-photon normalizer
    double visibility = 0.0;
    double g2 = 0.0;
    double f_ratio = 0.0;
    double nbar = 0.0;
    bool ill_conditioned_f = false;  // g2 below threshold, F hard to interpret
    bool nyquist_warn = false;
};

// pcc = 1/4 integral of [2 G2 + 2 G1(t,t) G1(t',t') - 2 |G1(t,t')|^2];
// pcc_dist drops the interference term. Identical sources assumed.
std::pair<double, double> coincidence(const CorrelationKernels& kernels);

// V = integral |G1|^2 / integral (G2 + G1 G1). Throws std::domain_error when
// the normalizer vanishes.
double visibility(const CorrelationKernels& kernels);

// (1 - v)/g2; sets *ill_conditioned when g2 < eps, where the ratio is hard
// to interpret (both numerator and denominator nearly vanish).
double f_ratio(double v, double g2, double eps = 1e-10, bool* ill_conditioned = nullptr);

HomReport make_hom_report(const CorrelationKernels& kernels, double f_eps = 1e-10);

// Contracted O(n^2) evaluation of nbar, g2, V, F for unfiltered solutions,
// used by wide parameter scans. g2 and nbar are exact (same quadrature as the
// full kernels); V drops the doubly-two-photon term iint |M1|^2, which is
// positive and bounded by (2 P2)^2, so V is underestimated by at most
// v_error_bound.
struct QuickHom {
    double nbar = 0.0, g2 = 0.0, visibility = 0.0, f_ratio = 0.0;
    double v_error_bound = 0.0;
};
QuickHom quick_hom_report(const AnsatzSolution& sol);

// Two orthonormal modes, at most two photons: the minimal space exposing the
// full F in [1, 3] range.
struct FockToyState {
    double p0, p1, pn;          // photon-number probabilities, sum to 1
    double w_psi, w_other;      // single-photon mode weights, sum to 1
    int n_psi, n_other;         // two-photon occupation, n_psi + n_other == 2

    FockToyState(double p0_, double p1_, double pn_, double w_psi_, double w_other_,
                 int n_psi_, int n_other_);
};

struct FockToyMetrics {
    double visibility, g2, f, b, b_prime;
};

FockToyMetrics fock_toy_f(const FockToyState& state);

}  // namespace spsim

#endif
