#ifndef SPSIM_MODEL_HPP
#define SPSIM_MODEL_HPP

#include <cmath>
#include <complex>
#include <Eigen/Dense>

// Physical inputs and the shared time grid. Internal unit system: the decay
// rate gamma and the group velocity are both 1 unless stated otherwise; the
// CLI works in the dimensionless combinations (sigma*gamma, gamma_d/gamma,
// delta/gamma) and constructs these types directly in internal units. The
// formulas below nevertheless keep gamma explicit so that a joint rescaling
// of all rates and times is an exact invariance (tested).

namespace spsim {

using complexd = std::complex<double>;

struct EmitterParams {
    double gamma;    // spontaneous emission rate
    double gamma_d;  // pure dephasing rate (CW master equation only)
    double delta;    // detuning of the transition w.r.t. the drive

    EmitterParams(double gamma_, double gamma_d_ = 0.0, double delta_ = 0.0);
};

struct LeakageParams {
    double magnitude;  // |x| in [0, 1]
    double phase;      // theta, normalized to (-pi, pi]

    LeakageParams(double magnitude_, double phase_);

    // x = |x| e^{-i theta}
    complexd factor() const;
};

struct PulseParams {
    double sigma;  // Gaussian width
    double t0;     // pulse center
    double area;   // integrated Rabi area, pi for a perfect inversion pulse

    PulseParams(double sigma_, double t0_, double area_);

    // peak amplitude; equals sqrt(pi/2)/sigma for a pi pulse
    double peak() const;
};

// Drive envelope Omega(t) = Omega0 exp(-(t-t0)^2 / (2 sigma^2)).
double rabi_envelope(const PulseParams& pulse, double t);

struct TimeGrid {
    double t_start = 0.0;
    double t_end = 0.0;
    int n = 0;
    double dt = 0.0;

    TimeGrid() = default;
    TimeGrid(double t_start_, double t_end_, int n_);

    double t(int i) const { return t_start + i * dt; }
    // trapezoidal quadrature weight of node i
    double w(int i) const { return (i == 0 || i == n - 1) ? 0.5 * dt : dt; }
    Eigen::VectorXd weights() const;
};

// Pulse with the canonical center max(6 sigma, 1/gamma) used by build_grid.
PulseParams centered_pulse(const EmitterParams& emitter, double sigma, double area = M_PI);

// Default grid: the pulse center sits at max(6 sigma, 1/gamma) and the grid
// extends max(6 sigma, 10/gamma) past it, so the envelope is fully contained
// and the emitter has decayed to < e^-10 at the end. Rejects n < 64.
TimeGrid build_grid(const EmitterParams& emitter, const PulseParams& pulse, int n);

struct LeakedField {
    Eigen::VectorXcd samples;  // x * Omega(t) / (2 sqrt(gamma)), v_g = 1
};

LeakedField leaked_field(const LeakageParams& leak, const PulseParams& pulse,
                         const EmitterParams& emitter, const TimeGrid& grid);

// Closed form of the leaked photon number integral |x|^2 area^2 / (8 sqrt(pi) sigma gamma).
double leaked_photon_number(const LeakageParams& leak, const PulseParams& pulse,
                            const EmitterParams& emitter);

}  // namespace spsim

#endif
