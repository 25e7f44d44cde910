#include "spsim/model.hpp"

#include <cmath>
#include <stdexcept>

namespace spsim {

namespace {
double wrap_angle(double a) {
    // normalize to (-pi, pi]
    a = std::fmod(a, 2.0 * M_PI);
    if (a <= -M_PI) a += 2.0 * M_PI;
    if (a > M_PI) a -= 2.0 * M_PI;
    return a;
}
}  // namespace

EmitterParams::EmitterParams(double gamma_, double gamma_d_, double delta_)
    : gamma(gamma_), gamma_d(gamma_d_), delta(delta_) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("EmitterParams: gamma must be positive and finite");
    if (gamma_d < 0.0 || !std::isfinite(gamma_d))
        throw std::invalid_argument("EmitterParams: gamma_d must be >= 0 and finite");
    if (!std::isfinite(delta))
        throw std::invalid_argument("EmitterParams: delta must be finite");
}

LeakageParams::LeakageParams(double magnitude_, double phase_)
    : magnitude(magnitude_), phase(wrap_angle(phase_)) {
    if (!(magnitude >= 0.0 && magnitude <= 1.0))
        throw std::invalid_argument("LeakageParams: magnitude must be in [0, 1]");
    if (!std::isfinite(phase_))
        throw std::invalid_argument("LeakageParams: phase must be finite");
}

complexd LeakageParams::factor() const { return std::polar(magnitude, -phase); }

PulseParams::PulseParams(double sigma_, double t0_, double area_)
    : sigma(sigma_), t0(t0_), area(area_) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("PulseParams: sigma must be positive and finite");
    if (!std::isfinite(t0) || !std::isfinite(area) || area < 0.0)
        throw std::invalid_argument("PulseParams: bad t0 or area");
}

double PulseParams::peak() const { return area / (std::sqrt(2.0 * M_PI) * sigma); }

double rabi_envelope(const PulseParams& pulse, double t) {
    const double u = (t - pulse.t0) / pulse.sigma;
    return pulse.peak() * std::exp(-0.5 * u * u);
}

TimeGrid::TimeGrid(double t_start_, double t_end_, int n_)
    : t_start(t_start_), t_end(t_end_), n(n_) {
    if (n < 2) throw std::invalid_argument("TimeGrid: n must be >= 2");
    if (!(t_end > t_start)) throw std::invalid_argument("TimeGrid: t_end must exceed t_start");
    dt = (t_end - t_start) / (n - 1);
}

Eigen::VectorXd TimeGrid::weights() const {
    Eigen::VectorXd ww = Eigen::VectorXd::Constant(n, dt);
    ww(0) = 0.5 * dt;
    ww(n - 1) = 0.5 * dt;
    return ww;
}

PulseParams centered_pulse(const EmitterParams& emitter, double sigma, double area) {
    const double t0 = std::max(6.0 * sigma, 1.0 / emitter.gamma);
    return PulseParams(sigma, t0, area);
}

TimeGrid build_grid(const EmitterParams& emitter, const PulseParams& pulse, int n) {
    if (n < 64) throw std::invalid_argument("build_grid: n must be >= 64");
    const double t0 = std::max(6.0 * pulse.sigma, 1.0 / emitter.gamma);
    const double t_end = t0 + std::max(6.0 * pulse.sigma, 10.0 / emitter.gamma);
    if (std::abs(pulse.t0 - t0) > 1e-12 * t0)
        throw std::invalid_argument("build_grid: pulse.t0 must equal max(6 sigma, 1/gamma)");
    return TimeGrid(0.0, t_end, n);
}

LeakedField leaked_field(const LeakageParams& leak, const PulseParams& pulse,
                         const EmitterParams& emitter, const TimeGrid& grid) {
    LeakedField out;
    out.samples.resize(grid.n);
    const complexd x = leak.factor();
    const double s = 0.5 / std::sqrt(emitter.gamma);
    for (int i = 0; i < grid.n; ++i)
        out.samples(i) = x * (rabi_envelope(pulse, grid.t(i)) * s);
    return out;
}

double leaked_photon_number(const LeakageParams& leak, const PulseParams& pulse,
                            const EmitterParams& emitter) {
    const double a2 = pulse.area * pulse.area;
    return leak.magnitude * leak.magnitude * a2 /
           (8.0 * std::sqrt(M_PI) * pulse.sigma * emitter.gamma);
}

}  // namespace spsim
