#include "spsim/steady_state.hpp"

#include <cmath>
#include <stdexcept>

namespace spsim {

SteadyState solve_steady(const EmitterParams& emitter, complexd omega) {
    const double g = emitter.gamma;
    const double gd = emitter.gamma_d;
    const double d = emitter.delta;
    const double g2d = g + 2.0 * gd;
    const double o2 = std::norm(omega);
    const double sat = 1.0 + 2.0 * gd / g;
    const double den = g2d * g2d + 4.0 * d * d + 2.0 * o2 * sat;

    SteadyState s;
    s.rho_gg = (g2d * g2d + 4.0 * d * d + o2 * sat) / den;
    s.rho_ee = o2 * sat / den;
    s.rho_eg = omega * complexd(2.0 * d, g2d) / den;
    s.rho_ge = std::conj(s.rho_eg);
    return s;
}

SteadyState solve_steady_linear(const EmitterParams& emitter, complexd omega) {
    const double g = emitter.gamma;
    const double gd = emitter.gamma_d;
    const double d = emitter.delta;
    const complexd I(0.0, 1.0);

    // unknowns v = (rho_gg, rho_eg, rho_ge, rho_ee)
    Eigen::Matrix4cd A = Eigen::Matrix4cd::Zero();
    Eigen::Vector4cd b = Eigen::Vector4cd::Zero();

    // stationarity of rho_eg
    A(0, 1) = -complexd(0.5 * g + gd, d);
    A(0, 0) = I * 0.5 * omega;
    A(0, 3) = -I * 0.5 * omega;
    // stationarity of rho_ge
    A(1, 2) = -complexd(0.5 * g + gd, -d);
    A(1, 0) = -I * 0.5 * std::conj(omega);
    A(1, 3) = I * 0.5 * std::conj(omega);
    // stationarity of rho_ee
    A(2, 3) = -g;
    A(2, 2) = I * 0.5 * omega;
    A(2, 1) = -I * 0.5 * std::conj(omega);
    // trace
    A(3, 0) = 1.0;
    A(3, 3) = 1.0;
    b(3) = 1.0;

    Eigen::Vector4cd v = A.partialPivLu().solve(b);
    SteadyState s;
    s.rho_gg = v(0).real();
    s.rho_eg = v(1);
    s.rho_ge = v(2);
    s.rho_ee = v(3).real();
    return s;
}

double intensity_ratio(const EmitterParams& emitter, const LeakageParams& leak,
                       double drive_ratio, double efficiency) {
    if (!(drive_ratio > 0.0))
        throw std::invalid_argument("intensity_ratio: drive_ratio must be positive");
    const double sat = 1.0 + 2.0 * emitter.gamma_d / emitter.gamma;
    const double dn = emitter.delta / emitter.gamma;
    const double den = sat * sat + 4.0 * dn * dn + 2.0 * drive_ratio * sat;
    const double interference =
        2.0 * leak.magnitude * (0.5 * sat * std::cos(leak.phase) + dn * std::sin(leak.phase));
    return efficiency *
           (4.0 / den * (sat - interference) + leak.magnitude * leak.magnitude);
}

std::vector<IntensityPoint> intensity_curve(const EmitterParams& emitter,
                                            const LeakageParams& leak,
                                            double drive_ratio, double efficiency,
                                            const std::vector<double>& deltas) {
    if (deltas.empty())
        throw std::invalid_argument("intensity_curve: deltas must be nonempty");
    std::vector<IntensityPoint> out;
    out.reserve(deltas.size());
    for (double d : deltas) {
        EmitterParams e(emitter.gamma, emitter.gamma_d, d);
        IntensityPoint p;
        p.delta = d;
        p.drive_ratio = drive_ratio;
        p.efficiency = efficiency;
        p.ratio = intensity_ratio(e, leak, drive_ratio, efficiency);
        out.push_back(p);
    }
    return out;
}

}  // namespace spsim
