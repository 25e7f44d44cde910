#include "spsim/qrt.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace spsim {

namespace {

constexpr complexd I(0.0, 1.0);

// scaled complementary error function for z >= 0
double erfcx_pos(double z) {
    if (z < 8.0) return std::exp(z * z) * std::erfc(z);
    // asymptotic series 1/(z sqrt(pi)) sum (-1)^k (2k-1)!!/(2 z^2)^k
    const double inv2z2 = 1.0 / (2.0 * z * z);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 20; ++k) {
        term *= -(2.0 * k - 1.0) * inv2z2;
        sum += term;
        if (std::abs(term) < 1e-18) break;
    }
    return sum / (z * std::sqrt(M_PI));
}

struct Operators {
    int d;  // Hilbert dimension = 2 (cutoff + 1)
    Eigen::MatrixXcd a, ad, sm, sp, see, sx, n_cav;  // full-space
};

Operators make_operators(int cutoff) {
    const int nc = cutoff + 1;
    const int d = 2 * nc;
    Operators op;
    op.d = d;
    Eigen::MatrixXcd ac = Eigen::MatrixXcd::Zero(nc, nc);
    for (int n = 1; n < nc; ++n) ac(n - 1, n) = std::sqrt(static_cast<double>(n));
    const Eigen::MatrixXcd i2 = Eigen::MatrixXcd::Identity(2, 2);
    const Eigen::MatrixXcd ic = Eigen::MatrixXcd::Identity(nc, nc);
    Eigen::MatrixXcd smq = Eigen::MatrixXcd::Zero(2, 2);
    smq(0, 1) = 1.0;  // |g><e|

    op.a = Eigen::kroneckerProduct(ac, i2);
    op.ad = op.a.adjoint();
    op.sm = Eigen::kroneckerProduct(ic, smq);
    op.sp = op.sm.adjoint();
    op.see = op.sp * op.sm;
    op.sx = op.sm + op.sp;
    op.n_cav = op.ad * op.a;
    return op;
}

Eigen::MatrixXcd dissipator_term(const Eigen::MatrixXcd& c) {
    const int d = static_cast<int>(c.rows());
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
    const Eigen::MatrixXcd cdc = c.adjoint() * c;
    return Eigen::kroneckerProduct(c.conjugate(), c) -
           0.5 * Eigen::kroneckerProduct(id, cdc) -
           0.5 * Eigen::kroneckerProduct(cdc.transpose(), id);
}

struct Generator {
    Eigen::MatrixXcd L0, L1;  // L(t) = L0 + Omega(t) L1
    Operators op;
};

Generator make_generator(const QrtParams& p) {
    Generator g;
    g.op = make_operators(p.cavity_cutoff);
    const int d = g.op.d;
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);

    const double g0 = std::sqrt(p.emitter.gamma * p.kappa / 2.0) / 2.0;
    Eigen::MatrixXcd h0 = p.emitter.delta * g.op.see +
                          g0 * (g.op.ad * g.op.sm + g.op.a * g.op.sp);
    // drive -(Omega/2) sigma_x, the frame of the wavefunction equations
    Eigen::MatrixXcd hd = -0.5 * g.op.sx;

    const Eigen::MatrixXcd c1 =
        I * std::sqrt(p.emitter.gamma) * g.op.sm + std::sqrt(p.kappa / 2.0) * g.op.a;
    const Eigen::MatrixXcd c2 = std::sqrt(p.kappa / 2.0) * g.op.a;

    auto ham_part = [&](const Eigen::MatrixXcd& h) {
        return (-I) * (Eigen::kroneckerProduct(id, h) -
                       Eigen::kroneckerProduct(h.transpose(), id));
    };
    g.L0 = ham_part(h0) + dissipator_term(c1) + dissipator_term(c2);
    g.L1 = ham_part(hd);
    return g;
}

// trace functional of A as a row over vec(rho): tr(A rho) = vec(A^T) . vec(rho)
Eigen::VectorXcd trace_row(const Eigen::MatrixXcd& a) {
    Eigen::MatrixXcd at = a.transpose();
    return Eigen::Map<Eigen::VectorXcd>(at.data(), at.size());
}

int substeps_for(const PulseParams& pu, const EmitterParams& em, double ta, double tb,
                 double max_phase) {
    const double tpk = std::clamp(pu.t0, ta, tb);
    const double rate = rabi_envelope(pu, tpk) + 0.5 * em.gamma + std::abs(em.delta);
    const double raw = (tb - ta) * rate / max_phase;
    return std::max(1, std::min(static_cast<int>(std::ceil(raw)), 100000));
}

// composed midpoint-exponential propagator across [ta, tb]
Eigen::MatrixXcd interval_propagator(const Generator& gen, const QrtParams& p, double ta,
                                     double tb) {
    const int m = substeps_for(p.pulse, p.emitter, ta, tb, 0.05);
    const double h = (tb - ta) / m;
    const int d2 = static_cast<int>(gen.L0.rows());
    Eigen::MatrixXcd phi = Eigen::MatrixXcd::Identity(d2, d2);
    for (int s = 0; s < m; ++s) {
        const double tm = ta + (s + 0.5) * h;
        Eigen::MatrixXcd step = ((gen.L0 + rabi_envelope(p.pulse, tm) * gen.L1) * h).exp();
        phi = step * phi;
    }
    return phi;
}

}  // namespace

QrtParams::QrtParams(const EmitterParams& e, const LeakageParams& l, const PulseParams& p,
                     double kappa_, int cutoff)
    : emitter(e), leak(l), pulse(p), kappa(kappa_), cavity_cutoff(cutoff) {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw std::invalid_argument("QrtParams: kappa must be positive and finite");
    if (cavity_cutoff < 2 || cavity_cutoff > 8)
        throw std::invalid_argument("QrtParams: cavity cutoff must be in [2, 8]");
}

QrtState initial_state(const QrtParams& params) {
    const int d = 2 * (params.cavity_cutoff + 1);
    QrtState s;
    s.rho = Eigen::MatrixXcd::Zero(d, d);
    s.rho(0, 0) = 1.0;  // vacuum cavity, ground emitter
    s.t = 0.0;
    return s;
}

QrtState propagate(const QrtState& state, const QrtParams& params, double t_target) {
    if (t_target < state.t) throw std::invalid_argument("propagate: t_target before state.t");
    QrtState out = state;
    if (t_target == state.t) return out;

    const Generator gen = make_generator(params);
    const int d = gen.op.d;
    if (state.rho.rows() != d || state.rho.cols() != d)
        throw std::invalid_argument("propagate: state dimension mismatch");

    const double span = t_target - state.t;
    const double h = std::min(params.pulse.sigma / 8.0, span);
    const int nsteps = std::max(1, static_cast<int>(std::ceil(span / h)));
    const double hh = span / nsteps;

    Eigen::MatrixXcd rho = state.rho;
    Eigen::Map<Eigen::VectorXcd> v(rho.data(), rho.size());
    double t = state.t;
    for (int s = 0; s < nsteps; ++s, t += hh) {
        const Eigen::MatrixXcd phi = interval_propagator(gen, params, t, t + hh);
        v = (phi * v).eval();
    }
    out.rho = rho;
    out.t = t_target;
    const double tr = out.rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-6)
        throw std::runtime_error("propagate: trace drift beyond 1e-6");
    return out;
}

double leaked_alpha(const QrtParams& params, double t) {
    const double k = params.kappa;
    const double sig = params.pulse.sigma;
    const double t0 = params.pulse.t0;
    const double om0 = params.pulse.peak();
    const double pref = k * om0 / (4.0 * std::sqrt(params.emitter.gamma));
    const double sq2s = std::sqrt(2.0) * sig;

    // I(t) = sigma sqrt(pi/2) e^M [erf(a) + erf(b)] written with erfcx so no
    // exponential overflows: M - a^2 = -(t-t0)^2/(2 sigma^2),
    // M - b^2 = -kappa t / 2 - t0^2/(2 sigma^2).
    const double a = (t - t0 - 0.5 * k * sig * sig) / sq2s;
    const double b = (t0 + 0.5 * k * sig * sig) / sq2s;
    const double m_val = 0.125 * k * k * sig * sig - 0.5 * k * (t - t0);
    const double ma2 = -0.5 * (t - t0) * (t - t0) / (sig * sig);
    const double mb2 = -0.5 * k * t - 0.5 * t0 * t0 / (sig * sig);

    double bracket;
    if (a <= 0.0) {
        bracket = std::exp(ma2) * erfcx_pos(-a) - std::exp(mb2) * erfcx_pos(b);
    } else {
        bracket = 2.0 * std::exp(m_val) - std::exp(ma2) * erfcx_pos(a) -
                  std::exp(mb2) * erfcx_pos(b);
    }
    return pref * sig * std::sqrt(0.5 * M_PI) * bracket;
}

CorrelationKernels qrt_g1_g2(const QrtParams& params, const TimeGrid& grid) {
    const Generator gen = make_generator(params);
    const int d = gen.op.d;
    const int d2 = d * d;
    const int n = grid.n;

    // per-interval propagators, shared by the forward pass and every QRT row
    std::vector<Eigen::MatrixXcd> phi(n > 0 ? n - 1 : 0);
    for (int k = 0; k + 1 < n; ++k)
        phi[k] = interval_propagator(gen, params, grid.t(k), grid.t(k + 1));

    std::vector<Eigen::VectorXcd> rho(n);
    {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d2);
        v(0) = 1.0;
        rho[0] = v;
        for (int k = 0; k + 1 < n; ++k) rho[k + 1] = phi[k] * rho[k];
    }

    const Eigen::VectorXcd r_a = trace_row(gen.op.a);
    const Eigen::VectorXcd r_ad = trace_row(gen.op.ad);
    const Eigen::VectorXcd r_n = trace_row(gen.op.n_cav);

    // single-time expectations and the classical leak
    Eigen::VectorXcd ea(n);
    Eigen::VectorXd pop(n), alpha(n);
    for (int k = 0; k < n; ++k) {
        ea(k) = r_a.cwiseProduct(rho[k]).sum();
        pop(k) = r_n.cwiseProduct(rho[k]).sum().real();
        alpha(k) = leaked_alpha(params, grid.t(k));
    }

    // detected field a_out = sqrt(kappa/2) a - x alpha(t); see header note
    const complexd x = params.leak.factor();
    Eigen::VectorXcd beta(n);
    for (int k = 0; k < n; ++k) beta(k) = -x * alpha(k);

    const double kh = 0.5 * params.kappa;
    const double sqk = std::sqrt(kh);
    const double c32 = kh * sqk;

    CorrelationKernels out;
    out.grid = grid;
    out.g1.resize(n, n);
    out.g2.resize(n, n);

    Eigen::MatrixXcd rho_m(d, d), cond1_m(d, d), cond2_m(d, d);
    for (int t1 = 0; t1 < n; ++t1) {
        rho_m = Eigen::Map<const Eigen::MatrixXcd>(rho[t1].data(), d, d);
        cond1_m = gen.op.a * rho_m * gen.op.ad;  // a rho a+
        cond2_m = gen.op.a * rho_m;              // a rho
        Eigen::VectorXcd cond1 = Eigen::Map<Eigen::VectorXcd>(cond1_m.data(), d2);
        Eigen::VectorXcd cond2 = Eigen::Map<Eigen::VectorXcd>(cond2_m.data(), d2);

        const complexd b1 = beta(t1);
        const double ab1 = std::norm(b1);
        for (int t2 = t1; t2 < n; ++t2) {
            if (t2 > t1) {
                cond1 = (phi[t2 - 1] * cond1).eval();
                cond2 = (phi[t2 - 1] * cond2).eval();
            }
            const complexd q_adada = r_n.cwiseProduct(cond1).sum();
            const complexd q_a_ada = r_a.cwiseProduct(cond1).sum();
            const complexd q_adaa = r_n.cwiseProduct(cond2).sum();
            const complexd q_aa = r_a.cwiseProduct(cond2).sum();
            const complexd q_ada = r_ad.cwiseProduct(cond2).sum();  // <a+(t2) a(t1)>

            const complexd b2 = beta(t2);
            const double ab2 = std::norm(b2);

            double g2v = kh * kh * q_adada.real();
            g2v += 2.0 * std::real(std::conj(b1) * c32 * q_adaa);
            g2v += 2.0 * std::real(std::conj(b2) * c32 * q_a_ada);
            g2v += 2.0 * std::real(std::conj(b1) * std::conj(b2) * kh * q_aa);
            g2v += ab1 * kh * pop(t2) + ab2 * kh * pop(t1);
            g2v += 2.0 * std::real(b1 * std::conj(b2) * kh * std::conj(q_ada));
            g2v += 2.0 * std::real(b1 * ab2 * sqk * std::conj(ea(t1)));
            g2v += 2.0 * std::real(b2 * ab1 * sqk * std::conj(ea(t2)));
            g2v += ab1 * ab2;
            out.g2(t1, t2) = g2v;
            out.g2(t2, t1) = g2v;

            const complexd g1v = kh * std::conj(q_ada) +
                                 sqk * (b2 * std::conj(ea(t1)) + std::conj(b1) * ea(t2)) +
                                 std::conj(b1) * b2;
            out.g1(t1, t2) = g1v;
            out.g1(t2, t1) = std::conj(g1v);
        }
    }

    double nbar = 0.0;
    for (int i = 0; i < n; ++i) nbar += grid.w(i) * out.g1(i, i).real();
    out.nbar = nbar;
    return out;
}

QrtPopulations qrt_populations(const QrtParams& params, const TimeGrid& grid) {
    const Generator gen = make_generator(params);
    const int d = gen.op.d;
    const int n = grid.n;

    QrtPopulations out;
    out.sigma_ee.resize(n);
    out.cavity_n.resize(n);
    out.trace.resize(n);
    out.a_expect.resize(n);
    out.min_eigenvalue = 0.0;

    const Eigen::VectorXcd r_see = trace_row(gen.op.see);
    const Eigen::VectorXcd r_n = trace_row(gen.op.n_cav);
    const Eigen::VectorXcd r_a = trace_row(gen.op.a);
    const Eigen::VectorXcd r_id = trace_row(Eigen::MatrixXcd::Identity(d, d));

    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d * d);
    v(0) = 1.0;
    for (int k = 0; k < n; ++k) {
        if (k > 0) {
            const Eigen::MatrixXcd phi =
                interval_propagator(gen, params, grid.t(k - 1), grid.t(k));
            v = (phi * v).eval();
        }
        out.sigma_ee(k) = r_see.cwiseProduct(v).sum().real();
        out.cavity_n(k) = r_n.cwiseProduct(v).sum().real();
        out.a_expect(k) = r_a.cwiseProduct(v).sum();
        out.trace(k) = r_id.cwiseProduct(v).sum().real();
        if (k % 16 == 0 || k == n - 1) {
            Eigen::MatrixXcd rho = Eigen::Map<Eigen::MatrixXcd>(v.data(), d, d);
            Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
            out.min_eigenvalue = std::min(out.min_eigenvalue, es.eigenvalues().minCoeff());
        }
    }
    return out;
}

}  // namespace spsim
