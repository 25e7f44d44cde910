#include "spsim/hom.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spsim {

namespace {

struct Integrals {
    double g2 = 0.0;      // iint G2
    double g1sq = 0.0;    // iint |G1(t,t')|^2
    double nbar = 0.0;    // int G1(t,t)
};

Integrals integrate(const CorrelationKernels& k) {
    const Eigen::VectorXd w = k.grid.weights();
    Integrals s;
    s.g2 = w.transpose() * k.g2 * w;
    s.g1sq = w.transpose() * k.g1.cwiseAbs2() * w;
    for (int i = 0; i < k.grid.n; ++i) s.nbar += w(i) * k.g1(i, i).real();
    return s;
}

}  // namespace

std::pair<double, double> coincidence(const CorrelationKernels& kernels) {
    const Integrals s = integrate(kernels);
    const double pcc = 0.25 * (2.0 * s.g2 + 2.0 * s.nbar * s.nbar - 2.0 * s.g1sq);
    const double pcc_dist = 0.25 * (2.0 * s.g2 + 2.0 * s.nbar * s.nbar);
    return {pcc, pcc_dist};
}

double visibility(const CorrelationKernels& kernels) {
    const Integrals s = integrate(kernels);
    const double den = s.g2 + s.nbar * s.nbar;
    if (!(den > 0.0)) throw std::domain_error("visibility: no photons");
    return s.g1sq / den;
}

double f_ratio(double v, double g2, double eps, bool* ill_conditioned) {
    if (ill_conditioned) *ill_conditioned = g2 < eps;
    if (g2 <= 0.0) return std::numeric_limits<double>::infinity();
    return (1.0 - v) / g2;
}

HomReport make_hom_report(const CorrelationKernels& kernels, double f_eps) {
    const Integrals s = integrate(kernels);
    HomReport r;
    r.nbar = s.nbar;
    r.nyquist_warn = kernels.nyquist_warn;
    const double den = s.g2 + s.nbar * s.nbar;
    if (!(den > 0.0)) throw std::domain_error("make_hom_report: no photons");
    r.pcc = 0.25 * (2.0 * s.g2 + 2.0 * s.nbar * s.nbar - 2.0 * s.g1sq);
    r.pcc_dist = 0.25 * (2.0 * s.g2 + 2.0 * s.nbar * s.nbar);
    r.visibility = s.g1sq / den;
    r.g2 = s.g2 / (s.nbar * s.nbar);
    r.ill_conditioned_f = r.g2 < f_eps;
    r.f_ratio = f_ratio(r.visibility, r.g2, f_eps);
    return r;
}

QuickHom quick_hom_report(const AnsatzSolution& sol) {
    const int n = sol.grid.n;
    const Eigen::VectorXd w = sol.grid.weights();
    const Eigen::VectorXcd& E = sol.leaked.samples;
    const Eigen::VectorXcd& f1g = sol.phi1g_final;
    const Eigen::VectorXcd& f1e = sol.phi1e_final;
    const complexd cg = sol.cg(n - 1), ce = sol.ce(n - 1);

    Eigen::MatrixXcd Y = sol.phi2 + sol.phi2.transpose();

    const double p1g = (w.array() * f1g.array().abs2()).sum();
    const double p1e = (w.array() * f1e.array().abs2()).sum();
    double p2 = 0.0;
    for (int j = 0; j < n; ++j) {
        double col = 0.0;
        for (int k = j + 1; k < n; ++k) col += w(k) * std::norm(sol.phi2(k, j));
        p2 += w(j) * col;
    }
    const double pnorm = p1g + p1e + p2;

    Eigen::VectorXd m1diag = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < n; ++t)
        for (int e = 0; e < n; ++e) m1diag(t) += w(e) * std::norm(Y(e, t));
    Eigen::VectorXcd cross = Y.transpose() * (w.array() * f1g.conjugate().array()).matrix();
    Eigen::VectorXcd ag = E * cg + f1g;
    Eigen::VectorXcd ae = E * ce + f1e;

    QuickHom out;
    double nbar = 0.0;
    for (int i = 0; i < n; ++i)
        nbar += w(i) * (std::norm(ag(i)) + std::norm(ae(i)) + pnorm * std::norm(E(i)) +
                        2.0 * std::real(std::conj(E(i)) * cross(i)) + m1diag(i));
    out.nbar = nbar;

    // G1 = sum_r conj(p_r(t1)) q_r(t2) + M1 with M1 = Y^H W Y (never formed)
    constexpr int R = 5;
    std::array<Eigen::VectorXcd, R> pv = {ag, ae, E, E, cross};
    std::array<Eigen::VectorXcd, R> qv = {ag, ae, (pnorm * E).eval(), cross, E};

    complexd dyad_sq(0.0, 0.0);
    for (int r = 0; r < R; ++r)
        for (int s = 0; s < R; ++s) {
            complexd a(0.0, 0.0), b(0.0, 0.0);
            for (int t = 0; t < n; ++t) {
                a += w(t) * std::conj(pv[r](t)) * pv[s](t);
                b += w(t) * qv[r](t) * std::conj(qv[s](t));
            }
            dyad_sq += a * b;
        }

    // contraction helper: (conj(Y) * (w o v))(e)
    auto pvec = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
        return Y.conjugate() * (w.array() * v.array()).matrix();
    };
    complexd middle(0.0, 0.0);
    for (int r = 0; r < R; ++r) {
        const Eigen::VectorXcd pr = pvec(pv[r]);
        const Eigen::VectorXcd qr = pvec(qv[r]);
        for (int e = 0; e < n; ++e) middle += w(e) * pr(e) * std::conj(qr(e));
    }
    const double g1_sq = dyad_sq.real() + 2.0 * middle.real();  // + iint |M1|^2 (dropped)

    // iint G2
    double s_r = 0.0;
    for (int j = 0; j < n; ++j) {
        const complexd E2 = E(j);
        for (int i = 0; i < n; ++i) {
            const complexd E1 = E(i);
            const complexd r0 = E1 * E2 * cg + E1 * f1g(j) + E2 * f1g(i) + Y(i, j);
            const complexd re = E1 * E2 * ce + E1 * f1e(j) + E2 * f1e(i);
            s_r += w(i) * w(j) * (std::norm(r0) + std::norm(re));
        }
    }
    const double nl = (w.array() * E.array().abs2()).sum();
    const double m1tr = (w.array() * m1diag.array()).sum();  // = 2 p2
    complexd cross_e(0.0, 0.0);
    for (int t = 0; t < n; ++t) cross_e += w(t) * std::conj(E(t)) * cross(t);
    const Eigen::VectorXcd u = pvec(E);
    double u_sq = 0.0;
    for (int e = 0; e < n; ++e) u_sq += w(e) * std::norm(u(e));

    const double g2_int = s_r + nl * nl * pnorm + 2.0 * nl * m1tr +
                          4.0 * nl * cross_e.real() + 2.0 * u_sq;

    out.g2 = g2_int / (nbar * nbar);
    const double den = g2_int + nbar * nbar;
    out.visibility = g1_sq / den;
    out.v_error_bound = (2.0 * p2) * (2.0 * p2) / den;
    out.f_ratio = out.g2 > 0.0 ? (1.0 - out.visibility) / out.g2
                               : std::numeric_limits<double>::infinity();
    return out;
}

FockToyState::FockToyState(double p0_, double p1_, double pn_, double w_psi_, double w_other_,
                           int n_psi_, int n_other_)
    : p0(p0_), p1(p1_), pn(pn_), w_psi(w_psi_), w_other(w_other_),
      n_psi(n_psi_), n_other(n_other_) {
    const double tol = 1e-12;
    if (p0 < -tol || p1 < -tol || pn < -tol || std::abs(p0 + p1 + pn - 1.0) > 1e-9)
        throw std::invalid_argument("FockToyState: probabilities must be >= 0 and sum to 1");
    if (w_psi < -tol || w_other < -tol || std::abs(w_psi + w_other - 1.0) > 1e-9)
        throw std::invalid_argument("FockToyState: weights must be >= 0 and sum to 1");
    if (n_psi < 0 || n_other < 0 || n_psi + n_other != 2)
        throw std::invalid_argument("FockToyState: two-photon occupation must hold 2 photons");
}

FockToyMetrics fock_toy_f(const FockToyState& s) {
    FockToyMetrics m;
    const double nmean = s.p1 + 2.0 * s.pn;
    const double nn1 = 2.0 * s.pn;  // <n(n-1)> of the mixture
    if (!(nmean > 0.0)) throw std::invalid_argument("fock_toy_f: state holds no photons");

    // first-order coherence in the two-mode basis; the toy states carry no
    // off-diagonal mode coherence
    const double g11 = s.p1 * s.w_psi + s.pn * s.n_psi;
    const double g22 = s.p1 * s.w_other + s.pn * s.n_other;
    m.g2 = nn1 / (nmean * nmean);
    m.visibility = (g11 * g11 + g22 * g22) / (nn1 + nmean * nmean);

    // <n_{!=l}>_{n>1} summed over modes with the single-photon weights
    const double n_neq = s.w_psi * s.n_other + s.w_other * s.n_psi;
    const double n_eq = s.w_psi * s.n_psi + s.w_other * s.n_other;
    if (s.pn > 0.0) {
        m.f = 1.0 + s.p1 * 2.0 * n_neq / 2.0;
        m.b = 2.0 * s.p1 * n_eq / 2.0;
        m.b_prime = 1.0 + 2.0 * s.p1 * 2.0 / 2.0;
    } else {
        m.f = 1.0;
        m.b = 0.0;
        m.b_prime = 1.0 + 2.0 * s.p1;
    }
    return m;
}

}  // namespace spsim
