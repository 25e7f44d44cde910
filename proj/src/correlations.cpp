#include "spsim/correlations.hpp"

#include <stdexcept>

namespace spsim {

namespace detail {

KernelInputs build_inputs(const AnsatzSolution& sol) {
    const int n = sol.grid.n;
    KernelInputs in;
    in.grid = sol.grid;
    in.E = sol.leaked.samples;
    in.phi1g = sol.phi1g_final;
    in.phi1e = sol.phi1e_final;
    in.cg = sol.cg(n - 1);
    in.ce = sol.ce(n - 1);

    const Eigen::VectorXd w = sol.grid.weights();
    in.Y = sol.phi2 + sol.phi2.transpose();
    in.m1.noalias() = in.Y.adjoint() * (w.asDiagonal() * in.Y);
    in.cross.noalias() = in.Y.transpose() * (w.array() * in.phi1g.conjugate().array()).matrix();

    in.p1g = (w.array() * in.phi1g.array().abs2()).sum();
    in.p1e = (w.array() * in.phi1e.array().abs2()).sum();
    double p2 = 0.0;
    for (int j = 0; j < n; ++j) {
        double col = 0.0;
        for (int k = j + 1; k < n; ++k) col += w(k) * std::norm(sol.phi2(k, j));
        p2 += w(j) * col;
    }
    in.p2 = p2;
    return in;
}

CorrelationKernels assemble_kernels(const KernelInputs& in) {
    const int n = in.grid.n;
    CorrelationKernels out;
    out.grid = in.grid;
    out.g1.resize(n, n);
    out.g2.resize(n, n);

    const double pnorm = in.p1g + in.p1e + in.p2;

    // single-annihilation residuals in the vacuum and excited sectors
    Eigen::VectorXcd ag = in.E * in.cg + in.phi1g;
    Eigen::VectorXcd ae = in.E * in.ce + in.phi1e;

    for (int j = 0; j < n; ++j) {       // t2 (column)
        const complexd E2 = in.E(j);
        for (int i = 0; i < n; ++i) {   // t1 (row)
            const complexd E1 = in.E(i);
            const complexd E1c = std::conj(E1);

            out.g1(i, j) = std::conj(ag(i)) * ag(j) + std::conj(ae(i)) * ae(j) +
                           E1c * E2 * pnorm + E1c * in.cross(j) +
                           E2 * std::conj(in.cross(i)) + in.m1(i, j);

            // two-annihilation residuals
            const complexd r0 = E1 * E2 * in.cg + E1 * in.phi1g(j) + E2 * in.phi1g(i) +
                                in.Y(i, j);
            const complexd re = E1 * E2 * in.ce + E1 * in.phi1e(j) + E2 * in.phi1e(i);
            const double a1 = std::norm(E1), a2 = std::norm(E2);
            double g2v = std::norm(r0) + std::norm(re);
            g2v += a1 * a2 * (in.p1g + in.p1e + in.p2);
            g2v += a1 * in.m1(j, j).real() + a2 * in.m1(i, i).real();
            g2v += 2.0 * std::real(a1 * std::conj(E2) * in.cross(j));
            g2v += 2.0 * std::real(a2 * E1c * in.cross(i));
            g2v += 2.0 * std::real(E1c * E2 * in.m1(j, i));
            out.g2(i, j) = g2v;
        }
    }

    double nbar = 0.0;
    for (int i = 0; i < n; ++i) nbar += in.grid.w(i) * out.g1(i, i).real();
    out.nbar = nbar;
    return out;
}

}  // namespace detail

CorrelationKernels build_kernels(const AnsatzSolution& sol) {
    return detail::assemble_kernels(detail::build_inputs(sol));
}

Eigen::MatrixXcd g1_kernel(const AnsatzSolution& sol) { return build_kernels(sol).g1; }
Eigen::MatrixXd g2_kernel(const AnsatzSolution& sol) { return build_kernels(sol).g2; }

double mean_photons(const CorrelationKernels& kernels) {
    double nbar = 0.0;
    for (int i = 0; i < kernels.grid.n; ++i)
        nbar += kernels.grid.w(i) * kernels.g1(i, i).real();
    return nbar;
}

double g2_integrated(const CorrelationKernels& kernels) {
    const int n = kernels.grid.n;
    const Eigen::VectorXd w = kernels.grid.weights();
    const double nbar = mean_photons(kernels);
    if (!(nbar > 0.0))
        throw std::domain_error("g2_integrated: mean photon number vanishes");
    const double num = w.transpose() * kernels.g2 * w;
    return num / (nbar * nbar);
}

}  // namespace spsim
