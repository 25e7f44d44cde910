#include "spsim/ansatz.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace spsim {

namespace {

constexpr complexd I(0.0, 1.0);

// Right-hand side of the two-level pair in the rotated frame,
//   a' = i (Omega/2) e^{-i delta t} b
//   b' = i (Omega/2) e^{+i delta t} a - (gamma/2) b.
// Shared by the emitter amplitudes (c_g, c~_e) and every one-photon row
// (phi_1g, phi~_1e), which obey the same equations between emissions.
struct PairRhs {
    const EmitterParams& em;
    const PulseParams& pu;

    inline void operator()(double t, const complexd& a, const complexd& b,
                           complexd& da, complexd& db) const {
        const double om = 0.5 * rabi_envelope(pu, t);
        complexd ph(1.0, 0.0);
        if (em.delta != 0.0) ph = std::polar(1.0, em.delta * t);
        da = I * om * std::conj(ph) * b;
        db = I * om * ph * a - 0.5 * em.gamma * b;
    }
};

inline void rk4_step(const PairRhs& f, double t, double h, complexd& a, complexd& b) {
    complexd k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
    f(t, a, b, k1a, k1b);
    f(t + 0.5 * h, a + 0.5 * h * k1a, b + 0.5 * h * k1b, k2a, k2b);
    f(t + 0.5 * h, a + 0.5 * h * k2a, b + 0.5 * h * k2b, k3a, k3b);
    f(t + h, a + h * k3a, b + h * k3b, k4a, k4b);
    a += h / 6.0 * (k1a + 2.0 * (k2a + k3a) + k4a);
    b += h / 6.0 * (k1b + 2.0 * (k2b + k3b) + k4b);
}

// Substep counts per grid interval so the per-step rotation stays below
// opts.max_phase_per_substep. The envelope maximum inside the interval is
// evaluated analytically so that a pulse narrower than dt is not skipped.
std::vector<int> substep_counts(const EmitterParams& em, const PulseParams& pu,
                                const TimeGrid& grid, const SolveOptions& opts) {
    std::vector<int> m(std::max(grid.n - 1, 0));
    for (int k = 0; k + 1 < grid.n; ++k) {
        const double ta = grid.t(k), tb = grid.t(k + 1);
        const double tpk = std::clamp(pu.t0, ta, tb);
        const double rate = rabi_envelope(pu, tpk) + 0.5 * em.gamma + std::abs(em.delta);
        const double raw = grid.dt * rate / opts.max_phase_per_substep;
        m[k] = std::max(1, std::min(static_cast<int>(std::ceil(raw)), 200000));
    }
    return m;
}

inline void advance_interval(const PairRhs& f, const TimeGrid& grid, int k, int m,
                             complexd& a, complexd& b) {
    const double h = grid.dt / m;
    double t = grid.t(k);
    for (int s = 0; s < m; ++s, t += h) rk4_step(f, t, h, a, b);
}

inline complexd emission_phase(const EmitterParams& em, double gamma_sqrt, double t) {
    // i sqrt(gamma) e^{-i delta t}
    if (em.delta == 0.0) return complexd(0.0, gamma_sqrt);
    return I * gamma_sqrt * std::polar(1.0, -em.delta * t);
}

}  // namespace

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> integrate_emitter(
    const EmitterParams& emitter, const PulseParams& pulse, const TimeGrid& grid,
    const SolveOptions& opts) {
    const PairRhs f{emitter, pulse};
    const auto m = substep_counts(emitter, pulse, grid, opts);
    Eigen::VectorXcd cg(grid.n), ce(grid.n);
    complexd a(1.0, 0.0), b(0.0, 0.0);
    cg(0) = a;
    ce(0) = b;
    for (int k = 0; k + 1 < grid.n; ++k) {
        advance_interval(f, grid, k, m[k], a, b);
        cg(k + 1) = a;
        ce(k + 1) = b;
    }
    return {std::move(cg), std::move(ce)};
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> integrate_one_photon(
    const EmitterParams& emitter, const PulseParams& pulse, const TimeGrid& grid,
    const Eigen::VectorXcd& ce, const SolveOptions& opts) {
    const int n = grid.n;
    if (ce.size() != n) throw std::invalid_argument("integrate_one_photon: ce size mismatch");
    const PairRhs f{emitter, pulse};
    const auto m = substep_counts(emitter, pulse, grid, opts);
    const double sg = std::sqrt(emitter.gamma);

    Eigen::MatrixXcd hg = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd he = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        complexd a = emission_phase(emitter, sg, grid.t(j)) * ce(j);
        complexd b(0.0, 0.0);
        hg(j, j) = a;
        for (int k = j; k + 1 < n; ++k) {
            advance_interval(f, grid, k, m[k], a, b);
            hg(k + 1, j) = a;
            he(k + 1, j) = b;
        }
    }
    return {std::move(hg), std::move(he)};
}

Eigen::MatrixXcd extract_phi2(const EmitterParams& emitter, const TimeGrid& grid,
                              const Eigen::MatrixXcd& phi1e_hist) {
    const int n = grid.n;
    if (phi1e_hist.rows() != n || phi1e_hist.cols() != n)
        throw std::invalid_argument("extract_phi2: history size mismatch");
    const double sg = std::sqrt(emitter.gamma);
    Eigen::MatrixXcd phi2 = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k)
            phi2(k, j) = emission_phase(emitter, sg, grid.t(k)) * phi1e_hist(k, j);
    }
    return phi2;
}

AnsatzSolution solve_ansatz(const EmitterParams& emitter, const LeakageParams& leak,
                            const PulseParams& pulse, const TimeGrid& grid,
                            const SolveOptions& opts) {
    const int n = grid.n;
    if (n < 2) throw std::invalid_argument("solve_ansatz: grid too small");

    AnsatzSolution sol;
    sol.emitter = emitter;
    sol.leak = leak;
    sol.pulse = pulse;
    sol.grid = grid;
    sol.leaked = leaked_field(leak, pulse, emitter, grid);

    const PairRhs f{emitter, pulse};
    const auto m = substep_counts(emitter, pulse, grid, opts);
    const double sg = std::sqrt(emitter.gamma);
    const double dt = grid.dt;

    // emitter pass
    sol.cg.resize(n);
    sol.ce.resize(n);
    {
        complexd a(1.0, 0.0), b(0.0, 0.0);
        sol.cg(0) = a;
        sol.ce(0) = b;
        for (int k = 0; k + 1 < n; ++k) {
            advance_interval(f, grid, k, m[k], a, b);
            sol.cg(k + 1) = a;
            sol.ce(k + 1) = b;
        }
    }

    sol.phi2 = Eigen::MatrixXcd::Zero(n, n);
    sol.phi1g_final.resize(n);
    sol.phi1e_final.resize(n);
    if (opts.store_histories) {
        sol.phi1g_hist = Eigen::MatrixXcd::Zero(n, n);
        sol.phi1e_hist = Eigen::MatrixXcd::Zero(n, n);
    }

    // Running norm bookkeeping. onep(k) accumulates the t_e integral of the
    // one-photon densities at time t_k; b2(k) the inner t_e1 integral of
    // |phi2(t_k, .)|^2 with its own endpoint weights.
    Eigen::VectorXd onep, b2;
    if (opts.track_norm_series) {
        onep = Eigen::VectorXd::Zero(n);
        b2 = Eigen::VectorXd::Zero(n);
    }

    // one-photon rows, one per first-emission node
    for (int j = 0; j < n; ++j) {
        complexd a = emission_phase(emitter, sg, grid.t(j)) * sol.ce(j);
        complexd b(0.0, 0.0);
        if (opts.store_histories) sol.phi1g_hist(j, j) = a;
        if (opts.track_norm_series && j > 0) onep(j) += 0.5 * dt * std::norm(a);
        const double wj = (j == 0) ? 0.5 * dt : dt;
        for (int k = j; k + 1 < n; ++k) {
            advance_interval(f, grid, k, m[k], a, b);
            const int kk = k + 1;
            const complexd p2 = emission_phase(emitter, sg, grid.t(kk)) * b;
            sol.phi2(kk, j) = p2;
            if (opts.store_histories) {
                sol.phi1g_hist(kk, j) = a;
                sol.phi1e_hist(kk, j) = b;
            }
            if (opts.track_norm_series) {
                onep(kk) += wj * (std::norm(a) + std::norm(b));
                b2(kk) += wj * std::norm(p2);
            }
        }
        sol.phi1g_final(j) = a;
        sol.phi1e_final(j) = (j == n - 1) ? complexd(0.0, 0.0) : b;
    }

    // Assemble N(t_k). The emission-axis trapezoid over [0, t_k] gives row
    // j = k weight dt/2 (added at birth above), interior rows dt, row 0 dt/2;
    // the t_e2 axis of the phi2 integral gets the same treatment via a
    // running sum with the moving endpoint at half weight.
    if (opts.track_norm_series) {
        sol.norm_series.resize(n);
        double interior = 0.0;
        for (int k = 0; k < n; ++k) {
            interior += (k == 0 ? 0.5 : 1.0) * dt * b2(k);
            const double p2k = interior - 0.5 * dt * b2(k);
            sol.norm_series(k) =
                std::norm(sol.cg(k)) + std::norm(sol.ce(k)) + onep(k) + p2k;
        }
    }

    // final norm from the stored final-time objects (independent of the
    // running bookkeeping; used when the series is disabled)
    {
        double onephT = 0.0;
        for (int j = 0; j < n; ++j)
            onephT += grid.w(j) * (std::norm(sol.phi1g_final(j)) + std::norm(sol.phi1e_final(j)));
        double p2T = 0.0;
        for (int j = 0; j < n; ++j) {
            double col = 0.0;
            for (int k = j + 1; k < n; ++k) col += grid.w(k) * std::norm(sol.phi2(k, j));
            p2T += grid.w(j) * col;
        }
        sol.norm_final = std::norm(sol.cg(n - 1)) + std::norm(sol.ce(n - 1)) + onephT + p2T;
    }
    sol.norm_error = std::abs(sol.norm_final - 1.0);
    sol.residual_excited = std::norm(sol.ce(n - 1));
    sol.converged = sol.norm_error <= opts.norm_tolerance;
    return sol;
}

// ---------------------------------------------------------------------------
// binary dump (x86-64 little endian; format version 1)

namespace {

constexpr uint32_t kMagic = 0x53505341;  // "SPSA"
constexpr uint32_t kVersion = 1;

void put_u32(std::ofstream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::ofstream& os, uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void put_f64(std::ofstream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void put_vec(std::ofstream& os, const Eigen::VectorXcd& v) {
    os.write(reinterpret_cast<const char*>(v.data()), sizeof(complexd) * v.size());
}

uint32_t get_u32(std::ifstream& is) {
    uint32_t v;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
uint64_t get_u64(std::ifstream& is) {
    uint64_t v;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
double get_f64(std::ifstream& is) {
    double v;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
void get_vec(std::ifstream& is, Eigen::VectorXcd& v, int n) {
    v.resize(n);
    is.read(reinterpret_cast<char*>(v.data()), sizeof(complexd) * n);
}

}  // namespace

void save_solution(const std::string& path, const AnsatzSolution& sol) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_solution: cannot open " + path);
    put_u32(os, kMagic);
    put_u32(os, kVersion);
    put_u64(os, static_cast<uint64_t>(sol.grid.n));
    for (double v : {sol.grid.t_start, sol.grid.t_end, sol.grid.dt, sol.emitter.gamma,
                     sol.emitter.gamma_d, sol.emitter.delta, sol.leak.magnitude,
                     sol.leak.phase, sol.pulse.sigma, sol.pulse.t0, sol.pulse.area,
                     sol.norm_final, sol.norm_error, sol.residual_excited})
        put_f64(os, v);
    put_vec(os, sol.cg);
    put_vec(os, sol.ce);
    put_vec(os, sol.phi1g_final);
    put_vec(os, sol.phi1e_final);
    put_vec(os, sol.leaked.samples);
    // phi2 row-major
    const int n = sol.grid.n;
    std::vector<complexd> row(n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) row[c] = sol.phi2(r, c);
        os.write(reinterpret_cast<const char*>(row.data()), sizeof(complexd) * n);
    }
    if (!os) throw std::runtime_error("save_solution: write failure on " + path);
}

AnsatzSolution load_solution(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_solution: cannot open " + path);
    if (get_u32(is) != kMagic) throw std::runtime_error("load_solution: bad magic");
    if (get_u32(is) != kVersion) throw std::runtime_error("load_solution: bad version");
    const int n = static_cast<int>(get_u64(is));
    const double t_start = get_f64(is), t_end = get_f64(is), dt = get_f64(is);
    const double gamma = get_f64(is), gamma_d = get_f64(is), delta = get_f64(is);
    const double mag = get_f64(is), phase = get_f64(is);
    const double sigma = get_f64(is), t0 = get_f64(is), area = get_f64(is);

    AnsatzSolution sol;
    sol.emitter = EmitterParams(gamma, gamma_d, delta);
    sol.leak = LeakageParams(mag, phase);
    sol.pulse = PulseParams(sigma, t0, area);
    sol.grid = TimeGrid(t_start, t_end, n);
    if (std::abs(sol.grid.dt - dt) > 1e-12 * std::abs(dt))
        throw std::runtime_error("load_solution: inconsistent grid spacing");
    sol.norm_final = get_f64(is);
    sol.norm_error = get_f64(is);
    sol.residual_excited = get_f64(is);
    get_vec(is, sol.cg, n);
    get_vec(is, sol.ce, n);
    get_vec(is, sol.phi1g_final, n);
    get_vec(is, sol.phi1e_final, n);
    get_vec(is, sol.leaked.samples, n);
    sol.phi2.resize(n, n);
    std::vector<complexd> row(n);
    for (int r = 0; r < n; ++r) {
        is.read(reinterpret_cast<char*>(row.data()), sizeof(complexd) * n);
        for (int c = 0; c < n; ++c) sol.phi2(r, c) = row[c];
    }
    if (!is) throw std::runtime_error("load_solution: truncated file " + path);
    sol.converged = sol.norm_error <= 1e-4;
    return sol;
}

}  // namespace spsim
