#include "spsim/spectral_filter.hpp"

#include <fftw3.h>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace spsim {

FilterSpec::FilterSpec(double gamma_f_, double omega_c_) : gamma_f(gamma_f_), omega_c(omega_c_) {
    if (!(gamma_f > 0.0) || !std::isfinite(gamma_f))
        throw std::invalid_argument("FilterSpec: gamma_f must be positive and finite");
    if (!std::isfinite(omega_c)) throw std::invalid_argument("FilterSpec: omega_c must be finite");
}

complexd transmission(const FilterSpec& spec, double omega) {
    return spec.gamma_f / (complexd(0.0, omega - spec.omega_c) - spec.gamma_f);
}

double nyquist_transmission(const FilterSpec& spec, const TimeGrid& grid) {
    const double wny = M_PI / grid.dt;
    return std::max(std::abs(transmission(spec, wny)), std::abs(transmission(spec, -wny)));
}

namespace {

int pad_samples(const FilterSpec& spec, const TimeGrid& grid, double gamma_emitter) {
    const double tail = std::max(10.0 / spec.gamma_f, 4.0 / gamma_emitter);
    return static_cast<int>(std::ceil(spec.pad_multiplier * tail / grid.dt));
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

// One reusable in-place FFT pair of a fixed length.
class FftPlan {
  public:
    explicit FftPlan(int len) : len_(len), buf_(len) {
        auto* d = reinterpret_cast<fftw_complex*>(buf_.data());
        fwd_ = fftw_plan_dft_1d(len_, d, d, FFTW_BACKWARD, FFTW_ESTIMATE);  // e^{+i w t}
        inv_ = fftw_plan_dft_1d(len_, d, d, FFTW_FORWARD, FFTW_ESTIMATE);   // e^{-i w t}
    }
    ~FftPlan() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    int len() const { return len_; }
    complexd* data() { return buf_.data(); }

    void zero_tail(int n) {
        std::fill(buf_.begin() + n, buf_.end(), complexd(0.0, 0.0));
    }
    void forward() { fftw_execute(fwd_); }
    void inverse() { fftw_execute(inv_); }

    // signed DFT frequency of bin k for spacing dt
    double omega(int k, double dt) const {
        const int kk = (k <= len_ / 2) ? k : k - len_;
        return 2.0 * M_PI * kk / (len_ * dt);
    }

  private:
    int len_;
    std::vector<complexd> buf_;
    fftw_plan fwd_, inv_;
};

void filter_in_plan(FftPlan& plan, const FilterSpec& spec, double dt, bool conj_kernel) {
    plan.forward();
    complexd* d = plan.data();
    for (int k = 0; k < plan.len(); ++k) {
        complexd t = transmission(spec, plan.omega(k, dt));
        if (conj_kernel) t = std::conj(t);
        d[k] *= t / static_cast<double>(plan.len());
    }
    plan.inverse();
}

}  // namespace

Eigen::VectorXcd apply_filter_1d(const Eigen::VectorXcd& a, const TimeGrid& grid,
                                 const FilterSpec& spec, double gamma_emitter,
                                 bool keep_padding) {
    const int n = static_cast<int>(a.size());
    FftPlan plan(next_pow2(n + pad_samples(spec, grid, gamma_emitter)));
    std::copy(a.data(), a.data() + n, plan.data());
    plan.zero_tail(n);
    filter_in_plan(plan, spec, grid.dt, false);
    return Eigen::Map<Eigen::VectorXcd>(plan.data(), keep_padding ? plan.len() : n);
}

Eigen::MatrixXcd apply_filter_2d(const Eigen::MatrixXcd& a, const TimeGrid& grid,
                                 const FilterSpec& spec, double gamma_emitter,
                                 bool bra_axis0) {
    const int n0 = static_cast<int>(a.rows());
    const int n1 = static_cast<int>(a.cols());
    Eigen::MatrixXcd out(n0, n1);
    // axis 1 (second index, ket): filter every row
    {
        FftPlan plan(next_pow2(n1 + pad_samples(spec, grid, gamma_emitter)));
        for (int i = 0; i < n0; ++i) {
            for (int j = 0; j < n1; ++j) plan.data()[j] = a(i, j);
            plan.zero_tail(n1);
            filter_in_plan(plan, spec, grid.dt, false);
            for (int j = 0; j < n1; ++j) out(i, j) = plan.data()[j];
        }
    }
    // axis 0 (first index): ket, or bra via conj(filter(conj(.)))
    {
        FftPlan plan(next_pow2(n0 + pad_samples(spec, grid, gamma_emitter)));
        for (int j = 0; j < n1; ++j) {
            if (bra_axis0)
                for (int i = 0; i < n0; ++i) plan.data()[i] = std::conj(out(i, j));
            else
                for (int i = 0; i < n0; ++i) plan.data()[i] = out(i, j);
            plan.zero_tail(n0);
            filter_in_plan(plan, spec, grid.dt, false);
            if (bra_axis0)
                for (int i = 0; i < n0; ++i) out(i, j) = std::conj(plan.data()[i]);
            else
                for (int i = 0; i < n0; ++i) out(i, j) = plan.data()[i];
        }
    }
    return out;
}

std::pair<Eigen::VectorXcd, Eigen::VectorXd> forward_spectrum(const Eigen::VectorXcd& a,
                                                              double dt, int padded_len) {
    if (padded_len < a.size()) throw std::invalid_argument("forward_spectrum: pad too short");
    FftPlan plan(padded_len);
    std::copy(a.data(), a.data() + a.size(), plan.data());
    plan.zero_tail(static_cast<int>(a.size()));
    plan.forward();
    Eigen::VectorXcd spec(padded_len);
    Eigen::VectorXd omegas(padded_len);
    for (int k = 0; k < padded_len; ++k) {
        spec(k) = plan.data()[k] * dt;
        omegas(k) = plan.omega(k, dt);
    }
    return {std::move(spec), std::move(omegas)};
}

namespace {

bool check_nyquist(const FilterSpec& spec, const TimeGrid& grid, NyquistPolicy policy) {
    if (nyquist_transmission(spec, grid) <= 0.05) return false;
    if (policy == NyquistPolicy::strict)
        throw std::runtime_error(
            "spectral_filter: grid too coarse, |T| at the Nyquist frequency exceeds 0.05");
    return true;
}

}  // namespace

FilteredWavefunctions filter_wavefunctions(const AnsatzSolution& sol, const FilterSpec& spec,
                                           NyquistPolicy policy) {
    FilteredWavefunctions out;
    out.nyquist_warn = check_nyquist(spec, sol.grid, policy);
    const double g = sol.emitter.gamma;
    out.phi1g = apply_filter_1d(sol.phi1g_final, sol.grid, spec, g);
    out.phi1e = apply_filter_1d(sol.phi1e_final, sol.grid, spec, g);
    out.leaked = apply_filter_1d(sol.leaked.samples, sol.grid, spec, g);
    out.phi2 = apply_filter_2d(sol.phi2, sol.grid, spec, g, false);
    return out;
}

CrossKernels cross_kernels(const AnsatzSolution& sol) {
    const auto in = detail::build_inputs(sol);
    CrossKernels out;
    out.m1 = in.m1;
    // m2(t1, t2) = conj(cross(t1)) * E(t2); rank one by construction
    out.m2.noalias() = in.cross.conjugate() * in.E.transpose();
    return out;
}

CrossKernels filter_cross_kernels(const CrossKernels& kernels, const TimeGrid& grid,
                                  const FilterSpec& spec, double gamma_emitter,
                                  NyquistPolicy policy) {
    check_nyquist(spec, grid, policy);
    CrossKernels out;
    out.m1 = apply_filter_2d(kernels.m1, grid, spec, gamma_emitter, true);
    out.m2 = apply_filter_2d(kernels.m2, grid, spec, gamma_emitter, true);
    return out;
}

CorrelationKernels filtered_correlations(const AnsatzSolution& sol, const FilterSpec& spec,
                                         NyquistPolicy policy) {
    return filtered_correlations(sol, detail::build_inputs(sol), spec, policy);
}

CorrelationKernels filtered_correlations(const AnsatzSolution& sol,
                                         const detail::KernelInputs& base,
                                         const FilterSpec& spec, NyquistPolicy policy) {
    const bool warn = check_nyquist(spec, sol.grid, policy);
    const double g = sol.emitter.gamma;

    detail::KernelInputs in = base;
    in.E = apply_filter_1d(in.E, sol.grid, spec, g);
    in.phi1g = apply_filter_1d(in.phi1g, sol.grid, spec, g);
    in.phi1e = apply_filter_1d(in.phi1e, sol.grid, spec, g);
    in.cross = apply_filter_1d(in.cross, sol.grid, spec, g);
    in.m1 = apply_filter_2d(in.m1, sol.grid, spec, g, true);
    {
        Eigen::MatrixXcd phi2f = apply_filter_2d(sol.phi2, sol.grid, spec, g, false);
        in.Y = phi2f + phi2f.transpose();
    }
    // norm partitions p1g/p1e/p2 stay unfiltered

    CorrelationKernels out = detail::assemble_kernels(in);
    out.nyquist_warn = warn;
    return out;
}

}  // namespace spsim
