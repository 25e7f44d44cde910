#ifndef SPSIM_FIT_HPP
#define SPSIM_FIT_HPP

#include <array>
#include <optional>
#include <vector>

#include "spsim/steady_state.hpp"

// Extraction of (|x|, theta, A, I/I_sat, gamma_d/gamma) from intensity-vs-
// detuning data by damped least squares against the CW steady-state model.
// theta and -theta produce mirrored curves, so the minimization is
// multi-started over theta to escape the reflection ambiguity; data should
// cover both signs of the detuning.

namespace spsim {

// parameter order: x, theta, a, drive, gamma_d (all in gamma = 1 units)
constexpr int kFitParams = 5;
using FitVector = std::array<double, kFitParams>;

struct FitData {
    std::vector<double> delta;   // detuning / gamma
    std::vector<double> ratio;   // measured I_out/I_in
    std::vector<double> sigma;   // optional per-point std; empty = uniform
};

struct FitOptions {
    int max_iterations = 400;
    double ftol = 1e-14;
    double xtol = 1e-13;
    std::array<std::optional<double>, kFitParams> fixed{};  // pinned parameters
    std::optional<FitVector> init;
};

struct FitResult {
    double x_hat = 0.0;
    double theta_hat = 0.0;
    double a_hat = 1.0;
    double drive_hat = 0.1;
    double gamma_d_hat = 0.0;
    double residual_rms = 0.0;
    Eigen::Matrix<double, kFitParams, kFitParams> covariance;
    double condition_number = 0.0;
    bool converged = false;
    bool identifiable = true;       // Jacobian condition number below 1e8
    bool theta_meaningful = true;   // false when x_hat ~ 0
    bool both_detuning_signs = true;
};

double fit_model(const FitVector& p, double delta);

FitResult fit(const FitData& data, const FitOptions& opts = {});

}  // namespace spsim

#endif
