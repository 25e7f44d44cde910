#include "spsim/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace spsim {

namespace {

constexpr double kLambdaUp = 7.0;
constexpr double kLambdaDown = 0.35;
constexpr double kCondLimit = 1e8;

const FitVector kLower = {0.0, -M_PI, 1e-6, 1e-9, 0.0};
const FitVector kUpper = {1.0, M_PI, 1.5, 1e4, 50.0};

double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * M_PI);
    if (a <= -M_PI) a += 2.0 * M_PI;
    if (a > M_PI) a -= 2.0 * M_PI;
    return a;
}

FitVector clamp_params(FitVector p) {
    p[1] = wrap_angle(p[1]);
    for (int i = 0; i < kFitParams; ++i)
        if (i != 1) p[i] = std::clamp(p[i], kLower[i], kUpper[i]);
    return p;
}

struct Problem {
    const FitData& data;
    const FitOptions& opts;
    int m;

    Eigen::VectorXd residuals(const FitVector& p) const {
        Eigen::VectorXd r(m);
        for (int i = 0; i < m; ++i) {
            const double w = data.sigma.empty() ? 1.0 : 1.0 / data.sigma[i];
            r(i) = (fit_model(p, data.delta[i]) - data.ratio[i]) * w;
        }
        return r;
    }

    // central differences over the free parameters
    Eigen::MatrixXd jacobian(const FitVector& p, const std::vector<int>& free) const {
        Eigen::MatrixXd j(m, static_cast<int>(free.size()));
        for (size_t c = 0; c < free.size(); ++c) {
            const int k = free[c];
            const double h = std::max(1e-7, 1e-7 * std::abs(p[k]));
            FitVector pp = p, pm = p;
            pp[k] += h;
            pm[k] -= h;
            j.col(static_cast<int>(c)) = (residuals(pp) - residuals(pm)) / (2.0 * h);
        }
        return j;
    }
};

struct LmOutcome {
    FitVector p;
    double ssr = 0.0;
    bool converged = false;
    Eigen::MatrixXd jac;
};

LmOutcome levenberg_marquardt(const Problem& prob, FitVector p, const std::vector<int>& free) {
    p = clamp_params(p);
    Eigen::VectorXd r = prob.residuals(p);
    double ssr = r.squaredNorm();
    double lambda = 1e-3;
    bool converged = false;
    Eigen::MatrixXd j;

    for (int it = 0; it < prob.opts.max_iterations; ++it) {
        j = prob.jacobian(p, free);
        const Eigen::MatrixXd jtj = j.transpose() * j;
        const Eigen::VectorXd jtr = j.transpose() * r;

        bool moved = false;
        for (int tries = 0; tries < 25; ++tries) {
            Eigen::MatrixXd damped = jtj;
            for (int k = 0; k < damped.rows(); ++k)
                damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
            const Eigen::VectorXd step = damped.ldlt().solve(-jtr);

            FitVector trial = p;
            for (size_t c = 0; c < free.size(); ++c) trial[free[c]] += step(static_cast<int>(c));
            trial = clamp_params(trial);

            const Eigen::VectorXd rt = prob.residuals(trial);
            const double st = rt.squaredNorm();
            if (st < ssr) {
                const double rel = (ssr - st) / std::max(ssr, 1e-300);
                const double stepn = step.norm();
                p = trial;
                r = rt;
                ssr = st;
                lambda = std::max(lambda * kLambdaDown, 1e-12);
                moved = true;
                if (rel < prob.opts.ftol || stepn < prob.opts.xtol) converged = true;
                break;
            }
            lambda *= kLambdaUp;
            if (lambda > 1e12) break;
        }
        if (!moved) {
            // no downhill step found at any damping: local minimum
            converged = true;
            break;
        }
        if (converged) break;
    }
    return {p, ssr, converged, prob.jacobian(p, free)};
}

}  // namespace

double fit_model(const FitVector& p, double delta) {
    EmitterParams em(1.0, p[4], delta);
    LeakageParams leak(std::clamp(p[0], 0.0, 1.0), p[1]);
    return intensity_ratio(em, leak, std::max(p[3], 1e-12), p[2]);
}

FitResult fit(const FitData& data, const FitOptions& opts) {
    const int m = static_cast<int>(data.delta.size());
    if (m < 8 || data.ratio.size() != data.delta.size())
        throw std::invalid_argument("fit: need at least 8 (delta, ratio) points");
    if (!data.sigma.empty() && data.sigma.size() != data.delta.size())
        throw std::invalid_argument("fit: sigma weights size mismatch");
    const double dmin = *std::min_element(data.delta.begin(), data.delta.end());
    const double dmax = *std::max_element(data.delta.begin(), data.delta.end());
    if (dmax - dmin < 1e-12) throw std::invalid_argument("fit: degenerate detuning grid");

    Problem prob{data, opts, m};

    std::vector<int> free;
    for (int k = 0; k < kFitParams; ++k)
        if (!opts.fixed[k]) free.push_back(k);
    if (free.empty()) throw std::invalid_argument("fit: all parameters pinned");

    FitVector base = opts.init.value_or(FitVector{0.05, 0.0, 1.0, 0.1, 0.0});
    for (int k = 0; k < kFitParams; ++k)
        if (opts.fixed[k]) base[k] = *opts.fixed[k];

    // multi-start over theta unless it is pinned
    std::vector<double> starts = {base[1]};
    if (!opts.fixed[1]) starts = {0.0, 0.5 * M_PI, -0.5 * M_PI, M_PI};

    LmOutcome best;
    best.ssr = std::numeric_limits<double>::infinity();
    for (double th : starts) {
        FitVector p0 = base;
        p0[1] = th;
        LmOutcome out = levenberg_marquardt(prob, p0, free);
        if (out.ssr < best.ssr) best = out;
    }

    FitResult res;
    res.x_hat = best.p[0];
    res.theta_hat = best.p[1];
    res.a_hat = best.p[2];
    res.drive_hat = best.p[3];
    res.gamma_d_hat = best.p[4];
    res.residual_rms = std::sqrt(best.ssr / m);
    res.converged = best.converged;
    res.both_detuning_signs = dmin < 0.0 && dmax > 0.0;

    // identifiability from the singular values of the final Jacobian
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(best.jac);
    const auto& sv = svd.singularValues();
    res.condition_number =
        sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    res.identifiable = res.condition_number < kCondLimit;
    res.theta_meaningful = res.x_hat >= 1e-3;

    res.covariance.setZero();
    const int dof = m - static_cast<int>(free.size());
    if (dof > 0) {
        const Eigen::MatrixXd jtj = best.jac.transpose() * best.jac;
        const Eigen::MatrixXd cov = (best.ssr / dof) *
                                    jtj.completeOrthogonalDecomposition().pseudoInverse();
        for (size_t a = 0; a < free.size(); ++a)
            for (size_t b = 0; b < free.size(); ++b)
                res.covariance(free[a], free[b]) = cov(static_cast<int>(a), static_cast<int>(b));
    }
    return res;
}

}  // namespace spsim
