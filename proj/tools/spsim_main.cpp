// Command-line frontend: parameter sweeps, leakage fits, the cavity-based
// cross-check, and plot-script generation. Exit codes: 0 success, 1
// validation error, 2 partial per-point failures.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spsim/fit.hpp"
#include "spsim/hom.hpp"
#include "spsim/qrt.hpp"
#include "spsim/spectral_filter.hpp"
#include "spsim/sweep.hpp"

namespace {

using nlohmann::json;

int cmd_sweep(const std::string& config_path, std::optional<std::string> csv,
              std::optional<int> n, std::optional<int> workers,
              std::optional<std::string> cache_dir, bool oracle) {
    spsim::TomlTable table;
    if (!config_path.empty()) table = spsim::parse_toml_file(config_path);
    spsim::SweepConfig cfg = spsim::SweepConfig::from_toml(table);
    // CLI flags override config keys
    if (csv) cfg.csv_path = *csv;
    if (n) cfg.n = *n;
    if (workers) cfg.workers = *workers;
    if (cache_dir) cfg.cache_dir = *cache_dir;
    if (oracle) cfg.run_oracle = true;

    cfg.validate();
    std::cerr << "sweep: " << cfg.point_count() << " grid points, n = " << cfg.n << "\n";
    const spsim::SweepOutcome out = spsim::run_sweep(cfg);
    std::cerr << "sweep: wrote " << out.rows << " rows to " << cfg.csv_path;
    if (out.failures) std::cerr << " (" << out.failures << " failed points)";
    std::cerr << "\n";
    return out.exit_code;
}

spsim::FitData read_fit_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("fit: cannot open " + path);
    spsim::FitData data;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<std::string> f;
        while (std::getline(ls, tok, ',')) f.push_back(tok);
        if (first) {
            first = false;
            // optional header row
            try {
                std::stod(f.at(0));
            } catch (const std::exception&) {
                continue;
            }
        }
        if (f.size() < 2) throw std::invalid_argument("fit: bad CSV line: " + line);
        data.delta.push_back(std::stod(f[0]));
        data.ratio.push_back(std::stod(f[1]));
        if (f.size() >= 3) data.sigma.push_back(std::stod(f[2]));
    }
    if (!data.sigma.empty() && data.sigma.size() != data.delta.size())
        throw std::invalid_argument("fit: sigma column must cover every row");
    return data;
}

int cmd_fit(const std::string& data_path, const std::string& out_path,
            const std::vector<std::string>& pins) {
    spsim::FitData data = read_fit_csv(data_path);
    spsim::FitOptions opts;
    const std::vector<std::string> names = {"x", "theta", "a", "drive", "gamma_d"};
    for (const auto& pin : pins) {
        const auto eq = pin.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("fit: --fix expects name=value, got " + pin);
        const std::string name = pin.substr(0, eq);
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw std::invalid_argument("fit: unknown parameter " + name);
        opts.fixed[it - names.begin()] = std::stod(pin.substr(eq + 1));
    }

    const spsim::FitResult res = spsim::fit(data, opts);
    json report = {
        {"x", res.x_hat},
        {"theta", res.theta_hat},
        {"a", res.a_hat},
        {"drive_ratio", res.drive_hat},
        {"gamma_d", res.gamma_d_hat},
        {"residual_rms", res.residual_rms},
        {"condition_number", res.condition_number},
        {"converged", res.converged},
        {"identifiable", res.identifiable},
        {"theta_meaningful", res.theta_meaningful},
        {"both_detuning_signs", res.both_detuning_signs},
    };
    json cov = json::array();
    for (int i = 0; i < spsim::kFitParams; ++i) {
        json row = json::array();
        for (int j = 0; j < spsim::kFitParams; ++j) row.push_back(res.covariance(i, j));
        cov.push_back(row);
    }
    report["covariance"] = cov;

    if (out_path.empty() || out_path == "-") {
        std::cout << report.dump(2) << "\n";
    } else {
        std::ofstream os(out_path);
        os << report.dump(2) << "\n";
        if (!os) throw std::runtime_error("fit: cannot write " + out_path);
    }
    return res.converged ? 0 : 2;
}

int cmd_oracle(double sigma, double x, double theta, double gamma_f, int n,
               double kappa_factor, double area) {
    const spsim::EmitterParams emitter(1.0);
    const spsim::LeakageParams leak(x, theta);
    const spsim::PulseParams pulse = spsim::centered_pulse(emitter, sigma, area);
    const spsim::TimeGrid grid = spsim::build_grid(emitter, pulse, n);

    spsim::SolveOptions sopts;
    sopts.store_histories = false;
    const spsim::AnsatzSolution sol = spsim::solve_ansatz(emitter, leak, pulse, grid, sopts);
    const spsim::CorrelationKernels ak =
        spsim::filtered_correlations(sol, spsim::FilterSpec(gamma_f),
                                     spsim::NyquistPolicy::permissive);
    const spsim::HomReport ar = spsim::make_hom_report(ak);

    const spsim::QrtParams qp(emitter, leak, pulse, kappa_factor * gamma_f);
    const spsim::CorrelationKernels qk = spsim::qrt_g1_g2(qp, grid);
    const spsim::HomReport qr = spsim::make_hom_report(qk);

    auto rel = [](double a, double b) {
        const double s = std::max(std::abs(a), std::abs(b));
        return s > 0 ? std::abs(a - b) / s : 0.0;
    };
    std::cout << "quantity,ansatz,qrt,rel_diff\n";
    std::cout << "g2," << spsim::format_g17(ar.g2) << ',' << spsim::format_g17(qr.g2) << ','
              << spsim::format_g17(rel(ar.g2, qr.g2)) << "\n";
    std::cout << "visibility," << spsim::format_g17(ar.visibility) << ','
              << spsim::format_g17(qr.visibility) << ','
              << spsim::format_g17(rel(ar.visibility, qr.visibility)) << "\n";
    std::cout << "nbar," << spsim::format_g17(ar.nbar) << ',' << spsim::format_g17(qr.nbar)
              << ',' << spsim::format_g17(rel(ar.nbar, qr.nbar)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-photon source impurity and HOM visibility simulator"};
    app.require_subcommand(1);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep from a config file");
    std::string config_path;
    std::optional<std::string> csv_override, cache_override;
    std::optional<int> n_override, workers_override;
    bool oracle_flag = false;
    sweep->add_option("-c,--config", config_path, "TOML config file")->required();
    sweep->add_option("--csv", csv_override, "override output CSV path");
    sweep->add_option("--n", n_override, "override grid size");
    sweep->add_option("--workers", workers_override, "worker threads (default: cores)");
    sweep->add_option("--cache-dir", cache_override, "override solution cache directory");
    sweep->add_flag("--oracle", oracle_flag, "also emit cavity-model rows");

    // fit
    auto* fitc = app.add_subcommand("fit", "fit leakage parameters to intensity data");
    std::string fit_data, fit_out = "-";
    std::vector<std::string> fit_pins;
    fitc->add_option("-d,--data", fit_data, "CSV with delta_over_gamma,ratio[,sigma]")->required();
    fitc->add_option("-o,--out", fit_out, "JSON report path (- for stdout)");
    fitc->add_option("--fix", fit_pins, "pin a parameter, e.g. --fix gamma_d=0");

    // oracle
    auto* orc = app.add_subcommand("oracle", "compare the pipeline against the cavity model");
    double o_sigma = 0.1, o_x = 0.1, o_theta = 0.0, o_gf = 1.66, o_kf = 2.0, o_area = M_PI;
    int o_n = 1024;
    orc->add_option("--sigma-gamma", o_sigma, "pulse width, units of 1/gamma");
    orc->add_option("--x", o_x, "leakage fraction");
    orc->add_option("--theta", o_theta, "leakage phase");
    orc->add_option("--gamma-f", o_gf, "filter half-width / gamma");
    orc->add_option("--n", o_n, "grid size");
    orc->add_option("--kappa-factor", o_kf, "cavity linewidth / gamma_f");
    orc->add_option("--area", o_area, "pulse area");

    // plot
    auto* plot = app.add_subcommand("plot", "emit a gnuplot script for a figure layout");
    std::string p_csv, p_fig = "fig3", p_out;
    plot->add_option("--csv", p_csv, "sweep CSV")->required();
    plot->add_option("--figure", p_fig, "figure id (fig2..fig7)");
    plot->add_option("-o,--out", p_out, "script path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed())
            return cmd_sweep(config_path, csv_override, n_override, workers_override,
                             cache_override, oracle_flag);
        if (fitc->parsed()) return cmd_fit(fit_data, fit_out, fit_pins);
        if (orc->parsed())
            return cmd_oracle(o_sigma, o_x, o_theta, o_gf, o_n, o_kf, o_area);
        if (plot->parsed()) {
            spsim::emit_plot_script(p_csv, p_fig, p_out);
            std::cerr << "plot: wrote " << p_out << "\n";
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
