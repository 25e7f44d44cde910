#include "spsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "spsim/hom.hpp"
#include "spsim/qrt.hpp"
#include "spsim/spectral_filter.hpp"
#include "spsim/steady_state.hpp"

namespace spsim {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

constexpr const char* kPulsedHeader =
    "sigma_gamma,x,theta,gamma_f,delta,n,g2,visibility,f_ratio,nbar,norm_error,method,flags";
constexpr const char* kIntensityHeader =
    "delta_over_gamma,ratio,x,theta,drive_ratio,efficiency";

std::string sanitize_flag(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

uint64_t fnv1a(const void* data, size_t len, uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string cache_key(double sigma, double xv, double th, double delta, double gamma_d,
                      double area, int n) {
    const double vals[] = {sigma, xv, th, delta, gamma_d, area, static_cast<double>(n), 1.0};
    const uint64_t h = fnv1a(vals, sizeof(vals));
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string effective_cache_dir(const SweepConfig& cfg) {
    if (const char* env = std::getenv(kCacheEnvVar); env && *env) return env;
    return cfg.cache_dir;
}

AnsatzSolution solve_point(const SweepConfig& cfg, double sigma, double xv, double th,
                           const std::string& cache_dir) {
    const EmitterParams emitter(1.0, cfg.gamma_d, cfg.delta);
    const LeakageParams leak(xv, th);
    const PulseParams pulse = centered_pulse(emitter, sigma, cfg.area);
    const TimeGrid grid = build_grid(emitter, pulse, cfg.n);

    std::string path;
    if (!cache_dir.empty()) {
        std::filesystem::create_directories(cache_dir);
        path = cache_dir + "/" +
               cache_key(sigma, xv, th, cfg.delta, cfg.gamma_d, cfg.area, cfg.n) + ".spsa";
        if (std::filesystem::exists(path)) {
            try {
                return load_solution(path);
            } catch (const std::exception&) {
                // stale or corrupt cache entry: recompute below
            }
        }
    }
    SolveOptions opts;
    opts.store_histories = false;
    opts.track_norm_series = false;
    AnsatzSolution sol = solve_ansatz(emitter, leak, pulse, grid, opts);
    if (!path.empty()) save_solution(path, sol);
    return sol;
}

std::string pulsed_row(double sigma, double xv, double th, double gf, const SweepConfig& cfg,
                       const HomReport& rep, double norm_error, const char* method,
                       const std::string& extra_flags) {
    std::vector<std::string> flags;
    if (!extra_flags.empty()) flags.push_back(extra_flags);
    if (rep.ill_conditioned_f) flags.push_back("ill_conditioned_f");
    if (rep.nyquist_warn) flags.push_back("nyquist");
    if (norm_error > 1e-4) flags.push_back("norm_drift");
    std::string fl;
    for (size_t i = 0; i < flags.size(); ++i) fl += (i ? ";" : "") + flags[i];

    std::ostringstream os;
    os << format_g17(sigma) << ',' << format_g17(xv) << ',' << format_g17(th) << ','
       << format_g17(gf) << ',' << format_g17(cfg.delta) << ',' << cfg.n << ','
       << format_g17(rep.g2) << ',' << format_g17(rep.visibility) << ','
       << format_g17(rep.f_ratio) << ',' << format_g17(rep.nbar) << ','
       << format_g17(norm_error) << ',' << method << ',' << fl;
    return os.str();
}

std::string error_row(double sigma, double xv, double th, double gf, const SweepConfig& cfg,
                      const char* method, const std::string& what) {
    std::ostringstream os;
    os << format_g17(sigma) << ',' << format_g17(xv) << ',' << format_g17(th) << ','
       << format_g17(gf) << ',' << format_g17(cfg.delta) << ',' << cfg.n
       << ",nan,nan,nan,nan,nan," << method << ",error:" << sanitize_flag(what);
    return os.str();
}

struct GroupResult {
    std::vector<std::string> rows;
    std::size_t failures = 0;
};

GroupResult run_pulsed_group(const SweepConfig& cfg, double sigma, double xv, double th,
                             const std::string& cache_dir) {
    GroupResult out;
    AnsatzSolution sol;
    try {
        sol = solve_point(cfg, sigma, xv, th, cache_dir);
    } catch (const std::exception& e) {
        for (double gf : cfg.gamma_f) {
            out.rows.push_back(error_row(sigma, xv, th, gf, cfg, "ansatz", e.what()));
            ++out.failures;
        }
        return out;
    }

    detail::KernelInputs inputs = detail::build_inputs(sol);
    for (double gf : cfg.gamma_f) {
        try {
            CorrelationKernels kernels;
            if (std::isinf(gf))
                kernels = detail::assemble_kernels(inputs);
            else
                kernels = filtered_correlations(sol, inputs, FilterSpec(gf),
                                                NyquistPolicy::permissive);
            const HomReport rep = make_hom_report(kernels);
            std::string extra = sol.converged ? "" : "not_converged";
            out.rows.push_back(
                pulsed_row(sigma, xv, th, gf, cfg, rep, sol.norm_error, "ansatz", extra));
        } catch (const std::exception& e) {
            out.rows.push_back(error_row(sigma, xv, th, gf, cfg, "ansatz", e.what()));
            ++out.failures;
        }

        if (cfg.run_oracle && !std::isinf(gf)) {
            try {
                const QrtParams qp(EmitterParams(1.0, 0.0, cfg.delta), LeakageParams(xv, th),
                                   centered_pulse(EmitterParams(1.0), sigma, cfg.area),
                                   cfg.oracle_kappa_factor * gf);
                const CorrelationKernels qk = qrt_g1_g2(qp, sol.grid);
                const HomReport rep = make_hom_report(qk);
                out.rows.push_back(pulsed_row(sigma, xv, th, gf, cfg, rep, 0.0, "qrt", ""));
            } catch (const std::exception& e) {
                out.rows.push_back(error_row(sigma, xv, th, gf, cfg, "qrt", e.what()));
                ++out.failures;
            }
        }
    }
    return out;
}

GroupResult run_intensity_group(const SweepConfig& cfg, double xv, double th) {
    GroupResult out;
    try {
        const EmitterParams emitter(1.0, cfg.gamma_d, 0.0);
        const LeakageParams leak(xv, th);
        const auto curve =
            intensity_curve(emitter, leak, cfg.drive_ratio, cfg.efficiency, cfg.deltas);
        for (const auto& p : curve) {
            std::ostringstream os;
            os << format_g17(p.delta) << ',' << format_g17(p.ratio) << ',' << format_g17(xv)
               << ',' << format_g17(th) << ',' << format_g17(p.drive_ratio) << ','
               << format_g17(p.efficiency);
            out.rows.push_back(os.str());
        }
    } catch (const std::exception& e) {
        std::ostringstream os;
        os << "nan,nan," << format_g17(xv) << ',' << format_g17(th)
           << ",nan,nan";  // flagged by nan columns
        out.rows.push_back(os.str());
        ++out.failures;
        (void)e;
    }
    return out;
}

}  // namespace

SweepOutcome run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    const std::string cache_dir = effective_cache_dir(cfg);

    struct Group {
        double sigma = 0.0, x = 0.0, theta = 0.0;
    };
    std::vector<Group> groups;
    if (cfg.kind == SweepConfig::Kind::pulsed) {
        for (double s : cfg.sigma_gamma)
            for (double xv : cfg.x)
                for (double th : cfg.theta) groups.push_back({s, xv, th});
    } else {
        for (double xv : cfg.x)
            for (double th : cfg.theta) groups.push_back({0.0, xv, th});
    }

    std::vector<GroupResult> results(groups.size());
    const unsigned hw = std::thread::hardware_concurrency();
    const int workers = cfg.workers > 0 ? cfg.workers
                                        : static_cast<int>(hw > 0 ? hw : 1);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= groups.size()) return;
            const Group& g = groups[i];
            results[i] = cfg.kind == SweepConfig::Kind::pulsed
                             ? run_pulsed_group(cfg, g.sigma, g.x, g.theta, cache_dir)
                             : run_intensity_group(cfg, g.x, g.theta);
        }
    };
    if (workers <= 1 || groups.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::ofstream os(cfg.csv_path, std::ios::binary);  // binary: byte-stable newlines
    if (!os) throw std::invalid_argument("run_sweep: cannot open " + cfg.csv_path);
    os << (cfg.kind == SweepConfig::Kind::pulsed ? kPulsedHeader : kIntensityHeader) << '\n';

    SweepOutcome outcome;
    for (const auto& r : results) {
        for (const auto& row : r.rows) {
            os << row << '\n';
            ++outcome.rows;
        }
        outcome.failures += r.failures;
    }
    os.flush();
    if (!os) throw std::runtime_error("run_sweep: write failure on " + cfg.csv_path);

    if (cfg.emit_plot) {
        const std::string script = cfg.csv_path + "." + cfg.plot_figure + ".gp";
        emit_plot_script(cfg.csv_path, cfg.plot_figure, script);
    }
    outcome.exit_code = outcome.failures > 0 ? 2 : 0;
    return outcome;
}

// ---------------------------------------------------------------------------
// plot scripts

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

struct CsvInfo {
    std::vector<std::string> columns;
    std::set<double> x_values, theta_values, gamma_f_values, drive_values;
};

CsvInfo scan_csv(const std::string& path, const std::vector<std::string>& required) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("emit_plot_script: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("emit_plot_script: empty CSV");
    CsvInfo info;
    info.columns = split_csv_line(line);
    for (const auto& col : required) {
        if (std::find(info.columns.begin(), info.columns.end(), col) == info.columns.end())
            throw std::invalid_argument("emit_plot_script: CSV missing column '" + col + "'");
    }
    auto col_index = [&](const std::string& name) -> int {
        auto it = std::find(info.columns.begin(), info.columns.end(), name);
        return it == info.columns.end() ? -1 : static_cast<int>(it - info.columns.begin());
    };
    const int cx = col_index("x");
    const int cth = col_index("theta");
    const int cgf = col_index("gamma_f");
    const int cdr = col_index("drive_ratio");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        auto grab = [&](int c, std::set<double>& dst) {
            if (c >= 0 && c < static_cast<int>(f.size())) {
                try {
                    dst.insert(std::stod(f[c]));
                } catch (const std::exception&) {
                }
            }
        };
        grab(cx, info.x_values);
        grab(cth, info.theta_values);
        grab(cgf, info.gamma_f_values);
        grab(cdr, info.drive_values);
    }
    return info;
}

int column_number(const CsvInfo& info, const std::string& name) {
    auto it = std::find(info.columns.begin(), info.columns.end(), name);
    return static_cast<int>(it - info.columns.begin()) + 1;  // gnuplot is 1-based
}

// row-selection predicate for one column; infinities (unfiltered rows) need
// a magnitude test since gnuplot cannot compare against inf literals
std::string match_expr(int col, double v) {
    std::ostringstream os;
    if (std::isinf(v))
        os << "column(" << col << ")>1e300";
    else
        os << "abs(column(" << col << ")-(" << format_g17(v) << "))<1e-12";
    return os.str();
}

// gnuplot "using" expression selecting rows where two columns match values
std::string curve_expr(int cx_sel1, double v1, int cx_sel2, double v2, int cx, int cy) {
    std::ostringstream out;
    out << "using " << cx << ":(" << match_expr(cx_sel1, v1) << " && " << match_expr(cx_sel2, v2)
        << " ? column(" << cy << ") : 1/0)";
    return out.str();
}

void write_header(std::ostream& os, const std::string& csv, const std::string& term_label) {
    os << "# gnuplot script generated by spsim; renders " << term_label << "\n";
    os << "set datafile separator ','\n";
    os << "set key outside\n";
    os << "csv = '" << csv << "'\n";
}

}  // namespace

void emit_plot_script(const std::string& csv_path, const std::string& figure_id,
                      const std::string& out_path) {
    const std::set<std::string> known = {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7"};
    if (!known.count(figure_id)) {
        std::string msg = "emit_plot_script: unknown figure id '" + figure_id + "'; known:";
        for (const auto& k : known) msg += " " + k;
        throw std::invalid_argument(msg);
    }

    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw std::invalid_argument("emit_plot_script: cannot open " + out_path);

    if (figure_id == "fig2") {
        const CsvInfo info = scan_csv(csv_path, {"delta_over_gamma", "ratio", "x", "theta"});
        const int cd = column_number(info, "delta_over_gamma");
        const int cr = column_number(info, "ratio");
        const int cx = column_number(info, "x");
        const int cth = column_number(info, "theta");
        write_header(os, csv_path, "intensity ratio vs detuning");
        os << "set xlabel 'delta / gamma'\nset ylabel 'I_out / I_in'\n";
        const auto& xs = info.x_values;
        os << "set multiplot layout " << xs.size() << ",1\n";
        for (double xv : xs) {
            os << "set title '|x| = " << format_g17(xv) << "'\n";
            os << "plot ";
            bool first = true;
            for (double th : info.theta_values) {
                if (!first) os << ", \\\n     ";
                os << "csv " << curve_expr(cx, xv, cth, th, cd, cr) << " with lines title 'theta="
                   << format_g17(th) << "'";
                first = false;
            }
            os << "\n";
        }
        os << "unset multiplot\n";
        return;
    }

    // pulsed-sweep figures share the schema
    const CsvInfo info =
        scan_csv(csv_path, {"sigma_gamma", "x", "theta", "gamma_f", "g2", "visibility",
                            "f_ratio", "nbar"});
    const int cs = column_number(info, "sigma_gamma");
    const int cx = column_number(info, "x");
    const int cth = column_number(info, "theta");
    const int cgf = column_number(info, "gamma_f");
    const int cg2 = column_number(info, "g2");
    const int cv = column_number(info, "visibility");
    const int cf = column_number(info, "f_ratio");
    const int cn = column_number(info, "nbar");

    const std::string ycol_name = figure_id == "fig5"   ? "visibility"
                                  : figure_id == "fig7" ? "F = (1-V)/g2"
                                                        : "g2";
    const int ycol = figure_id == "fig5" ? cv : figure_id == "fig7" ? cf : cg2;

    write_header(os, csv_path, "pulsed sweep");
    if (figure_id == "fig6") {
        os << "set xlabel 'g2'\nset ylabel 'V'\nset logscale x\n";
        os << "plot ";
        bool first = true;
        for (double th : info.theta_values)
            for (double gf : info.gamma_f_values) {
                if (!first) os << ", \\\n     ";
                os << "csv using (" << match_expr(cth, th) << " && " << match_expr(cgf, gf)
                   << " ? column(" << cg2 << ") : 1/0):" << cv
                   << " with linespoints title 'theta=" << format_g17(th)
                   << (std::isinf(gf) ? ", unfiltered" : ", gf=" + format_g17(gf)) << "'";
                first = false;
            }
        os << "\n";
        return;
    }

    if (figure_id == "fig4") {
        os << "set xlabel 'sigma gamma'\nset logscale x\n";
        os << "set multiplot layout 2,1\n";
        for (const auto& [label, col] : {std::pair<const char*, int>{"g2", cg2},
                                         std::pair<const char*, int>{"nbar", cn}}) {
            os << "set ylabel '" << label << "'\n";
            os << "plot ";
            bool first = true;
            for (double gf : info.gamma_f_values) {
                if (!first) os << ", \\\n     ";
                os << "csv " << curve_expr(cgf, gf, cgf, gf, cs, col) << " with linespoints title '"
                   << (std::isinf(gf) ? "unfiltered" : "gamma_f=" + format_g17(gf)) << "'";
                first = false;
            }
            os << "\n";
        }
        os << "unset multiplot\n";
        return;
    }

    // fig3 / fig5 / fig7: y(sigma) per (theta, gamma_f), one panel per x
    os << "set xlabel 'sigma gamma'\nset ylabel '" << ycol_name << "'\nset logscale x\n";
    if (figure_id == "fig3") os << "set logscale y\n";
    os << "set multiplot layout " << info.x_values.size() << ",1\n";
    for (double xv : info.x_values) {
        os << "set title '|x| = " << format_g17(xv) << "'\n";
        os << "plot ";
        bool first = true;
        for (double th : info.theta_values)
            for (double gf : info.gamma_f_values) {
                if (!first) os << ", \\\n     ";
                os << "csv using " << cs << ":(" << match_expr(cx, xv) << " && "
                   << match_expr(cth, th) << " && " << match_expr(cgf, gf) << " ? column("
                   << ycol << ") : 1/0) with linespoints title 'theta=" << format_g17(th)
                   << (std::isinf(gf) ? ", unfiltered" : ", gf=" + format_g17(gf)) << "'";
                first = false;
            }
        os << "\n";
    }
    os << "unset multiplot\n";
}

}  // namespace spsim
