#ifndef SPSIM_CONFIG_HPP
#define SPSIM_CONFIG_HPP

#include <cmath>
#include <map>
#include <string>
#include <variant>
#include <vector>

// TOML-subset reader for sweep configuration: comments, [tables], and
// key = value lines where value is a number (inf accepted), a quoted string,
// a boolean, or a flat array of those. Keys are exposed as "table.key".

namespace spsim {

struct TomlValue {
    std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>> v;

    bool is_number() const { return std::holds_alternative<double>(v); }
    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_number_array() const { return std::holds_alternative<std::vector<double>>(v); }
    bool is_string_array() const { return std::holds_alternative<std::vector<std::string>>(v); }
};

using TomlTable = std::map<std::string, TomlValue>;

TomlTable parse_toml(const std::string& text);
TomlTable parse_toml_file(const std::string& path);

struct SweepConfig {
    enum class Kind { pulsed, intensity };
    Kind kind = Kind::pulsed;

    // pulsed pipeline grids
    std::vector<double> sigma_gamma;
    std::vector<double> x;
    std::vector<double> theta;
    std::vector<double> gamma_f;  // inf = unfiltered
    double delta = 0.0;
    double gamma_d = 0.0;
    double area = M_PI;
    int n = 1024;

    // intensity (CW) sweep
    std::vector<double> deltas;
    double drive_ratio = 0.1;
    double efficiency = 1.0;

    std::string csv_path = "sweep.csv";
    std::string cache_dir;     // empty = no caching; env var overrides
    bool emit_plot = false;
    std::string plot_figure = "fig3";

    bool run_oracle = false;
    double oracle_kappa_factor = 2.0;  // kappa = factor * gamma_f

    int workers = 0;  // 0 = hardware concurrency

    static SweepConfig from_toml(const TomlTable& table);
    void validate() const;  // throws std::invalid_argument
    std::size_t point_count() const;
};

}  // namespace spsim

#endif
