#include "spsim/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace spsim {

namespace {

std::string strip(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// cut an unquoted '#' comment
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

double parse_number(const std::string& tok, int line_no) {
    std::string t = tok;
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": cannot parse number '" + tok + "'");
    }
}

TomlValue parse_value(const std::string& raw, int line_no) {
    const std::string s = strip(raw);
    if (s.empty())
        throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty value");
    if (s == "true") return {true};
    if (s == "false") return {false};
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unterminated string");
        return {s.substr(1, s.size() - 2)};
    }
    if (s.front() == '[') {
        if (s.back() != ']')
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unterminated array");
        std::vector<std::string> toks;
        std::string inner = s.substr(1, s.size() - 2);
        std::string cur;
        bool in_str = false;
        for (char c : inner) {
            if (c == '"') in_str = !in_str;
            if (c == ',' && !in_str) {
                toks.push_back(strip(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!strip(cur).empty()) toks.push_back(strip(cur));
        if (toks.empty()) return {std::vector<double>{}};
        if (toks.front().front() == '"') {
            std::vector<std::string> out;
            for (auto& t : toks) {
                if (t.size() < 2 || t.front() != '"' || t.back() != '"')
                    throw std::invalid_argument("config line " + std::to_string(line_no) +
                                                ": bad string array element");
                out.push_back(t.substr(1, t.size() - 2));
            }
            return {out};
        }
        std::vector<double> out;
        for (auto& t : toks) out.push_back(parse_number(t, line_no));
        return {out};
    }
    return {parse_number(s, line_no)};
}

}  // namespace

TomlTable parse_toml(const std::string& text) {
    TomlTable table;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": bad table header");
            section = strip(line.substr(1, line.size() - 2));
            if (section.empty())
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": empty table name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        std::string key = strip(line.substr(0, eq));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        table[key] = parse_value(line.substr(eq + 1), line_no);
    }
    return table;
}

TomlTable parse_toml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_toml(ss.str());
}

namespace {

double get_num(const TomlTable& t, const std::string& key, double fallback) {
    auto it = t.find(key);
    if (it == t.end()) return fallback;
    if (!it->second.is_number()) throw std::invalid_argument("config: " + key + " must be a number");
    return std::get<double>(it->second.v);
}

bool get_bool(const TomlTable& t, const std::string& key, bool fallback) {
    auto it = t.find(key);
    if (it == t.end()) return fallback;
    if (!it->second.is_bool()) throw std::invalid_argument("config: " + key + " must be a boolean");
    return std::get<bool>(it->second.v);
}

std::string get_str(const TomlTable& t, const std::string& key, const std::string& fallback) {
    auto it = t.find(key);
    if (it == t.end()) return fallback;
    if (!it->second.is_string()) throw std::invalid_argument("config: " + key + " must be a string");
    return std::get<std::string>(it->second.v);
}

// numeric array; the string "unfiltered" maps to inf so filter lists can mix
std::vector<double> get_array(const TomlTable& t, const std::string& key,
                              std::vector<double> fallback) {
    auto it = t.find(key);
    if (it == t.end()) return fallback;
    if (it->second.is_number()) return {std::get<double>(it->second.v)};
    if (it->second.is_number_array()) return std::get<std::vector<double>>(it->second.v);
    if (it->second.is_string_array()) {
        std::vector<double> out;
        for (const auto& s : std::get<std::vector<std::string>>(it->second.v)) {
            if (s == "unfiltered")
                out.push_back(std::numeric_limits<double>::infinity());
            else
                out.push_back(parse_number(s, 0));
        }
        return out;
    }
    throw std::invalid_argument("config: " + key + " must be a numeric array");
}

std::vector<double> logspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = lo * std::pow(hi / lo, count > 1 ? static_cast<double>(i) / (count - 1) : 0.0);
    return out;
}

}  // namespace

SweepConfig SweepConfig::from_toml(const TomlTable& t) {
    SweepConfig c;
    const std::string kind = get_str(t, "sweep.kind", "pulsed");
    if (kind == "pulsed")
        c.kind = Kind::pulsed;
    else if (kind == "intensity")
        c.kind = Kind::intensity;
    else
        throw std::invalid_argument("config: sweep.kind must be 'pulsed' or 'intensity'");

    c.sigma_gamma = get_array(t, "sweep.sigma_gamma", {});
    if (auto it = t.find("sweep.sigma_gamma_log"); it != t.end()) {
        const auto spec = get_array(t, "sweep.sigma_gamma_log", {});
        if (spec.size() != 3)
            throw std::invalid_argument("config: sigma_gamma_log must be [lo, hi, count]");
        c.sigma_gamma = logspace(spec[0], spec[1], static_cast<int>(spec[2]));
    }
    c.x = get_array(t, "sweep.x", {});
    c.theta = get_array(t, "sweep.theta", {0.0});
    c.gamma_f = get_array(t, "sweep.gamma_f", {std::numeric_limits<double>::infinity()});
    c.delta = get_num(t, "sweep.delta", 0.0);
    c.gamma_d = get_num(t, "sweep.gamma_d", 0.0);
    c.area = get_num(t, "sweep.area", M_PI);
    c.n = static_cast<int>(get_num(t, "sweep.n", 1024));

    c.deltas = get_array(t, "intensity.deltas", {});
    if (auto it = t.find("intensity.deltas_linear"); it != t.end()) {
        const auto spec = get_array(t, "intensity.deltas_linear", {});
        if (spec.size() != 3)
            throw std::invalid_argument("config: deltas_linear must be [lo, hi, count]");
        const int cnt = static_cast<int>(spec[2]);
        c.deltas.resize(cnt);
        for (int i = 0; i < cnt; ++i)
            c.deltas[i] = spec[0] + (spec[1] - spec[0]) * (cnt > 1 ? double(i) / (cnt - 1) : 0.0);
    }
    c.drive_ratio = get_num(t, "intensity.drive_ratio", 0.1);
    c.efficiency = get_num(t, "intensity.efficiency", 1.0);

    c.csv_path = get_str(t, "output.csv", "sweep.csv");
    c.cache_dir = get_str(t, "output.cache_dir", "");
    c.emit_plot = get_bool(t, "output.plot_script", false);
    c.plot_figure = get_str(t, "output.plot_figure", "fig3");

    c.run_oracle = get_bool(t, "oracle.enabled", false);
    c.oracle_kappa_factor = get_num(t, "oracle.kappa_factor", 2.0);

    c.workers = static_cast<int>(get_num(t, "run.workers", 0));
    return c;
}

void SweepConfig::validate() const {
    if (kind == Kind::pulsed) {
        if (sigma_gamma.empty() || x.empty() || theta.empty() || gamma_f.empty())
            throw std::invalid_argument("sweep: empty parameter grid");
        for (double s : sigma_gamma)
            if (!(s > 0.0)) throw std::invalid_argument("sweep: sigma_gamma must be positive");
        for (double v : x)
            if (v < 0.0 || v > 1.0) throw std::invalid_argument("sweep: x must be in [0, 1]");
        for (double g : gamma_f)
            if (!(g > 0.0)) throw std::invalid_argument("sweep: gamma_f must be positive or inf");
        if (n < 64) throw std::invalid_argument("sweep: n must be >= 64");
        if (gamma_d < 0.0) throw std::invalid_argument("sweep: gamma_d must be >= 0");
        if (!(area > 0.0)) throw std::invalid_argument("sweep: area must be positive");
    } else {
        if (deltas.empty() || x.empty() || theta.empty())
            throw std::invalid_argument("intensity sweep: empty parameter grid");
        if (!(drive_ratio > 0.0))
            throw std::invalid_argument("intensity sweep: drive_ratio must be positive");
        if (!(efficiency > 0.0 && efficiency <= 1.0))
            throw std::invalid_argument("intensity sweep: efficiency must be in (0, 1]");
    }
    if (csv_path.empty()) throw std::invalid_argument("sweep: csv path must be set");
}

std::size_t SweepConfig::point_count() const {
    if (kind == Kind::pulsed)
        return sigma_gamma.size() * x.size() * theta.size() * gamma_f.size();
    return x.size() * theta.size();
}

}  // namespace spsim
