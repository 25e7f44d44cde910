#ifndef SPSIM_SWEEP_HPP
#define SPSIM_SWEEP_HPP

#include <string>

#include "spsim/config.hpp"

// Parameter-sweep orchestration: every grid point runs
// solve -> correlations -> (optional filter) -> HOM metrics -> CSV row, in a
// deterministic lexicographic row order regardless of worker count. Failing
// points become flagged rows, never sweep aborts. Repeated runs of the same
// config produce byte-identical CSV files.

namespace spsim {

struct SweepOutcome {
    int exit_code = 0;  // 0 ok, 1 validation error (thrown instead), 2 partial failures
    std::size_t rows = 0;
    std::size_t failures = 0;
};

// Environment variable overriding SweepConfig::cache_dir.
constexpr const char* kCacheEnvVar = "SPSIM_CACHE_DIR";

SweepOutcome run_sweep(const SweepConfig& config);

// Standalone gnuplot script rendering one of the known figure layouts from a
// sweep CSV. Throws on unknown figure ids (message lists the known ones) and
// on CSVs missing the required columns.
void emit_plot_script(const std::string& csv_path, const std::string& figure_id,
                      const std::string& out_path);

// 17-significant-digit float formatting shared by all CSV writers.
std::string format_g17(double v);

}  // namespace spsim

#endif
