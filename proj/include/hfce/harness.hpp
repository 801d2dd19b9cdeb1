#ifndef HFCE_HARNESS_HPP
#define HFCE_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hfce/config.hpp"
#include "hfce/estimators.hpp"

namespace hfce {

enum class SweepKind { snr_db, pilots, vr_sparsity, iterations };

SweepKind sweep_kind_from_string(const std::string& name);
std::string to_string(SweepKind kind);

/// Full description of one Monte Carlo experiment: geometry, channel draw
/// parameters, the sweep axis, estimator list and seeding.
struct ExperimentSpec {
    SweepKind sweep = SweepKind::snr_db;
    std::vector<double> values{0.0, 10.0, 20.0};
    int trials = 100;
    bool paper_scale = false;

    SystemGeometry geometry = SystemGeometry::desk_scale();
    int l_user = 3;
    int l_rb = 3;
    int pilots = 32;
    double snr_db = 20.0;
    double lambda_vr = 0.875;
    double p01 = 0.35;
    int q_bar = 64;
    int rings = 2;
    double grid_beta = 1.2;

    std::vector<std::string> estimators{"tsjbe", "tsjbe-novr", "omp", "sbl", "oracle"};
    EstimatorConfig estimator;
    std::uint64_t master_seed = 1;
    int threads = 0;  // 0: one worker per hardware thread
    bool verbose = false;
    std::string out_dir = ".";

    void validate() const;

    /// fig2-convergence, fig3-snr, fig4-pilots, fig5-vr-sparsity.
    static ExperimentSpec preset(const std::string& name);
    /// Base defaults (no sweep applied); desk scale unless paper_scale.
    static ExperimentSpec base(bool paper_scale = false);
    /// Override fields from a parsed config file.
    void apply(const Config& cfg);
};

struct ResultRow {
    std::string estimator;
    double sweep_value = 0.0;
    int trial = 0;
    double nmse = 0.0;
    double wall_time_ms = 0.0;  // kept in memory, not emitted (determinism)
    bool converged = true;
};

struct AggregateRow {
    std::string estimator;
    double sweep_value = 0.0;
    int trials = 0;
    double mean_nmse = 0.0;
    double std_nmse = 0.0;
    double mean_nmse_db = 0.0;
};

struct ResultTable {
    SweepKind sweep = SweepKind::snr_db;
    std::vector<ResultRow> rows;
    std::vector<AggregateRow> aggregates() const;
};

/// Deterministic Monte Carlo driver: every (sweep point, trial) pair gets its
/// own seeded stream, workers fill preassigned slots, so the table is
/// independent of scheduling.
ResultTable run_experiment(const ExperimentSpec& spec);

/// Write <prefix>_raw.<ext> and <prefix>_agg.<ext> under dir.
/// format: "csv" or "jsonlines". Returns the raw-file path.
std::string emit(const ResultTable& table, const std::string& dir, const std::string& prefix,
                 const std::string& format = "csv");

}  // namespace hfce

#endif
