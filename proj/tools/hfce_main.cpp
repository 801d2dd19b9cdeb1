#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "hfce/harness.hpp"
#include "hfce/selfcheck.hpp"

int main(int argc, char** argv) {
    CLI::App app{"hfce — hybrid-field RIS cascaded channel estimation benchmark"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a Monte Carlo experiment");
    std::string spec_path, preset, out_dir = "results", format = "csv";
    std::uint64_t seed = 0;
    int trials = -1;
    int threads = 0;
    bool paper_scale = false, verbose = false;
    run->add_option("--spec", spec_path, "experiment config file (key = value with [sections])");
    run->add_option("--preset", preset, "base preset: fig2-convergence, fig3-snr, fig4-pilots, fig5-vr-sparsity");
    run->add_option("--seed", seed, "master seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--trials", trials, "trials per sweep point");
    run->add_option("--threads", threads, "worker threads (0 = hardware)");
    run->add_option("--format", format, "output format: csv or jsonlines");
    run->add_flag("--paper-scale", paper_scale, "full-size arrays (M=16, N=128, K=8, Qbar=256)");
    run->add_flag("--verbose", verbose, "progress to stderr");

    // identity-check
    auto* idc = app.add_subcommand(
        "identity-check", "verify the structured-algebra identities and dictionary compression");
    std::uint64_t idc_seed = 7;
    int idc_instances = 100;
    idc->add_option("--seed", idc_seed, "rng seed");
    idc->add_option("--instances", idc_instances, "random instances per identity");

    CLI11_PARSE(app, argc, argv);

    if (*idc) {
        auto results = hfce::run_identity_suite(idc_seed, idc_instances);
        const auto comp = hfce::run_compression_suite(idc_seed, std::max(5, idc_instances / 5));
        results.insert(results.end(), comp.begin(), comp.end());
        hfce::print_results(results);
        return hfce::all_passed(results) ? 0 : 1;
    }

    try {
        hfce::ExperimentSpec spec;
        if (!preset.empty()) {
            spec = hfce::ExperimentSpec::preset(preset);
            if (paper_scale) {
                const hfce::ExperimentSpec paper = hfce::ExperimentSpec::base(true);
                spec.paper_scale = true;
                spec.geometry = paper.geometry;
                spec.pilots = paper.pilots;
                spec.q_bar = paper.q_bar;
                spec.rings = paper.rings;
            }
        } else {
            spec = hfce::ExperimentSpec::base(paper_scale);
        }
        if (!spec_path.empty()) spec.apply(hfce::Config::parse_file(spec_path));
        if (seed != 0) spec.master_seed = seed;
        if (trials > 0) spec.trials = trials;
        if (threads > 0) spec.threads = threads;
        spec.out_dir = out_dir;
        spec.verbose = verbose;

        const hfce::ResultTable table = hfce::run_experiment(spec);
        const std::string prefix = preset.empty() ? "experiment" : preset;
        const std::string raw = hfce::emit(table, spec.out_dir, prefix, format);
        std::printf("wrote %s\n", raw.c_str());
        for (const auto& a : table.aggregates())
            std::printf("%-12s %-12s %8.3g  mean NMSE %10.4g (%7.2f dB, %d trials)\n",
                        a.estimator.c_str(), hfce::to_string(table.sweep).c_str(), a.sweep_value,
                        a.mean_nmse, a.mean_nmse_db, a.trials);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
