#include "hfce/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <thread>

namespace hfce {

SweepKind sweep_kind_from_string(const std::string& name) {
    if (name == "snr_db") return SweepKind::snr_db;
    if (name == "pilots") return SweepKind::pilots;
    if (name == "vr_sparsity") return SweepKind::vr_sparsity;
    if (name == "iterations") return SweepKind::iterations;
    throw std::invalid_argument("unknown sweep kind: " + name);
}

std::string to_string(SweepKind kind) {
    switch (kind) {
        case SweepKind::snr_db: return "snr_db";
        case SweepKind::pilots: return "pilots";
        case SweepKind::vr_sparsity: return "vr_sparsity";
        case SweepKind::iterations: return "iterations";
    }
    return "?";
}

void ExperimentSpec::validate() const {
    if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
    if (values.empty()) throw std::invalid_argument("experiment: empty sweep values");
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] <= values[i - 1])
            throw std::invalid_argument("experiment: sweep values must be strictly increasing");
    geometry.validate();
}

ExperimentSpec ExperimentSpec::base(bool paper) {
    ExperimentSpec s;
    s.paper_scale = paper;
    if (paper) {
        s.geometry = SystemGeometry::paper_scale();
        s.pilots = 64;
        s.q_bar = 256;
        s.rings = 2;
    } else {
        s.geometry = SystemGeometry::desk_scale();
        s.pilots = 32;
        s.q_bar = 64;
        s.rings = 2;
    }
    s.estimator.expected_paths = s.l_user * s.l_rb;
    s.estimator.markov = MarkovVRPrior::from_sparsity(s.lambda_vr, s.p01);
    return s;
}

ExperimentSpec ExperimentSpec::preset(const std::string& name) {
    ExperimentSpec s = base(false);
    if (name == "fig2-convergence") {
        s.sweep = SweepKind::iterations;
        s.values.clear();
        for (int i = 1; i <= 40; ++i) s.values.push_back(i);
        s.trials = 50;
        s.estimators = {"tsjbe", "tsjbe-novr", "omp", "sbl", "oracle"};
        s.estimator.outer_iters = 40;
    } else if (name == "fig3-snr") {
        s.sweep = SweepKind::snr_db;
        s.values = {0.0, 10.0, 20.0};
        s.trials = 200;
    } else if (name == "fig4-pilots") {
        s.sweep = SweepKind::pilots;
        s.values = {16.0, 32.0, 64.0, 96.0};
        s.trials = 100;
    } else if (name == "fig5-vr-sparsity") {
        s.sweep = SweepKind::vr_sparsity;
        s.values = {0.625, 0.75, 0.875, 1.0};
        s.trials = 200;
        s.estimators = {"tsjbe", "tsjbe-novr", "omp", "sbl", "oracle"};
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    return s;
}

void ExperimentSpec::apply(const Config& cfg) {
    if (cfg.has("experiment.sweep")) sweep = sweep_kind_from_string(cfg.get_string("experiment.sweep", ""));
    values = cfg.get_list("experiment.values", values);
    trials = cfg.get_int("experiment.trials", trials);
    estimators = cfg.get_names("experiment.estimators", estimators);
    master_seed = static_cast<std::uint64_t>(cfg.get_double("experiment.seed", static_cast<double>(master_seed)));
    threads = cfg.get_int("experiment.threads", threads);

    geometry.bs_antennas = cfg.get_int("geometry.bs_antennas", geometry.bs_antennas);
    geometry.ris_elements = cfg.get_int("geometry.ris_elements", geometry.ris_elements);
    geometry.subarrays = cfg.get_int("geometry.subarrays", geometry.subarrays);
    geometry.carrier_hz = cfg.get_double("geometry.carrier_hz", geometry.carrier_hz);
    geometry.bs_anchor.x() = cfg.get_double("geometry.bs_x", geometry.bs_anchor.x());
    geometry.bs_anchor.y() = cfg.get_double("geometry.bs_y", geometry.bs_anchor.y());
    geometry.user_range_min = cfg.get_double("geometry.user_range_min", geometry.user_range_min);
    geometry.user_range_max = cfg.get_double("geometry.user_range_max", geometry.user_range_max);

    l_user = cfg.get_int("channel.l_user", l_user);
    l_rb = cfg.get_int("channel.l_rb", l_rb);
    pilots = cfg.get_int("channel.pilots", pilots);
    snr_db = cfg.get_double("channel.snr_db", snr_db);
    lambda_vr = cfg.get_double("channel.lambda_vr", lambda_vr);
    p01 = cfg.get_double("channel.p01", p01);

    q_bar = cfg.get_int("dictionary.q_bar", q_bar);
    rings = cfg.get_int("dictionary.rings", rings);
    grid_beta = cfg.get_double("dictionary.beta", grid_beta);

    estimator.outer_iters = cfg.get_int("estimator.outer_iters", estimator.outer_iters);
    estimator.gain_iters = cfg.get_int("estimator.gain_iters", estimator.gain_iters);
    estimator.vr_iters = cfg.get_int("estimator.vr_iters", estimator.vr_iters);
    estimator.grad_iters = cfg.get_int("estimator.grad_iters", estimator.grad_iters);
    estimator.sbl_iters = cfg.get_int("estimator.sbl_iters", estimator.sbl_iters);
    estimator.expected_paths = cfg.get_int("estimator.expected_paths", l_user * l_rb);
    estimator.omp_residual_stop = cfg.get_double("estimator.omp_residual_stop", estimator.omp_residual_stop);
}

std::vector<AggregateRow> ResultTable::aggregates() const {
    std::map<std::pair<std::string, double>, std::vector<double>> groups;
    for (const ResultRow& r : rows) groups[{r.estimator, r.sweep_value}].push_back(r.nmse);
    std::vector<AggregateRow> out;
    for (const auto& [key, vals] : groups) {
        AggregateRow a;
        a.estimator = key.first;
        a.sweep_value = key.second;
        a.trials = static_cast<int>(vals.size());
        double sum = 0.0;
        for (double v : vals) sum += v;
        a.mean_nmse = sum / vals.size();
        double var = 0.0;
        for (double v : vals) var += (v - a.mean_nmse) * (v - a.mean_nmse);
        a.std_nmse = vals.size() > 1 ? std::sqrt(var / (vals.size() - 1)) : 0.0;
        a.mean_nmse_db = 10.0 * std::log10(std::max(a.mean_nmse, 1e-300));
        out.push_back(a);
    }
    return out;
}

namespace {

struct TrialTask {
    int sweep_index = 0;
    int trial = 0;
};

struct TrialOutput {
    std::vector<ResultRow> rows;
};

DictionarySet build_dictionary_for(const ExperimentSpec& spec) {
    return DictionarySet::build(
        spec.geometry, DictionaryOptions::for_geometry(spec.geometry, spec.q_bar, spec.rings,
                                                       spec.grid_beta));
}

TrialOutput run_trial(const ExperimentSpec& spec, const DictionarySet& dict, int sweep_index,
                      int trial) {
    const double value = spec.values[sweep_index];
    double snr_db = spec.snr_db;
    int pilots = spec.pilots;
    double lambda_vr = spec.lambda_vr;
    int outer_iters = spec.estimator.outer_iters;
    switch (spec.sweep) {
        case SweepKind::snr_db: snr_db = value; break;
        case SweepKind::pilots: pilots = static_cast<int>(value); break;
        case SweepKind::vr_sparsity: lambda_vr = value; break;
        case SweepKind::iterations:
            outer_iters = static_cast<int>(spec.values.back());
            break;
    }

    // The iterations sweep reuses one run per trial; all points share index 0
    // for seeding so curves come from the same channel draws.
    const int seed_index = spec.sweep == SweepKind::iterations ? 0 : sweep_index;
    Rng rng = make_trial_rng(spec.master_seed, static_cast<std::uint64_t>(seed_index),
                             static_cast<std::uint64_t>(trial));

    const MarkovVRPrior markov = MarkovVRPrior::from_sparsity(lambda_vr, spec.p01);
    const PathSet paths = sample_paths(spec.geometry, spec.l_user, spec.l_rb, rng);
    const VisibleRegion vr = sample_vr(spec.geometry, spec.l_user, markov, rng);
    const ChannelRealization ch = synthesize_channel(spec.geometry, paths, vr);
    const PilotObservation obs = observe(spec.geometry, ch, pilots, snr_db, rng);

    EstimatorConfig cfg = spec.estimator;
    cfg.outer_iters = outer_iters;
    cfg.markov = markov;
    cfg.expected_paths = spec.l_user * spec.l_rb;

    TrialOutput out;
    for (const std::string& name : spec.estimators) {
        EstimateResult er;
        const auto t0 = std::chrono::steady_clock::now();
        if (name == "tsjbe") {
            er = tsjbe(obs, dict, cfg, &ch.h_cascaded);
        } else if (name == "tsjbe-novr") {
            EstimatorConfig c2 = cfg;
            c2.enable_vr = false;
            er = tsjbe(obs, dict, c2, &ch.h_cascaded);
        } else if (name == "omp") {
            er = omp_baseline(obs, dict, cfg);
        } else if (name == "sbl") {
            er = sbl_baseline(obs, dict, cfg);
        } else if (name == "oracle") {
            er = oracle_ls(obs, spec.geometry, ch);
        } else {
            throw std::invalid_argument("unknown estimator: " + name);
        }
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        if (er.nmse < 0.0) er.nmse = compute_nmse(er.h_hat, ch.h_cascaded);

        const bool has_nmse_trace = !er.trace.empty() && er.trace.front().nmse >= 0.0;
        if (spec.sweep == SweepKind::iterations && has_nmse_trace) {
            for (double v : spec.values) {
                const int want = static_cast<int>(v);
                const int idx = std::min<int>(want, static_cast<int>(er.trace.size())) - 1;
                ResultRow row{name, v, trial, er.trace[idx].nmse, ms, er.converged};
                out.rows.push_back(row);
            }
        } else if (spec.sweep == SweepKind::iterations) {
            for (double v : spec.values)
                out.rows.push_back({name, v, trial, er.nmse, ms, er.converged});
        } else {
            out.rows.push_back({name, value, trial, er.nmse, ms, er.converged});
        }
    }
    return out;
}

}  // namespace

ResultTable run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const DictionarySet dict = build_dictionary_for(spec);

    const int points = spec.sweep == SweepKind::iterations ? 1 : static_cast<int>(spec.values.size());
    std::vector<TrialTask> tasks;
    for (int i = 0; i < points; ++i)
        for (int t = 0; t < spec.trials; ++t) tasks.push_back({i, t});

    std::vector<TrialOutput> slots(tasks.size());
    std::atomic<std::size_t> next{0};
    const unsigned workers = spec.threads > 0
                                 ? static_cast<unsigned>(spec.threads)
                                 : std::max(1u, std::thread::hardware_concurrency());

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            slots[i] = run_trial(spec, dict, tasks[i].sweep_index, tasks[i].trial);
            if (spec.verbose) {
                std::fprintf(stderr, "trial %zu/%zu done\n", i + 1, tasks.size());
            }
        }
    };
    if (workers <= 1 || tasks.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ResultTable table;
    table.sweep = spec.sweep;
    for (const TrialOutput& s : slots)
        table.rows.insert(table.rows.end(), s.rows.begin(), s.rows.end());
    return table;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string emit(const ResultTable& table, const std::string& dir, const std::string& prefix,
                 const std::string& format) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const bool csv = format == "csv";
    if (!csv && format != "jsonlines") throw std::invalid_argument("emit: unknown format " + format);
    const std::string ext = csv ? ".csv" : ".jsonl";
    const std::string raw_path = (fs::path(dir) / (prefix + "_raw" + ext)).string();
    const std::string agg_path = (fs::path(dir) / (prefix + "_agg" + ext)).string();
    const std::string sweep_name = to_string(table.sweep);

    std::ofstream raw(raw_path, std::ios::binary);
    if (!raw) throw std::runtime_error("emit: cannot write " + raw_path);
    if (csv) {
        raw << "estimator,sweep,value,trial,nmse,converged\n";
        for (const ResultRow& r : table.rows)
            raw << r.estimator << ',' << sweep_name << ',' << fmt_double(r.sweep_value) << ','
                << r.trial << ',' << fmt_double(r.nmse) << ',' << (r.converged ? 1 : 0) << '\n';
    } else {
        for (const ResultRow& r : table.rows)
            raw << "{\"estimator\":\"" << r.estimator << "\",\"sweep\":\"" << sweep_name
                << "\",\"value\":" << fmt_double(r.sweep_value) << ",\"trial\":" << r.trial
                << ",\"nmse\":" << fmt_double(r.nmse)
                << ",\"converged\":" << (r.converged ? "true" : "false") << "}\n";
    }
    raw.close();

    std::ofstream agg(agg_path, std::ios::binary);
    if (!agg) throw std::runtime_error("emit: cannot write " + agg_path);
    const auto aggs = table.aggregates();
    if (csv) {
        agg << "estimator,sweep,value,trials,mean_nmse,std_nmse,mean_nmse_db\n";
        for (const AggregateRow& a : aggs)
            agg << a.estimator << ',' << sweep_name << ',' << fmt_double(a.sweep_value) << ','
                << a.trials << ',' << fmt_double(a.mean_nmse) << ',' << fmt_double(a.std_nmse)
                << ',' << fmt_double(a.mean_nmse_db) << '\n';
    } else {
        for (const AggregateRow& a : aggs)
            agg << "{\"estimator\":\"" << a.estimator << "\",\"sweep\":\"" << sweep_name
                << "\",\"value\":" << fmt_double(a.sweep_value) << ",\"trials\":" << a.trials
                << ",\"mean_nmse\":" << fmt_double(a.mean_nmse)
                << ",\"std_nmse\":" << fmt_double(a.std_nmse)
                << ",\"mean_nmse_db\":" << fmt_double(a.mean_nmse_db) << "}\n";
    }
    return raw_path;
}

}  // namespace hfce
