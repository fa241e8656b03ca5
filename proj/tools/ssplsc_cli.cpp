#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssplsc/pipeline.hpp"
#include "ssplsc/rng.hpp"

namespace {

using ssplsc::json;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ssplsc::IoError("cannot open config file: " + path);
    return json::parse(in);
}

int default_jobs() {
    if (const char* env = std::getenv("SSPLSC_JOBS")) {
        const int j = std::atoi(env);
        if (j >= 1) return j;
    }
    return 1;
}

struct CommonOpts {
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = default_jobs();
    std::string solver;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_solver) {
    cmd->add_option("--config", opts.config_path, "JSON configuration file");
    cmd->add_option("--out", opts.out, "Output path")->required();
    cmd->add_option("--seed", opts.seed, "Seed override")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--jobs", opts.jobs, "Worker thread count (env: SSPLSC_JOBS)")
        ->check(CLI::PositiveNumber);
    if (with_solver)
        cmd->add_option("--solver", opts.solver, "plsc | splsc | ssplsc | cacoh");
}

ssplsc::RunConfig make_run_config(const CommonOpts& opts) {
    ssplsc::RunConfig config;
    if (!opts.config_path.empty())
        config = ssplsc::run_config_from_json(load_json_file(opts.config_path));
    if (opts.seed_set) config.seed = opts.seed;
    config.jobs = opts.jobs;
    if (!opts.solver.empty())
        config.solver = ssplsc::solver_kind_from_string(opts.solver);
    return config;
}

int cmd_simulate(const CommonOpts& opts) {
    ssplsc::SimConfig config;
    if (!opts.config_path.empty())
        config = ssplsc::sim_config_from_json(load_json_file(opts.config_path));
    if (opts.seed_set) config.seed = opts.seed;
    config.validate();
    const ssplsc::SyntheticDataset dataset = ssplsc::generate(config);
    ssplsc::write_dataset(opts.out, dataset);
    std::cout << "wrote " << dataset.eeg.size() << " subjects to " << opts.out << "\n";
    return 0;
}

int cmd_analyze(const std::string& data_dir, const CommonOpts& opts) {
    const auto subjects = ssplsc::read_dataset(data_dir);
    const ssplsc::RunConfig config = make_run_config(opts);
    const ssplsc::AnalysisReport report = ssplsc::analyze_dataset(subjects, config);
    ssplsc::atomic_write_file(opts.out,
                              ssplsc::analysis_report_to_json(report).dump(2) + "\n");
    for (const auto& g : report.group)
        std::cout << g.band.name << ": CSR " << g.csr_mean << " +/- " << g.csr_std
                  << " (n=" << g.n_subjects << ")\n";
    return 0;
}

int cmd_tune(const std::string& data_dir, const CommonOpts& opts) {
    const auto subjects = ssplsc::read_dataset(data_dir);
    const ssplsc::RunConfig config = make_run_config(opts);
    json out;
    out["tool_version"] = ssplsc::kToolVersion;
    out["seed"] = config.seed;
    out["subjects"] = json::array();
    for (std::size_t s = 0; s < subjects.size(); ++s) {
        const std::uint64_t subject_seed = ssplsc::derive_seed(config.seed, 0xAAu, s);
        json js;
        js["subject_id"] = subjects[s].subject_id;
        js["bands"] = json::array();
        for (std::size_t bi = 0; bi < config.bands.size(); ++bi) {
            const auto& band = config.bands[bi];
            const auto bd = ssplsc::make_binned_dataset(
                subjects[s].eeg, subjects[s].emg, band.lo, band.hi, config.zscore,
                config.window);
            const auto lap_a = ssplsc::laplacian(ssplsc::sensor_connectivity(bd.x));
            const auto lap_b = ssplsc::laplacian(ssplsc::sensor_connectivity(bd.y));
            const auto cv = ssplsc::cross_validate_params(
                bd, lap_a, lap_b, ssplsc::derive_seed(subject_seed, 0xC5u, bi),
                config.cv_grid, config.solver_config, config.jobs);
            json jb;
            jb["band"] = band.name;
            jb["chosen"] = {{"lambda1", cv.chosen.lambda1},
                            {"lambda2", cv.chosen.lambda2},
                            {"gamma1", cv.chosen.gamma1},
                            {"gamma2", cv.chosen.gamma2}};
            jb["cost_surface"] = json::array();
            for (const auto& pt : cv.cost_surface)
                jb["cost_surface"].push_back({{"stage", pt.stage},
                                              {"lambda1", pt.params.lambda1},
                                              {"lambda2", pt.params.lambda2},
                                              {"gamma1", pt.params.gamma1},
                                              {"gamma2", pt.params.gamma2},
                                              {"cost", std::isfinite(pt.cost)
                                                           ? json(pt.cost)
                                                           : json()}});
            js["bands"].push_back(std::move(jb));
            std::cout << subjects[s].subject_id << " " << band.name << ": lambda1="
                      << cv.chosen.lambda1 << " lambda2=" << cv.chosen.lambda2
                      << " gamma1=" << cv.chosen.gamma1 << " gamma2="
                      << cv.chosen.gamma2 << "\n";
        }
        out["subjects"].push_back(std::move(js));
    }
    ssplsc::atomic_write_file(opts.out, out.dump(2) + "\n");
    return 0;
}

int cmd_permtest(const std::string& data_dir, const CommonOpts& opts) {
    const auto subjects = ssplsc::read_dataset(data_dir);
    const ssplsc::RunConfig config = make_run_config(opts);
    const ssplsc::AnalysisReport report = ssplsc::analyze_dataset(subjects, config);
    json out;
    out["tool_version"] = ssplsc::kToolVersion;
    out["config_hash"] = report.config_hash;
    out["seed"] = report.seed;
    out["n_permutations"] = config.n_permutations;
    out["subjects"] = json::array();
    for (const auto& sub : report.subjects) {
        json js;
        js["subject_id"] = sub.subject_id;
        js["ok"] = sub.ok;
        js["error"] = sub.error;
        js["csr"] = json::object();
        for (const auto& br : sub.bands) js["csr"][br.band.name] = br.csr;
        out["subjects"].push_back(std::move(js));
    }
    out["group"] = json::array();
    for (const auto& g : report.group)
        out["group"].push_back({{"band", g.band.name},
                                {"csr_mean", g.csr_mean},
                                {"csr_std", g.csr_std},
                                {"n_subjects", g.n_subjects}});
    ssplsc::atomic_write_file(opts.out, out.dump(2) + "\n");
    for (const auto& g : report.group)
        std::cout << g.band.name << ": CSR " << g.csr_mean << " +/- " << g.csr_std
                  << "\n";
    return 0;
}

int cmd_ablate(const std::string& data_dir, const CommonOpts& opts) {
    const auto subjects = ssplsc::read_dataset(data_dir);
    const ssplsc::RunConfig config = make_run_config(opts);
    const ssplsc::AblationReport report = ssplsc::ablate_dataset(subjects, config);
    ssplsc::atomic_write_file(opts.out,
                              ssplsc::ablation_report_to_json(report).dump(2) + "\n");
    for (const auto& run : report.runs)
        for (const auto& g : run.group)
            std::cout << ssplsc::to_string(run.config.solver) << " " << g.band.name
                      << ": CSR " << g.csr_mean << " +/- " << g.csr_std << "\n";
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::vector<double>& snr_axis,
              const std::vector<int>& n_axis, const std::vector<std::string>& methods) {
    ssplsc::SimConfig sim;
    ssplsc::RunConfig run;
    if (!opts.config_path.empty()) {
        const json j = load_json_file(opts.config_path);
        if (j.contains("sim")) sim = ssplsc::sim_config_from_json(j.at("sim"));
        if (j.contains("run")) run = ssplsc::run_config_from_json(j.at("run"));
    }
    if (opts.seed_set) {
        sim.seed = opts.seed;
        run.seed = opts.seed;
    }
    run.jobs = opts.jobs;
    std::vector<ssplsc::SolverKind> kinds;
    for (const auto& m : methods) kinds.push_back(ssplsc::solver_kind_from_string(m));

    std::ofstream out(opts.out, std::ios::binary | std::ios::trunc);
    if (!out) throw ssplsc::IoError("cannot open " + opts.out + " for writing");
    out << ssplsc::kSweepCsvHeader << "\r\n" << std::flush;
    ssplsc::run_sweep(sim, run, snr_axis, n_axis, kinds,
                      [&out](const ssplsc::SweepCell& cell) {
                          out << ssplsc::sweep_row_csv(cell) << "\r\n" << std::flush;
                      });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EEG-EMG cortico-muscular coupling analysis"};
    app.require_subcommand(1);

    CommonOpts sim_opts, an_opts, tune_opts, perm_opts, abl_opts, sweep_opts;
    std::string an_data, tune_data, perm_data, abl_data;
    std::vector<double> snr_axis = {1.0, 0.1, 0.01};
    std::vector<int> n_axis = {25, 100};
    std::vector<std::string> methods = {"plsc", "ssplsc", "cacoh"};

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
    add_common(simulate, sim_opts, false);

    auto* analyze = app.add_subcommand("analyze", "Full per-subject + group analysis");
    analyze->add_option("--data", an_data, "Dataset directory")->required();
    add_common(analyze, an_opts, true);

    auto* tune = app.add_subcommand("tune", "Cross-validated parameter selection");
    tune->add_option("--data", tune_data, "Dataset directory")->required();
    add_common(tune, tune_opts, false);

    auto* permtest = app.add_subcommand("permtest", "Permutation significance test");
    permtest->add_option("--data", perm_data, "Dataset directory")->required();
    add_common(permtest, perm_opts, true);

    auto* ablate = app.add_subcommand("ablate", "Compare plsc / splsc / ssplsc");
    ablate->add_option("--data", abl_data, "Dataset directory")->required();
    add_common(ablate, abl_opts, false);

    auto* sweep = app.add_subcommand("sweep", "SNR x trial-count grid, CSV output");
    add_common(sweep, sweep_opts, false);
    sweep->add_option("--snr", snr_axis, "SNR axis values");
    sweep->add_option("--n", n_axis, "Trials-per-subject axis values");
    sweep->add_option("--methods", methods, "Solvers to compare");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) return cmd_simulate(sim_opts);
        if (*analyze) return cmd_analyze(an_data, an_opts);
        if (*tune) return cmd_tune(tune_data, tune_opts);
        if (*permtest) return cmd_permtest(perm_data, perm_opts);
        if (*ablate) return cmd_ablate(abl_data, abl_opts);
        if (*sweep) return cmd_sweep(sweep_opts, snr_axis, n_axis, methods);
    } catch (const ssplsc::Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
