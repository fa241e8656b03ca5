#include "ssplsc/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "ssplsc/rng.hpp"

namespace ssplsc {

json run_config_to_json(const RunConfig& c) {
    json j;
    j["bands"] = json::array();
    for (const auto& b : c.bands)
        j["bands"].push_back({{"name", b.name}, {"lo", b.lo}, {"hi", b.hi}});
    j["solver"] = to_string(c.solver);
    if (c.auto_params) {
        j["params"] = "auto";
    } else {
        j["params"] = {{"lambda1", c.params.lambda1},
                       {"lambda2", c.params.lambda2},
                       {"gamma1", c.params.gamma1},
                       {"gamma2", c.params.gamma2}};
    }
    j["solver_config"] = {{"max_outer_iters", c.solver_config.max_outer_iters},
                          {"rel_tol", c.solver_config.rel_tol},
                          {"inner_prox_steps", c.solver_config.inner_prox_steps},
                          {"lm_damping", c.solver_config.lm_damping},
                          {"phase_init", c.solver_config.phase_init},
                          {"n_phase_starts", c.solver_config.n_phase_starts}};
    j["cacoh"] = {{"ridge_scale", c.cacoh.ridge_scale},
                  {"tol", c.cacoh.tol},
                  {"max_iters", c.cacoh.max_iters},
                  {"pca_retain", c.cacoh.pca_retain}};
    j["cv_grid"] = c.cv_grid;
    j["n_permutations"] = c.n_permutations;
    j["seed"] = c.seed;
    j["zscore"] = c.zscore;
    j["window"] = c.window == Window::Hann ? "hann" : "rectangular";
    j["jobs"] = c.jobs;
    return j;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    if (j.contains("bands")) {
        c.bands.clear();
        for (const auto& b : j.at("bands")) {
            Band band{b.at("name").get<std::string>(), b.at("lo").get<double>(),
                      b.at("hi").get<double>()};
            band.validate();
            c.bands.push_back(std::move(band));
        }
    }
    if (j.contains("solver")) c.solver = solver_kind_from_string(j.at("solver"));
    if (j.contains("params")) {
        if (j.at("params").is_string()) {
            if (j.at("params") != "auto")
                throw ConfigError("params must be an object or \"auto\"");
            c.auto_params = true;
        } else {
            const auto& p = j.at("params");
            c.params.lambda1 = p.value("lambda1", c.params.lambda1);
            c.params.lambda2 = p.value("lambda2", c.params.lambda2);
            c.params.gamma1 = p.value("gamma1", c.params.gamma1);
            c.params.gamma2 = p.value("gamma2", c.params.gamma2);
        }
    }
    if (j.contains("solver_config")) {
        const auto& s = j.at("solver_config");
        c.solver_config.max_outer_iters = s.value("max_outer_iters", c.solver_config.max_outer_iters);
        c.solver_config.rel_tol = s.value("rel_tol", c.solver_config.rel_tol);
        c.solver_config.inner_prox_steps = s.value("inner_prox_steps", c.solver_config.inner_prox_steps);
        c.solver_config.lm_damping = s.value("lm_damping", c.solver_config.lm_damping);
        c.solver_config.phase_init = s.value("phase_init", c.solver_config.phase_init);
        c.solver_config.n_phase_starts = s.value("n_phase_starts", c.solver_config.n_phase_starts);
    }
    if (j.contains("cacoh")) {
        const auto& s = j.at("cacoh");
        c.cacoh.ridge_scale = s.value("ridge_scale", c.cacoh.ridge_scale);
        c.cacoh.tol = s.value("tol", c.cacoh.tol);
        c.cacoh.max_iters = s.value("max_iters", c.cacoh.max_iters);
        c.cacoh.pca_retain = s.value("pca_retain", c.cacoh.pca_retain);
    }
    if (j.contains("cv_grid")) c.cv_grid = j.at("cv_grid").get<std::vector<double>>();
    if (j.contains("n_permutations")) c.n_permutations = j.at("n_permutations").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("zscore")) c.zscore = j.at("zscore").get<bool>();
    if (j.contains("window")) {
        const std::string w = j.at("window").get<std::string>();
        if (w == "hann")
            c.window = Window::Hann;
        else if (w == "rectangular")
            c.window = Window::Rectangular;
        else
            throw ConfigError("unknown window: " + w);
    }
    if (j.contains("jobs")) c.jobs = j.at("jobs").get<int>();
    return c;
}

BinnedDataset make_binned_dataset(const Recording& eeg, const Recording& emg,
                                  double lo, double hi, bool zscore, Window window) {
    auto eeg_trials = segment_trials(eeg);
    auto emg_trials = segment_trials(emg);
    if (eeg_trials.size() != emg_trials.size())
        throw ShapeMismatch("EEG and EMG trial counts differ");
    if (zscore) {
        zscore_trials(eeg_trials);
        zscore_trials(emg_trials);
    }
    BinnedDataset ds;
    ds.frequencies = band_bins(lo, hi, eeg.trial_length, eeg.sampling_rate);
    if (ds.frequencies.empty()) throw ConfigError("band contains no DFT bin");
    for (double f : ds.frequencies) {
        ds.x.push_back(fourier_coefficients(eeg_trials, eeg.sampling_rate, f, window));
        ds.y.push_back(fourier_coefficients(emg_trials, emg.sampling_rate, f, window));
    }
    return ds;
}

namespace {

BandReport analyze_band(const BinnedDataset& bd, const Band& band,
                        const RunConfig& config, std::uint64_t band_seed,
                        std::uint64_t cv_seed) {
    const GraphLaplacian lap_alpha = laplacian(sensor_connectivity(bd.x));
    const GraphLaplacian lap_beta = laplacian(sensor_connectivity(bd.y));

    SolverSpec spec;
    spec.kind = config.solver;
    spec.params = config.params;
    spec.config = config.solver_config;
    spec.cacoh = config.cacoh;
    if (config.auto_params && config.solver == SolverKind::Ssplsc) {
        const CVResult cv = cross_validate_params(bd, lap_alpha, lap_beta, cv_seed,
                                                  config.cv_grid, config.solver_config,
                                                  config.jobs);
        spec.params = cv.chosen;
    }

    const CoherenceSpectrum spectrum =
        coherence_spectrum(bd, spec, lap_alpha, lap_beta, config.jobs);
    const CSRReport csr = permutation_csr_with_real(bd, band, spec, lap_alpha, lap_beta,
                                                    spectrum, config.n_permutations,
                                                    band_seed, config.jobs);

    BandReport report;
    report.band = band;
    report.params_used = spec.params;
    report.csr = csr.csr;
    report.permuted_mean = csr.permuted_mean;
    report.n_permutations = csr.n_permutations;
    report.seed = band_seed;
    for (const auto& bin : spectrum.bins) {
        BandBin b;
        b.frequency = bin.frequency;
        b.ok = bin.ok;
        b.error = bin.error;
        b.coherence = bin.ok ? bin.coherence : std::numeric_limits<double>::quiet_NaN();
        if (bin.ok) {
            b.alpha = bin.alpha;
            b.beta = bin.beta;
            b.phi = bin.phi;
        }
        report.bins.push_back(std::move(b));
    }
    report.max_bin = spectrum.argmax_bin();
    if (report.max_bin >= 0)
        report.objective_trace = spectrum.bins[report.max_bin].objective_trace;
    return report;
}

}  // namespace

SubjectReport analyze_subject(const SubjectData& subject, const RunConfig& config,
                              std::uint64_t subject_seed) {
    SubjectReport report;
    report.subject_id = subject.subject_id;
    try {
        for (std::size_t bi = 0; bi < config.bands.size(); ++bi) {
            const Band& band = config.bands[bi];
            const BinnedDataset bd = make_binned_dataset(subject.eeg, subject.emg,
                                                         band.lo, band.hi,
                                                         config.zscore, config.window);
            report.bands.push_back(analyze_band(bd, band, config,
                                                derive_seed(subject_seed, 0xBAu, bi),
                                                derive_seed(subject_seed, 0xC5u, bi)));
        }
        report.ok = true;
    } catch (const Error& e) {
        report.error = e.code();
        report.bands.clear();
    }
    return report;
}

AnalysisReport analyze_dataset(const std::vector<SubjectData>& subjects,
                               const RunConfig& config) {
    AnalysisReport report;
    report.tool_version = kToolVersion;
    report.config = config;
    report.config_hash = config_hash(run_config_to_json(config));
    report.seed = config.seed;

    for (std::size_t s = 0; s < subjects.size(); ++s)
        report.subjects.push_back(
            analyze_subject(subjects[s], config, derive_seed(config.seed, 0xAAu, s)));

    for (std::size_t bi = 0; bi < config.bands.size(); ++bi) {
        GroupBandSummary summary;
        summary.band = config.bands[bi];
        std::vector<double> csrs;
        std::vector<Eigen::VectorXd> patterns;
        for (const auto& sub : report.subjects) {
            if (!sub.ok || bi >= sub.bands.size()) continue;
            const BandReport& br = sub.bands[bi];
            csrs.push_back(br.csr);
            if (br.max_bin >= 0 && br.bins[br.max_bin].alpha.size() > 0)
                patterns.push_back(br.bins[br.max_bin].alpha);
        }
        summary.n_subjects = static_cast<int>(csrs.size());
        if (!csrs.empty()) {
            double mean = 0.0;
            for (double v : csrs) mean += v;
            mean /= csrs.size();
            double var = 0.0;
            for (double v : csrs) var += (v - mean) * (v - mean);
            summary.csr_mean = mean;
            summary.csr_std = csrs.size() > 1 ? std::sqrt(var / (csrs.size() - 1)) : 0.0;
        }
        if (patterns.size() >= 2) {
            try {
                const AlignedAverage avg = align_and_average_patterns(patterns);
                summary.pattern_alpha = avg.mean;
                summary.pattern_converged = avg.converged;
            } catch (const Error&) {
                // Pattern averaging is best-effort at the group level.
            }
        } else if (patterns.size() == 1) {
            summary.pattern_alpha = patterns.front();
            summary.pattern_converged = true;
        }
        report.group.push_back(std::move(summary));
    }
    return report;
}

AblationReport ablate_dataset(const std::vector<SubjectData>& subjects,
                              const RunConfig& config) {
    AblationReport report;
    for (SolverKind kind : {SolverKind::Plsc, SolverKind::Splsc, SolverKind::Ssplsc}) {
        RunConfig variant = config;
        variant.solver = kind;
        report.runs.push_back(analyze_dataset(subjects, variant));
    }
    return report;
}

namespace {

json band_report_to_json(const BandReport& br) {
    json b;
    b["band"] = {{"name", br.band.name}, {"lo", br.band.lo}, {"hi", br.band.hi}};
    b["params_used"] = {{"lambda1", br.params_used.lambda1},
                        {"lambda2", br.params_used.lambda2},
                        {"gamma1", br.params_used.gamma1},
                        {"gamma2", br.params_used.gamma2}};
    b["csr"] = br.csr;
    b["permuted_mean"] = vector_to_json(br.permuted_mean);
    b["n_permutations"] = br.n_permutations;
    b["seed"] = br.seed;
    b["max_bin"] = br.max_bin;
    b["objective_trace"] = vector_to_json(br.objective_trace);
    b["bins"] = json::array();
    for (const auto& bin : br.bins) {
        json jb;
        jb["frequency"] = bin.frequency;
        jb["ok"] = bin.ok;
        jb["error"] = bin.error;
        if (std::isfinite(bin.coherence))
            jb["coherence"] = bin.coherence;
        else
            jb["coherence"] = nullptr;
        jb["phi"] = bin.phi;
        jb["alpha"] = eigen_to_json(bin.alpha);
        jb["beta"] = eigen_to_json(bin.beta);
        b["bins"].push_back(std::move(jb));
    }
    return b;
}

BandReport band_report_from_json(const json& b) {
    BandReport br;
    br.band = {b.at("band").at("name").get<std::string>(),
               b.at("band").at("lo").get<double>(), b.at("band").at("hi").get<double>()};
    const auto& p = b.at("params_used");
    br.params_used = {p.at("lambda1").get<double>(), p.at("lambda2").get<double>(),
                      p.at("gamma1").get<double>(), p.at("gamma2").get<double>()};
    br.csr = b.at("csr").get<double>();
    br.permuted_mean = vector_from_json(b.at("permuted_mean"));
    br.n_permutations = b.at("n_permutations").get<int>();
    br.seed = b.at("seed").get<std::uint64_t>();
    br.max_bin = b.at("max_bin").get<int>();
    br.objective_trace = vector_from_json(b.at("objective_trace"));
    for (const auto& jb : b.at("bins")) {
        BandBin bin;
        bin.frequency = jb.at("frequency").get<double>();
        bin.ok = jb.at("ok").get<bool>();
        bin.error = jb.at("error").get<std::string>();
        bin.coherence = jb.at("coherence").is_null()
                            ? std::numeric_limits<double>::quiet_NaN()
                            : jb.at("coherence").get<double>();
        bin.phi = jb.at("phi").get<double>();
        bin.alpha = eigen_from_json(jb.at("alpha"));
        bin.beta = eigen_from_json(jb.at("beta"));
        br.bins.push_back(std::move(bin));
    }
    return br;
}

}  // namespace

json analysis_report_to_json(const AnalysisReport& report) {
    json j;
    j["tool"] = "ssplsc";
    j["provenance"] = {{"config_hash", report.config_hash},
                       {"seed", report.seed},
                       {"tool_version", report.tool_version}};
    j["config"] = run_config_to_json(report.config);
    j["subjects"] = json::array();
    for (const auto& sub : report.subjects) {
        json s;
        s["subject_id"] = sub.subject_id;
        s["ok"] = sub.ok;
        s["error"] = sub.error;
        s["bands"] = json::array();
        for (const auto& br : sub.bands) s["bands"].push_back(band_report_to_json(br));
        j["subjects"].push_back(std::move(s));
    }
    j["group"] = json::array();
    for (const auto& g : report.group) {
        json s;
        s["band"] = {{"name", g.band.name}, {"lo", g.band.lo}, {"hi", g.band.hi}};
        s["n_subjects"] = g.n_subjects;
        s["csr_mean"] = g.csr_mean;
        s["csr_std"] = g.csr_std;
        s["pattern_alpha"] = eigen_to_json(g.pattern_alpha);
        s["pattern_converged"] = g.pattern_converged;
        j["group"].push_back(std::move(s));
    }
    return j;
}

AnalysisReport analysis_report_from_json(const json& j) {
    AnalysisReport report;
    report.tool_version = j.at("provenance").at("tool_version").get<std::string>();
    report.config_hash = j.at("provenance").at("config_hash").get<std::string>();
    report.seed = j.at("provenance").at("seed").get<std::uint64_t>();
    report.config = run_config_from_json(j.at("config"));
    for (const auto& s : j.at("subjects")) {
        SubjectReport sub;
        sub.subject_id = s.at("subject_id").get<std::string>();
        sub.ok = s.at("ok").get<bool>();
        sub.error = s.at("error").get<std::string>();
        for (const auto& b : s.at("bands")) sub.bands.push_back(band_report_from_json(b));
        report.subjects.push_back(std::move(sub));
    }
    for (const auto& s : j.at("group")) {
        GroupBandSummary g;
        g.band = {s.at("band").at("name").get<std::string>(),
                  s.at("band").at("lo").get<double>(), s.at("band").at("hi").get<double>()};
        g.n_subjects = s.at("n_subjects").get<int>();
        g.csr_mean = s.at("csr_mean").get<double>();
        g.csr_std = s.at("csr_std").get<double>();
        g.pattern_alpha = eigen_from_json(s.at("pattern_alpha"));
        g.pattern_converged = s.at("pattern_converged").get<bool>();
        report.group.push_back(std::move(g));
    }
    return report;
}

json ablation_report_to_json(const AblationReport& report) {
    json j;
    j["tool"] = "ssplsc";
    j["runs"] = json::array();
    for (const auto& run : report.runs) j["runs"].push_back(analysis_report_to_json(run));
    // Compact per-band comparison table.
    json table = json::array();
    if (!report.runs.empty()) {
        for (std::size_t bi = 0; bi < report.runs.front().group.size(); ++bi) {
            json row;
            row["band"] = report.runs.front().group[bi].band.name;
            for (const auto& run : report.runs) {
                json cell = {{"csr_mean", run.group[bi].csr_mean},
                             {"csr_std", run.group[bi].csr_std}};
                row[to_string(run.config.solver)] = std::move(cell);
            }
            table.push_back(std::move(row));
        }
    }
    j["table"] = std::move(table);
    return j;
}

std::string sweep_row_csv(const SweepCell& cell) {
    std::string row = format_double(cell.snr);
    row += ',';
    row += std::to_string(cell.n);
    row += ',';
    row += cell.subject;
    row += ',';
    row += cell.method;
    row += ',';
    row += cell.band;
    row += ',';
    row += format_double(cell.csr);
    row += ',';
    row += format_double(cell.abs_coherence);
    return row;
}

void run_sweep(const SimConfig& base_sim, const RunConfig& run,
               const std::vector<double>& snr_axis, const std::vector<int>& n_axis,
               const std::vector<SolverKind>& methods,
               const std::function<void(const SweepCell&)>& sink) {
    if (snr_axis.empty() || n_axis.empty() || methods.empty())
        throw ConfigError("sweep axes must be nonempty");

    for (double snr : snr_axis) {
        for (int n : n_axis) {
            SimConfig sim = base_sim;
            sim.snr_eeg = snr;
            sim.trials_per_subject = n;
            const SyntheticDataset ds = generate(sim);

            for (int s = 0; s < sim.n_subjects; ++s) {
                SubjectData subject;
                char name[32];
                std::snprintf(name, sizeof(name), "subject_%03d", s);
                subject.subject_id = name;
                subject.eeg = ds.eeg[static_cast<std::size_t>(s)];
                subject.emg = ds.emg[static_cast<std::size_t>(s)];
                // Same derivation as analyze_dataset so a 1x1 sweep matches a
                // direct analyze run; independent of method and axis order.
                const std::uint64_t cell_seed =
                    derive_seed(run.seed, 0xAAu, static_cast<std::uint64_t>(s));
                for (SolverKind method : methods) {
                    RunConfig variant = run;
                    variant.solver = method;
                    const SubjectReport rep = analyze_subject(subject, variant, cell_seed);
                    for (const auto& br : rep.bands) {
                        SweepCell cell;
                        cell.snr = snr;
                        cell.n = n;
                        cell.subject = subject.subject_id;
                        cell.method = to_string(method);
                        cell.band = br.band.name;
                        cell.csr = rep.ok ? br.csr : std::numeric_limits<double>::quiet_NaN();
                        double best = std::numeric_limits<double>::quiet_NaN();
                        for (const auto& bin : br.bins)
                            if (bin.ok && (!std::isfinite(best) || bin.coherence > best))
                                best = bin.coherence;
                        cell.abs_coherence = best;
                        sink(cell);
                    }
                }
            }
        }
    }
}

}  // namespace ssplsc
