#ifndef SSPLSC_PIPELINE_HPP
#define SSPLSC_PIPELINE_HPP

#include <functional>
#include <string>
#include <vector>

#include "ssplsc/eval.hpp"
#include "ssplsc/io.hpp"

namespace ssplsc {

/// Resolved end-to-end analysis configuration.
struct RunConfig {
    std::vector<Band> bands = {{"alpha", 8.0, 15.0},
                               {"beta", 15.0, 30.0},
                               {"gamma", 30.0, 45.0}};
    SolverKind solver = SolverKind::Ssplsc;
    bool auto_params = false;  // "params": "auto" triggers cross-validation
    RegParams params{0.1, 0.1, 1.0, 1.0};
    SolverConfig solver_config;
    CacohConfig cacoh;
    std::vector<double> cv_grid = {0.01, 0.1, 1.0, 10.0};
    int n_permutations = 500;
    std::uint64_t seed = 0;
    bool zscore = true;
    Window window = Window::Hann;
    int jobs = 1;
};

json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const json& j);

struct BandBin {
    double frequency = 0.0;
    double coherence = 0.0;  // NaN when the solve failed
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;
    double phi = 0.0;
    bool ok = false;
    std::string error;
};

struct BandReport {
    Band band;
    RegParams params_used;
    double csr = 0.0;
    std::vector<double> permuted_mean;
    int n_permutations = 0;
    std::uint64_t seed = 0;
    std::vector<BandBin> bins;
    int max_bin = -1;  // index of the maximum-coherence bin
    std::vector<double> objective_trace;  // trace at the max-coherence bin
};

struct SubjectReport {
    std::string subject_id;
    bool ok = false;
    std::string error;
    std::vector<BandReport> bands;
};

struct GroupBandSummary {
    Band band;
    int n_subjects = 0;
    double csr_mean = 0.0;
    double csr_std = 0.0;
    Eigen::VectorXd pattern_alpha;  // sign-aligned average over subjects
    bool pattern_converged = false;
};

struct AnalysisReport {
    std::string tool_version;
    std::string config_hash;
    std::uint64_t seed = 0;
    RunConfig config;
    std::vector<SubjectReport> subjects;
    std::vector<GroupBandSummary> group;
};

json analysis_report_to_json(const AnalysisReport& report);
AnalysisReport analysis_report_from_json(const json& j);

// Spectral preprocessing shared by every pipeline: segment, optionally
// z-score, and take per-bin Fourier coefficients over [lo, hi).
BinnedDataset make_binned_dataset(const Recording& eeg, const Recording& emg,
                                  double lo, double hi, bool zscore, Window window);

// Per-band analysis of one subject: connectivity Laplacians, optional CV,
// per-bin solves, permutation CSR, and the max-coherence-bin pattern.
SubjectReport analyze_subject(const SubjectData& subject, const RunConfig& config,
                              std::uint64_t subject_seed);

// Full run over a dataset; one failing subject does not abort the run.
AnalysisReport analyze_dataset(const std::vector<SubjectData>& subjects,
                               const RunConfig& config);

struct AblationReport {
    std::vector<AnalysisReport> runs;  // plsc, splsc, ssplsc on identical data
};

AblationReport ablate_dataset(const std::vector<SubjectData>& subjects,
                              const RunConfig& config);
json ablation_report_to_json(const AblationReport& report);

struct SweepCell {
    double snr = 0.0;
    int n = 0;
    std::string subject;
    std::string method;
    std::string band;
    double csr = 0.0;
    double abs_coherence = 0.0;
};

inline constexpr const char* kSweepCsvHeader = "snr,n,subject,method,band,csr,abs_coherence";

std::string sweep_row_csv(const SweepCell& cell);

// Runs the snr x n grid on freshly simulated data, streaming one CSV row
// per (snr, n, subject, method, band) through sink as results arrive.
void run_sweep(const SimConfig& base_sim, const RunConfig& run,
               const std::vector<double>& snr_axis, const std::vector<int>& n_axis,
               const std::vector<SolverKind>& methods,
               const std::function<void(const SweepCell&)>& sink);

}  // namespace ssplsc

#endif
