#ifndef SSPLSC_SIMGEN_HPP
#define SSPLSC_SIMGEN_HPP

#include <cstdint>
#include <vector>

#include "ssplsc/spectra.hpp"

namespace ssplsc {

/// Synthetic paired EEG/EMG generation parameters. Defaults follow the
/// desk-scale scenario: 32 EEG channels, 10 EMG channels, 100 one-second
/// trials at 200 Hz, coupling injected at 18-24 Hz.
struct SimConfig {
    int n_subjects = 15;
    int eeg_channels = 32;  // 128 at full scale
    int emg_channels = 10;
    int trials_per_subject = 100;
    double trial_length = 1.0;    // seconds
    double sampling_rate = 200.0; // Hz
    double snr_eeg = 0.1;         // +inf means no noise
    double snr_emg = 0.1;
    double coupling_lo = 18.0;    // Hz
    double coupling_hi = 24.0;
    double active_eeg_fraction = 0.25;
    double active_emg_fraction = 0.25;
    bool eeg_pink_noise = true;   // 1/f-shaped EEG noise; false = white
    std::uint64_t seed = 0;

    void validate() const;
};

struct SubjectGroundTruth {
    std::vector<bool> eeg_active;
    std::vector<bool> emg_active;
    Eigen::VectorXd eeg_weights;  // spatial mixing of the coupled source
    Eigen::VectorXd emg_weights;
    double eeg_bump_center = 0.0;
    double emg_bump_center = 0.0;
};

struct SyntheticDataset {
    SimConfig config;
    std::vector<Recording> eeg;  // one per subject
    std::vector<Recording> emg;
    std::vector<SubjectGroundTruth> ground_truth;
    std::vector<double> coupling_bins;  // Hz
};

// Deterministic given config.seed. Each trial shares one band-limited
// stochastic source between the active EEG channels (smooth spatial
// weights) and the active EMG channels (per-trial random positive gain);
// noise is scaled so every active channel's signal-to-noise power ratio
// equals the configured SNR exactly.
SyntheticDataset generate(const SimConfig& config);

}  // namespace ssplsc

#endif
