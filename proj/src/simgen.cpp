#include "ssplsc/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "ssplsc/rng.hpp"

namespace ssplsc {

void SimConfig::validate() const {
    if (n_subjects < 1 || eeg_channels < 1 || emg_channels < 1 || trials_per_subject < 1)
        throw ConfigError("all counts must be >= 1");
    if (!(trial_length > 0.0) || !(sampling_rate > 0.0))
        throw ConfigError("trial_length and sampling_rate must be > 0");
    if (!(snr_eeg > 0.0) || !(snr_emg > 0.0))
        throw ConfigError("SNRs must be > 0");
    if (!(coupling_lo >= 0.0 && coupling_lo < coupling_hi &&
          coupling_hi <= sampling_rate / 2.0))
        throw ConfigError("coupling band must lie within [0, Nyquist]");
    if (!(active_eeg_fraction > 0.0 && active_eeg_fraction <= 1.0) ||
        !(active_emg_fraction > 0.0 && active_emg_fraction <= 1.0))
        throw ConfigError("active fractions must lie in (0, 1]");
}

namespace {

struct SpatialMix {
    std::vector<bool> active;
    Eigen::VectorXd weights;
    double center = 0.0;
};

// Gaussian bump over channels laid out on [0, 1]; exactly the k channels
// closest to the bump center are active, everything else gets weight 0.
SpatialMix make_mix(int n_channels, double fraction, std::mt19937_64& rng) {
    SpatialMix mix;
    mix.active.assign(n_channels, false);
    mix.weights = Eigen::VectorXd::Zero(n_channels);
    std::uniform_real_distribution<double> center_dist(0.3, 0.7);
    mix.center = center_dist(rng);

    const int k = std::max(1, static_cast<int>(std::lround(fraction * n_channels)));
    std::vector<int> order(n_channels);
    std::iota(order.begin(), order.end(), 0);
    auto pos = [n_channels](int i) {
        return n_channels == 1 ? 0.5 : static_cast<double>(i) / (n_channels - 1);
    };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(pos(a) - mix.center) < std::abs(pos(b) - mix.center);
    });

    const double sigma = std::max(0.05, 0.5 * std::abs(pos(order[k - 1]) - mix.center));
    for (int r = 0; r < k; ++r) {
        const int ch = order[r];
        mix.active[ch] = true;
        const double d = pos(ch) - mix.center;
        mix.weights[ch] = std::exp(-d * d / (2.0 * sigma * sigma));
    }
    return mix;
}

// Harmonic basis: columns are cos/sin pairs for each listed DFT bin,
// optionally amplitude-shaped per bin.
Eigen::MatrixXd harmonic_basis(int n_samples, const std::vector<int>& bins,
                               const std::vector<double>& amplitude) {
    Eigen::MatrixXd basis(n_samples, 2 * bins.size());
    for (std::size_t j = 0; j < bins.size(); ++j) {
        for (int m = 0; m < n_samples; ++m) {
            const double ang = 2.0 * std::numbers::pi * bins[j] * m / n_samples;
            basis(m, 2 * j) = amplitude[j] * std::cos(ang);
            basis(m, 2 * j + 1) = amplitude[j] * std::sin(ang);
        }
    }
    return basis;
}

Eigen::MatrixXd draw_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

}  // namespace

SyntheticDataset generate(const SimConfig& config) {
    config.validate();
    const int n_samp = static_cast<int>(std::lround(config.trial_length * config.sampling_rate));
    if (n_samp < 2) throw ConfigError("trial too short");
    const int n_trials = config.trials_per_subject;

    SyntheticDataset ds;
    ds.config = config;
    ds.coupling_bins = band_bins(config.coupling_lo, config.coupling_hi,
                                 config.trial_length, config.sampling_rate);
    if (ds.coupling_bins.empty())
        throw ConfigError("coupling band contains no DFT bin");

    std::vector<int> src_bins;
    for (double f : ds.coupling_bins)
        src_bins.push_back(static_cast<int>(std::lround(f * config.trial_length)));
    const Eigen::MatrixXd src_basis =
        harmonic_basis(n_samp, src_bins, std::vector<double>(src_bins.size(), 1.0));

    // Noise basis covering every nonzero bin up to Nyquist; pink amplitude
    // is 1/sqrt(k) so power falls off as 1/f.
    std::vector<int> noise_bins;
    std::vector<double> pink_amp;
    for (int k = 1; k <= n_samp / 2; ++k) {
        noise_bins.push_back(k);
        pink_amp.push_back(1.0 / std::sqrt(static_cast<double>(k)));
    }
    const Eigen::MatrixXd pink_basis = harmonic_basis(n_samp, noise_bins, pink_amp);

    auto channel_labels = [](const std::string& prefix, int count) {
        std::vector<std::string> labels;
        for (int i = 0; i < count; ++i) {
            std::string num = std::to_string(i + 1);
            while (num.size() < 3) num.insert(num.begin(), '0');
            labels.push_back(prefix + num);
        }
        return labels;
    };

    for (int subject = 0; subject < config.n_subjects; ++subject) {
        std::mt19937_64 rng(derive_seed(config.seed, 0x51u, static_cast<std::uint64_t>(subject)));
        const SpatialMix eeg_mix = make_mix(config.eeg_channels, config.active_eeg_fraction, rng);
        const SpatialMix emg_mix = make_mix(config.emg_channels, config.active_emg_fraction, rng);

        std::uniform_real_distribution<double> gain_dist(0.5, 1.5);

        const int p = config.eeg_channels;
        const int q = config.emg_channels;
        Eigen::MatrixXd eeg_signal(n_samp * n_trials, p);
        Eigen::MatrixXd emg_signal(n_samp * n_trials, q);
        Eigen::MatrixXd eeg_noise(n_samp * n_trials, p);
        Eigen::MatrixXd emg_noise(n_samp * n_trials, q);

        for (int t = 0; t < n_trials; ++t) {
            const Eigen::VectorXd source = src_basis * draw_normal(src_basis.cols(), 1, rng);
            const double emg_gain = gain_dist(rng);
            eeg_signal.middleRows(t * n_samp, n_samp) = source * eeg_mix.weights.transpose();
            emg_signal.middleRows(t * n_samp, n_samp) =
                (emg_gain * source) * emg_mix.weights.transpose();
            if (config.eeg_pink_noise)
                eeg_noise.middleRows(t * n_samp, n_samp) =
                    pink_basis * draw_normal(pink_basis.cols(), p, rng);
            else
                eeg_noise.middleRows(t * n_samp, n_samp) = draw_normal(n_samp, p, rng);
            emg_noise.middleRows(t * n_samp, n_samp) = draw_normal(n_samp, q, rng);
        }

        // Per-channel noise scaling: active channels hit the configured SNR
        // exactly; inactive channels carry noise at the mean active level.
        auto scale_noise = [](Eigen::MatrixXd& noise, const Eigen::MatrixXd& signal,
                              const std::vector<bool>& active, double snr) {
            const Eigen::VectorXd p_sig =
                signal.colwise().squaredNorm() / static_cast<double>(signal.rows());
            const Eigen::VectorXd p_noise =
                noise.colwise().squaredNorm() / static_cast<double>(noise.rows());
            double mean_target = 0.0;
            int n_active = 0;
            for (Eigen::Index c = 0; c < signal.cols(); ++c) {
                if (active[static_cast<std::size_t>(c)]) {
                    mean_target += p_sig[c] / snr;
                    ++n_active;
                }
            }
            mean_target = n_active > 0 ? mean_target / n_active : 0.0;
            for (Eigen::Index c = 0; c < signal.cols(); ++c) {
                const double target = active[static_cast<std::size_t>(c)]
                                          ? p_sig[c] / snr
                                          : mean_target;
                const double scale =
                    p_noise[c] > 1e-300 ? std::sqrt(target / p_noise[c]) : 0.0;
                noise.col(c) *= std::isfinite(scale) ? scale : 0.0;
            }
        };
        scale_noise(eeg_noise, eeg_signal, eeg_mix.active, config.snr_eeg);
        scale_noise(emg_noise, emg_signal, emg_mix.active, config.snr_emg);

        Recording eeg_rec;
        eeg_rec.samples = eeg_signal + eeg_noise;
        eeg_rec.sampling_rate = config.sampling_rate;
        eeg_rec.trial_length = config.trial_length;
        eeg_rec.channel_labels = channel_labels("EEG", p);

        Recording emg_rec;
        emg_rec.samples = emg_signal + emg_noise;
        emg_rec.sampling_rate = config.sampling_rate;
        emg_rec.trial_length = config.trial_length;
        emg_rec.channel_labels = channel_labels("EMG", q);

        SubjectGroundTruth gt;
        gt.eeg_active = eeg_mix.active;
        gt.emg_active = emg_mix.active;
        gt.eeg_weights = eeg_mix.weights;
        gt.emg_weights = emg_mix.weights;
        gt.eeg_bump_center = eeg_mix.center;
        gt.emg_bump_center = emg_mix.center;

        ds.eeg.push_back(std::move(eeg_rec));
        ds.emg.push_back(std::move(emg_rec));
        ds.ground_truth.push_back(std::move(gt));
    }
    return ds;
}

}  // namespace ssplsc
