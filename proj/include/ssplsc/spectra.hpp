#ifndef SSPLSC_SPECTRA_HPP
#define SSPLSC_SPECTRA_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ssplsc/errors.hpp"

namespace ssplsc {

/// Raw multichannel time series, trial-aligned: the time dimension is an
/// exact multiple of trial_length * sampling_rate.
struct Recording {
    Eigen::MatrixXd samples;  // time x channels
    double sampling_rate = 0.0;  // Hz
    double trial_length = 0.0;   // seconds
    std::vector<std::string> channel_labels;

    Eigen::Index channels() const { return samples.cols(); }
    Eigen::Index samples_per_trial() const {
        return static_cast<Eigen::Index>(trial_length * sampling_rate + 0.5);
    }
    void validate() const;
};

/// Per-trial complex Fourier coefficients at a single frequency bin.
/// Rows are trials, columns are channels.
struct SpectralSample {
    Eigen::MatrixXcd coefficients;  // n trials x channels
    double frequency_bin = 0.0;     // Hz

    Eigen::Index n() const { return coefficients.rows(); }
    Eigen::Index channels() const { return coefficients.cols(); }
};

/// Hermitian cross-spectrum block matrix.
struct CrossSpectrumBlock {
    Eigen::MatrixXcd s_xx;  // p x p
    Eigen::MatrixXcd s_xy;  // p x q
    Eigen::MatrixXcd s_yx;  // q x p
    Eigen::MatrixXcd s_yy;  // q x q
};

/// Connectivity graph of one modality's sensors together with its Laplacian
/// L = D - C. L is symmetric PSD with zero row sums.
struct GraphLaplacian {
    Eigen::MatrixXd connectivity;  // C: symmetric, nonnegative, zero diagonal
    Eigen::MatrixXd degree;        // D: diagonal, d_i = sum_k c_ik
    Eigen::MatrixXd laplacian;     // L = D - C

    Eigen::Index size() const { return laplacian.rows(); }
    static GraphLaplacian zero(Eigen::Index dim);
};

enum class Window { Rectangular, Hann };

// Splits the recording into contiguous non-overlapping trials in temporal
// order. Throws EmptyRecording if fewer than 2 full trials fit.
std::vector<Eigen::MatrixXd> segment_trials(const Recording& recording);

// Z-scores every channel of every trial in place (zero mean, unit variance
// per channel per trial). Channels with near-zero variance are left demeaned.
void zscore_trials(std::vector<Eigen::MatrixXd>& trials);

// Single-bin DFT of each trial, one complex coefficient per channel.
// frequency_bin must land on a DFT-native bin (multiples of 1/trial_length).
SpectralSample fourier_coefficients(const std::vector<Eigen::MatrixXd>& trials,
                                    double sampling_rate, double frequency_bin,
                                    Window window = Window::Hann);

// S_xy = X^H Y and the matching auto-spectrum blocks.
CrossSpectrumBlock cross_spectrum(const SpectralSample& x, const SpectralSample& y);

// Band-averaged magnitude coherence between sensors, zero diagonal.
// Entries lie in [0, 1]. Throws DegenerateChannel if a sensor carries no
// power anywhere in the band.
Eigen::MatrixXd sensor_connectivity(const std::vector<SpectralSample>& band_samples);

// L = D - C for a symmetric nonnegative connectivity with zero diagonal.
GraphLaplacian laplacian(const Eigen::MatrixXd& connectivity);

// DFT-native bin frequencies whose center lies in [lo, hi) for the given
// trial length (resolution 1/trial_length Hz), capped at Nyquist.
std::vector<double> band_bins(double lo, double hi, double trial_length,
                              double sampling_rate);

}  // namespace ssplsc

#endif
