#include "ssplsc/spectra.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace ssplsc {

void Recording::validate() const {
    if (sampling_rate <= 0.0) throw ConfigError("sampling_rate must be > 0");
    if (trial_length <= 0.0) throw ConfigError("trial_length must be > 0");
    if (!samples.allFinite()) throw ConfigError("recording contains non-finite samples");
    const Eigen::Index spt = samples_per_trial();
    if (spt <= 0) throw ConfigError("trial_length * sampling_rate must be >= 1 sample");
    if (!channel_labels.empty() &&
        static_cast<Eigen::Index>(channel_labels.size()) != samples.cols())
        throw ConfigError("channel_labels count does not match channel count");
}

GraphLaplacian GraphLaplacian::zero(Eigen::Index dim) {
    GraphLaplacian g;
    g.connectivity = Eigen::MatrixXd::Zero(dim, dim);
    g.degree = Eigen::MatrixXd::Zero(dim, dim);
    g.laplacian = Eigen::MatrixXd::Zero(dim, dim);
    return g;
}

std::vector<Eigen::MatrixXd> segment_trials(const Recording& recording) {
    recording.validate();
    const Eigen::Index spt = recording.samples_per_trial();
    const Eigen::Index n_trials = recording.samples.rows() / spt;
    if (n_trials < 2)
        throw EmptyRecording("fewer than 2 full trials fit the recording (" +
                             std::to_string(recording.samples.rows()) + " samples, " +
                             std::to_string(spt) + " per trial)");
    std::vector<Eigen::MatrixXd> trials;
    trials.reserve(n_trials);
    for (Eigen::Index t = 0; t < n_trials; ++t)
        trials.push_back(recording.samples.middleRows(t * spt, spt));
    return trials;
}

void zscore_trials(std::vector<Eigen::MatrixXd>& trials) {
    for (auto& trial : trials) {
        const double n = static_cast<double>(trial.rows());
        for (Eigen::Index c = 0; c < trial.cols(); ++c) {
            auto col = trial.col(c);
            const double mean = col.mean();
            col.array() -= mean;
            const double sd = std::sqrt(col.squaredNorm() / n);
            if (sd > 1e-30) col /= sd;
        }
    }
}

SpectralSample fourier_coefficients(const std::vector<Eigen::MatrixXd>& trials,
                                    double sampling_rate, double frequency_bin,
                                    Window window) {
    if (trials.size() < 2) throw EmptyRecording("need at least 2 trials");
    const Eigen::Index n_samp = trials.front().rows();
    const Eigen::Index n_ch = trials.front().cols();
    const double trial_length = static_cast<double>(n_samp) / sampling_rate;

    const double k_real = frequency_bin * trial_length;
    const double k_round = std::round(k_real);
    if (std::abs(k_real - k_round) > 1e-9 || k_round < 0.0 ||
        k_round > static_cast<double>(n_samp) / 2.0)
        throw BinMismatch("frequency " + std::to_string(frequency_bin) +
                          " Hz is not a DFT bin for trial length " +
                          std::to_string(trial_length) + " s");
    const Eigen::Index k = static_cast<Eigen::Index>(k_round);

    Eigen::VectorXd taper = Eigen::VectorXd::Ones(n_samp);
    if (window == Window::Hann) {
        for (Eigen::Index m = 0; m < n_samp; ++m)
            taper[m] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * m / n_samp));
    }

    Eigen::VectorXcd twiddle(n_samp);
    for (Eigen::Index m = 0; m < n_samp; ++m) {
        const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) * m / n_samp;
        twiddle[m] = std::complex<double>(std::cos(ang), std::sin(ang)) * taper[m];
    }

    SpectralSample out;
    out.frequency_bin = frequency_bin;
    out.coefficients.resize(static_cast<Eigen::Index>(trials.size()), n_ch);
    for (std::size_t t = 0; t < trials.size(); ++t) {
        if (trials[t].rows() != n_samp || trials[t].cols() != n_ch)
            throw ShapeMismatch("trials differ in shape");
        out.coefficients.row(static_cast<Eigen::Index>(t)) =
            (twiddle.transpose() * trials[t].cast<std::complex<double>>());
    }
    return out;
}

CrossSpectrumBlock cross_spectrum(const SpectralSample& x, const SpectralSample& y) {
    if (x.n() != y.n())
        throw ShapeMismatch("trial counts differ: " + std::to_string(x.n()) +
                            " vs " + std::to_string(y.n()));
    CrossSpectrumBlock s;
    s.s_xx = x.coefficients.adjoint() * x.coefficients;
    s.s_xy = x.coefficients.adjoint() * y.coefficients;
    s.s_yx = s.s_xy.adjoint();
    s.s_yy = y.coefficients.adjoint() * y.coefficients;
    return s;
}

Eigen::MatrixXd sensor_connectivity(const std::vector<SpectralSample>& band_samples) {
    if (band_samples.empty()) throw ConfigError("need at least 1 frequency bin");
    const Eigen::Index n_ch = band_samples.front().channels();

    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n_ch, n_ch);
    Eigen::VectorXd total_auto = Eigen::VectorXd::Zero(n_ch);
    for (const auto& sample : band_samples) {
        if (sample.channels() != n_ch) throw ShapeMismatch("channel counts differ across bins");
        if (sample.n() < 2) throw EmptyRecording("need n >= 2 trials per bin");
        const Eigen::MatrixXcd s = sample.coefficients.adjoint() * sample.coefficients;
        const Eigen::VectorXd auto_spec = s.diagonal().real();
        total_auto += auto_spec;
        for (Eigen::Index i = 0; i < n_ch; ++i) {
            for (Eigen::Index j = i + 1; j < n_ch; ++j) {
                const double denom = auto_spec[i] * auto_spec[j];
                if (denom > 1e-60) {
                    const double coh = std::abs(s(i, j)) / std::sqrt(denom);
                    c(i, j) += coh;
                    c(j, i) += coh;
                }
            }
        }
    }
    for (Eigen::Index i = 0; i < n_ch; ++i)
        if (total_auto[i] <= 1e-60)
            throw DegenerateChannel("sensor " + std::to_string(i) +
                                    " has zero auto-spectrum across the band");
    c /= static_cast<double>(band_samples.size());
    // Band averaging keeps every entry within [0, 1]; clamp rounding dust.
    c = c.cwiseMin(1.0).cwiseMax(0.0);
    c.diagonal().setZero();
    return c;
}

GraphLaplacian laplacian(const Eigen::MatrixXd& connectivity) {
    if (connectivity.rows() != connectivity.cols())
        throw ShapeMismatch("connectivity must be square");
    if ((connectivity - connectivity.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw AsymmetricConnectivity("connectivity asymmetry exceeds 1e-10");
    if (connectivity.minCoeff() < 0.0)
        throw ConfigError("connectivity entries must be nonnegative");

    GraphLaplacian g;
    g.connectivity = (connectivity + connectivity.transpose()) / 2.0;
    g.connectivity.diagonal().setZero();
    g.degree = g.connectivity.rowwise().sum().asDiagonal();
    g.laplacian = g.degree - g.connectivity;
    return g;
}

std::vector<double> band_bins(double lo, double hi, double trial_length,
                              double sampling_rate) {
    if (!(lo >= 0.0 && lo < hi)) throw ConfigError("band requires 0 <= lo < hi");
    const double df = 1.0 / trial_length;
    const double nyquist = sampling_rate / 2.0;
    std::vector<double> bins;
    // Inclusive lower bound, exclusive upper.
    for (long k = static_cast<long>(std::ceil(lo / df - 1e-9));; ++k) {
        const double f = k * df;
        if (f >= hi || f > nyquist + 1e-9) break;
        bins.push_back(f);
    }
    return bins;
}

}  // namespace ssplsc
