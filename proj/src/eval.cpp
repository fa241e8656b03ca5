#include "ssplsc/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "ssplsc/parallel.hpp"
#include "ssplsc/rng.hpp"

namespace ssplsc {

void Band::validate() const {
    if (!(lo >= 0.0 && lo < hi)) throw ConfigError("band requires 0 <= lo < hi");
}

BinnedDataset BinnedDataset::restrict_to(const Band& band) const {
    band.validate();
    BinnedDataset out;
    for (std::size_t i = 0; i < bins(); ++i) {
        if (frequencies[i] >= band.lo && frequencies[i] < band.hi) {
            out.frequencies.push_back(frequencies[i]);
            out.x.push_back(x[i]);
            out.y.push_back(y[i]);
        }
    }
    return out;
}

BinnedDataset BinnedDataset::take_trials(const std::vector<int>& rows) const {
    BinnedDataset out;
    out.frequencies = frequencies;
    out.x.reserve(bins());
    out.y.reserve(bins());
    for (std::size_t i = 0; i < bins(); ++i) {
        SpectralSample sx, sy;
        sx.frequency_bin = x[i].frequency_bin;
        sy.frequency_bin = y[i].frequency_bin;
        sx.coefficients.resize(static_cast<Eigen::Index>(rows.size()), x[i].channels());
        sy.coefficients.resize(static_cast<Eigen::Index>(rows.size()), y[i].channels());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            sx.coefficients.row(static_cast<Eigen::Index>(r)) = x[i].coefficients.row(rows[r]);
            sy.coefficients.row(static_cast<Eigen::Index>(r)) = y[i].coefficients.row(rows[r]);
        }
        out.x.push_back(std::move(sx));
        out.y.push_back(std::move(sy));
    }
    return out;
}

std::string to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::Plsc: return "plsc";
        case SolverKind::Splsc: return "splsc";
        case SolverKind::Ssplsc: return "ssplsc";
        case SolverKind::Cacoh: return "cacoh";
    }
    return "unknown";
}

SolverKind solver_kind_from_string(const std::string& name) {
    if (name == "plsc") return SolverKind::Plsc;
    if (name == "splsc") return SolverKind::Splsc;
    if (name == "ssplsc") return SolverKind::Ssplsc;
    if (name == "cacoh") return SolverKind::Cacoh;
    throw ConfigError("unknown solver: " + name);
}

int CoherenceSpectrum::argmax_bin() const {
    int best = -1;
    for (std::size_t i = 0; i < bins.size(); ++i)
        if (bins[i].ok && (best < 0 || bins[i].coherence > bins[best].coherence))
            best = static_cast<int>(i);
    return best;
}

double latent_coherence(const SpectralSample& x, const SpectralSample& y,
                        const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta) {
    if (x.n() != y.n()) throw ShapeMismatch("trial counts differ");
    const Eigen::VectorXcd u = x.coefficients * alpha.cast<std::complex<double>>();
    const Eigen::VectorXcd v = y.coefficients * beta.cast<std::complex<double>>();
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu < 1e-12 || nv < 1e-12) throw ZeroLatent("latent variable has near-zero norm");
    return std::abs(u.dot(v)) / (nu * nv);
}

BinSolution solve_bin(const SpectralSample& x, const SpectralSample& y,
                      double frequency, const SolverSpec& spec,
                      const GraphLaplacian& lap_alpha, const GraphLaplacian& lap_beta) {
    BinSolution out;
    out.frequency = frequency;
    try {
        ProjectionSolution sol;
        switch (spec.kind) {
            case SolverKind::Plsc:
                sol = solve_plsc(x, y, spec.config);
                break;
            case SolverKind::Splsc:
                sol = solve_splsc(x, y, spec.params.lambda1, spec.params.lambda2, spec.config);
                break;
            case SolverKind::Ssplsc:
                sol = solve_ssplsc(x, y, lap_alpha, lap_beta, spec.params, spec.config);
                break;
            case SolverKind::Cacoh:
                sol = solve_cacoh(x, y, spec.cacoh);
                break;
        }
        out.alpha = sol.alpha;
        out.beta = sol.beta;
        out.phi = sol.phi;
        out.objective_trace = std::move(sol.objective_trace);
        out.coherence = latent_coherence(x, y, out.alpha, out.beta);
        out.ok = true;
    } catch (const Error& e) {
        out.error = e.code();
    }
    return out;
}

CoherenceSpectrum coherence_spectrum(const BinnedDataset& dataset,
                                     const SolverSpec& spec,
                                     const GraphLaplacian& lap_alpha,
                                     const GraphLaplacian& lap_beta, int jobs) {
    if (dataset.bins() == 0) throw ConfigError("dataset has no frequency bins");
    CoherenceSpectrum spectrum;
    spectrum.bins.resize(dataset.bins());
    parallel_for(static_cast<int>(dataset.bins()), jobs, [&](int i) {
        spectrum.bins[i] = solve_bin(dataset.x[i], dataset.y[i], dataset.frequencies[i],
                                     spec, lap_alpha, lap_beta);
    });
    return spectrum;
}

CSRReport permutation_csr(const BinnedDataset& band_dataset, const Band& band,
                          const SolverSpec& spec,
                          const GraphLaplacian& lap_alpha,
                          const GraphLaplacian& lap_beta,
                          int n_permutations, std::uint64_t seed, int jobs) {
    const CoherenceSpectrum real = coherence_spectrum(band_dataset, spec,
                                                      lap_alpha, lap_beta, jobs);
    return permutation_csr_with_real(band_dataset, band, spec, lap_alpha, lap_beta,
                                     real, n_permutations, seed, jobs);
}

CSRReport permutation_csr_with_real(const BinnedDataset& band_dataset, const Band& band,
                                    const SolverSpec& spec,
                                    const GraphLaplacian& lap_alpha,
                                    const GraphLaplacian& lap_beta,
                                    const CoherenceSpectrum& real,
                                    int n_permutations, std::uint64_t seed, int jobs) {
    band.validate();
    if (n_permutations < 1) throw ConfigError("n_permutations must be >= 1");
    if (band_dataset.bins() == 0) throw ConfigError("no bins in the analysis band");
    const int n = static_cast<int>(band_dataset.n());
    if (n < 3) throw ConfigError("permutation test needs n >= 3 trials");

    const std::size_t n_bins = band_dataset.bins();
    std::vector<std::vector<double>> perm_coh(n_permutations,
                                              std::vector<double>(n_bins, 0.0));

    parallel_for(n_permutations, jobs, [&](int perm) {
        for (int redraw = 0;; ++redraw) {
            if (redraw > 10)
                throw ZeroProjection("permutation " + std::to_string(perm) +
                                     " failed after 10 redraws");
            std::mt19937_64 rng(derive_seed(seed, 0x5u, static_cast<std::uint64_t>(perm),
                                            static_cast<std::uint64_t>(redraw)));
            std::vector<int> rows = identity_permutation(n);
            shuffle_indices(rows, rng);

            bool all_ok = true;
            std::vector<double> coh(n_bins, 0.0);
            for (std::size_t i = 0; i < n_bins; ++i) {
                SpectralSample shuffled_y;
                shuffled_y.frequency_bin = band_dataset.y[i].frequency_bin;
                shuffled_y.coefficients.resize(n, band_dataset.y[i].channels());
                for (int r = 0; r < n; ++r)
                    shuffled_y.coefficients.row(r) = band_dataset.y[i].coefficients.row(rows[r]);
                const BinSolution s = solve_bin(band_dataset.x[i], shuffled_y,
                                                band_dataset.frequencies[i], spec,
                                                lap_alpha, lap_beta);
                if (!s.ok) {
                    all_ok = false;
                    break;
                }
                coh[i] = s.coherence;
            }
            if (all_ok) {
                perm_coh[perm] = std::move(coh);
                return;
            }
        }
    });

    CSRReport report;
    report.band = band;
    report.n_permutations = n_permutations;
    report.seed = seed;
    report.frequencies = band_dataset.frequencies;
    report.real_coherence.assign(n_bins, std::numeric_limits<double>::quiet_NaN());
    report.permuted_mean.assign(n_bins, 0.0);
    double csr = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < n_bins; ++i) {
        double mean = 0.0;
        for (int perm = 0; perm < n_permutations; ++perm) mean += perm_coh[perm][i];
        mean /= n_permutations;
        report.permuted_mean[i] = mean;
        if (real.bins[i].ok) {
            report.real_coherence[i] = real.bins[i].coherence;
            if (real.bins[i].coherence > 1e-30) {
                csr = std::max(csr, (real.bins[i].coherence - mean) / real.bins[i].coherence);
                any = true;
            }
        }
    }
    if (!any) throw ZeroProjection("no bin produced a usable real coherence value");
    report.csr = csr;
    return report;
}

namespace {

double fold_cost(const BinnedDataset& train, const BinnedDataset& test,
                 const RegParams& params, const GraphLaplacian& lap_alpha,
                 const GraphLaplacian& lap_beta, const SolverConfig& config,
                 bool& ok) {
    ok = false;
    SolverSpec spec;
    spec.kind = SolverKind::Ssplsc;
    spec.params = params;
    spec.config = config;
    const CoherenceSpectrum spectrum =
        coherence_spectrum(train, spec, lap_alpha, lap_beta, 1);
    const int best = spectrum.argmax_bin();
    if (best < 0) return 0.0;
    const BinSolution& sol = spectrum.bins[best];
    const double coh_train = sol.coherence;
    if (coh_train < 1e-30) return 0.0;
    double coh_test;
    try {
        coh_test = latent_coherence(test.x[best], test.y[best], sol.alpha, sol.beta);
    } catch (const ZeroLatent&) {
        return 0.0;
    }
    ok = true;
    return std::abs(coh_test - coh_train) / coh_train;
}

}  // namespace

CVResult cross_validate_params(const BinnedDataset& band_dataset,
                               const GraphLaplacian& lap_alpha,
                               const GraphLaplacian& lap_beta,
                               std::uint64_t seed, const std::vector<double>& grid,
                               const SolverConfig& config, int jobs) {
    if (grid.empty()) throw ConfigError("empty parameter grid");
    const int n = static_cast<int>(band_dataset.n());
    constexpr int kFolds = 5;
    if (n < 2 * kFolds) throw ConfigError("cross-validation needs n >= 10 trials");

    // Seeded uniform partition into contiguous fold slices.
    std::mt19937_64 rng(derive_seed(seed, 0xCFu));
    std::vector<int> order = identity_permutation(n);
    shuffle_indices(order, rng);
    std::vector<BinnedDataset> train_sets, test_sets;
    for (int f = 0; f < kFolds; ++f) {
        const int begin = f * n / kFolds;
        const int end = (f + 1) * n / kFolds;
        std::vector<int> test_rows(order.begin() + begin, order.begin() + end);
        std::vector<int> train_rows;
        train_rows.insert(train_rows.end(), order.begin(), order.begin() + begin);
        train_rows.insert(train_rows.end(), order.begin() + end, order.end());
        train_sets.push_back(band_dataset.take_trials(train_rows));
        test_sets.push_back(band_dataset.take_trials(test_rows));
    }

    std::vector<bool> fold_ever_ok(kFolds, false);
    const double inf = std::numeric_limits<double>::infinity();

    auto search_stage = [&](int stage, const std::vector<RegParams>& points,
                            std::vector<GridPointCost>& surface) -> RegParams {
        std::vector<double> costs(points.size(), inf);
        std::vector<std::array<bool, kFolds>> fold_ok(points.size());
        parallel_for(static_cast<int>(points.size()), jobs, [&](int gi) {
            double total = 0.0;
            bool all_folds_ok = true;
            for (int f = 0; f < kFolds; ++f) {
                bool ok = false;
                const double c = fold_cost(train_sets[f], test_sets[f], points[gi],
                                           lap_alpha, lap_beta, config, ok);
                fold_ok[gi][f] = ok;
                if (!ok) {
                    all_folds_ok = false;
                    break;
                }
                total += c;
            }
            if (all_folds_ok) costs[gi] = total / kFolds;
        });
        int best = -1;
        for (std::size_t gi = 0; gi < points.size(); ++gi) {
            surface.push_back({stage, points[gi], costs[gi]});
            for (int f = 0; f < kFolds; ++f)
                if (fold_ok[gi][f]) fold_ever_ok[f] = true;
            if (std::isfinite(costs[gi]) &&
                (best < 0 || costs[gi] < costs[static_cast<std::size_t>(best)]))
                best = static_cast<int>(gi);
        }
        if (best < 0) {
            for (int f = 0; f < kFolds; ++f)
                if (!fold_ever_ok[f])
                    throw DegenerateFold("fold " + std::to_string(f) +
                                         " failed for every grid point");
            throw DegenerateFold("no grid point produced a finite cost");
        }
        return points[static_cast<std::size_t>(best)];
    };

    CVResult result;
    result.folds = kFolds;

    std::vector<RegParams> stage1;
    for (double g1 : grid)
        for (double g2 : grid) stage1.push_back({0.0, 0.0, g1, g2});
    const RegParams best_gamma = search_stage(1, stage1, result.cost_surface);

    std::vector<RegParams> stage2;
    for (double l1 : grid)
        for (double l2 : grid)
            stage2.push_back({l1, l2, best_gamma.gamma1, best_gamma.gamma2});
    result.chosen = search_stage(2, stage2, result.cost_surface);
    return result;
}

namespace {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd ca = a.array() - a.mean();
    const Eigen::VectorXd cb = b.array() - b.mean();
    const double denom = ca.norm() * cb.norm();
    if (denom < 1e-30) return 0.0;
    return ca.dot(cb) / denom;
}

}  // namespace

AlignedAverage align_and_average_patterns(const std::vector<Eigen::VectorXd>& patterns,
                                          int max_rounds) {
    if (patterns.size() < 2) throw ConfigError("need at least 2 patterns");
    const Eigen::Index dim = patterns.front().size();
    for (const auto& p : patterns) {
        if (p.size() != dim) throw ShapeMismatch("patterns differ in length");
        if (p.norm() < 1e-30) throw ZeroPattern("zero-norm pattern");
    }

    const int k = static_cast<int>(patterns.size());
    std::vector<int> signs(k, 1);
    Eigen::VectorXd total = Eigen::VectorXd::Zero(dim);
    for (const auto& p : patterns) total += p;

    AlignedAverage out;
    for (int round = 0; round < max_rounds; ++round) {
        bool changed = false;
        for (int i = 0; i < k; ++i) {
            const Eigen::VectorXd loo = (total - signs[i] * patterns[i]) / (k - 1);
            if (pearson(signs[i] * patterns[i], loo) < 0.0) {
                total -= 2.0 * signs[i] * patterns[i];
                signs[i] = -signs[i];
                changed = true;
            }
        }
        if (!changed) {
            out.converged = true;
            break;
        }
    }
    out.signs = std::move(signs);
    out.mean = total / k;
    return out;
}

}  // namespace ssplsc
