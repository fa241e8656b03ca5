#ifndef SSPLSC_EVAL_HPP
#define SSPLSC_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ssplsc/baselines.hpp"
#include "ssplsc/optim.hpp"

namespace ssplsc {

struct Band {
    std::string name;
    double lo = 0.0;  // Hz, inclusive
    double hi = 0.0;  // Hz, exclusive

    void validate() const;
};

/// Paired spectral samples over a set of frequency bins.
struct BinnedDataset {
    std::vector<double> frequencies;  // strictly increasing
    std::vector<SpectralSample> x;
    std::vector<SpectralSample> y;

    std::size_t bins() const { return frequencies.size(); }
    Eigen::Index n() const { return x.empty() ? 0 : x.front().n(); }
    // Subset of bins whose center lies in [band.lo, band.hi).
    BinnedDataset restrict_to(const Band& band) const;
    // Row subset of every bin (trial selection).
    BinnedDataset take_trials(const std::vector<int>& rows) const;
};

enum class SolverKind { Plsc, Splsc, Ssplsc, Cacoh };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

/// Everything needed to run one solver on one frequency bin.
struct SolverSpec {
    SolverKind kind = SolverKind::Ssplsc;
    RegParams params;
    SolverConfig config;
    CacohConfig cacoh;
};

struct BinSolution {
    double frequency = 0.0;
    double coherence = 0.0;
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;
    double phi = 0.0;
    std::vector<double> objective_trace;
    bool ok = false;
    std::string error;  // error code when !ok
};

struct CoherenceSpectrum {
    std::vector<BinSolution> bins;

    // Index of the ok bin with maximum coherence; -1 if none succeeded.
    int argmax_bin() const;
};

struct CSRReport {
    Band band;
    double csr = 0.0;
    std::vector<double> frequencies;
    std::vector<double> real_coherence;
    std::vector<double> permuted_mean;
    int n_permutations = 0;
    std::uint64_t seed = 0;
};

struct GridPointCost {
    int stage = 1;
    RegParams params;
    double cost = 0.0;  // +inf when every fold failed at this point
};

struct CVResult {
    RegParams chosen;
    std::vector<GridPointCost> cost_surface;
    int folds = 5;
};

// |u^H v| / (||u|| ||v||) for latent variables u = X alpha, v = Y beta.
double latent_coherence(const SpectralSample& x, const SpectralSample& y,
                        const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta);

// Applies the solver spec to a single bin and evaluates latent coherence.
// Never throws for solver failures; the result carries ok/error instead.
BinSolution solve_bin(const SpectralSample& x, const SpectralSample& y,
                      double frequency, const SolverSpec& spec,
                      const GraphLaplacian& lap_alpha, const GraphLaplacian& lap_beta);

// One independent solve per bin.
CoherenceSpectrum coherence_spectrum(const BinnedDataset& dataset,
                                     const SolverSpec& spec,
                                     const GraphLaplacian& lap_alpha,
                                     const GraphLaplacian& lap_beta,
                                     int jobs = 1);

// Permutation-based coherence significance ratio over the dataset's bins.
// Each permutation draws one row shuffle of Y shared across all bins; a
// permutation whose solve fails is redrawn (up to 10 times). Reproducible
// given seed, independent of jobs.
CSRReport permutation_csr(const BinnedDataset& band_dataset, const Band& band,
                          const SolverSpec& spec,
                          const GraphLaplacian& lap_alpha,
                          const GraphLaplacian& lap_beta,
                          int n_permutations, std::uint64_t seed, int jobs = 1);

// Same, reusing an already-computed real spectrum for the dataset.
CSRReport permutation_csr_with_real(const BinnedDataset& band_dataset, const Band& band,
                                    const SolverSpec& spec,
                                    const GraphLaplacian& lap_alpha,
                                    const GraphLaplacian& lap_beta,
                                    const CoherenceSpectrum& real,
                                    int n_permutations, std::uint64_t seed, int jobs = 1);

// Five-fold cross-validated stepwise grid search: stage 1 picks (gamma1,
// gamma2) with lambda = 0, stage 2 picks (lambda1, lambda2) with the best
// gammas fixed. Cost per point is the mean over folds of
// |Coh_test - Coh_train| / Coh_train at the training-set max-coherence bin.
CVResult cross_validate_params(const BinnedDataset& band_dataset,
                               const GraphLaplacian& lap_alpha,
                               const GraphLaplacian& lap_beta,
                               std::uint64_t seed,
                               const std::vector<double>& grid = {0.01, 0.1, 1.0, 10.0},
                               const SolverConfig& config = {}, int jobs = 1);

struct AlignedAverage {
    Eigen::VectorXd mean;
    std::vector<int> signs;  // +1 / -1 applied to each input
    bool converged = false;
};

// Iteratively flips patterns negatively correlated with the leave-one-out
// average of the others, then returns the elementwise mean.
AlignedAverage align_and_average_patterns(const std::vector<Eigen::VectorXd>& patterns,
                                          int max_rounds = 100);

}  // namespace ssplsc

#endif
