#ifndef SSPLSC_BASELINES_HPP
#define SSPLSC_BASELINES_HPP

#include "ssplsc/optim.hpp"

namespace ssplsc {

// Unpenalized variant: lambda = gamma = 0.
ProjectionSolution solve_plsc(const SpectralSample& x, const SpectralSample& y,
                              const SolverConfig& config = {});

// Sparsity-only variant: gamma = 0.
ProjectionSolution solve_splsc(const SpectralSample& x, const SpectralSample& y,
                               double lambda1, double lambda2,
                               const SolverConfig& config = {});

struct CacohConfig {
    double ridge_scale = 1e-8;   // ridge loading on Re(S_XX), Re(S_YY)
    double tol = 1e-8;
    int max_iters = 200;
    // Optional PCA preprocessing per modality, retaining at least this
    // fraction of variance; 0 disables it and uses plain ridge loading.
    double pca_retain = 0.0;
};

// Canonical-coherence comparator (caCOH-like): alternates a whitened SVD for
// fixed phase with the closed-form phase update, maximizing
//   alpha^T Re(S_XY e^{-i phi}) beta / sqrt(alpha^T Re(S_XX) alpha * beta^T Re(S_YY) beta).
// coupling holds the maximized canonical coherence in [0, 1].
ProjectionSolution solve_cacoh(const SpectralSample& x, const SpectralSample& y,
                               const CacohConfig& config = {});

}  // namespace ssplsc

#endif
