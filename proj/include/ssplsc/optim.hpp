#ifndef SSPLSC_OPTIM_HPP
#define SSPLSC_OPTIM_HPP

#include <Eigen/Dense>
#include <numbers>
#include <vector>

#include "ssplsc/spectra.hpp"

namespace ssplsc {

/// Regularization weights: lambda* control sparsity, gamma* the
/// connectivity-structured penalty.
struct RegParams {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;

    void validate() const;
    bool operator==(const RegParams&) const = default;
};

struct SolverConfig {
    int max_outer_iters = 500;
    double rel_tol = 1e-6;         // relative objective change threshold
    int inner_prox_steps = 1;      // >1 switches the inner loop to FISTA
    double lm_damping = 1.0;
    double phase_init = std::numbers::pi / 4.0;
    // Deterministic multi-start over evenly spaced initial phases; the run
    // with the lowest final objective wins. 1 reproduces a plain single
    // start at phase_init.
    int n_phase_starts = 32;

    void validate() const;
};

struct ProjectionSolution {
    Eigen::VectorXd alpha;  // unit l2
    Eigen::VectorXd beta;   // unit l2
    double phi = 0.0;       // radians in [0, 2pi)
    double coupling = 0.0;  // alpha^T Re(S_XY e^{-i phi}) beta, >= 0 at a solution
    std::vector<double> objective_trace;
    int iterations_used = 0;
    bool converged = false;
};

// prox of t*||.||_1: elementwise sign(v_i) * max(|v_i| - t, 0).
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t);

// 1 / lambda_max(I + gamma L); lies in (0, 1] for PSD L.
double step_size(const GraphLaplacian& lap, double gamma);

// Gradient of the smooth part of the alpha sub-objective:
//   -sr_xy_phi * beta + (I + gamma1 L_alpha) alpha
Eigen::VectorXd smooth_gradient_alpha(const Eigen::VectorXd& alpha,
                                      const Eigen::VectorXd& beta,
                                      const Eigen::MatrixXd& sr_xy_phi,
                                      const GraphLaplacian& lap_alpha,
                                      double gamma1);

// Smooth part + l1 term of the alpha sub-objective, used by descent checks.
double sub_objective_alpha(const Eigen::VectorXd& alpha,
                           const Eigen::VectorXd& beta,
                           const Eigen::MatrixXd& sr_xy_phi,
                           const GraphLaplacian& lap_alpha,
                           double gamma1, double lambda1);

// inner_steps proximal-gradient steps (FISTA with restart when > 1) on the
// alpha sub-objective, without the trailing normalization. Throws
// ZeroProjection if the prox output vanishes.
Eigen::VectorXd prox_steps_alpha(const Eigen::VectorXd& alpha,
                                 const Eigen::VectorXd& beta,
                                 const Eigen::MatrixXd& sr_xy_phi,
                                 const GraphLaplacian& lap_alpha,
                                 double gamma1, double lambda1,
                                 double t_alpha, int inner_steps);

// Rescales v so the (I + gamma L)-weighted norm equals 1.
Eigen::VectorXd weighted_normalize(const Eigen::VectorXd& v,
                                   const GraphLaplacian& lap, double gamma);

// prox_steps_alpha followed by weighted normalization.
Eigen::VectorXd update_alpha(const Eigen::VectorXd& alpha,
                             const Eigen::VectorXd& beta,
                             const Eigen::MatrixXd& sr_xy_phi,
                             const GraphLaplacian& lap_alpha,
                             double gamma1, double lambda1,
                             double t_alpha, int inner_steps);

// The trigonometric phase objective -(a cos phi + b sin phi) has
//   a = alpha^T Re(S_XY) beta,  b = alpha^T Im(S_XY) beta.
std::pair<double, double> phase_coefficients(const Eigen::VectorXd& alpha,
                                             const Eigen::VectorXd& beta,
                                             const Eigen::MatrixXcd& s_xy);

// Damped Levenberg-Marquardt iteration on the phase objective from phi0.
// Converges to atan2(b, a) mod 2pi. Throws PhaseDegenerate when a = b = 0.
double update_phase(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                    const Eigen::MatrixXcd& s_xy, double phi0 = std::numbers::pi / 4.0,
                    double damping = 1.0);

// Full penalized objective:
//   -alpha^T Re(S_XY e^{-i phi}) beta + l1 terms + quadratic terms.
double objective(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                 double phi, const Eigen::MatrixXcd& s_xy,
                 const GraphLaplacian& lap_alpha, const GraphLaplacian& lap_beta,
                 const RegParams& params);

// Alternating proximal-gradient / LM solver. Deterministic.
ProjectionSolution solve_ssplsc(const SpectralSample& x, const SpectralSample& y,
                                const GraphLaplacian& lap_alpha,
                                const GraphLaplacian& lap_beta,
                                const RegParams& params,
                                const SolverConfig& config = {});

// Same solver on a precomputed cross-spectrum block S_XY = X^H Y.
ProjectionSolution solve_ssplsc_s(const Eigen::MatrixXcd& s_xy,
                                  const GraphLaplacian& lap_alpha,
                                  const GraphLaplacian& lap_beta,
                                  const RegParams& params,
                                  const SolverConfig& config = {});

double wrap_phase(double phi);  // into [0, 2pi)

}  // namespace ssplsc

#endif
