#include "ssplsc/optim.hpp"

#include <cmath>
#include <complex>
#include <optional>

namespace ssplsc {

void RegParams::validate() const {
    for (double v : {lambda1, lambda2, gamma1, gamma2})
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ConfigError("regularization parameters must be finite and >= 0");
}

void SolverConfig::validate() const {
    if (max_outer_iters < 1) throw ConfigError("max_outer_iters must be >= 1");
    if (!(rel_tol > 0.0)) throw ConfigError("rel_tol must be > 0");
    if (inner_prox_steps < 1) throw ConfigError("inner_prox_steps must be >= 1");
    if (n_phase_starts < 1) throw ConfigError("n_phase_starts must be >= 1");
}

double wrap_phase(double phi) {
    const double two_pi = 2.0 * std::numbers::pi;
    phi = std::fmod(phi, two_pi);
    if (phi < 0.0) phi += two_pi;
    return phi;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
    if (t < 0.0) throw ConfigError("soft_threshold requires t >= 0");
    return v.unaryExpr([t](double x) {
        const double mag = std::abs(x) - t;
        return mag > 0.0 ? (x > 0.0 ? mag : -mag) : 0.0;
    });
}

double step_size(const GraphLaplacian& lap, double gamma) {
    if (gamma < 0.0) throw ConfigError("gamma must be >= 0");
    if (gamma == 0.0 || lap.size() == 0) return 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap.laplacian,
                                                      Eigen::EigenvaluesOnly);
    const double lmax = std::max(0.0, es.eigenvalues().maxCoeff());
    return 1.0 / (1.0 + gamma * lmax);
}

Eigen::VectorXd smooth_gradient_alpha(const Eigen::VectorXd& alpha,
                                      const Eigen::VectorXd& beta,
                                      const Eigen::MatrixXd& sr_xy_phi,
                                      const GraphLaplacian& lap_alpha,
                                      double gamma1) {
    Eigen::VectorXd grad = -(sr_xy_phi * beta) + alpha;
    if (gamma1 != 0.0) grad += gamma1 * (lap_alpha.laplacian * alpha);
    return grad;
}

double sub_objective_alpha(const Eigen::VectorXd& alpha,
                           const Eigen::VectorXd& beta,
                           const Eigen::MatrixXd& sr_xy_phi,
                           const GraphLaplacian& lap_alpha,
                           double gamma1, double lambda1) {
    double quad = 0.5 * alpha.squaredNorm();
    if (gamma1 != 0.0) quad += 0.5 * gamma1 * alpha.dot(lap_alpha.laplacian * alpha);
    return -alpha.dot(sr_xy_phi * beta) + lambda1 * alpha.lpNorm<1>() + quad;
}

Eigen::VectorXd prox_steps_alpha(const Eigen::VectorXd& alpha,
                                 const Eigen::VectorXd& beta,
                                 const Eigen::MatrixXd& sr_xy_phi,
                                 const GraphLaplacian& lap_alpha,
                                 double gamma1, double lambda1,
                                 double t_alpha, int inner_steps) {
    auto prox_point = [&](const Eigen::VectorXd& y) {
        const Eigen::VectorXd grad =
            smooth_gradient_alpha(y, beta, sr_xy_phi, lap_alpha, gamma1);
        return soft_threshold(y - t_alpha * grad, lambda1 * t_alpha);
    };

    if (inner_steps == 1) {
        Eigen::VectorXd next = prox_point(alpha);
        if (next.lpNorm<Eigen::Infinity>() == 0.0)
            throw ZeroProjection("prox step zeroed the projection vector (lambda too large)");
        return next;
    }

    // FISTA with gradient-based restart.
    Eigen::VectorXd x_prev = alpha;
    Eigen::VectorXd y = alpha;
    double t_mom = 1.0;
    Eigen::VectorXd x = x_prev;
    for (int k = 0; k < inner_steps; ++k) {
        x = prox_point(y);
        if ((y - x).dot(x - x_prev) > 0.0) {  // restart
            y = x_prev;
            t_mom = 1.0;
            x = prox_point(y);
        }
        const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom)) / 2.0;
        y = x + ((t_mom - 1.0) / t_next) * (x - x_prev);
        x_prev = x;
        t_mom = t_next;
    }
    if (x.lpNorm<Eigen::Infinity>() == 0.0)
        throw ZeroProjection("prox steps zeroed the projection vector (lambda too large)");
    return x;
}

Eigen::VectorXd weighted_normalize(const Eigen::VectorXd& v,
                                   const GraphLaplacian& lap, double gamma) {
    double sq = v.squaredNorm();
    if (gamma != 0.0) sq += gamma * v.dot(lap.laplacian * v);
    const double norm = std::sqrt(std::max(sq, 0.0));
    if (norm < 1e-12)
        throw ZeroProjection("weighted norm below 1e-12, cannot normalize");
    return v / norm;
}

Eigen::VectorXd update_alpha(const Eigen::VectorXd& alpha,
                             const Eigen::VectorXd& beta,
                             const Eigen::MatrixXd& sr_xy_phi,
                             const GraphLaplacian& lap_alpha,
                             double gamma1, double lambda1,
                             double t_alpha, int inner_steps) {
    const Eigen::VectorXd stepped = prox_steps_alpha(alpha, beta, sr_xy_phi, lap_alpha,
                                                     gamma1, lambda1, t_alpha, inner_steps);
    return weighted_normalize(stepped, lap_alpha, gamma1);
}

std::pair<double, double> phase_coefficients(const Eigen::VectorXd& alpha,
                                             const Eigen::VectorXd& beta,
                                             const Eigen::MatrixXcd& s_xy) {
    const std::complex<double> c =
        alpha.cast<std::complex<double>>().dot(s_xy * beta.cast<std::complex<double>>());
    return {c.real(), c.imag()};
}

double update_phase(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                    const Eigen::MatrixXcd& s_xy, double phi0, double damping) {
    const auto [a, b] = phase_coefficients(alpha, beta, s_xy);
    const double scale = std::hypot(a, b);
    if (scale == 0.0)
        throw PhaseDegenerate("coupling identically zero, phase unconstrained");

    // Objective f(phi) = -(a cos phi + b sin phi) / scale; the division
    // conditions the damped step without moving the minimizer.
    double phi = wrap_phase(phi0);
    for (int k = 0; k < 100; ++k) {
        const double g = (a * std::sin(phi) - b * std::cos(phi)) / scale;
        const double delta = g / (g * g + damping);
        phi = wrap_phase(phi - delta);
        if (std::abs(delta) < 1e-10) break;
    }
    return phi;
}

double objective(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                 double phi, const Eigen::MatrixXcd& s_xy,
                 const GraphLaplacian& lap_alpha, const GraphLaplacian& lap_beta,
                 const RegParams& params) {
    const auto [a, b] = phase_coefficients(alpha, beta, s_xy);
    const double coupling = a * std::cos(phi) + b * std::sin(phi);
    double quad_a = 0.5 * alpha.squaredNorm();
    if (params.gamma1 != 0.0)
        quad_a += 0.5 * params.gamma1 * alpha.dot(lap_alpha.laplacian * alpha);
    double quad_b = 0.5 * beta.squaredNorm();
    if (params.gamma2 != 0.0)
        quad_b += 0.5 * params.gamma2 * beta.dot(lap_beta.laplacian * beta);
    return -coupling + params.lambda1 * alpha.lpNorm<1>() +
           params.lambda2 * beta.lpNorm<1>() + quad_a + quad_b;
}

namespace {

struct RunResult {
    ProjectionSolution sol;
    double final_objective = 0.0;
};

RunResult run_single(const Eigen::MatrixXcd& s_xy,
                     const GraphLaplacian& lap_alpha, const GraphLaplacian& lap_beta,
                     const RegParams& params, const SolverConfig& config,
                     double t_alpha, double t_beta, double phi0) {
    const Eigen::Index p = s_xy.rows();
    const Eigen::Index q = s_xy.cols();

    Eigen::VectorXd alpha = Eigen::VectorXd::Ones(p);
    Eigen::VectorXd beta = Eigen::VectorXd::Ones(q);
    double phi = wrap_phase(phi0);

    ProjectionSolution sol;
    double prev_obj = 0.0;
    bool have_prev = false;
    int iters = 0;
    for (; iters < config.max_outer_iters; ++iters) {
        const Eigen::MatrixXd sr =
            (s_xy * std::exp(std::complex<double>(0.0, -phi))).real();
        alpha = update_alpha(alpha, beta, sr, lap_alpha, params.gamma1,
                             params.lambda1, t_alpha, config.inner_prox_steps);
        beta = update_alpha(beta, alpha, sr.transpose(), lap_beta, params.gamma2,
                            params.lambda2, t_beta, config.inner_prox_steps);
        try {
            phi = update_phase(alpha, beta, s_xy, phi, config.lm_damping);
        } catch (const PhaseDegenerate&) {
            // Coupling identically zero for this pair; keep phi unchanged.
        }

        const double obj = objective(alpha, beta, phi, s_xy, lap_alpha, lap_beta, params);
        if (!std::isfinite(obj)) throw NonFinite("objective left the finite range");
        sol.objective_trace.push_back(obj);
        if (have_prev &&
            std::abs(obj - prev_obj) <= config.rel_tol * std::max(std::abs(prev_obj), 1e-12)) {
            sol.converged = true;
            ++iters;
            break;
        }
        prev_obj = obj;
        have_prev = true;
    }

    const double final_obj = sol.objective_trace.back();

    // Output rescaling to unit l2; phi optimality is unaffected.
    const double na = alpha.norm();
    const double nb = beta.norm();
    if (na < 1e-300 || nb < 1e-300)
        throw ZeroProjection("solution vector collapsed to zero");
    sol.alpha = alpha / na;
    sol.beta = beta / nb;
    sol.phi = phi;
    const auto [a, b] = phase_coefficients(sol.alpha, sol.beta, s_xy);
    sol.coupling = a * std::cos(phi) + b * std::sin(phi);
    sol.iterations_used = iters;
    return {std::move(sol), final_obj};
}

}  // namespace

ProjectionSolution solve_ssplsc_s(const Eigen::MatrixXcd& s_xy,
                                  const GraphLaplacian& lap_alpha,
                                  const GraphLaplacian& lap_beta,
                                  const RegParams& params,
                                  const SolverConfig& config) {
    params.validate();
    config.validate();
    if (lap_alpha.size() != 0 && lap_alpha.size() != s_xy.rows())
        throw ShapeMismatch("lap_alpha dimension does not match p");
    if (lap_beta.size() != 0 && lap_beta.size() != s_xy.cols())
        throw ShapeMismatch("lap_beta dimension does not match q");

    const double t_alpha = step_size(lap_alpha, params.gamma1);
    const double t_beta = step_size(lap_beta, params.gamma2);

    std::optional<RunResult> best;
    std::exception_ptr last_error;
    const double spacing = 2.0 * std::numbers::pi / config.n_phase_starts;
    for (int s = 0; s < config.n_phase_starts; ++s) {
        try {
            RunResult r = run_single(s_xy, lap_alpha, lap_beta, params, config,
                                     t_alpha, t_beta, config.phase_init + s * spacing);
            if (!best || r.final_objective < best->final_objective) best = std::move(r);
        } catch (const Error&) {
            last_error = std::current_exception();
        }
    }
    if (!best) std::rethrow_exception(last_error);
    return std::move(best->sol);
}

ProjectionSolution solve_ssplsc(const SpectralSample& x, const SpectralSample& y,
                                const GraphLaplacian& lap_alpha,
                                const GraphLaplacian& lap_beta,
                                const RegParams& params, const SolverConfig& config) {
    if (x.n() != y.n())
        throw ShapeMismatch("x and y trial counts differ");
    if (x.n() < 2) throw EmptyRecording("need n >= 2 trials");
    const Eigen::MatrixXcd s_xy = x.coefficients.adjoint() * y.coefficients;
    return solve_ssplsc_s(s_xy, lap_alpha, lap_beta, params, config);
}

}  // namespace ssplsc
