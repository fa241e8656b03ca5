#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "ssplsc/baselines.hpp"
#include "ssplsc/optim.hpp"
#include "test_util.hpp"

using namespace ssplsc;
using namespace ssplsc_test;

namespace {

// Brute-force maximizer of a*cos(phi) + b*sin(phi) on a dense grid.
double grid_phase(double a, double b, double resolution = 1e-4) {
    double best_phi = 0.0, best_val = -1e300;
    for (double phi = 0.0; phi < 2.0 * std::numbers::pi; phi += resolution) {
        const double val = a * std::cos(phi) + b * std::sin(phi);
        if (val > best_val) {
            best_val = val;
            best_phi = phi;
        }
    }
    return best_phi;
}

double angular_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
    return std::min(d, 2.0 * std::numbers::pi - d);
}

// max over a phi grid of sigma_max(Re(S) cos phi + Im(S) sin phi).
double svd_phase_oracle(const Eigen::MatrixXcd& s_xy, double resolution = 1e-3) {
    double best = 0.0;
    for (double phi = 0.0; phi < 2.0 * std::numbers::pi; phi += resolution) {
        const Eigen::MatrixXd m =
            s_xy.real() * std::cos(phi) + s_xy.imag() * std::sin(phi);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        best = std::max(best, svd.singularValues()[0]);
    }
    return best;
}

double smooth_part(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                   const Eigen::MatrixXd& sr, const GraphLaplacian& lap,
                   double gamma) {
    return -alpha.dot(sr * beta) +
           0.5 * (alpha.squaredNorm() + gamma * alpha.dot(lap.laplacian * alpha));
}

}  // namespace

TEST_CASE("soft_threshold closed form") {
    Eigen::VectorXd v(3);
    v << 3.0, -0.5, 1.0;
    const Eigen::VectorXd out = soft_threshold(v, 1.0);
    CHECK(out[0] == doctest::Approx(2.0));
    CHECK(out[1] == 0.0);
    CHECK(out[2] == 0.0);
    CHECK((soft_threshold(v, 0.0) - v).cwiseAbs().maxCoeff() == 0.0);
    CHECK(soft_threshold(v, 3.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("step_size closed forms and power-iteration oracle") {
    CHECK(step_size(GraphLaplacian::zero(3), 0.0) == 1.0);

    Eigen::MatrixXd c(2, 2);
    c << 0, 1, 1, 0;
    CHECK(step_size(laplacian(c), 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    std::mt19937_64 rng(31);
    const GraphLaplacian g = laplacian(random_connectivity(rng, 7));
    const Eigen::MatrixXd m =
        Eigen::MatrixXd::Identity(7, 7) + 2.0 * g.laplacian;
    Eigen::VectorXd v = random_vector(rng, 7).normalized();
    double lambda = 0.0;
    for (int it = 0; it < 5000; ++it) {
        v = (m * v).normalized();
        lambda = v.dot(m * v);
    }
    CHECK(step_size(g, 2.0) == doctest::Approx(1.0 / lambda).epsilon(1e-8));
}

TEST_CASE("smooth_gradient_alpha vanishes at the origin") {
    const GraphLaplacian g = GraphLaplacian::zero(3);
    const Eigen::VectorXd grad = smooth_gradient_alpha(
        Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2),
        Eigen::MatrixXd::Random(3, 2), g, 0.0);
    CHECK(grad.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("smooth_gradient_alpha matches central finite differences") {
    std::mt19937_64 rng(32);
    const Eigen::Index p = 5, q = 3;
    const Eigen::MatrixXd sr = random_matrix(rng, p, q);
    const GraphLaplacian g = laplacian(random_connectivity(rng, p));
    const Eigen::VectorXd alpha = random_vector(rng, p);
    const Eigen::VectorXd beta = random_vector(rng, q);
    const double gamma = 0.7;
    const Eigen::VectorXd grad = smooth_gradient_alpha(alpha, beta, sr, g, gamma);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < p; ++i) {
        Eigen::VectorXd ap = alpha, am = alpha;
        ap[i] += h;
        am[i] -= h;
        const double fd = (smooth_part(ap, beta, sr, g, gamma) -
                           smooth_part(am, beta, sr, g, gamma)) /
                          (2.0 * h);
        CHECK(std::abs(grad[i] - fd) < 1e-6);
    }
}

TEST_CASE("update_alpha from zero lands on the normalized matched filter") {
    std::mt19937_64 rng(33);
    const Eigen::Index p = 4, q = 3;
    const Eigen::MatrixXd sr = random_matrix(rng, p, q);
    const Eigen::VectorXd beta = random_vector(rng, q);
    const GraphLaplacian g = GraphLaplacian::zero(p);
    const Eigen::VectorXd out = update_alpha(Eigen::VectorXd::Zero(p), beta, sr, g,
                                             0.0, 0.0, 1.0, 1);
    const Eigen::VectorXd expected = (sr * beta).normalized();
    CHECK((out - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("update_alpha surfaces full shrinkage as ZeroProjection") {
    std::mt19937_64 rng(34);
    const Eigen::MatrixXd sr = random_matrix(rng, 4, 3);
    const Eigen::VectorXd beta = random_vector(rng, 3);
    const GraphLaplacian g = GraphLaplacian::zero(4);
    const double big_lambda = (sr * beta).cwiseAbs().maxCoeff() + 1.0;
    CHECK_THROWS_AS(update_alpha(Eigen::VectorXd::Zero(4), beta, sr, g, 0.0,
                                 big_lambda, 1.0, 1),
                    ZeroProjection);
}

TEST_CASE("one proximal step never increases the sub-objective") {
    std::mt19937_64 rng(35);
    for (int rep = 0; rep < 30; ++rep) {
        const Eigen::Index p = 3 + static_cast<Eigen::Index>(rng() % 6);
        const Eigen::Index q = 3 + static_cast<Eigen::Index>(rng() % 6);
        const Eigen::MatrixXd sr = random_matrix(rng, p, q);
        const GraphLaplacian g = laplacian(random_connectivity(rng, p));
        const double gamma = 0.5, lambda = 0.05;
        const double t = step_size(g, gamma);
        const Eigen::VectorXd alpha = random_vector(rng, p);
        const Eigen::VectorXd beta = random_vector(rng, q);
        const double before = sub_objective_alpha(alpha, beta, sr, g, gamma, lambda);
        const Eigen::VectorXd stepped =
            prox_steps_alpha(alpha, beta, sr, g, gamma, lambda, t, 1);
        const double after = sub_objective_alpha(stepped, beta, sr, g, gamma, lambda);
        CHECK(after <= before + 1e-10);
    }
}

TEST_CASE("weighted_normalize gives unit weighted norm") {
    std::mt19937_64 rng(36);
    const GraphLaplacian g = laplacian(random_connectivity(rng, 5));
    const double gamma = 1.3;
    const Eigen::VectorXd v = weighted_normalize(random_vector(rng, 5), g, gamma);
    const double norm2 = v.squaredNorm() + gamma * v.dot(g.laplacian * v);
    CHECK(std::sqrt(norm2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(weighted_normalize(Eigen::VectorXd::Zero(5), g, gamma),
                    ZeroProjection);
}

TEST_CASE("update_phase closed-form cases") {
    Eigen::MatrixXcd s(1, 1);
    Eigen::VectorXd one = Eigen::VectorXd::Ones(1);

    s(0, 0) = std::complex<double>(1.0, 0.0);
    CHECK(angular_distance(update_phase(one, one, s), 0.0) < 1e-8);

    s(0, 0) = std::complex<double>(0.0, 1.0);
    CHECK(angular_distance(update_phase(one, one, s), std::numbers::pi / 2.0) < 1e-8);

    s(0, 0) = 0.0;
    CHECK_THROWS_AS(update_phase(one, one, s), PhaseDegenerate);
}

TEST_CASE("update_phase matches the grid-search oracle") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> dist;
    Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    for (int rep = 0; rep < 50; ++rep) {
        const double a = dist(rng), b = dist(rng);
        Eigen::MatrixXcd s(1, 1);
        s(0, 0) = std::complex<double>(a, b);
        const double phi = update_phase(one, one, s);
        CHECK(angular_distance(phi, grid_phase(a, b)) < 1e-3);
        CHECK(angular_distance(phi, std::atan2(b, a)) < 1e-6);
    }
}

TEST_CASE("phase coefficients are bilinear in the projections") {
    std::mt19937_64 rng(38);
    const Eigen::MatrixXcd s = random_complex_matrix(rng, 3, 2);
    const Eigen::VectorXd alpha = random_vector(rng, 3);
    const Eigen::VectorXd beta = random_vector(rng, 2);
    const auto [a, b] = phase_coefficients(alpha, beta, s);

    // Flipping both projections cancels: the phase is unchanged.
    const auto [a2, b2] = phase_coefficients(-alpha, -beta, s);
    CHECK(a2 == doctest::Approx(a).epsilon(1e-12));
    CHECK(b2 == doctest::Approx(b).epsilon(1e-12));
    CHECK(update_phase(alpha, beta, s) == update_phase(-alpha, -beta, s));

    // Flipping one projection negates (a, b): the optimal phase shifts by
    // pi and the maximized coupling value is preserved.
    const double phi = update_phase(alpha, beta, s);
    const double phi_flipped = update_phase(-alpha, beta, s);
    const double val = a * std::cos(phi) + b * std::sin(phi);
    const double val_flipped =
        (-a) * std::cos(phi_flipped) + (-b) * std::sin(phi_flipped);
    CHECK(std::abs(val - val_flipped) < 1e-9);
    CHECK(angular_distance(phi, phi_flipped + std::numbers::pi) < 1e-6);
}

TEST_CASE("objective term-by-term") {
    std::mt19937_64 rng(39);
    const Eigen::Index p = 4, q = 3;
    const Eigen::MatrixXcd s = random_complex_matrix(rng, p, q);
    const GraphLaplacian ga = laplacian(random_connectivity(rng, p));
    const GraphLaplacian gb = laplacian(random_connectivity(rng, q));
    const RegParams params{0.3, 0.2, 1.1, 0.4};

    CHECK(objective(Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(q), 0.5, s, ga,
                    gb, params) == 0.0);

    const Eigen::VectorXd alpha_u = random_vector(rng, p).normalized();
    const Eigen::VectorXd beta_u = random_vector(rng, q).normalized();
    const double phi = 0.9;
    const Eigen::MatrixXd sr = s.real() * std::cos(phi) + s.imag() * std::sin(phi);
    CHECK(objective(alpha_u, beta_u, phi, s, GraphLaplacian::zero(p),
                    GraphLaplacian::zero(q), RegParams{}) ==
          doctest::Approx(1.0 - alpha_u.dot(sr * beta_u)).epsilon(1e-12));

    const Eigen::VectorXd alpha = random_vector(rng, p);
    const Eigen::VectorXd beta = random_vector(rng, q);
    const double oracle =
        -alpha.dot(sr * beta) + params.lambda1 * alpha.lpNorm<1>() +
        params.lambda2 * beta.lpNorm<1>() +
        0.5 * (alpha.squaredNorm() + params.gamma1 * alpha.dot(ga.laplacian * alpha)) +
        0.5 * (beta.squaredNorm() + params.gamma2 * beta.dot(gb.laplacian * beta));
    CHECK(std::abs(objective(alpha, beta, phi, s, ga, gb, params) - oracle) < 1e-12);
}

TEST_CASE("unpenalized solver matches the phi-grid SVD oracle") {
    std::mt19937_64 rng(40);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng() % 5);
        const Eigen::Index q = 2 + static_cast<Eigen::Index>(rng() % 5);
        const Eigen::MatrixXcd s = random_complex_matrix(rng, p, q);
        const ProjectionSolution sol = solve_ssplsc_s(
            s, GraphLaplacian::zero(p), GraphLaplacian::zero(q), RegParams{});
        const double oracle = svd_phase_oracle(s);
        CHECK(std::abs(sol.coupling - oracle) <= 1e-4 * oracle);
        CHECK(std::abs(sol.alpha.norm() - 1.0) < 1e-10);
        CHECK(std::abs(sol.beta.norm() - 1.0) < 1e-10);
        CHECK(sol.coupling >= 0.0);
    }
}

TEST_CASE("identical modalities recover the leading eigenpair of Re(X^H X)") {
    std::mt19937_64 rng(41);
    const SpectralSample x = random_sample(rng, 12, 5);
    const ProjectionSolution sol = solve_ssplsc(
        x, x, GraphLaplacian::zero(5), GraphLaplacian::zero(5), RegParams{});
    const Eigen::MatrixXd a = (x.coefficients.adjoint() * x.coefficients).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    const double lmax = eig.eigenvalues().maxCoeff();
    const Eigen::VectorXd lead = eig.eigenvectors().rightCols(1);
    CHECK(sol.coupling == doctest::Approx(lmax).epsilon(1e-6));
    CHECK(std::abs(std::abs(sol.alpha.dot(lead)) - 1.0) < 1e-5);
    CHECK(std::abs(std::abs(sol.beta.dot(lead)) - 1.0) < 1e-5);
    // (alpha, beta, phi) and (alpha, -beta, phi + pi) describe the same
    // solution, so the expected phase depends on the relative sign.
    const double expected_phi =
        sol.alpha.dot(lead) * sol.beta.dot(lead) > 0.0 ? 0.0 : std::numbers::pi;
    CHECK(angular_distance(sol.phi, expected_phi) < 1e-4);
}

TEST_CASE("sparsity zeroes channels uncorrelated with the coupling") {
    // Rank-1 coupled block plus two decoupled X channels: with lambda1 = 1
    // the decoupled channels must carry exactly zero weight.
    std::mt19937_64 rng(42);
    const Eigen::Index n = 40;
    const Eigen::VectorXcd g = random_complex_matrix(rng, n, 1);
    Eigen::VectorXd a(3), b(2);
    a << 1.0, 0.8, 0.6;
    b << 1.0, -0.5;
    SpectralSample x, y;
    x.coefficients.resize(n, 5);
    x.coefficients.leftCols(3) = g * a.transpose().cast<std::complex<double>>();
    Eigen::MatrixXcd noise = random_complex_matrix(rng, n, 2);
    for (Eigen::Index c = 0; c < 2; ++c)  // decouple: remove the g component
        noise.col(c) -= g * (g.dot(noise.col(c)) / g.squaredNorm());
    x.coefficients.rightCols(2) = noise;
    y.coefficients = g * b.transpose().cast<std::complex<double>>();
    const ProjectionSolution sol = solve_splsc(x, y, 1.0, 0.0);
    CHECK(sol.alpha[3] == 0.0);
    CHECK(sol.alpha[4] == 0.0);
    CHECK(sol.alpha.head(3).cwiseAbs().minCoeff() > 0.0);
}

TEST_CASE("solver is deterministic") {
    std::mt19937_64 rng(43);
    const SpectralSample x = random_sample(rng, 10, 4);
    const SpectralSample y = random_sample(rng, 10, 3);
    const GraphLaplacian ga = laplacian(random_connectivity(rng, 4));
    const GraphLaplacian gb = laplacian(random_connectivity(rng, 3));
    const RegParams params{0.1, 0.1, 1.0, 1.0};
    const ProjectionSolution s1 = solve_ssplsc(x, y, ga, gb, params);
    const ProjectionSolution s2 = solve_ssplsc(x, y, ga, gb, params);
    CHECK((s1.alpha.array() == s2.alpha.array()).all());
    CHECK((s1.beta.array() == s2.beta.array()).all());
    CHECK(s1.phi == s2.phi);
    CHECK(s1.coupling == s2.coupling);
    CHECK(s1.objective_trace == s2.objective_trace);
}

TEST_CASE("unpenalized coupling is scale equivariant") {
    std::mt19937_64 rng(44);
    SpectralSample x = random_sample(rng, 10, 4);
    const SpectralSample y = random_sample(rng, 10, 3);
    const GraphLaplacian ga = GraphLaplacian::zero(4);
    const GraphLaplacian gb = GraphLaplacian::zero(3);
    SolverConfig tight;
    tight.rel_tol = 1e-12;
    tight.max_outer_iters = 5000;
    ProjectionSolution base = solve_ssplsc(x, y, ga, gb, RegParams{}, tight);
    x.coefficients *= 3.0;
    ProjectionSolution scaled = solve_ssplsc(x, y, ga, gb, RegParams{}, tight);
    CHECK(scaled.coupling == doctest::Approx(3.0 * base.coupling).epsilon(1e-8));
    // Either projection may come out sign-flipped (with phi shifted by pi);
    // canonicalize the flips before comparing the vectors.
    for (ProjectionSolution* sol : {&base, &scaled}) {
        Eigen::Index imax = 0;
        sol->alpha.cwiseAbs().maxCoeff(&imax);
        if (sol->alpha[imax] < 0.0) sol->alpha = -sol->alpha;
        sol->beta.cwiseAbs().maxCoeff(&imax);
        if (sol->beta[imax] < 0.0) sol->beta = -sol->beta;
    }
    CHECK((scaled.alpha - base.alpha).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((scaled.beta - base.beta).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("returned phase is stationary") {
    std::mt19937_64 rng(45);
    const SpectralSample x = random_sample(rng, 10, 4);
    const SpectralSample y = random_sample(rng, 10, 3);
    const ProjectionSolution sol = solve_ssplsc(
        x, y, GraphLaplacian::zero(4), GraphLaplacian::zero(3), RegParams{});
    const Eigen::MatrixXcd s = x.coefficients.adjoint() * y.coefficients;
    const auto [a, b] = phase_coefficients(sol.alpha, sol.beta, s);
    CHECK(angular_distance(sol.phi, std::atan2(b, a)) < 1e-6);
}

TEST_CASE("wrap_phase lands in [0, 2pi)") {
    CHECK(wrap_phase(-0.1) == doctest::Approx(2.0 * std::numbers::pi - 0.1));
    CHECK(wrap_phase(7.0) == doctest::Approx(7.0 - 2.0 * std::numbers::pi));
    CHECK(wrap_phase(0.0) == 0.0);
}
