#include "ssplsc/baselines.hpp"

#include <cmath>
#include <complex>

namespace ssplsc {

ProjectionSolution solve_plsc(const SpectralSample& x, const SpectralSample& y,
                              const SolverConfig& config) {
    return solve_ssplsc(x, y, GraphLaplacian::zero(x.channels()),
                        GraphLaplacian::zero(y.channels()), RegParams{}, config);
}

ProjectionSolution solve_splsc(const SpectralSample& x, const SpectralSample& y,
                               double lambda1, double lambda2,
                               const SolverConfig& config) {
    RegParams params;
    params.lambda1 = lambda1;
    params.lambda2 = lambda2;
    return solve_ssplsc(x, y, GraphLaplacian::zero(x.channels()),
                        GraphLaplacian::zero(y.channels()), params, config);
}

namespace {

// Symmetric inverse square root; throws SingularAutoSpectrum when the
// spectrum stays near-singular after ridge loading.
Eigen::MatrixXd inv_sqrt(const Eigen::MatrixXd& m, double floor_eig) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXd& ev = es.eigenvalues();
    if (ev.minCoeff() < floor_eig)
        throw SingularAutoSpectrum("auto-spectrum not invertible after ridge loading");
    const Eigen::VectorXd inv_root = ev.array().sqrt().inverse();
    return es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().transpose();
}

// Columns spanning >= retain of the total variance of a real symmetric PSD
// matrix, ordered by decreasing eigenvalue.
Eigen::MatrixXd pca_basis(const Eigen::MatrixXd& m, double retain) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXd ev = es.eigenvalues().reverse();
    const double total = std::max(ev.sum(), 1e-300);
    double acc = 0.0;
    Eigen::Index keep = 0;
    while (keep < ev.size()) {
        acc += ev[keep];
        ++keep;
        if (acc / total >= retain) break;
    }
    Eigen::MatrixXd basis(m.rows(), keep);
    for (Eigen::Index j = 0; j < keep; ++j)
        basis.col(j) = es.eigenvectors().col(m.rows() - 1 - j);
    return basis;
}

}  // namespace

ProjectionSolution solve_cacoh(const SpectralSample& x, const SpectralSample& y,
                               const CacohConfig& config) {
    if (x.n() != y.n()) throw ShapeMismatch("x and y trial counts differ");
    if (x.n() < 2) throw EmptyRecording("need n >= 2 trials");

    Eigen::MatrixXcd cx = x.coefficients;
    Eigen::MatrixXcd cy = y.coefficients;
    Eigen::MatrixXd basis_x, basis_y;
    if (config.pca_retain > 0.0) {
        basis_x = pca_basis((cx.adjoint() * cx).real(), config.pca_retain);
        basis_y = pca_basis((cy.adjoint() * cy).real(), config.pca_retain);
        cx = cx * basis_x.cast<std::complex<double>>();
        cy = cy * basis_y.cast<std::complex<double>>();
    }

    const Eigen::MatrixXcd s_xy = cx.adjoint() * cy;
    Eigen::MatrixXd a_mat = (cx.adjoint() * cx).real();
    Eigen::MatrixXd b_mat = (cy.adjoint() * cy).real();
    const double ridge_a = config.ridge_scale * a_mat.trace() / a_mat.rows();
    const double ridge_b = config.ridge_scale * b_mat.trace() / b_mat.rows();
    a_mat.diagonal().array() += ridge_a;
    b_mat.diagonal().array() += ridge_b;

    const Eigen::MatrixXd wa = inv_sqrt(a_mat, 1e-300);
    const Eigen::MatrixXd wb = inv_sqrt(b_mat, 1e-300);

    double phi = std::numbers::pi / 4.0;
    double coherence = 0.0;
    Eigen::VectorXd alpha, beta;
    ProjectionSolution sol;
    for (int k = 0; k < config.max_iters; ++k) {
        const Eigen::MatrixXd k_mat =
            wa * (s_xy * std::exp(std::complex<double>(0.0, -phi))).real() * wb;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(k_mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double sigma = svd.singularValues()[0];
        alpha = wa * svd.matrixU().col(0);
        beta = wb * svd.matrixV().col(0);

        const auto [pa, pb] = phase_coefficients(alpha, beta, s_xy);
        if (pa != 0.0 || pb != 0.0) phi = wrap_phase(std::atan2(pb, pa));

        sol.objective_trace.push_back(sigma);
        if (std::abs(sigma - coherence) < config.tol) {
            coherence = sigma;
            sol.converged = true;
            sol.iterations_used = k + 1;
            break;
        }
        coherence = sigma;
        sol.iterations_used = k + 1;
    }

    if (config.pca_retain > 0.0) {
        alpha = basis_x * alpha;
        beta = basis_y * beta;
    }
    sol.alpha = alpha / alpha.norm();
    sol.beta = beta / beta.norm();
    sol.phi = phi;
    sol.coupling = coherence;
    return sol;
}

}  // namespace ssplsc
