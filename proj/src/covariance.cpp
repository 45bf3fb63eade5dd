#include "sfh/covariance.hpp"

#include <cmath>
#include <string>

#include "sfh/errors.hpp"

namespace sfh {

namespace {
constexpr double kJitterLadder[4] = {0.0, 1e-14, 1e-12, 1e-10};
} // namespace

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd m, double symmetry_tol)
    : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols())
        throw precondition_error("covariance matrix must be square");
    const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
    const double asym = (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff();
    if (asym > symmetry_tol * scale)
        throw precondition_error("covariance matrix is not symmetric (max deviation " +
                                 std::to_string(asym) + ")");
    matrix_ = 0.5 * (matrix_ + matrix_.transpose().eval());
}

const Eigen::MatrixXd& CovarianceMatrix::factor() const {
    if (factored_) return factor_;
    const int n = dimension();
    const double base = matrix_.trace() / std::max(1, n);
    for (double level : kJitterLadder) {
        Eigen::MatrixXd attempt = matrix_;
        const double jitter = level * base;
        if (jitter > 0.0) attempt.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(attempt);
        if (llt.info() == Eigen::Success) {
            factor_ = llt.matrixL();
            jitter_ = jitter;
            factored_ = true;
            return factor_;
        }
    }
    throw factorization_error(
        "covariance factorization failed beyond the jitter ladder (min eigenvalue " +
            std::to_string(min_eigenvalue()) + ")",
        min_eigenvalue());
}

double CovarianceMatrix::jitter_used() const {
    factor();
    return jitter_;
}

double CovarianceMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double schur_conditional_variance(const Eigen::MatrixXd& joint) {
    const int n = static_cast<int>(joint.rows()) - 1;
    if (n < 0) throw precondition_error("schur_conditional_variance: empty joint matrix");
    if (n == 0) return joint(0, 0);
    const Eigen::MatrixXd kcc = joint.bottomRightCorner(n, n);
    const Eigen::VectorXd k0c = joint.col(0).tail(n);
    const double base = kcc.trace() / n;
    for (double level : kJitterLadder) {
        Eigen::MatrixXd attempt = kcc;
        if (level > 0.0) attempt.diagonal().array() += level * base;
        Eigen::LLT<Eigen::MatrixXd> llt(attempt);
        if (llt.info() == Eigen::Success) {
            const double reduction = k0c.dot(llt.solve(k0c));
            return std::max(0.0, joint(0, 0) - reduction);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kcc, Eigen::EigenvaluesOnly);
    throw factorization_error(
        "conditioning covariance cannot be factorized within the jitter ladder",
        es.eigenvalues().minCoeff());
}

} // namespace sfh
