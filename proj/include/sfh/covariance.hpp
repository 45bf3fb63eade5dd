#pragma once

#include <Eigen/Dense>

namespace sfh {

// Dense symmetric PSD matrix with a lazily computed Cholesky factor.
// Factorization follows the jitter ladder {0, 1e-14, 1e-12, 1e-10} * trace/n:
// the matrices handled here are analytically PSD, so needing more jitter
// than that signals a bug upstream and raises factorization_error with the
// measured indefiniteness.
class CovarianceMatrix {
public:
    explicit CovarianceMatrix(Eigen::MatrixXd m, double symmetry_tol = 1e-12);

    int dimension() const { return static_cast<int>(matrix_.rows()); }
    const Eigen::MatrixXd& matrix() const { return matrix_; }

    // Lower-triangular factor L with L L^T = matrix + jitter * I.
    const Eigen::MatrixXd& factor() const;
    double jitter_used() const;

    double min_eigenvalue() const;

private:
    Eigen::MatrixXd matrix_;
    mutable Eigen::MatrixXd factor_;
    mutable double jitter_ = 0.0;
    mutable bool factored_ = false;
};

// Conditional variance of component 0 given the remaining components,
// via the Schur complement k00 - k0c Kcc^{-1} kc0 with the same jitter
// policy applied to the conditioning block.
double schur_conditional_variance(const Eigen::MatrixXd& joint);

} // namespace sfh
