#pragma once

#include <stdexcept>
#include <string>

namespace sfh {

// Raised when an adaptive quadrature cannot reach the requested tolerance.
// Carries the error estimate that was actually achieved.
class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, double achieved_tolerance)
        : std::runtime_error(what), achieved(achieved_tolerance) {}
    double achieved;
};

// Raised when a covariance matrix cannot be factorized within the jitter
// policy.  Carries an estimate of how indefinite the matrix is.
class factorization_error : public std::runtime_error {
public:
    factorization_error(const std::string& what, double min_eigenvalue)
        : std::runtime_error(what), min_eigenvalue(min_eigenvalue) {}
    double min_eigenvalue;
};

// Raised when an assembled field has an imaginary residue above threshold,
// i.e. the conjugation symmetry of the coefficients is broken.
class symmetry_error : public std::runtime_error {
public:
    symmetry_error(const std::string& what, double residue)
        : std::runtime_error(what), residue(residue) {}
    double residue;
};

// Raised when an operation is invoked outside its stated preconditions.
class precondition_error : public std::invalid_argument {
public:
    explicit precondition_error(const std::string& what)
        : std::invalid_argument(what) {}
};

// Raised on malformed experiment configuration.
class config_error : public std::invalid_argument {
public:
    explicit config_error(const std::string& what)
        : std::invalid_argument(what) {}
};

} // namespace sfh
