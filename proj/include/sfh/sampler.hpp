#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "sfh/covariance.hpp"
#include "sfh/fbm_kernel.hpp"
#include "sfh/harmonics.hpp"
#include "sfh/quadrature.hpp"

namespace sfh::sampler {

// All model inputs.  C_l = upsilon(l) (l+1/2)^{-alpha} and
// D_l = d0 (l+1/2)^{-beta} (the canonical equality family).
struct ModelParams {
    double hurst = 0.75;  // (1/2, 1)
    double alpha = 2.0;   // > 0
    double beta = 5.0;    // > 4 whenever d0 > 0
    double d0 = 0.0;      // >= 0
    double horizon = 1.0; // T > 0
    int truncation = 32;  // L >= 1

    // bounded positive prefactor: c0_bound^{-1} <= upsilon(l) <= c0_bound
    double c0_bound = 1.0;
    std::function<double(int)> upsilon; // empty means identically 1

    void validate() const; // throws precondition_error
    fbm::FbmConvention convention() const { return fbm::FbmConvention(hurst); }
};

double power_coefficient(const ModelParams& params, int degree);
double initial_spectrum(const ModelParams& params, int degree);

// Strictly increasing times within [0, horizon].
struct TimeGrid {
    std::vector<double> times;

    TimeGrid() = default;
    TimeGrid(std::vector<double> ts, double horizon);
    static TimeGrid uniform(double start, double stop, int count, double horizon);
    static TimeGrid dyadic(double start, int level, int count, double horizon);

    std::size_t size() const { return times.size(); }
};

// Complex harmonic coefficient paths for 0 <= m <= l <= L over a time grid.
// Negative orders are realized on read-out through the conjugation symmetry
// coef(l,-m) = (-1)^m conj(coef(l,m)); m = 0 paths are real.
struct CoefficientPathSet {
    int truncation = 0;
    std::vector<double> times;
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
    std::vector<std::complex<double>> data; // block (l, m >= 0), contiguous in time

    std::size_t block_offset(int l, int m) const {
        return harmonics::table_index(l, m) * times.size();
    }
    std::complex<double> at(int l, int m, std::size_t time_index) const;
    std::complex<double>& ref(int l, int m, std::size_t time_index);

    static CoefficientPathSet zeros(int truncation, std::vector<double> times);
};

// [U_l(t_i, t_j)] with C_l, D_l from params, via the quadrature engine.
CovarianceMatrix build_mode_covariance(const ModelParams& params, int degree,
                                       const TimeGrid& grid, const QuadratureConfig& quad);

// Exact sampler for the solution coefficients u_{lm}(t_i): initial-condition
// and noise contributions are drawn independently, each from its analytic
// covariance factor.  The sink receives one replicate at a time and may be
// called from several workers; replicate indices make merging deterministic.
void sample_coefficient_paths(const ModelParams& params, const TimeGrid& grid,
                              std::uint64_t seed, std::uint64_t replicates,
                              const QuadratureConfig& quad, int workers,
                              const std::function<void(CoefficientPathSet&&)>& sink);

std::vector<CoefficientPathSet> sample_coefficient_paths(const ModelParams& params,
                                                         const TimeGrid& grid,
                                                         std::uint64_t seed,
                                                         std::uint64_t replicates,
                                                         const QuadratureConfig& quad,
                                                         int workers = 1);

// Raw noise coefficients sqrt(C_l) beta_{lm}(t_i) with temporal covariance
// C_l R_H(t_i, t_j).
CoefficientPathSet sample_noise_coefficients(const ModelParams& params, const TimeGrid& grid,
                                             std::uint64_t seed, std::uint64_t replicate = 0);

} // namespace sfh::sampler
