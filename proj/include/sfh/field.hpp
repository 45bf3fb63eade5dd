#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfh/harmonics.hpp"
#include "sfh/quadrature.hpp"
#include "sfh/sampler.hpp"

namespace sfh::field {

using harmonics::SphericalPoint;
using sampler::CoefficientPathSet;
using sampler::ModelParams;

struct FieldGrid {
    std::vector<SphericalPoint> points;
    // optional structured layout: points enumerate ring-major
    // (colatitude ring x longitude); empty when unstructured
    std::vector<double> ring_colatitudes;
    std::vector<double> ring_longitudes;

    static FieldGrid of_points(std::vector<SphericalPoint> pts);
    static FieldGrid structured(std::vector<double> colatitudes, std::vector<double> longitudes);
};

struct FieldSample {
    std::vector<double> times;
    FieldGrid grid;
    std::vector<double> values; // row-major [time][point]
    // provenance
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
    int truncation = 0;

    double at(std::size_t time_index, std::size_t point_index) const {
        return values[time_index * grid.points.size() + point_index];
    }
};

// Truncated double sum over l <= L, |m| <= l with conjugation read-out;
// the imaginary residue is asserted below 1e-8 and then discarded.
FieldSample evaluate_field(const CoefficientPathSet& coeffs, const FieldGrid& grid);

// Spectral multiplier -l(l+1) (the Laplace-Beltrami operator).
CoefficientPathSet laplace_beltrami(const CoefficientPathSet& coeffs);

// Spectral multiplier (1 + l(l+1))^{k/2}; negative k smooths, positive k
// roughens.
CoefficientPathSet fractional_smoothing(const CoefficientPathSet& coeffs, double k);

// Analytic covariance of the solution field,
//   sum_{l<=L} (2l+1)/(4 pi) U_l(t,s) P_l(<x,y>).
double field_covariance(const ModelParams& params, double t, double s,
                        const SphericalPoint& x, const SphericalPoint& y,
                        const QuadratureConfig& quad);

// Same sum with precomputed per-degree U values (bulk evaluation).
double field_covariance_from_modes(const std::vector<double>& u_modes, double cos_angle);

// Per-degree U_l(t,s) for l = 0..L, fast closed-form engine.
std::vector<double> mode_covariances(const ModelParams& params, double t, double s,
                                     const QuadratureConfig& quad);

// Noise covariance R_H(t,s) * Lambda_L(x,y); requires alpha > 2 for the
// pointwise Lambda series (the generalized-space regime is refused).
double noise_covariance(const ModelParams& params, double t, double s,
                        const SphericalPoint& x, const SphericalPoint& y);

} // namespace sfh::field
