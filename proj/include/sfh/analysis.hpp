#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sfh/field.hpp"
#include "sfh/quadrature.hpp"
#include "sfh/sampler.hpp"

namespace sfh::analysis {

using field::SphericalPoint;
using sampler::ModelParams;

// eta = H - max{(2 - alpha)/4, 0},  gamma = alpha/2 - 1 + 2H.
struct RegularityExponents {
    double eta;
    double gamma;
};

RegularityExponents exponents(const ModelParams& params);

// s^gamma for gamma < 1; s sqrt(|ln s|) at gamma = 1; s for gamma > 1.
double rho_gamma(double s, double gamma);

// Log-log least-squares fit with a target exponent.
struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool resolution_ok = true;
    std::vector<double> abscissa; // raw x (not logged)
    std::vector<double> ordinate; // raw y
};

ExponentFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double target,
                       double tolerance);

// ---- truncation ------------------------------------------------------

struct TruncationReport {
    std::vector<int> levels;
    std::vector<double> tail;  // analytic tail energy beyond each L
    std::vector<double> bound; // calibrated decay-shape bound
    std::vector<double> ratio; // tail / bound
    double calibration_constant = 0.0;
    ExponentFit fit;                 // tail slope vs -(alpha - 2 + 4H)
    std::vector<double> d_tail_log;  // log of the initial-condition tail
};

TruncationReport truncation_error(const ModelParams& params, double t,
                                  const std::vector<int>& levels, const QuadratureConfig& quad);

// ---- spectrum --------------------------------------------------------

// Analytic angular power spectrum law: fit of log E|u_lm(t)|^2 against
// log(l + 1/2) over [l_lo, l_hi]; target slope -(alpha + 4H).
ExponentFit spectrum_slope(const ModelParams& params, double t, int l_lo, int l_hi,
                           const QuadratureConfig& quad, double tolerance = 0.1);

ExponentFit spectrum_slope_mc(const ModelParams& params, double t, int l_lo, int l_hi,
                              const QuadratureConfig& quad, std::uint64_t seed,
                              std::uint64_t replicates, int workers, double tolerance = 0.15);

// ---- variograms ------------------------------------------------------

enum class VariogramMode { analytic, monte_carlo };

double temporal_variogram_value(const ModelParams& params, double t, double lag,
                                const QuadratureConfig& quad);
double spatial_variogram_value(const ModelParams& params, double t, double theta,
                               const QuadratureConfig& quad);

ExponentFit temporal_variogram(const ModelParams& params, double t,
                               const std::vector<double>& lags, VariogramMode mode,
                               const QuadratureConfig& quad, std::uint64_t seed = 0,
                               std::uint64_t replicates = 0, int workers = 1,
                               double tolerance = 0.1);

ExponentFit spatial_variogram(const ModelParams& params, double t,
                              const std::vector<double>& thetas, VariogramMode mode,
                              const QuadratureConfig& quad, std::uint64_t seed = 0,
                              std::uint64_t replicates = 0, int workers = 1,
                              double tolerance = 0.1);

// ---- strong local nondeterminism -------------------------------------

// Exact Gaussian conditional variance of u(t, x) given u(s_j, x) for the
// conditioning times, via the Schur complement.
double conditional_variance(const ModelParams& params, double t,
                            const std::vector<double>& conditioning_times,
                            const QuadratureConfig& quad);

double spatial_conditional_variance(const ModelParams& params, double t,
                                    const SphericalPoint& x0,
                                    const std::vector<SphericalPoint>& conditioning_points,
                                    const QuadratureConfig& quad);

struct SlndReport {
    std::vector<double> scales;       // dyadic r
    std::vector<double> cond_var;     // conditional variances
    double unconditional = 0.0;
    bool monotone_ok = true;          // conditional <= unconditional throughout
    ExponentFit fit;                  // slope vs 2 eta (or 2 gamma)
};

SlndReport temporal_slnd_scaling(const ModelParams& params, double t, int k_lo, int k_hi,
                                 int past_points, const QuadratureConfig& quad,
                                 double tolerance = 0.15, bool two_sided = false);

SlndReport spatial_slnd_scaling(const ModelParams& params, double t, int k_lo, int k_hi,
                                int ring_points, const QuadratureConfig& quad,
                                double tolerance = 0.15);

// ---- smoothness thresholds --------------------------------------------

struct GradientEnergyReport {
    std::vector<int> levels;
    std::vector<double> noise_partial;   // running sums of the C-part
    std::vector<double> initial_partial; // running sums of the D-part
    std::vector<double> total_partial;
    double term_slope = 0.0;   // log-log slope of the per-degree term
    bool converged = false;    // term decays faster than 1/L
    double last_term_ratio = 0.0; // last per-degree term / total
};

GradientEnergyReport gradient_energy(const ModelParams& params, double t,
                                     const std::vector<int>& levels, int order,
                                     const QuadratureConfig& quad);

// ---- moduli of continuity ---------------------------------------------

struct ModulusReport {
    std::vector<double> epsilons;
    std::vector<double> median;
    std::vector<double> quartile_lo;
    std::vector<double> quartile_hi;
    std::vector<std::vector<double>> per_replicate; // [eps][replicate]
    double exponent = 0.0;
    bool resolution_ok = true;
};

// Sup of |u(t)-u(s)| / ((t-s)^eta sqrt(|log(t-s)|)) over grid pairs with
// t-s <= eps, per replicate.  paths: one row per replicate on a uniform
// dyadic grid.
ModulusReport modulus_statistic(const ModelParams& params, const Eigen::MatrixXd& paths,
                                const std::vector<double>& times,
                                const std::vector<double>& epsilons, double exponent);

// Spatial analogue over pairs of points on a great-circle arc with uniform
// angular spacing; positions are arc lengths (= geodesic distances).
ModulusReport spatial_modulus_statistic(const ModelParams& params, const Eigen::MatrixXd& fields,
                                        const std::vector<double>& positions,
                                        const std::vector<double>& epsilons, double exponent);

// ---- exact field-level samplers (for modulus experiments) --------------

// Exact Gaussian sample of u(., x) at a fixed point over a uniform time
// grid: one Cholesky of the aggregated covariance, one row per replicate.
// The law does not depend on x (2-weak isotropy).
Eigen::MatrixXd sample_field_paths_at_point(const ModelParams& params,
                                            const std::vector<double>& times, std::uint64_t seed,
                                            std::uint64_t replicates, const QuadratureConfig& quad);

// Exact Gaussian sample of u(t, .) on an equatorial arc with uniform
// angular spacing; smoothing_k applies the (1 + l(l+1))^{k/2} multiplier.
Eigen::MatrixXd sample_field_on_arc(const ModelParams& params, double t,
                                    const std::vector<double>& positions, std::uint64_t seed,
                                    std::uint64_t replicates, const QuadratureConfig& quad,
                                    double smoothing_k = 0.0);

} // namespace sfh::analysis
