#include "sfh/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "sfh/errors.hpp"
#include "sfh/parallel.hpp"
#include "sfh/rng.hpp"

namespace sfh::sampler {

namespace {

constexpr std::uint64_t kTagSolutionNoise = 1;
constexpr std::uint64_t kTagSolutionInitial = 2;
constexpr std::uint64_t kTagRawNoise = 3;
constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

} // namespace

void ModelParams::validate() const {
    if (!(hurst > 0.5 && hurst < 1.0))
        throw precondition_error("ModelParams: hurst must lie in (1/2, 1)");
    if (!(alpha > 0.0)) throw precondition_error("ModelParams: alpha must be positive");
    if (!(d0 >= 0.0)) throw precondition_error("ModelParams: d0 must be nonnegative");
    if (d0 > 0.0 && !(beta > 4.0))
        throw precondition_error("ModelParams: beta must exceed 4 when d0 > 0");
    if (!(horizon > 0.0)) throw precondition_error("ModelParams: horizon must be positive");
    if (truncation < 1) throw precondition_error("ModelParams: truncation must be >= 1");
    if (!(c0_bound >= 1.0)) throw precondition_error("ModelParams: c0 bound must be >= 1");
    if (upsilon) {
        for (int l = 0; l <= truncation; ++l) {
            const double u = upsilon(l);
            if (!(u >= 1.0 / c0_bound && u <= c0_bound))
                throw precondition_error("ModelParams: upsilon(" + std::to_string(l) +
                                         ") violates the c0 bound");
        }
    }
}

double power_coefficient(const ModelParams& params, int degree) {
    if (degree < 0 || degree > params.truncation)
        throw precondition_error("power_coefficient: degree outside [0, L]");
    const double u = params.upsilon ? params.upsilon(degree) : 1.0;
    return u * std::pow(degree + 0.5, -params.alpha);
}

double initial_spectrum(const ModelParams& params, int degree) {
    if (degree < 0 || degree > params.truncation)
        throw precondition_error("initial_spectrum: degree outside [0, L]");
    if (params.d0 == 0.0) return 0.0;
    return params.d0 * std::pow(degree + 0.5, -params.beta);
}

TimeGrid::TimeGrid(std::vector<double> ts, double horizon) : times(std::move(ts)) {
    if (times.empty()) throw precondition_error("TimeGrid: empty grid");
    double prev = -1.0;
    for (double t : times) {
        if (!(t >= 0.0 && t <= horizon))
            throw precondition_error("TimeGrid: time outside [0, horizon]");
        if (!(t > prev)) throw precondition_error("TimeGrid: times must be strictly increasing");
        prev = t;
    }
}

TimeGrid TimeGrid::uniform(double start, double stop, int count, double horizon) {
    if (count < 1) throw precondition_error("TimeGrid::uniform: count must be >= 1");
    std::vector<double> ts(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        ts[i] = (count == 1) ? start : start + (stop - start) * i / (count - 1.0);
    return TimeGrid(std::move(ts), horizon);
}

TimeGrid TimeGrid::dyadic(double start, int level, int count, double horizon) {
    if (count < 1) throw precondition_error("TimeGrid::dyadic: count must be >= 1");
    const double h = std::ldexp(1.0, -level);
    std::vector<double> ts(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) ts[i] = start + i * h;
    return TimeGrid(std::move(ts), horizon);
}

std::complex<double> CoefficientPathSet::at(int l, int m, std::size_t time_index) const {
    const int mm = std::abs(m);
    if (l < 0 || l > truncation || mm > l)
        throw precondition_error("CoefficientPathSet::at: index out of range");
    const std::complex<double> v = data[block_offset(l, mm) + time_index];
    if (m >= 0) return v;
    const std::complex<double> c = std::conj(v);
    return (mm % 2 == 0) ? c : -c;
}

std::complex<double>& CoefficientPathSet::ref(int l, int m, std::size_t time_index) {
    if (l < 0 || l > truncation || m < 0 || m > l)
        throw precondition_error("CoefficientPathSet::ref: requires 0 <= m <= l <= L");
    return data[block_offset(l, m) + time_index];
}

CoefficientPathSet CoefficientPathSet::zeros(int truncation, std::vector<double> times) {
    CoefficientPathSet set;
    set.truncation = truncation;
    set.times = std::move(times);
    set.data.assign((harmonics::table_index(truncation, truncation) + 1) * set.times.size(),
                    {0.0, 0.0});
    return set;
}

CovarianceMatrix build_mode_covariance(const ModelParams& params, int degree,
                                       const TimeGrid& grid, const QuadratureConfig& quad) {
    params.validate();
    const auto conv = params.convention();
    const double c_l = power_coefficient(params, degree);
    const double d_l = initial_spectrum(params, degree);
    const int n = static_cast<int>(grid.size());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            const double v = fbm::u_cov(degree, grid.times[i], grid.times[j], c_l, d_l, conv, quad);
            m(i, j) = v;
            m(j, i) = v;
        }
    return CovarianceMatrix(std::move(m));
}

namespace {

// Noise-only covariance C_l * <g_l(t_i), g_l(t_j)>_H over the positive times
// of the grid (a leading t = 0 contributes an exact zero row).
Eigen::MatrixXd noise_factor(const ModelParams& params, int degree, const TimeGrid& grid,
                             const QuadratureConfig& quad, int skip) {
    const auto conv = params.convention();
    const double c_l = power_coefficient(params, degree);
    const double b = static_cast<double>(degree) * (degree + 1.0);
    const int n = static_cast<int>(grid.size()) - skip;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        const fbm::ExpKernelSpec gi(b, grid.times[i + skip]);
        for (int j = 0; j <= i; ++j) {
            const fbm::ExpKernelSpec gj(b, grid.times[j + skip]);
            const double v = c_l * fbm::weighted_inner(gi, gj, conv, quad);
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return CovarianceMatrix(std::move(m)).factor();
}

// One replicate of all (l, m) solution coefficient paths.
CoefficientPathSet draw_solution_replicate(const ModelParams& params, const TimeGrid& grid,
                                           const std::vector<Eigen::MatrixXd>& factors,
                                           std::uint64_t seed, std::uint64_t replicate,
                                           int skip) {
    const int L = params.truncation;
    const std::size_t n = grid.size();
    const std::size_t nn = n - static_cast<std::size_t>(skip);
    CoefficientPathSet set = CoefficientPathSet::zeros(L, grid.times);
    set.seed = seed;
    set.replicate = replicate;

    Eigen::VectorXd z_re(static_cast<Eigen::Index>(nn)), z_im(static_cast<Eigen::Index>(nn));
    for (int l = 0; l <= L; ++l) {
        const double d_l = initial_spectrum(params, l);
        const double decay = static_cast<double>(l) * (l + 1.0);
        const Eigen::MatrixXd& factor = factors[static_cast<std::size_t>(l)];
        for (int m = 0; m <= l; ++m) {
            NormalSampler noise(derive_stream(seed, kTagSolutionNoise, l, m, replicate));
            NormalSampler init(derive_stream(seed, kTagSolutionInitial, l, m, replicate));

            std::complex<double> u0{0.0, 0.0};
            if (d_l > 0.0) {
                if (m == 0) {
                    u0 = std::complex<double>(init.next() * std::sqrt(d_l), 0.0);
                } else {
                    const double scale = std::sqrt(0.5 * d_l);
                    u0 = std::complex<double>(init.next() * scale, init.next() * scale);
                }
            }

            for (std::size_t i = 0; i < nn; ++i) z_re[i] = noise.next();
            if (m > 0)
                for (std::size_t i = 0; i < nn; ++i) z_im[i] = noise.next();

            const Eigen::VectorXd path_re = factor * z_re;
            Eigen::VectorXd path_im;
            if (m > 0) path_im = factor * z_im;

            for (std::size_t i = 0; i < n; ++i) {
                const double e = std::exp(-decay * grid.times[i]);
                std::complex<double> v = u0 * e;
                if (i >= static_cast<std::size_t>(skip)) {
                    const std::size_t k = i - skip;
                    if (m == 0)
                        v += std::complex<double>(path_re[k], 0.0);
                    else
                        v += std::complex<double>(path_re[k] * kInvSqrt2, path_im[k] * kInvSqrt2);
                }
                set.ref(l, m, i) = v;
            }
        }
    }
    return set;
}

} // namespace

void sample_coefficient_paths(const ModelParams& params, const TimeGrid& grid,
                              std::uint64_t seed, std::uint64_t replicates,
                              const QuadratureConfig& quad, int workers,
                              const std::function<void(CoefficientPathSet&&)>& sink) {
    params.validate();
    if (replicates < 1) throw precondition_error("sample_coefficient_paths: replicates must be >= 1");
    if (grid.times.back() > params.horizon)
        throw precondition_error("sample_coefficient_paths: grid exceeds the horizon");

    const int skip = (grid.times.front() == 0.0) ? 1 : 0;
    const int L = params.truncation;
    std::vector<Eigen::MatrixXd> factors(static_cast<std::size_t>(L) + 1);
    const std::size_t nn = grid.size() - static_cast<std::size_t>(skip);
    parallel_for(static_cast<std::size_t>(L) + 1, workers, [&](std::size_t l) {
        if (nn == 0)
            factors[l] = Eigen::MatrixXd::Zero(0, 0);
        else
            factors[l] = noise_factor(params, static_cast<int>(l), grid, quad, skip);
    });

    parallel_for(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        sink(draw_solution_replicate(params, grid, factors, seed, r, skip));
    });
}

std::vector<CoefficientPathSet> sample_coefficient_paths(const ModelParams& params,
                                                         const TimeGrid& grid,
                                                         std::uint64_t seed,
                                                         std::uint64_t replicates,
                                                         const QuadratureConfig& quad,
                                                         int workers) {
    std::vector<CoefficientPathSet> out(replicates);
    std::mutex guard;
    sample_coefficient_paths(params, grid, seed, replicates, quad, workers,
                             [&](CoefficientPathSet&& set) {
                                 std::lock_guard<std::mutex> lock(guard);
                                 out[set.replicate] = std::move(set);
                             });
    return out;
}

CoefficientPathSet sample_noise_coefficients(const ModelParams& params, const TimeGrid& grid,
                                             std::uint64_t seed, std::uint64_t replicate) {
    params.validate();
    const auto conv = params.convention();
    const int skip = (grid.times.front() == 0.0) ? 1 : 0;
    const int L = params.truncation;
    const std::size_t n = grid.size();
    const std::size_t nn = n - static_cast<std::size_t>(skip);

    Eigen::MatrixXd factor;
    if (nn > 0) {
        Eigen::MatrixXd m(nn, nn);
        for (std::size_t i = 0; i < nn; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double v = fbm::r_cov(grid.times[i + skip], grid.times[j + skip], conv);
                m(i, j) = v;
                m(j, i) = v;
            }
        factor = CovarianceMatrix(std::move(m)).factor();
    }

    CoefficientPathSet set = CoefficientPathSet::zeros(L, grid.times);
    set.seed = seed;
    set.replicate = replicate;
    Eigen::VectorXd z_re(static_cast<Eigen::Index>(nn)), z_im(static_cast<Eigen::Index>(nn));
    for (int l = 0; l <= L; ++l) {
        const double sqrt_c = std::sqrt(power_coefficient(params, l));
        for (int m = 0; m <= l; ++m) {
            NormalSampler noise(derive_stream(seed, kTagRawNoise, l, m, replicate));
            for (std::size_t i = 0; i < nn; ++i) z_re[i] = noise.next();
            if (m > 0)
                for (std::size_t i = 0; i < nn; ++i) z_im[i] = noise.next();
            const Eigen::VectorXd path_re = factor * z_re;
            Eigen::VectorXd path_im;
            if (m > 0) path_im = factor * z_im;
            for (std::size_t i = static_cast<std::size_t>(skip); i < n; ++i) {
                const std::size_t k = i - skip;
                if (m == 0)
                    set.ref(l, m, i) = std::complex<double>(sqrt_c * path_re[k], 0.0);
                else
                    set.ref(l, m, i) = std::complex<double>(sqrt_c * kInvSqrt2 * path_re[k],
                                                            sqrt_c * kInvSqrt2 * path_im[k]);
            }
        }
    }
    return set;
}

} // namespace sfh::sampler
