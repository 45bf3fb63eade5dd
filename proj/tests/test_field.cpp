#include "doctest.h"

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "sfh/errors.hpp"
#include "sfh/field.hpp"

using namespace sfh;
using namespace sfh::field;
using harmonics::SphericalPoint;
using sampler::CoefficientPathSet;
using sampler::ModelParams;
using sampler::TimeGrid;

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

ModelParams base_params(int L = 8) {
    ModelParams p;
    p.hurst = 0.75;
    p.alpha = 2.0;
    p.beta = 5.0;
    p.d0 = 0.0;
    p.horizon = 1.0;
    p.truncation = L;
    return p;
}

// random rotation from a quaternion; rotates unit vectors
struct Rotation {
    double q0, q1, q2, q3;
    static Rotation random(std::mt19937_64& rng) {
        std::normal_distribution<double> n(0.0, 1.0);
        double a = n(rng), b = n(rng), c = n(rng), d = n(rng);
        const double norm = std::sqrt(a * a + b * b + c * c + d * d);
        return {a / norm, b / norm, c / norm, d / norm};
    }
    SphericalPoint apply(const SphericalPoint& p) const {
        const auto v = p.unit_vector();
        const double r11 = 1 - 2 * (q2 * q2 + q3 * q3), r12 = 2 * (q1 * q2 - q0 * q3),
                     r13 = 2 * (q1 * q3 + q0 * q2);
        const double r21 = 2 * (q1 * q2 + q0 * q3), r22 = 1 - 2 * (q1 * q1 + q3 * q3),
                     r23 = 2 * (q2 * q3 - q0 * q1);
        const double r31 = 2 * (q1 * q3 - q0 * q2), r32 = 2 * (q2 * q3 + q0 * q1),
                     r33 = 1 - 2 * (q1 * q1 + q2 * q2);
        return SphericalPoint::from_unit_vector({r11 * v[0] + r12 * v[1] + r13 * v[2],
                                                 r21 * v[0] + r22 * v[1] + r23 * v[2],
                                                 r31 * v[0] + r32 * v[1] + r33 * v[2]});
    }
};

CoefficientPathSet random_coeffs(int L, std::vector<double> times, std::uint64_t seed) {
    auto set = CoefficientPathSet::zeros(L, std::move(times));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int l = 0; l <= L; ++l)
        for (int m = 0; m <= l; ++m)
            for (std::size_t ti = 0; ti < set.times.size(); ++ti)
                set.ref(l, m, ti) = (m == 0) ? std::complex<double>(n(rng), 0.0)
                                             : std::complex<double>(n(rng), n(rng));
    return set;
}

} // namespace

TEST_CASE("zero and constant-mode fields") {
    const auto zero = CoefficientPathSet::zeros(4, {0.5});
    const FieldGrid grid = FieldGrid::of_points({SphericalPoint(0.3, 0.1), SphericalPoint(2.0, 4.0)});
    const FieldSample f0 = evaluate_field(zero, grid);
    CHECK(f0.at(0, 0) == 0.0);
    CHECK(f0.at(0, 1) == 0.0);

    auto c = CoefficientPathSet::zeros(2, {0.5});
    c.ref(0, 0, 0) = std::complex<double>(2.5, 0.0);
    const FieldSample fc = evaluate_field(c, grid);
    const double expect = 2.5 / std::sqrt(4.0 * kPi);
    CHECK(fc.at(0, 0) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(fc.at(0, 1) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("evaluate_field is linear in the coefficients") {
    const FieldGrid grid = FieldGrid::of_points(
        {SphericalPoint(1.1, 0.4), SphericalPoint(0.4, 3.0), SphericalPoint(2.6, 5.9)});
    const auto a = random_coeffs(6, {0.2, 0.8}, 1);
    const auto b = random_coeffs(6, {0.2, 0.8}, 2);
    CoefficientPathSet combo = a;
    for (std::size_t i = 0; i < combo.data.size(); ++i)
        combo.data[i] = 0.7 * a.data[i] - 1.3 * b.data[i];
    const auto fa = evaluate_field(a, grid);
    const auto fb = evaluate_field(b, grid);
    const auto fc = evaluate_field(combo, grid);
    for (std::size_t ti = 0; ti < 2; ++ti)
        for (std::size_t p = 0; p < 3; ++p)
            CHECK(fc.at(ti, p) ==
                  doctest::Approx(0.7 * fa.at(ti, p) - 1.3 * fb.at(ti, p)).epsilon(1e-10));
}

TEST_CASE("imaginary residue tripwire") {
    auto c = CoefficientPathSet::zeros(2, {0.5});
    c.ref(1, 0, 0) = std::complex<double>(0.0, 1.0); // m = 0 must be real
    const FieldGrid grid = FieldGrid::of_points({SphericalPoint(0.7, 0.2)});
    CHECK_THROWS_AS(evaluate_field(c, grid), symmetry_error);
}

TEST_CASE("laplace_beltrami spectral multipliers") {
    auto c = random_coeffs(3, {0.1}, 3);
    const auto lap = laplace_beltrami(c);
    CHECK(lap.at(0, 0, 0).real() == 0.0);
    CHECK(lap.at(1, 1, 0) == std::complex<double>(-2.0, 0.0) * c.at(1, 1, 0));
    const auto lap2 = laplace_beltrami(lap);
    for (int l = 0; l <= 3; ++l) {
        const double mult = static_cast<double>(l) * l * (l + 1.0) * (l + 1.0);
        CHECK(std::abs(lap2.at(l, l, 0) - mult * c.at(l, l, 0)) < 1e-12 * (1.0 + mult));
    }
}

TEST_CASE("fractional smoothing multipliers and inverse") {
    auto c = random_coeffs(4, {0.1}, 4);
    const auto id = fractional_smoothing(c, 0.0);
    for (std::size_t i = 0; i < c.data.size(); ++i) CHECK(id.data[i] == c.data[i]);

    const auto k2 = fractional_smoothing(c, 2.0);
    CHECK(k2.at(1, 0, 0).real() == doctest::Approx(3.0 * c.at(1, 0, 0).real()).epsilon(1e-14));

    const auto round_trip = fractional_smoothing(fractional_smoothing(c, -2.0), 2.0);
    for (std::size_t i = 0; i < c.data.size(); ++i)
        CHECK(std::abs(round_trip.data[i] - c.data[i]) < 1e-12);
}

TEST_CASE("laplace_beltrami matches a finite-difference surface laplacian") {
    const auto c = random_coeffs(6, {0.1}, 9);
    const auto lap = laplace_beltrami(c);
    const double h = 1e-3;
    for (const SphericalPoint center : {SphericalPoint(1.0, 0.7), SphericalPoint(2.0, 3.9)}) {
        const double th = center.colatitude, ph = center.longitude;
        const FieldGrid stencil = FieldGrid::of_points(
            {center, SphericalPoint(th + h, ph), SphericalPoint(th - h, ph),
             SphericalPoint(th, ph + h), SphericalPoint(th, ph - h)});
        const auto f = evaluate_field(c, stencil);
        const auto g = evaluate_field(lap, stencil);
        const double d_theta2 = (f.at(0, 1) + f.at(0, 2) - 2.0 * f.at(0, 0)) / (h * h);
        const double d_theta = (f.at(0, 1) - f.at(0, 2)) / (2.0 * h);
        const double d_phi2 = (f.at(0, 3) + f.at(0, 4) - 2.0 * f.at(0, 0)) / (h * h);
        const double fd = d_theta2 + d_theta / std::tan(th) + d_phi2 / (std::sin(th) * std::sin(th));
        CHECK(fd == doctest::Approx(g.at(0, 0)).epsilon(2e-3));
    }
}

TEST_CASE("field variance matches the analytic mode sum (monte carlo)") {
    QuadratureConfig quad;
    ModelParams p = base_params(8);
    const TimeGrid grid({1.0}, 1.0);
    const int reps = 10000;
    const auto modes = mode_covariances(p, 1.0, 1.0, quad);
    double target = 0.0;
    for (int l = 0; l <= p.truncation; ++l) target += (2.0 * l + 1.0) / (4.0 * kPi) * modes[l];

    const FieldGrid fg =
        FieldGrid::of_points({SphericalPoint(0.8, 0.3), SphericalPoint(1.9, 2.5)});
    std::vector<double> acc(2, 0.0);
    const auto sets = sampler::sample_coefficient_paths(p, grid, 77, reps, quad, 2);
    for (const auto& s : sets) {
        const auto f = evaluate_field(s, fg);
        acc[0] += f.at(0, 0) * f.at(0, 0);
        acc[1] += f.at(0, 1) * f.at(0, 1);
    }
    for (double& a : acc) a /= reps;
    CHECK(std::abs(acc[0] - target) / target < 0.05);
    CHECK(std::abs(acc[1] - target) / target < 0.05);
}

TEST_CASE("field covariance is rotation invariant") {
    QuadratureConfig quad;
    ModelParams p = base_params(24);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 5; ++i) {
        const SphericalPoint x(std::acos(2 * u(rng) - 1), 2 * kPi * u(rng));
        const SphericalPoint y(std::acos(2 * u(rng) - 1), 2 * kPi * u(rng));
        const Rotation g = Rotation::random(rng);
        const double direct = field_covariance(p, 0.7, 0.4, x, y, quad);
        const double rotated = field_covariance(p, 0.7, 0.4, g.apply(x), g.apply(y), quad);
        CHECK(std::abs(direct - rotated) < 1e-10 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("mode variances saturate to the stationary plateau") {
    QuadratureConfig quad;
    ModelParams p = base_params(6);
    p.horizon = 20.0;
    const auto m10 = mode_covariances(p, 10.0, 10.0, quad);
    const auto conv = p.convention();
    for (int l = 1; l <= 6; ++l) {
        const double b = static_cast<double>(l) * (l + 1.0);
        const double plateau = sampler::power_coefficient(p, l) * conv.hurst *
                               std::tgamma(2.0 * conv.hurst) * std::pow(b, -2.0 * conv.hurst);
        CHECK(m10[l] == doctest::Approx(plateau).epsilon(1e-8));
    }
}

TEST_CASE("noise covariance: product form and preconditions") {
    ModelParams p = base_params(16);
    p.alpha = 3.0;
    const SphericalPoint x(1.0, 0.5), y(1.3, 0.9);
    CHECK(noise_covariance(p, 0.7, 0.0, x, y) == 0.0);

    const double v11 = noise_covariance(p, 1.0, 1.0, x, y);
    const double vts = noise_covariance(p, 0.8, 0.3, x, y);
    const double r = fbm::r_cov(0.8, 0.3, p.convention());
    CHECK(vts / v11 == doctest::Approx(r / 1.0).epsilon(1e-12));

    ModelParams bad = base_params(16);
    bad.alpha = 2.0;
    CHECK_THROWS_AS(noise_covariance(bad, 1.0, 1.0, x, y), std::domain_error);
}

TEST_CASE("sampled noise matches the analytic noise covariance (monte carlo)") {
    QuadratureConfig quad;
    ModelParams p = base_params(16);
    p.alpha = 3.0;
    const SphericalPoint x(kPi / 2, 0.0), y(kPi / 2, 0.35);
    const double target = noise_covariance(p, 1.0, 1.0, x, y);
    const TimeGrid grid({1.0}, 1.0);
    const FieldGrid fg = FieldGrid::of_points({x, y});
    const int reps = 10000;
    double acc = 0.0;
    for (int r = 0; r < reps; ++r) {
        const auto set = sampler::sample_noise_coefficients(p, grid, 99, r);
        const auto f = evaluate_field(set, fg);
        acc += f.at(0, 0) * f.at(0, 1);
    }
    acc /= reps;
    CHECK(std::abs(acc - target) / std::abs(target) < 0.05);
}

TEST_CASE("empirical isotropy: equal distances give equal covariances") {
    QuadratureConfig quad;
    ModelParams p = base_params(8);
    const TimeGrid grid({1.0}, 1.0);
    // two pairs separated by the same angle at different orientations
    const SphericalPoint a1(kPi / 2, 0.0), a2(kPi / 2, 0.4);
    const SphericalPoint b1(0.3, 1.0), b2(0.7, 1.0);
    CHECK(harmonics::geodesic_distance(a1, a2) ==
          doctest::Approx(harmonics::geodesic_distance(b1, b2)).epsilon(1e-12));
    const FieldGrid fg = FieldGrid::of_points({a1, a2, b1, b2});
    const int reps = 20000;
    double c_a = 0.0, c_b = 0.0, v2_a = 0.0, v2_b = 0.0;
    const auto sets = sampler::sample_coefficient_paths(p, grid, 123, reps, quad, 2);
    for (const auto& s : sets) {
        const auto f = evaluate_field(s, fg);
        const double pa = f.at(0, 0) * f.at(0, 1), pb = f.at(0, 2) * f.at(0, 3);
        c_a += pa;
        c_b += pb;
        v2_a += pa * pa;
        v2_b += pb * pb;
    }
    c_a /= reps;
    c_b /= reps;
    const double se = std::sqrt((v2_a / reps - c_a * c_a) / reps + (v2_b / reps - c_b * c_b) / reps);
    CHECK(std::abs(c_a - c_b) < 3.0 * se);
}
